"""Version from the installed distribution metadata (written by hatch-vcs)."""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

__all__ = ["__version__"]

try:
    __version__ = version("cbcimpute")
except PackageNotFoundError:  # pragma: no cover
    # running from a source tree that was never installed
    __version__ = "0.0.0.dev0"
