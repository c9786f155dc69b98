from __future__ import annotations

import os
import textwrap
import warnings
from collections.abc import Iterable
from contextlib import contextmanager
from dataclasses import dataclass, field, fields
from typing import TYPE_CHECKING, Generic, NamedTuple, TypeVar

if TYPE_CHECKING:
    from collections.abc import Callable, Generator, Sequence
    from typing import Any

T = TypeVar("T")

ENV_PREFIX = "CBCIMPUTE_"


class RegisteredOption(NamedTuple, Generic[T]):
    option: str
    default_value: T
    description: str
    validate: Callable[[T], None]
    type: object

    def describe(self) -> str:
        type_str = getattr(self.type, "__name__", str(self.type))
        doc = f"""\
        {self.option}: `{type_str}`
            {self.description} (default: `{self.default_value!r}`).
        """
        return textwrap.dedent(doc)


def check_and_get_environ_var(
    key: str,
    default_value: str,
    allowed_values: Sequence[str] | None = None,
    cast: Callable[[str], T] = lambda x: x,
) -> T:
    """\
    Read `key` from the environment and convert it with `cast`.

    Values outside `allowed_values` fall back to `default_value` with a warning.
    """
    value = os.environ.get(key, default_value)
    if allowed_values is not None and value not in allowed_values:
        msg = (
            f"Value {value!r} is not in allowed {allowed_values} for environment variable {key}. "
            f"Default {default_value} will be used."
        )
        warnings.warn(msg)
        value = default_value
    return cast(value)


def check_and_get_bool(option: str, default_value: bool) -> bool:
    return check_and_get_environ_var(
        f"{ENV_PREFIX}{option.upper()}",
        str(int(default_value)),
        ["0", "1"],
        lambda x: bool(int(x)),
    )


def check_and_get_int(option: str, default_value: int) -> int:
    key = f"{ENV_PREFIX}{option.upper()}"
    raw = check_and_get_environ_var(key, str(default_value))
    try:
        return int(raw)
    except ValueError:
        msg = f"Environment variable {key}={raw!r} is not an integer. Default {default_value} will be used."
        warnings.warn(msg)
        return default_value


def check_and_get_tokens(option: str, default_value: tuple[str, ...]) -> tuple[str, ...]:
    """Comma separated list, e.g. `CBCIMPUTE_MISSING_TOKENS='?,,NA'`."""
    key = f"{ENV_PREFIX}{option.upper()}"
    if key not in os.environ:
        return default_value
    return tuple(os.environ[key].split(","))


_docstring = """
This manager allows users to customize settings for the cbcimpute package.

The following options are available:

{options_description}

For setting an option please use :func:`~cbcimpute.settings.override` (local) or set the above attributes directly (global) i.e., `cbcimpute.settings.max_iter = 50`.
For assignment by environment variable, use the variable name in all caps with `CBCIMPUTE_` as the prefix before import of :mod:`cbcimpute`.
For boolean environment variable setting, use 1 for `True` and 0 for `False`.
"""


@dataclass
class SettingsManager:
    _registered_options: dict[str, RegisteredOption] = field(default_factory=dict)
    _config: dict[str, object] = field(default_factory=dict)
    __doc_tmpl__: str = _docstring

    def describe(
        self,
        option: str | Iterable[str] | None = None,
        *,
        should_print_description: bool = True,
    ) -> str:
        """\
        Description of one, several or (with `None`) all options.

        Printed unless `should_print_description` is false.
        """
        if option is None:
            option = self._registered_options.keys()
        if isinstance(option, Iterable) and not isinstance(option, str):
            doc = "\n".join(
                self.describe(k, should_print_description=False) for k in option
            )
        else:
            doc = self._registered_options[option].describe().rstrip("\n")
        if should_print_description:
            print(doc)
        return doc

    def register(
        self,
        option: str,
        default_value: T,
        description: str,
        validate: Callable[[T], None],
        option_type: object | None = None,
        get_from_env: Callable[[str, T], T] = lambda x, y: y,
    ) -> None:
        """\
        Add an option with its default, validator and description.

        Parameters
        ----------
        option
            Attribute name on :data:`~cbcimpute.settings`.
        default_value
            Value used when neither the environment nor the user sets one.
        description
            Line shown in :meth:`describe` and the settings docstring.
        validate
            Raises `ValueError` or `TypeError` for invalid values.
        option_type
            Type shown in the description, `type(default_value)` if omitted.
        get_from_env
            Called with the option name and default, returns the value of
            `CBCIMPUTE_<OPTION>` if set. Invalid environment values are
            ignored with a warning.
        """
        try:
            validate(default_value)
        except (ValueError, TypeError) as e:
            e.add_note(f"for option {option!r}")
            raise e
        option_type = type(default_value) if option_type is None else option_type
        self._registered_options[option] = RegisteredOption(
            option, default_value, description, validate, option_type
        )
        value = get_from_env(option, default_value)
        try:
            validate(value)
        except (ValueError, TypeError) as e:
            warnings.warn(f"Ignoring environment value for {option!r}: {e}")
            value = default_value
        self._config[option] = value

    def __setattr__(self, option: str, val: object) -> None:
        if option in {f.name for f in fields(self)}:
            return super().__setattr__(option, val)
        elif option not in self._registered_options:
            msg = f"{option} is not an available option for cbcimpute."
            raise AttributeError(msg)
        self._registered_options[option].validate(val)
        self._config[option] = val

    def __getattr__(self, option: str) -> object:
        if option in self._config:
            return self._config[option]
        msg = f"{option} not found."
        raise AttributeError(msg)

    def __dir__(self) -> Iterable[str]:
        return sorted((*dir(super()), *self._config.keys()))

    def reset(self, option: Iterable[str] | str) -> None:
        """Restore the default of one or several options."""
        if isinstance(option, Iterable) and not isinstance(option, str):
            for opt in option:
                self.reset(opt)
        else:
            self._config[option] = self._registered_options[option].default_value

    def as_dict(self) -> dict[str, Any]:
        return dict(self._config)

    @contextmanager
    def override(self, **overrides) -> Generator[None, None, None]:
        """\
        Set options for the duration of a `with` block.

        >>> from cbcimpute import settings
        >>> with settings.override(max_iter=5):
        ...     settings.max_iter
        5
        """
        restore = {a: getattr(self, a) for a in overrides}
        try:
            for attr, value in overrides.items():
                setattr(self, attr, value)
            yield None
        finally:
            for attr, value in restore.items():
                setattr(self, attr, value)

    def __repr__(self) -> str:
        params = "".join(f"\t{k}={v!r},\n" for k, v in self._config.items())
        return f"{type(self).__name__}(\n{params}\n)"

    @property
    def __doc__(self):
        return self.__doc_tmpl__.format(
            options_description=self.describe(should_print_description=False),
        )


settings = SettingsManager()

##################################################################################
# PLACE REGISTERED SETTINGS HERE SO THEY CAN BE PICKED UP FOR DOCSTRING CREATION #
##################################################################################


def validate_bool(val: Any) -> None:
    if not isinstance(val, bool):
        msg = f"{val} not valid boolean"
        raise TypeError(msg)


def validate_positive_int(val: Any) -> None:
    if isinstance(val, bool) or not isinstance(val, int):
        msg = f"{val!r} is not an integer"
        raise TypeError(msg)
    if val < 1:
        msg = f"{val!r} is not a positive integer"
        raise ValueError(msg)


def validate_tokens(val: Any) -> None:
    if not isinstance(val, tuple) or not all(isinstance(t, str) for t in val):
        msg = f"{val!r} is not a tuple of strings"
        raise TypeError(msg)


settings.register(
    "max_iter",
    default_value=100,
    description="Maximum number of Lloyd iterations in :func:`~cbcimpute.kmeans`.",
    validate=validate_positive_int,
    get_from_env=check_and_get_int,
)

settings.register(
    "report_precision",
    default_value=6,
    description="Number of decimals used for numeric cells in reports and traces.",
    validate=validate_positive_int,
    get_from_env=check_and_get_int,
)

settings.register(
    "report_timestamps",
    default_value=False,
    description="Whether or not to stamp reports with the UTC time they were written.",
    validate=validate_bool,
    get_from_env=check_and_get_bool,
)

settings.register(
    "missing_tokens",
    default_value=("?", ""),
    description="Cell texts read as missing when a schema does not declare its own tokens.",
    validate=validate_tokens,
    option_type=tuple[str, ...],
    get_from_env=check_and_get_tokens,
)

##################################################################################
##################################################################################
