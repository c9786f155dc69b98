"""\
Attribute descriptors and the dataset schema.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Literal, get_args

import numpy as np

from .._settings import settings
from .errors import SchemaError

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from typing import Any

AttributeKind = Literal["numeric", "categorical"]


def _default_missing_tokens() -> frozenset[str]:
    return frozenset(settings.missing_tokens)


@dataclass(frozen=True)
class AttributeDescriptor:
    """\
    One feature column.

    Categorical levels are encoded as their 1-based position in `levels`.
    `levels=None` on a categorical column means the levels are derived from
    the data at encoding time (sorted lexicographically).

    >>> z1 = AttributeDescriptor("Z1", "categorical", ("K11", "K12", "K13"))
    >>> z1.encode("K13")
    3.0
    >>> z1.decode(2)
    'K12'
    """

    name: str
    kind: AttributeKind = "numeric"
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in get_args(AttributeKind):
            msg = f"Attribute {self.name!r} has unknown kind {self.kind!r}, expected one of {get_args(AttributeKind)}."
            raise SchemaError(msg)
        if self.levels is None:
            return
        if self.kind == "numeric":
            msg = f"Numeric attribute {self.name!r} cannot declare levels."
            raise SchemaError(msg)
        levels = tuple(str(level) for level in self.levels)
        if dupes := [level for level, n in Counter(levels).items() if n > 1]:
            msg = f"Attribute {self.name!r} has duplicated levels: {dupes}."
            raise SchemaError(msg)
        object.__setattr__(self, "levels", levels)

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    @property
    def n_levels(self) -> int:
        return 0 if self.levels is None else len(self.levels)

    def with_levels(self, levels: Iterable[str]) -> AttributeDescriptor:
        return replace(self, levels=tuple(levels))

    def encode(self, value: Any) -> float:
        """Encoded (numeric) representation of a present raw value."""
        if not self.is_categorical:
            return float(value)
        if self.levels is None:
            msg = f"Levels of {self.name!r} are not resolved yet."
            raise SchemaError(msg)
        try:
            return float(self.levels.index(str(value)) + 1)
        except ValueError:
            msg = f"Value {value!r} is not a declared level of {self.name!r} {list(self.levels)}."
            raise SchemaError(msg) from None

    def decode(self, v: float) -> str | float:
        """Inverse of :meth:`encode`; categorical indices are rounded first."""
        if not self.is_categorical:
            return v
        idx = int(np.rint(v))
        if not 1 <= idx <= self.n_levels:
            msg = f"Index {v!r} is out of range for {self.name!r} with {self.n_levels} levels."
            raise SchemaError(msg)
        return self.levels[idx - 1]

    def to_dict(self) -> dict[str, Any] | str:
        if not self.is_categorical:
            return self.name
        d = {"name": self.name, "kind": self.kind}
        if self.levels is not None:
            d["levels"] = list(self.levels)
        return d


@dataclass(frozen=True)
class Schema:
    """\
    Ordered attribute descriptors plus the class column and missing tokens.

    The class attribute is never a feature, and neither is the optional
    `id_attribute` that names records.
    """

    attributes: tuple[AttributeDescriptor, ...]
    class_attribute: str
    missing_tokens: frozenset[str] = field(default_factory=_default_missing_tokens)
    id_attribute: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "missing_tokens", frozenset(self.missing_tokens))
        if len(self.attributes) == 0:
            msg = "A schema needs at least one attribute."
            raise SchemaError(msg)
        names = self.names
        if dupes := [n for n, c in Counter(names).items() if c > 1]:
            msg = f"Attribute names are not unique: {dupes}."
            raise SchemaError(msg)
        if self.class_attribute in names:
            msg = f"Class attribute {self.class_attribute!r} cannot also be a feature."
            raise SchemaError(msg)
        if self.id_attribute is not None and (
            self.id_attribute in names or self.id_attribute == self.class_attribute
        ):
            msg = f"Id attribute {self.id_attribute!r} clashes with another column."
            raise SchemaError(msg)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def categorical_mask(self) -> np.ndarray:
        return np.array([a.is_categorical for a in self.attributes], dtype=bool)

    @property
    def columns(self) -> list[str]:
        """All columns a table for this schema must have."""
        id_col = [] if self.id_attribute is None else [self.id_attribute]
        return [*id_col, *self.names, self.class_attribute]

    def __getitem__(self, key: str | int) -> AttributeDescriptor:
        if isinstance(key, str):
            return self.attributes[self.index(key)]
        return self.attributes[key]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            msg = f"{name!r} is not an attribute of this schema."
            raise KeyError(msg) from None

    def is_missing(self, text: str) -> bool:
        return text in self.missing_tokens

    def replace_attributes(
        self, attributes: Iterable[AttributeDescriptor]
    ) -> Schema:
        return replace(self, attributes=tuple(attributes))

    @classmethod
    def from_header(
        cls,
        header: Sequence[str],
        *,
        class_attribute: str,
        id_attribute: str | None = None,
        categorical: Mapping[str, Sequence[str] | None] | Iterable[str] = (),
        missing_tokens: Iterable[str] | None = None,
    ) -> Schema:
        """\
        Build a schema from a table header.

        Every column other than the class and id columns becomes an attribute,
        numeric unless named in `categorical`.
        """
        if class_attribute not in header:
            msg = f"Class attribute {class_attribute!r} is not in the header {list(header)}."
            raise SchemaError(msg)
        if not isinstance(categorical, dict):
            categorical = dict.fromkeys(categorical)
        skip = {class_attribute, id_attribute}
        if unknown := set(categorical) - set(header):
            msg = f"Categorical columns {sorted(unknown)} are not in the header."
            raise SchemaError(msg)
        attributes = [
            AttributeDescriptor(name, "categorical", categorical[name])
            if name in categorical
            else AttributeDescriptor(name)
            for name in header
            if name not in skip
        ]
        kw = {} if missing_tokens is None else {"missing_tokens": missing_tokens}
        return cls(
            attributes,
            class_attribute=class_attribute,
            id_attribute=id_attribute,
            **kw,
        )

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Schema:
        """Parse the sidecar mapping, see :func:`~cbcimpute.io.read_schema`."""
        if unknown := set(d) - {
            "class_attribute",
            "id_attribute",
            "missing_tokens",
            "attributes",
        }:
            msg = f"Unknown schema keys: {sorted(unknown)}."
            raise SchemaError(msg)
        if "class_attribute" not in d or "attributes" not in d:
            msg = "Schema needs `class_attribute` and `attributes` entries."
            raise SchemaError(msg)
        attributes = []
        for entry in d["attributes"]:
            if isinstance(entry, str):
                attributes.append(AttributeDescriptor(entry))
            elif isinstance(entry, dict):
                levels = entry.get("levels")
                attributes.append(
                    AttributeDescriptor(
                        str(entry["name"]),
                        entry.get("kind", "categorical" if levels else "numeric"),
                        None if levels is None else tuple(map(str, levels)),
                    )
                )
            else:
                msg = f"Cannot interpret attribute entry {entry!r}."
                raise SchemaError(msg)
        kw = {}
        if (tokens := d.get("missing_tokens")) is not None:
            kw["missing_tokens"] = ["" if t is None else str(t) for t in tokens]
        return cls(
            attributes,
            class_attribute=str(d["class_attribute"]),
            id_attribute=d.get("id_attribute"),
            **kw,
        )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"class_attribute": self.class_attribute}
        if self.id_attribute is not None:
            d["id_attribute"] = self.id_attribute
        d["missing_tokens"] = sorted(self.missing_tokens)
        d["attributes"] = [a.to_dict() for a in self.attributes]
        return d
