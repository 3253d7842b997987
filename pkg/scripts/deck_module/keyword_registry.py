"""Keyword schemas and the registry that resolves deck keywords to them.

A schema document is JSON with a ``keywords`` list. Every keyword entry names the
keyword, the sections it may appear in (anywhere when omitted), its record count and
its item descriptors:

    {"name": "DIMENS", "sections": ["RUNSPEC"], "size": 1,
     "items": [{"name": "NX", "type": "int"}, ...]}

``size`` is a record count, ``"list"`` (records until an empty ``/``) or ``"line"``
(the next line is one free-text item). A ``repeat`` item must come last and takes every
remaining value of its record; its ``dimension`` may be a list cycled over the values.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from numerics_module.errors import KeywordSchemaError
from reservoir_module.units import FIELD

logger = logging.getLogger(__name__)

BUNDLED_SCHEMA_DIR = Path(__file__).parent / "keywords"
ITEM_TYPES = ("int", "real", "string")
KEYWORD_NAME = re.compile(r"^[A-Z][A-Z0-9_]{0,7}$")


@dataclass(frozen=True)
class ItemSchema:
    name: str
    type: str
    default: Any = None
    dimension: str | tuple[str, ...] | None = None
    repeat: bool = False

    def dimension_at(self, position: int) -> str | None:
        """Dimension of the ``position``-th value of a repeated item."""
        if isinstance(self.dimension, tuple):
            return self.dimension[position % len(self.dimension)]
        return self.dimension


@dataclass(frozen=True)
class KeywordSchema:
    name: str
    size: int | str
    sections: tuple[str, ...] = ()
    items: tuple[ItemSchema, ...] = field(default_factory=tuple)

    def allowed_in(self, section: str | None) -> bool:
        return not self.sections or section in self.sections


def _item_from_dict(keyword: str, spec: dict[str, Any], last: bool) -> ItemSchema:
    if not isinstance(spec, dict) or "name" not in spec or "type" not in spec:
        raise KeywordSchemaError(f"{keyword}: every item needs a name and a type")
    if spec["type"] not in ITEM_TYPES:
        raise KeywordSchemaError(f"{keyword}.{spec['name']}: unknown item type '{spec['type']}'")
    repeat = bool(spec.get("repeat", False))
    if repeat and not last:
        raise KeywordSchemaError(f"{keyword}.{spec['name']}: only the last item may repeat")

    dimension = spec.get("dimension")
    if isinstance(dimension, list):
        dimension = tuple(dimension)
    for dim in dimension if isinstance(dimension, tuple) else (dimension,):
        if dim not in (None, "1") and dim not in FIELD.factors:
            raise KeywordSchemaError(f"{keyword}.{spec['name']}: unknown dimension '{dim}'")
    if dimension is not None and spec["type"] != "real":
        raise KeywordSchemaError(f"{keyword}.{spec['name']}: only real items carry a dimension")

    default = spec.get("default")
    expected = {"int": int, "real": (int, float), "string": str}[spec["type"]]
    if default is not None and (not isinstance(default, expected) or isinstance(default, bool)):
        raise KeywordSchemaError(f"{keyword}.{spec['name']}: default {default!r} is not of type {spec['type']}")
    if default is not None and spec["type"] == "real":
        default = float(default)
    return ItemSchema(spec["name"], spec["type"], default, dimension, repeat)


def keyword_from_dict(spec: dict[str, Any]) -> KeywordSchema:
    """Validate one keyword entry of a schema document.

    Raises:
        KeywordSchemaError: missing or malformed fields
    """
    name = spec.get("name") if isinstance(spec, dict) else None
    if not isinstance(name, str) or not KEYWORD_NAME.match(name):
        raise KeywordSchemaError(f"invalid keyword name {name!r}")
    size = spec.get("size", 0)
    if not (isinstance(size, int) and not isinstance(size, bool) and size >= 0) and size not in ("list", "line"):
        raise KeywordSchemaError(f"{name}: size must be a record count, 'list' or 'line'")
    items = spec.get("items", [])
    if size != 0 and not items:
        raise KeywordSchemaError(f"{name}: keywords with records need items")
    if size == 0 and items:
        raise KeywordSchemaError(f"{name}: keywords without records cannot have items")
    parsed = tuple(_item_from_dict(name, item, i == len(items) - 1) for i, item in enumerate(items))
    return KeywordSchema(name, size, tuple(spec.get("sections", ())), parsed)


class KeywordRegistry:
    """Keyword name → schema."""

    def __init__(self, schemas: list[KeywordSchema] | None = None):
        self._schemas: dict[str, KeywordSchema] = {}
        for schema in schemas or []:
            self.register(schema)

    def register(self, schema: KeywordSchema):
        if schema.name in self._schemas:
            raise KeywordSchemaError(f"keyword {schema.name} registered twice")
        self._schemas[schema.name] = schema

    def __contains__(self, name: str) -> bool:
        return name in self._schemas

    def __getitem__(self, name: str) -> KeywordSchema:
        return self._schemas[name]

    def __len__(self) -> int:
        return len(self._schemas)

    def names(self) -> list[str]:
        return sorted(self._schemas)

    def load_document(self, document: dict[str, Any], origin: str = "<schema>"):
        """Register every keyword of one schema document."""
        if not isinstance(document, dict) or not isinstance(document.get("keywords"), list):
            raise KeywordSchemaError(f"{origin}: schema document needs a 'keywords' list")
        for spec in document["keywords"]:
            try:
                self.register(keyword_from_dict(spec))
            except KeywordSchemaError as error:
                raise KeywordSchemaError(f"{origin}: {error}") from None


def schema_registry_load(specs: list[dict[str, Any]] | list[Path] | None = None) -> KeywordRegistry:
    """Build a registry from schema documents or schema files.

    Args:
        specs: Parsed documents or paths to JSON files; the bundled schemas when omitted

    Raises:
        KeywordSchemaError: duplicate keyword name or malformed schema
    """
    if specs is None:
        specs = sorted(BUNDLED_SCHEMA_DIR.glob("*.json"))
    registry = KeywordRegistry()
    for spec in specs:
        if isinstance(spec, (str, Path)):
            path = Path(spec)
            try:
                document = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as error:
                raise KeywordSchemaError(f"{path}: invalid JSON: {error}") from None
            registry.load_document(document, str(path))
        else:
            registry.load_document(spec)
    logger.debug("keyword registry holds %d keywords", len(registry))
    return registry
