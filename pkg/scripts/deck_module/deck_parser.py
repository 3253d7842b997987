"""Stage 1 of deck parsing: text to a container of typed keyword records.

Comments are stripped, INCLUDE files are spliced in, repeat counts (``n*v``) and
default markers (``n*``) are expanded, and every item is coerced to the type its
schema declares. Real values stay in deck units here; conversion to SI happens once,
in stage 2. Every failure is a ``DeckError`` located at ``file:line``.
"""

import logging
import re
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from numerics_module.errors import DeckError

from .keyword_registry import ItemSchema, KeywordRegistry, KeywordSchema, schema_registry_load

logger = logging.getLogger(__name__)

SECTIONS = ("RUNSPEC", "GRID", "EDIT", "PROPS", "REGIONS", "SOLUTION", "SUMMARY", "SCHEDULE")
TOKEN = re.compile(r"'[^']*'|\"[^\"]*\"|/|[^\s/]+")
REPEAT = re.compile(r"^(\d+)\*(.*)$")
MAX_REPEAT = 10_000_000


@dataclass(frozen=True)
class Token:
    text: str
    path: str
    line: int
    line_start: bool

    @property
    def quoted(self) -> bool:
        return len(self.text) >= 2 and self.text[0] == self.text[-1] and self.text[0] in "'\""


@dataclass
class DeckItem:
    """One schema item of a record; repeated items hold many values."""

    name: str
    type: str
    values: list[Any]
    defaulted: list[bool]
    dimension: Any = field(default=None, compare=False)

    @property
    def value(self) -> Any:
        return self.values[0] if self.values else None

    @property
    def is_defaulted(self) -> bool:
        return all(self.defaulted)


@dataclass
class DeckRecord:
    items: list[DeckItem]

    def __getitem__(self, name: str) -> DeckItem:
        for item in self.items:
            if item.name == name:
                return item
        raise KeyError(name)

    def get(self, name: str) -> Any:
        """Single value of a plain item, or the value list of a repeated item."""
        item = self[name]
        return item.values if len(item.values) != 1 else item.value


@dataclass
class DeckKeyword:
    name: str
    records: list[DeckRecord]
    path: str | None = field(default=None, compare=False)
    line: int | None = field(default=None, compare=False)
    size: Any = field(default=0, compare=False)

    def error(self, message: str) -> DeckError:
        return DeckError(f"{self.name}: {message}", self.path, self.line)


@dataclass
class Deck:
    """Ordered keywords of a deck, INCLUDE files already spliced in."""

    keywords: list[DeckKeyword]
    path: str | None = field(default=None, compare=False)

    def __iter__(self) -> Iterator[DeckKeyword]:
        return iter(self.keywords)

    def __len__(self) -> int:
        return len(self.keywords)

    def __contains__(self, name: str) -> bool:
        return any(kw.name == name for kw in self.keywords)

    def all(self, name: str) -> list[DeckKeyword]:
        return [kw for kw in self.keywords if kw.name == name]

    def get(self, name: str) -> DeckKeyword | None:
        """Last occurrence of a keyword."""
        found = self.all(name)
        return found[-1] if found else None

    def to_text(self) -> str:
        """Pretty-print the deck; parsing the text gives back an identical deck."""
        lines = []
        for kw in self.keywords:
            lines.append(kw.name)
            if kw.size == "line":
                lines.append(str(kw.records[0].items[0].value))
            else:
                for record in kw.records:
                    fields = [_format(item.type, v, d) for item in record.items for v, d in zip(item.values, item.defaulted)]
                    lines.append("  " + " ".join(fields + ["/"]))
                if kw.size == "list":
                    lines.append("/")
            lines.append("")
        return "\n".join(lines)


def _format(kind: str, value: Any, defaulted: bool) -> str:
    if defaulted:
        return "1*"
    if kind == "string":
        return f"'{value}'"
    if kind == "real":
        return repr(float(value))
    return str(value)


def strip_comment(line: str) -> str:
    """Drop a ``--`` comment that is not inside quotes."""
    quote = None
    for i, char in enumerate(line):
        if quote:
            if char == quote:
                quote = None
        elif char in "'\"":
            quote = char
        elif line.startswith("--", i):
            return line[:i]
    return line


class DeckParser:
    """Parses deck text against a keyword registry."""

    def __init__(
        self,
        registry: KeywordRegistry | None = None,
        lenient: bool = False,
        include_resolver: Callable[[Path], str] | None = None,
    ):
        """Initialize the parser.

        Args:
            registry: Keyword schemas; the bundled ones when omitted
            lenient: Skip unknown keywords with a warning instead of failing
            include_resolver: Returns the text of an INCLUDE target; reads files when omitted
        """
        self.registry = registry if registry is not None else schema_registry_load()
        self.lenient = lenient
        self.include_resolver = include_resolver or _read_file
        self._section: str | None = None
        self._ended = False

    def parse_file(self, path: str | Path) -> Deck:
        path = Path(path)
        if not path.is_file():
            raise DeckError("deck file not found", str(path))
        resolved = path.resolve()
        try:
            text = self.include_resolver(resolved)
        except OSError as error:
            raise DeckError(f"cannot read deck file ({error.strerror or error})", str(path)) from None
        return self._start(text, str(path), resolved.parent, {resolved})

    def parse_string(self, text: str, path: str = "<string>", base_dir: str | Path | None = None) -> Deck:
        return self._start(text, path, Path(base_dir or "."), set())

    def _start(self, text: str, path: str, base_dir: Path, stack: set[Path]) -> Deck:
        self._section = None
        self._ended = False
        return Deck(self._parse(text, path, base_dir, stack), path)

    def _tokens(self, lines: list[str], path: str) -> list[Token]:
        tokens = []
        for number, line in enumerate(lines, start=1):
            for position, match in enumerate(TOKEN.finditer(line)):
                tokens.append(Token(match.group(), path, number, position == 0))
        return tokens

    def _parse(self, text: str, path: str, base_dir: Path, stack: set[Path]) -> list[DeckKeyword]:
        lines = [strip_comment(line) for line in text.splitlines()]
        tokens = self._tokens(lines, path)
        keywords: list[DeckKeyword] = []
        pos = 0
        while pos < len(tokens) and not self._ended:
            token = tokens[pos]
            if token.text not in self.registry:
                if not self.lenient:
                    what = "unexpected '/'" if token.text == "/" else f"unknown keyword '{token.text}'"
                    raise DeckError(what, path, token.line)
                logger.warning("%s:%d: skipping unknown keyword '%s'", path, token.line, token.text)
                pos += 1
                while pos < len(tokens) and not (tokens[pos].line_start and tokens[pos].text in self.registry):
                    pos += 1
                continue

            schema = self.registry[token.text]
            if not schema.allowed_in(self._section):
                raise DeckError(
                    f"keyword {schema.name} is not allowed in section {self._section or '(none)'}", path, token.line
                )
            if schema.name in SECTIONS:
                self._section = schema.name
            records, pos = self._read_records(schema, tokens, pos + 1, lines, token)
            keyword = DeckKeyword(schema.name, records, path, token.line, schema.size)

            if schema.name == "INCLUDE":
                keywords.extend(self._include(keyword, base_dir, stack))
                continue
            keywords.append(keyword)
            if schema.name == "END":
                self._ended = True
        return keywords

    def _include(self, keyword: DeckKeyword, base_dir: Path, stack: set[Path]) -> list[DeckKeyword]:
        name = keyword.records[0]["FILE"].value
        if not name:
            raise keyword.error("missing file name")
        target = (base_dir / name).resolve()
        if target in stack:
            raise keyword.error(f"INCLUDE cycle through '{name}'")
        try:
            text = self.include_resolver(target)
        except FileNotFoundError:
            raise keyword.error(f"included file '{name}' not found") from None
        except OSError as error:
            raise keyword.error(f"cannot read included file '{name}' ({error.strerror or error})") from None
        logger.debug("including %s", target)
        return self._parse(text, str(target), target.parent, stack | {target})

    def _read_records(
        self, schema: KeywordSchema, tokens: list[Token], pos: int, lines: list[str], head: Token
    ) -> tuple[list[DeckRecord], int]:
        if schema.size == 0:
            return [], pos
        if schema.size == "line":
            for index in range(head.line, len(lines)):
                if lines[index].strip():
                    item = DeckItem(schema.items[0].name, "string", [lines[index].strip()], [False])
                    while pos < len(tokens) and tokens[pos].line <= index + 1:
                        pos += 1
                    return [DeckRecord([item])], pos
            raise DeckError(f"{schema.name}: missing text line", head.path, head.line)

        records = []
        while schema.size == "list" or len(records) < schema.size:
            raw = []
            while True:
                if pos >= len(tokens):
                    raise DeckError(f"{schema.name}: unterminated record (missing '/')", head.path, head.line)
                token = tokens[pos]
                pos += 1
                if token.text == "/":
                    break
                if token.line_start and not token.quoted and token.text in self.registry:
                    raise DeckError(
                        f"{schema.name}: record not terminated before keyword {token.text}", token.path, token.line
                    )
                raw.append(token)
            if schema.size == "list" and not raw:
                break
            records.append(self._record(schema, raw, head))
        return records, pos

    def _record(self, schema: KeywordSchema, raw: list[Token], head: Token) -> DeckRecord:
        values: list[tuple[str | None, Token]] = []
        for token in raw:
            match = None if token.quoted else REPEAT.match(token.text)
            if token.text == "*":
                values.append((None, token))
            elif match:
                count = int(match.group(1))
                if count == 0 or count > MAX_REPEAT:
                    raise DeckError(f"{schema.name}: invalid repeat count in '{token.text}'", token.path, token.line)
                values.extend([(match.group(2) or None, token)] * count)
            else:
                values.append((token.text, token))

        items = []
        index = 0
        for item_schema in schema.items:
            if item_schema.repeat:
                chunk = values[index:]
                index = len(values)
            else:
                chunk = [values[index]] if index < len(values) else [(None, head)]
                index += 1
            coerced = [_coerce(schema.name, item_schema, text, token) for text, token in chunk]
            items.append(DeckItem(
                item_schema.name,
                item_schema.type,
                [item_schema.default if text is None else value for (text, _), value in zip(chunk, coerced)],
                [text is None for text, _ in chunk],
                item_schema.dimension,
            ))
        if index < len(values):
            extra = values[len(schema.items)][1]
            raise DeckError(
                f"{schema.name}: too many items in record (expected {len(schema.items)})", extra.path, extra.line
            )
        return DeckRecord(items)


def _coerce(keyword: str, item: ItemSchema, text: str | None, token: Token) -> Any:
    if text is None:
        return None
    quoted = len(text) >= 2 and text[0] == text[-1] and text[0] in "'\""
    if item.type == "string":
        return text[1:-1] if quoted else text
    try:
        if quoted:
            raise ValueError(text)
        if item.type == "int":
            return int(text)
        value = float(text.replace("D", "E").replace("d", "e"))
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(text)
        return value
    except ValueError:
        kind = "an integer" if item.type == "int" else "a real number"
        raise DeckError(f"{keyword}.{item.name}: expected {kind}, got '{text}'", token.path, token.line) from None


def _read_file(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as error:
        raise DeckError(f"not a UTF-8 text file ({error.reason})", str(path)) from None


def parse_stage1(
    text: str,
    registry: KeywordRegistry | None = None,
    include_resolver: Callable[[Path], str] | None = None,
    path: str = "<string>",
    base_dir: str | Path | None = None,
    lenient: bool = False,
) -> Deck:
    """Parse deck text into a ``Deck``."""
    return DeckParser(registry, lenient, include_resolver).parse_string(text, path, base_dir)


def parse_deck_file(path: str | Path, lenient: bool = False, registry: KeywordRegistry | None = None) -> Deck:
    return DeckParser(registry, lenient).parse_file(path)
