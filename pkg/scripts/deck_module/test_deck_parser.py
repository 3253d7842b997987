"""Tests for stage-1 deck parsing."""

import logging

import numpy as np
import pytest

from deck_module.deck_parser import DeckParser, parse_deck_file, parse_stage1, strip_comment
from numerics_module.errors import DeckError

HOSTILE_WORDS = [
    "/", "*", "3*", "0*", "2*x", "1e999", "nan", "-1", "'", "'.'", "'include'", "INCLUDE", "END", "GRID", "abc",
]


def include_resolver(files: dict[str, str]):
    def resolve(path):
        if path.name not in files:
            raise FileNotFoundError(path)
        return files[path.name]

    return resolve


class TestTokens:
    """Values, repeats and defaults."""

    def test_dimens(self):
        deck = parse_stage1("RUNSPEC\nDIMENS\n 10 10 3 /\n")
        record = deck.get("DIMENS").records[0]
        assert [record.get(axis) for axis in ("NX", "NY", "NZ")] == [10, 10, 3]

    def test_repeat_expansion(self):
        deck = parse_stage1("GRID\nPORO\n 3*0.3 2*0.1 0.2 /\n")
        assert deck.get("PORO").records[0].get("DATA") == [0.3, 0.3, 0.3, 0.1, 0.1, 0.2]

    def test_defaults_fill_missing_items(self):
        deck = parse_stage1("SOLUTION\nEQUIL\n 8400 4800 2* 8300 /\n")
        record = deck.get("EQUIL").records[0]
        assert record["WOC_DEPTH"].is_defaulted and record.get("WOC_DEPTH") == 0.0
        assert record.get("GOC_DEPTH") == 8300.0
        assert record["ACCURACY"].is_defaulted
        assert not record["DATUM_PRESSURE"].is_defaulted

    def test_lone_star_is_a_default(self):
        deck = parse_stage1("SCHEDULE\nWELSPECS\n 'P' * 2 2 1* /\n/\n")
        record = deck.get("WELSPECS").records[0]
        assert record.get("GROUP") == "FIELD"
        assert record.get("REF_DEPTH") is None

    def test_comments_and_quotes(self):
        assert strip_comment("'A--B' 1 -- note") == "'A--B' 1 "
        deck = parse_stage1("RUNSPEC -- header\nTITLE\n  My case -- with a comment\n")
        assert deck.get("TITLE").records[0].get("TEXT") == "My case"

    def test_list_keyword_ends_with_empty_record(self):
        text = "SCHEDULE\nWELSPECS\n 'P' 'G' 1 1 /\n 'I' 'G' 2 2 /\n/\nTSTEP\n 2*10 /\n"
        deck = parse_stage1(text)
        assert len(deck.get("WELSPECS").records) == 2
        assert deck.get("TSTEP").records[0].get("DATA") == [10.0, 10.0]

    def test_exponent_with_d(self):
        deck = parse_stage1("PROPS\nROCK\n 3000 4.0D-6 /\n")
        assert deck.get("ROCK").records[0].get("CR") == pytest.approx(4e-6)


class TestDeckStructure:
    """Keyword order, sections and END."""

    def test_last_occurrence_wins(self):
        deck = parse_stage1("SCHEDULE\nTSTEP\n 1 /\nTSTEP\n 2 /\n")
        assert len(deck.all("TSTEP")) == 2
        assert deck.get("TSTEP").records[0].get("DATA") == 2.0

    def test_parsing_stops_at_end(self):
        deck = parse_stage1("RUNSPEC\nOIL\nEND\nNOT A KEYWORD /\n")
        assert [kw.name for kw in deck] == ["RUNSPEC", "OIL", "END"]

    def test_keyword_outside_its_section(self):
        with pytest.raises(DeckError, match="not allowed in section RUNSPEC") as info:
            parse_stage1("RUNSPEC\nPORO\n 0.3 /\n")
        assert info.value.line == 2

    def test_keyword_before_any_section(self):
        with pytest.raises(DeckError, match=r"section \(none\)"):
            parse_stage1("DIMENS\n 1 1 1 /\n")

    def test_unknown_keyword(self):
        with pytest.raises(DeckError, match="unknown keyword 'FOO'"):
            parse_stage1("RUNSPEC\nFOO\n")

    def test_lenient_mode_skips_unknown_keywords(self, caplog):
        with caplog.at_level(logging.WARNING):
            deck = parse_stage1("RUNSPEC\nFOO\n 1 2 3 /\nDIMENS\n 2 2 1 /\n", lenient=True)
        assert [kw.name for kw in deck] == ["RUNSPEC", "DIMENS"]
        assert "FOO" in caplog.text


class TestErrors:
    """Malformed records are located at file and line."""

    def test_bad_integer(self):
        with pytest.raises(DeckError, match=r"DIMENS\.NY: expected an integer, got 'x'") as info:
            parse_stage1("RUNSPEC\nDIMENS\n 2 x 1 /\n", path="case.DATA")
        assert info.value.path == "case.DATA"
        assert info.value.line == 3
        assert str(info.value).startswith("case.DATA:3:")

    def test_quoted_number_is_not_real(self):
        with pytest.raises(DeckError, match="expected a real number"):
            parse_stage1("GRID\nPORO\n '0.3' /\n")

    def test_unterminated_record(self):
        with pytest.raises(DeckError, match="unterminated record"):
            parse_stage1("RUNSPEC\nDIMENS\n 1 1 1\n")

    def test_record_runs_into_next_keyword(self):
        with pytest.raises(DeckError, match="not terminated before keyword OIL") as info:
            parse_stage1("RUNSPEC\nDIMENS\n 1 1 1\nOIL\n")
        assert info.value.line == 4

    def test_too_many_items(self):
        with pytest.raises(DeckError, match=r"too many items in record \(expected 3\)"):
            parse_stage1("RUNSPEC\nDIMENS\n 1 1 1 1 /\n")

    def test_zero_repeat_count(self):
        with pytest.raises(DeckError, match="invalid repeat count"):
            parse_stage1("GRID\nPORO\n 0*0.3 /\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DeckError, match="deck file not found"):
            parse_deck_file(tmp_path / "NOPE.DATA")

    def test_unreadable_deck(self, tmp_path):
        def denied(path):
            raise PermissionError(13, "Permission denied", str(path))

        deck = tmp_path / "LOCKED.DATA"
        deck.write_text("RUNSPEC\n", encoding="utf-8")
        with pytest.raises(DeckError, match="cannot read deck file"):
            DeckParser(include_resolver=denied).parse_file(deck)


class TestInclude:
    """INCLUDE splicing."""

    def test_included_keywords_are_spliced(self):
        files = {"props.inc": "PVTW\n 3000 1.01 3e-6 0.5 0 /\n"}
        parser = DeckParser(include_resolver=include_resolver(files))
        deck = parser.parse_string("PROPS\nINCLUDE\n 'props.inc' /\nROCK\n 3000 4e-6 /\n")
        assert [kw.name for kw in deck] == ["PROPS", "PVTW", "ROCK"]
        assert deck.get("PVTW").path.endswith("props.inc")
        assert deck.get("PVTW").line == 1

    def test_cycle(self):
        files = {"a.inc": "INCLUDE\n 'b.inc' /\n", "b.inc": "INCLUDE\n 'a.inc' /\n"}
        parser = DeckParser(include_resolver=include_resolver(files))
        with pytest.raises(DeckError, match="INCLUDE cycle through 'a.inc'"):
            parser.parse_string("RUNSPEC\nINCLUDE\n 'a.inc' /\n")

    def test_missing_include(self):
        parser = DeckParser(include_resolver=include_resolver({}))
        with pytest.raises(DeckError, match="included file 'gone.inc' not found") as info:
            parser.parse_string("RUNSPEC\nINCLUDE\n 'gone.inc' /\n", path="main.DATA")
        assert info.value.path == "main.DATA"

    def test_include_names_a_directory(self, decks_dir):
        with pytest.raises(DeckError, match="cannot read included file 'include'") as info:
            parse_stage1("RUNSPEC\nINCLUDE\n 'include' /\n", path="main.DATA", base_dir=decks_dir)
        assert (info.value.path, info.value.line) == ("main.DATA", 2)

    def test_unreadable_include(self):
        def denied(path):
            raise PermissionError(13, "Permission denied", str(path))

        with pytest.raises(DeckError, match=r"cannot read included file 'props.inc' \(Permission denied\)"):
            DeckParser(include_resolver=denied).parse_string("PROPS\nINCLUDE\n 'props.inc' /\n")

    def test_nested_files_on_disk(self, decks_dir):
        deck = parse_deck_file(decks_dir / "MINI.DATA")
        for name in ("PVTW", "PVDO", "SWOF", "SGOF"):
            assert name in deck
        assert "INCLUDE" not in deck


class TestPrettyPrint:
    """Printed decks parse back to the same keywords."""

    @pytest.mark.parametrize("name", ["SPE1", "MINI", "COLUMN"])
    def test_round_trip(self, decks_dir, name):
        deck = parse_deck_file(decks_dir / f"{name}.DATA")
        assert parse_stage1(deck.to_text()) == deck

    def test_defaulted_values_print_as_star(self):
        deck = parse_stage1("SOLUTION\nEQUIL\n 8400 4800 /\n")
        assert "1*" in deck.to_text()


def mutate(lines: list[str], rng: np.random.Generator) -> list[str]:
    """Apply a few line and word edits to a deck."""
    lines = list(lines)
    for _ in range(rng.integers(1, 4)):
        index = int(rng.integers(len(lines)))
        operation = rng.integers(4)
        if operation == 0:
            del lines[index]
        elif operation == 1:
            lines.insert(index, lines[index])
        elif operation == 2:
            other = int(rng.integers(len(lines)))
            lines[index], lines[other] = lines[other], lines[index]
        else:
            words = lines[index].split() or [""]
            words[int(rng.integers(len(words)))] = HOSTILE_WORDS[int(rng.integers(len(HOSTILE_WORDS)))]
            lines[index] = " ".join(words)
        if not lines:
            lines = [""]
    return lines


class TestMutatedDecks:
    """Edited copies of the bundled decks parse or fail with a located DeckError."""

    @pytest.mark.parametrize("name", ["SPE1", "MINI", "COLUMN", "RATEDROP"])
    def test_only_deck_errors(self, decks_dir, name):
        lines = (decks_dir / f"{name}.DATA").read_text(encoding="utf-8").splitlines()
        rng = np.random.default_rng(sum(map(ord, name)))
        parser = DeckParser()
        for _ in range(250):
            text = "\n".join(mutate(lines, rng))
            try:
                parser.parse_string(text, f"{name}.DATA", decks_dir)
            except DeckError as error:
                assert error.path is not None
