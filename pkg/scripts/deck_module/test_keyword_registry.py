"""Tests for keyword schema loading and validation."""

import pytest

from deck_module.keyword_registry import KeywordRegistry, keyword_from_dict, schema_registry_load
from numerics_module.errors import KeywordSchemaError


def keyword(**overrides) -> dict:
    spec = {"name": "MYKW", "size": 1, "items": [{"name": "A", "type": "real", "dimension": "length"}]}
    spec.update(overrides)
    return spec


class TestBundledSchemas:
    """The schema files shipped with the package."""

    def test_core_keywords_present(self):
        registry = schema_registry_load()
        for name in ("RUNSPEC", "DIMENS", "PORO", "PVTO", "SWOF", "EQUIL", "WCONPROD", "TSTEP", "END"):
            assert name in registry

    def test_equil_defaults(self):
        equil = schema_registry_load()["EQUIL"]
        assert [item.name for item in equil.items][:2] == ["DATUM_DEPTH", "DATUM_PRESSURE"]
        assert equil.items[2].default == 0.0
        assert equil.sections == ("SOLUTION",)

    def test_table_dimensions_cycle(self):
        data = schema_registry_load()["RSVD"].items[0]
        assert data.repeat
        assert data.dimension_at(0) == "length"
        assert data.dimension_at(3) == "gas_oil_ratio"


class TestSchemaValidation:
    """Malformed keyword entries are rejected."""

    def test_valid_entry(self):
        schema = keyword_from_dict(keyword(sections=["GRID"]))
        assert schema.name == "MYKW"
        assert schema.allowed_in("GRID") and not schema.allowed_in("PROPS")

    @pytest.mark.parametrize(
        "overrides, message",
        [
            ({"name": "lower"}, "invalid keyword name"),
            ({"name": "TOOLONGNAME"}, "invalid keyword name"),
            ({"size": -1}, "size must be"),
            ({"size": "many"}, "size must be"),
            ({"items": []}, "need items"),
            ({"size": 0}, "cannot have items"),
            ({"items": [{"name": "A", "type": "complex"}]}, "unknown item type"),
            ({"items": [{"name": "A", "type": "real", "dimension": "furlong"}]}, "unknown dimension"),
            ({"items": [{"name": "A", "type": "int", "dimension": "length"}]}, "only real items"),
            ({"items": [{"name": "A", "type": "int", "default": "x"}]}, "is not of type"),
            (
                {"items": [{"name": "A", "type": "real", "repeat": True}, {"name": "B", "type": "real"}]},
                "only the last item may repeat",
            ),
        ],
    )
    def test_rejected(self, overrides, message):
        with pytest.raises(KeywordSchemaError, match=message):
            keyword_from_dict(keyword(**overrides))

    def test_real_default_becomes_float(self):
        schema = keyword_from_dict(keyword(items=[{"name": "A", "type": "real", "default": 2}]))
        assert isinstance(schema.items[0].default, float)


class TestRegistry:
    """Registration and document loading."""

    def test_duplicate_registration(self):
        registry = KeywordRegistry([keyword_from_dict(keyword())])
        with pytest.raises(KeywordSchemaError, match="registered twice"):
            registry.register(keyword_from_dict(keyword()))

    def test_document_without_keyword_list(self):
        with pytest.raises(KeywordSchemaError, match="'keywords' list"):
            KeywordRegistry().load_document({"description": "empty"})

    def test_user_documents_extend_nothing_else(self):
        registry = schema_registry_load([{"keywords": [keyword()]}])
        assert registry.names() == ["MYKW"]

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"keywords": [', encoding="utf-8")
        with pytest.raises(KeywordSchemaError, match="invalid JSON"):
            schema_registry_load([path])

    def test_error_names_the_document(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"keywords": [{"name": "bad"}]}', encoding="utf-8")
        with pytest.raises(KeywordSchemaError, match="bad.json"):
            schema_registry_load([path])
