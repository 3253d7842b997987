"""Deck input: keyword schemas, text parsing and case construction.

This module provides tools for:
- Loading JSON keyword schemas into a registry
- Parsing deck text into typed keyword records (stage 1)
- Resolving the keywords into a simulation case in SI units (stage 2)
"""

from .case_builder import ReportStep, SimCase, build_case
from .deck_parser import Deck, DeckKeyword, DeckParser, parse_deck_file, parse_stage1
from .keyword_registry import KeywordRegistry, KeywordSchema, schema_registry_load

__all__ = [
    "schema_registry_load",
    "KeywordRegistry",
    "KeywordSchema",
    "DeckParser",
    "Deck",
    "DeckKeyword",
    "parse_stage1",
    "parse_deck_file",
    "build_case",
    "SimCase",
    "ReportStep",
]
