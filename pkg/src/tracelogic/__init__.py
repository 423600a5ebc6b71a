"""Protocol verification with trace-logic formulas attached to role actions."""
from .dsl import SpecError, parse, render_spec
from .engine import SearchOptions, SearchResult, Violation, search
from .fixtures import fixture, list_fixtures
from .model import Action, Event, ExtendedRole, Scenario
from .term import INTRUDER, Const, Enc, Hash, Pair, Pk, Var

__all__ = [
    "Action", "Const", "Enc", "Event", "ExtendedRole", "Hash", "INTRUDER", "Pair", "Pk",
    "Scenario", "SearchOptions", "SearchResult", "SpecError", "Var", "Violation",
    "fixture", "list_fixtures", "parse", "render_spec", "search",
]
