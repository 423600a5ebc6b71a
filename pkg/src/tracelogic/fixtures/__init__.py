"""Bundled TMN specifications."""
from __future__ import annotations

from importlib import resources

from ..dsl import SpecFile, parse

NAMES = ("tmn_original", "tmn_timestamps", "tmn_secrets", "tmn_mutual")


def source(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; valid names: {', '.join(NAMES)}")
    return resources.files(__package__).joinpath(f"{name}.tlp").read_text(encoding="utf-8")


def fixture(name: str) -> SpecFile:
    return parse(source(name))


def description(name: str) -> str:
    first = source(name).splitlines()[0]
    return first.lstrip("#").strip()


def list_fixtures() -> list:
    return [(n, description(n)) for n in NAMES]
