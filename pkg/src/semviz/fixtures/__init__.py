"""Fixture graphs shipped with the engine: a miniature people vocabulary
and data set, a sample user profile, and the three auxiliary ontologies
the matcher consults (protocol, style taxonomy, impairments) plus the
alignment links joining them."""

from pathlib import Path


def fixture_dir() -> Path:
    return Path(__file__).resolve().parent


def fixture_path(name: str) -> Path:
    return fixture_dir() / name


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")
