"""Flat key-value engine configuration.

Example::

    host = 127.0.0.1
    port = 8080
    baseURL = http://127.0.0.1:8080/render
    storageDir = ./storage
    prefix.foaf = http://xmlns.com/foaf/0.1/
    prefix.foaf.20050603 = http://xmlns.com/foaf/0.1/
    ontology.foaf = fixtures/foaf-mini.ttl
    aux.protocol = fixtures/z1-protocol.ttl
    aux.style = fixtures/z3-style.ttl
    aux.impairment = fixtures/z5-impairment.ttl
    alignments = fixtures/alignments.ttl

Relative paths are resolved against the directory holding the config
file; a ``${fixtures}`` prefix resolves into the fixture graphs shipped
with the package.  ``prefix.NAME.VERSION`` adds a versioned namespace
entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .rdf import PrefixRegistry


class ConfigError(Exception):
    pass


def _resolve_path(value: str, base_dir: Path) -> Path:
    if value.startswith("${fixtures}"):
        from .fixtures import fixture_dir

        return fixture_dir() / value[len("${fixtures}"):].lstrip("/")
    return (base_dir / value).resolve()


@dataclass
class EngineConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    base_url: str = ""
    storage_dir: Path = Path("./storage")
    prefixes: PrefixRegistry = field(default_factory=PrefixRegistry)
    ontology_paths: dict = field(default_factory=dict)   # name -> Path
    aux_paths: dict = field(default_factory=dict)        # protocol|style|impairment -> Path
    alignments_path: Path | None = None
    ui_dir: Path | None = None

    def __post_init__(self):
        if not self.base_url:
            self.base_url = f"http://{self.host}:{self.port}/render"


def load_config(path: str | Path) -> EngineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    base_dir = path.parent
    values: dict[str, str] = {}
    prefixes = PrefixRegistry()
    ontology_paths: dict[str, Path] = {}
    aux_paths: dict[str, Path] = {}
    alignments: Path | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")

        if key.startswith("prefix."):
            parts = key.split(".")
            if len(parts) == 2:
                prefixes.add(parts[1], value)
            elif len(parts) == 3:
                prefixes.add(parts[1], value, version=parts[2])
            else:
                raise ConfigError(f"{path}:{lineno}: prefix keys are prefix.NAME[.VERSION]")
        elif key.startswith("ontology."):
            ontology_paths[key.split(".", 1)[1]] = _resolve_path(value, base_dir)
        elif key.startswith("aux."):
            slot = key.split(".", 1)[1]
            if slot not in ("protocol", "style", "impairment"):
                raise ConfigError(f"{path}:{lineno}: aux slots are protocol, style, impairment")
            aux_paths[slot] = _resolve_path(value, base_dir)
        elif key == "alignments":
            alignments = _resolve_path(value, base_dir)
        elif key in ("host", "port", "baseURL", "storageDir", "uiDir"):
            values[key] = value
        else:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")

    try:
        port = int(values.get("port", "8080"))
    except ValueError:
        raise ConfigError(f"{path}: port must be an integer") from None

    return EngineConfig(
        host=values.get("host", "127.0.0.1"),
        port=port,
        base_url=values.get("baseURL", ""),
        storage_dir=_resolve_path(values.get("storageDir", "./storage"), base_dir),
        prefixes=prefixes,
        ontology_paths=ontology_paths,
        aux_paths=aux_paths,
        alignments_path=alignments,
        ui_dir=_resolve_path(values["uiDir"], base_dir) if "uiDir" in values else None,
    )
