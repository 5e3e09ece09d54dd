"""Storage for designer templates and their characterization.

Layout on disk: one directory per provider, and per design a raw body
file plus a key-value features file.  Everything a template declares is
also published as a graph in the engine's own vocabulary so semantic
agents can query the catalogue.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from pathlib import Path

from .rdf import Graph, Term, Triple
from .refs import ElementRef, parse_element_ref
from .templates import parse_template

TEMPLATE_NS = "http://templates.example/ns#"

KIND_OUTPUT = "output"
KIND_INPUT = "input"
CODE_TYPES = ("html", "css", "script")
MARKUP_FORMATS = ("HTML", "XHTML")
FONT_BEHAVIORS = ("reflow", "fixed", "scale")


class RegistryError(Exception):
    pass


class DuplicateTemplate(RegistryError):
    pass


class TemplateMissing(RegistryError, KeyError):
    pass


@dataclass(frozen=True)
class TemplateFeatures:
    kind: str = KIND_OUTPUT
    code_types: frozenset = frozenset({"html"})
    primary_color: str = "black"
    secondary_color: str = "white"
    aesthetic: str = "plain"
    markup_format: str = "HTML"
    preferred_size: tuple = (320, 240)
    min_size: tuple = (160, 120)
    max_size: tuple = (640, 480)
    font_resize: str = "reflow"

    def __post_init__(self):
        if self.kind not in (KIND_OUTPUT, KIND_INPUT):
            raise RegistryError(f"template kind must be input or output, got {self.kind!r}")
        bad = set(self.code_types) - set(CODE_TYPES)
        if bad:
            raise RegistryError(f"unknown code types: {sorted(bad)}")
        if self.markup_format not in MARKUP_FORMATS:
            raise RegistryError(f"markup format must be HTML or XHTML, got {self.markup_format!r}")
        if self.font_resize not in FONT_BEHAVIORS:
            raise RegistryError(f"unknown font resize behaviour: {self.font_resize!r}")
        for size in (self.preferred_size, self.min_size, self.max_size):
            if len(size) != 2 or any(not isinstance(v, int) or v <= 0 for v in size):
                raise RegistryError(f"sizes are (width, height) pixel pairs, got {size!r}")
        for axis in (0, 1):
            if not (self.min_size[axis] <= self.preferred_size[axis] <= self.max_size[axis]):
                raise RegistryError(
                    "size ordering violated: min <= preferred <= max must hold per axis"
                )
        if self.kind == KIND_INPUT and "html" not in self.code_types:
            raise RegistryError("input templates need html code (form controls)")


@dataclass(frozen=True)
class Template:
    provider_id: str
    design_id: str
    target: ElementRef
    body: str
    features: TemplateFeatures

    def __post_init__(self):
        for name, part in (("provider", self.provider_id), ("design", self.design_id)):
            if not part or "." in part or "/" in part:
                raise RegistryError(f"{name} id must be nonempty with no dots or slashes: {part!r}")
        parse_template(self.body)  # reject bodies that can never render

    @property
    def full_id(self) -> str:
        return f"{self.provider_id}.{self.design_id}"


def _targets_match(query: ElementRef, target: ElementRef) -> bool:
    if (query.prefix, query.local) != (target.prefix, target.local):
        return False
    if query.version is None or target.version is None:
        return True
    return query.version == target.version


class TemplateRegistry:
    """In-memory catalogue with optional directory persistence.

    Reads work on immutable Template values; writes serialize through a
    single lock and flush straight to disk when a storage dir is set.
    """

    def __init__(self, storage_dir: str | Path | None = None):
        self._lock = threading.Lock()
        self._templates: dict[tuple[str, str], Template] = {}
        self._dir = Path(storage_dir) if storage_dir is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load_all()

    def __len__(self):
        return len(self._templates)

    def register(self, template: Template, overwrite: bool = False) -> None:
        key = (template.provider_id, template.design_id)
        with self._lock:
            if key in self._templates and not overwrite:
                raise DuplicateTemplate(f"template {template.full_id} already registered")
            self._templates[key] = template
            if self._dir is not None:
                self._save(template)

    def get(self, provider_id: str, design_id: str) -> Template:
        try:
            return self._templates[(provider_id, design_id)]
        except KeyError:
            raise TemplateMissing(f"no template {provider_id}.{design_id}") from None

    def all(self) -> list[Template]:
        return sorted(self._templates.values(), key=lambda t: t.full_id)

    def list_for(self, element: ElementRef, kind: str) -> list[Template]:
        """Templates of the given kind targeting the element.

        A versionless query (or target) matches any version; two explicit
        versions must agree.
        """
        return [
            t for t in self.all()
            if t.features.kind == kind and _targets_match(element, t.target)
        ]

    def metadata_graph(self) -> Graph:
        """The catalogue as semantic data: one subject per template."""
        triples = []
        for t in self.all():
            subject = Term.iri(TEMPLATE_NS + t.full_id)

            def emit(prop, value):
                triples.append(Triple(subject, Term.iri(TEMPLATE_NS + prop), Term.literal(value)))

            f = t.features
            emit("kind", f.kind)
            emit("targets", t.target.text())
            emit("codedIn", f.markup_format)
            for code in sorted(f.code_types):
                emit("codeType", code)
            emit("aesthetic", f.aesthetic)
            emit("primaryColor", f.primary_color)
            emit("secondaryColor", f.secondary_color)
            emit("preferredSize", "%dx%d" % f.preferred_size)
            emit("minSize", "%dx%d" % f.min_size)
            emit("maxSize", "%dx%d" % f.max_size)
            emit("fontResize", f.font_resize)
        return Graph(triples, namespace=TEMPLATE_NS)

    # -- persistence -----------------------------------------------------

    def _body_path(self, provider_id: str, design_id: str) -> Path:
        return self._dir / provider_id / f"{design_id}.body"

    def _features_path(self, provider_id: str, design_id: str) -> Path:
        return self._dir / provider_id / f"{design_id}.features"

    def _save(self, t: Template) -> None:
        provider_dir = self._dir / t.provider_id
        provider_dir.mkdir(parents=True, exist_ok=True)
        self._body_path(t.provider_id, t.design_id).write_text(t.body, encoding="utf-8")
        self._features_path(t.provider_id, t.design_id).write_text(
            features_text(t), encoding="utf-8"
        )

    def _load_all(self) -> None:
        for features_file in sorted(self._dir.glob("*/*.features")):
            body_file = features_file.with_suffix(".body")
            if not body_file.exists():
                raise RegistryError(f"missing body file for {features_file}")
            body = body_file.read_text(encoding="utf-8")
            template = template_from_features(features_file.read_text(encoding="utf-8"), body)
            expected = (features_file.parent.name, features_file.stem)
            if (template.provider_id, template.design_id) != expected:
                raise RegistryError(
                    f"{features_file} declares id {template.full_id}, which does not match its path"
                )
            self._templates[(template.provider_id, template.design_id)] = template


def features_text(t: Template) -> str:
    f = t.features
    lines = [
        f"provider = {t.provider_id}",
        f"design = {t.design_id}",
        f"target = {t.target.text()}",
        f"kind = {f.kind}",
        "codeTypes = " + ", ".join(sorted(f.code_types)),
        f"markupFormat = {f.markup_format}",
        f"aesthetic = {f.aesthetic}",
        f"primaryColor = {f.primary_color}",
        f"secondaryColor = {f.secondary_color}",
        "preferredSize = %dx%d" % f.preferred_size,
        "minSize = %dx%d" % f.min_size,
        "maxSize = %dx%d" % f.max_size,
        f"fontResize = {f.font_resize}",
    ]
    return "\n".join(lines) + "\n"


def _parse_size(text: str) -> tuple:
    try:
        w, h = text.lower().split("x")
        return (int(w), int(h))
    except ValueError:
        raise RegistryError(f"sizes are WIDTHxHEIGHT, got {text!r}") from None


def template_from_features(text: str, body: str) -> Template:
    """Build a Template from a features key-value document plus its body."""
    data: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise RegistryError(f"features line {lineno} is not key = value: {raw!r}")
        key, _, value = line.partition("=")
        data[key.strip()] = value.strip()

    for required in ("provider", "design", "target"):
        if required not in data:
            raise RegistryError(f"features file is missing the {required!r} key")

    features = TemplateFeatures(
        kind=data.get("kind", KIND_OUTPUT),
        code_types=frozenset(
            c.strip() for c in data.get("codeTypes", "html").split(",") if c.strip()
        ),
        primary_color=data.get("primaryColor", "black"),
        secondary_color=data.get("secondaryColor", "white"),
        aesthetic=data.get("aesthetic", "plain"),
        markup_format=data.get("markupFormat", "HTML"),
        preferred_size=_parse_size(data.get("preferredSize", "320x240")),
        min_size=_parse_size(data.get("minSize", "160x120")),
        max_size=_parse_size(data.get("maxSize", "640x480")),
        font_resize=data.get("fontResize", "reflow"),
    )
    return Template(
        provider_id=data["provider"],
        design_id=data["design"],
        target=parse_element_ref(data["target"]),
        body=body,
        features=features,
    )
