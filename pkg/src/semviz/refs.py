"""Dotted ontology-element coordinates: ``prefix.local`` or ``prefix.local.version``.

This is the textual form used on the wire (the ``object`` request
parameter) and inside template macro arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .rdf import PrefixRegistry, Term

KIND_CLASS = "class"
KIND_PROPERTY = "property"
KIND_UNKNOWN = "unknown"


class ElementRefError(ValueError):
    """Raised for text that is not a valid element coordinate."""


@dataclass(frozen=True)
class ElementRef:
    prefix: str
    local: str
    version: str | None = None
    kind: str = KIND_UNKNOWN

    def __post_init__(self):
        for name, part in (("prefix", self.prefix), ("local", self.local)):
            if not part:
                raise ElementRefError(f"element coordinate has an empty {name} segment")
            if "." in part:
                raise ElementRefError(f"element coordinate {name} segment contains a dot: {part!r}")
        if self.version is not None and not self.version:
            raise ElementRefError("element coordinate has an empty version segment")
        if self.kind not in (KIND_CLASS, KIND_PROPERTY, KIND_UNKNOWN):
            raise ElementRefError(f"unknown element kind: {self.kind!r}")

    def text(self) -> str:
        if self.version is not None:
            return f"{self.prefix}.{self.local}.{self.version}"
        return f"{self.prefix}.{self.local}"

    def with_kind(self, kind: str) -> "ElementRef":
        return replace(self, kind=kind)

    def __str__(self):
        return self.text()


def parse_element_ref(text: str) -> ElementRef:
    """Split ``prefix.local[.version]`` into an ElementRef.

    The element kind stays ``unknown`` until resolved against an ontology.
    """
    parts = text.split(".")
    if len(parts) == 2:
        return ElementRef(parts[0], parts[1])
    if len(parts) == 3:
        return ElementRef(parts[0], parts[1], parts[2])
    raise ElementRefError(
        f"element coordinate must have 2 or 3 dot-separated segments, got {len(parts)}: {text!r}"
    )


def resolve(ref: ElementRef, registry: PrefixRegistry) -> Term:
    """Resolve a coordinate to its IRI through the prefix registry."""
    try:
        namespace = registry.namespace(ref.prefix, ref.version)
    except KeyError:
        raise ElementRefError(f"unknown prefix: {ref.prefix!r}") from None
    return Term.iri(namespace + ref.local)
