"""Structural descriptions of ontology elements.

Template authors use these listings to learn which properties a class
carries before writing a design for it.  Recognized axioms are
rdf:type, rdfs:subClassOf, rdfs:domain, and rdfs:range; anything
heavier (restrictions, cardinalities) is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rdf import Graph, PrefixRegistry, RDF_NS, RDFS_NS, OWL_NS, XSD_NS, RDF_TYPE, Term, values_of
from .refs import ElementRef, KIND_CLASS, KIND_PROPERTY, resolve

RDFS_SUBCLASSOF = Term.iri(RDFS_NS + "subClassOf")
RDFS_DOMAIN = Term.iri(RDFS_NS + "domain")
RDFS_RANGE = Term.iri(RDFS_NS + "range")
RDFS_CLASS = Term.iri(RDFS_NS + "Class")
RDFS_LITERAL = Term.iri(RDFS_NS + "Literal")
OWL_CLASS = Term.iri(OWL_NS + "Class")
RDF_PROPERTY = Term.iri(RDF_NS + "Property")
OWL_OBJECT_PROPERTY = Term.iri(OWL_NS + "ObjectProperty")
OWL_DATATYPE_PROPERTY = Term.iri(OWL_NS + "DatatypeProperty")

_CLASS_TYPES = {RDFS_CLASS, OWL_CLASS}
_PROPERTY_TYPES = {RDF_PROPERTY, OWL_OBJECT_PROPERTY, OWL_DATATYPE_PROPERTY}


class DescribeError(LookupError):
    pass


@dataclass(frozen=True)
class PropertyInfo:
    iri: Term
    ranges: tuple[Term, ...]
    is_relation: bool  # range points at a class, so GetLink can follow it


@dataclass(frozen=True)
class ElementDescription:
    ref: ElementRef
    iri: Term
    kind: str
    superclasses: tuple[Term, ...] = ()
    properties: tuple[PropertyInfo, ...] = ()
    domains: tuple[Term, ...] = ()
    ranges: tuple[Term, ...] = ()
    global_properties: tuple[PropertyInfo, ...] = ()


def _occurs(g: Graph, term: Term) -> bool:
    return any(term in (t.subject, t.predicate, t.object) for t in g)


def _is_class(g: Graph, term: Term) -> bool:
    if any(o in _CLASS_TYPES for o in values_of(g, term, RDF_TYPE)):
        return True
    if next(g.match(term, RDFS_SUBCLASSOF), None) or next(g.match(None, RDFS_SUBCLASSOF, term), None):
        return True
    if next(g.match(None, RDFS_DOMAIN, term), None) or next(g.match(None, RDFS_RANGE, term), None):
        return True
    return next(g.match(None, RDF_TYPE, term), None) is not None


def _is_property(g: Graph, term: Term) -> bool:
    if any(o in _PROPERTY_TYPES for o in values_of(g, term, RDF_TYPE)):
        return True
    if next(g.match(term, RDFS_DOMAIN), None) or next(g.match(term, RDFS_RANGE), None):
        return True
    return any(t.predicate == term for t in g)


def superclass_closure(g: Graph, cls: Term) -> tuple[Term, ...]:
    """Transitive rdfs:subClassOf ancestors of ``cls``, stable-ordered."""
    seen: set[Term] = set()
    frontier = [cls]
    while frontier:
        current = frontier.pop()
        for parent in values_of(g, current, RDFS_SUBCLASSOF):
            if parent != cls and parent not in seen:
                seen.add(parent)
                frontier.append(parent)
    return tuple(sorted(seen, key=Term.sort_key))


def _range_is_class(g: Graph, rng: Term) -> bool:
    if not rng.is_iri:
        return False
    if rng.value.startswith(XSD_NS) or rng == RDFS_LITERAL:
        return False
    return True


def _property_info(g: Graph, prop: Term) -> PropertyInfo:
    ranges = tuple(values_of(g, prop, RDFS_RANGE))
    is_relation = any(_range_is_class(g, r) for r in ranges)
    if not ranges:
        # an explicit ObjectProperty typing still marks a relation
        is_relation = OWL_OBJECT_PROPERTY in values_of(g, prop, RDF_TYPE)
    return PropertyInfo(prop, ranges, is_relation)


def _declared_properties(g: Graph) -> list[Term]:
    found: set[Term] = set()
    for t in g:
        if t.predicate in (RDFS_DOMAIN, RDFS_RANGE):
            found.add(t.subject)
        elif t.predicate == RDF_TYPE and t.object in _PROPERTY_TYPES:
            found.add(t.subject)
    return sorted(found, key=Term.sort_key)


def describe_element(ontology: Graph, element: ElementRef, registry: PrefixRegistry) -> ElementDescription:
    """Describe one ontology element: its kind, ancestry, and usable properties.

    For a class the applicable properties are those whose declared domain
    is the class itself or any transitive superclass.  Properties with no
    declared domain are reported separately as global.
    """
    iri = resolve(element, registry)
    if not _occurs(ontology, iri):
        raise DescribeError(f"element {element.text()} does not occur in the ontology")

    prop_evidence = _is_property(ontology, iri)
    class_evidence = _is_class(ontology, iri)
    explicit_class = any(o in _CLASS_TYPES for o in values_of(ontology, iri, RDF_TYPE))
    explicit_prop = any(o in _PROPERTY_TYPES for o in values_of(ontology, iri, RDF_TYPE))

    if explicit_class or (class_evidence and not explicit_prop):
        supers = superclass_closure(ontology, iri)
        acceptable = {iri, *supers}
        props = []
        for prop in _declared_properties(ontology):
            domains = values_of(ontology, prop, RDFS_DOMAIN)
            if any(d in acceptable for d in domains):
                props.append(_property_info(ontology, prop))
        global_props = [
            _property_info(ontology, prop)
            for prop in _declared_properties(ontology)
            if not values_of(ontology, prop, RDFS_DOMAIN)
        ]
        return ElementDescription(
            ref=element.with_kind(KIND_CLASS),
            iri=iri,
            kind=KIND_CLASS,
            superclasses=supers,
            properties=tuple(props),
            global_properties=tuple(global_props),
        )
    if prop_evidence:
        return ElementDescription(
            ref=element.with_kind(KIND_PROPERTY),
            iri=iri,
            kind=KIND_PROPERTY,
            domains=tuple(values_of(ontology, iri, RDFS_DOMAIN)),
            ranges=tuple(values_of(ontology, iri, RDFS_RANGE)),
        )
    raise DescribeError(
        f"element {element.text()} occurs in the ontology but is neither a class nor a property"
    )


def _display(term: Term, registry: PrefixRegistry) -> str:
    dotted = registry.element_text(term.value) if term.is_iri else None
    if dotted:
        return dotted
    compact = registry.compact(term.value) if term.is_iri else None
    return compact or term.value


def render_description(d: ElementDescription, registry: PrefixRegistry) -> str:
    """Plain-text listing of a description; one line per property."""
    lines = [f"element {d.ref.text()}", f"kind: {d.kind}"]
    if d.kind == KIND_CLASS:
        if d.superclasses:
            lines.append("superclasses:")
            lines.extend(f"  {_display(c, registry)}" for c in d.superclasses)
        if d.properties:
            lines.append("properties:")
            lines.extend(_property_line(p, registry) for p in d.properties)
        if d.global_properties:
            lines.append("global properties:")
            lines.extend(_property_line(p, registry) for p in d.global_properties)
    else:
        if d.domains:
            lines.append("domain: " + ", ".join(_display(t, registry) for t in d.domains))
        if d.ranges:
            lines.append("range: " + ", ".join(_display(t, registry) for t in d.ranges))
    return "\n".join(lines) + "\n"


def _property_line(p: PropertyInfo, registry: PrefixRegistry) -> str:
    label = _display(p.iri, registry)
    if p.ranges:
        rng = ", ".join(_display(r, registry) for r in p.ranges)
        suffix = f" (range: {rng})"
    else:
        suffix = ""
    if p.is_relation:
        suffix += " [link]"
    return f"  {label}{suffix}"
