"""Template bodies with embedded substitution macros.

A body is arbitrary markup text carrying macro occurrences written as
``[{MacroName key='value' ...}]``.  Four macros exist:

    OmemoGetP               propName                substitute property values
    OmemoBaseURL            (none)                  substitute the engine endpoint URL
    OmemoConditionalVizFor  propName, designerID,   render another registered template
                            designID                for each value, only if present
    OmemoGetLink            relationName            emit one navigation anchor per value

Parsing keeps the raw source slice of every node, so re-serializing an
AST reproduces the input byte-for-byte.  Expansion is pure: the same
AST, graph, focus, and registry snapshot always give the same string.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, replace
from urllib.parse import urlencode

from .rdf import Graph, PrefixRegistry, RDF_TYPE, Term, Triple, instances_of, values_of
from .refs import ElementRef, ElementRefError, KIND_PROPERTY, parse_element_ref, resolve

MAX_DEPTH = 8

MACRO_ARGS = {
    "OmemoGetP": ("propName",),
    "OmemoBaseURL": (),
    "OmemoConditionalVizFor": ("propName", "designerID", "designID"),
    "OmemoGetLink": ("relationName",),
}

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class TemplateError(Exception):
    pass


class TemplateParseError(TemplateError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"offset {offset}: {message}")
        self.reason = message
        self.offset = offset


class TemplateExpandError(TemplateError):
    pass


class TemplateDepthError(TemplateExpandError):
    def __init__(self, depth: int):
        super().__init__(f"template nesting exceeded depth {MAX_DEPTH} (reached {depth})")
        self.depth = depth


class TemplateNotFound(TemplateExpandError):
    pass


@dataclass(frozen=True)
class RawText:
    source: str


@dataclass(frozen=True)
class GetP:
    prop: ElementRef
    source: str


@dataclass(frozen=True)
class BaseURL:
    source: str


@dataclass(frozen=True)
class ConditionalViz:
    prop: ElementRef
    designer_id: str
    design_id: str
    source: str


@dataclass(frozen=True)
class GetLink:
    relation: ElementRef
    source: str


TemplateAST = tuple  # ordered sequence of the node types above


def parse_template(body: str) -> TemplateAST:
    """Parse a template body into its AST.

    Everything outside ``[{ ... }]`` stays raw text.  A ``[{`` opener
    always starts a macro; malformed macro text is a parse error (with
    the character offset), never silently literal.
    """
    nodes = []
    pos = 0
    while True:
        start = body.find("[{", pos)
        if start < 0:
            if pos < len(body):
                nodes.append(RawText(body[pos:]))
            break
        if start > pos:
            nodes.append(RawText(body[pos:start]))
        pos = _parse_macro(body, start, nodes)
    return tuple(nodes)


def _parse_macro(body: str, start: int, nodes: list) -> int:
    pos = start + 2
    m = _NAME_RE.match(body, pos)
    if not m:
        raise TemplateParseError("expected macro name after '[{'", pos)
    name = m.group(0)
    pos = m.end()
    if name not in MACRO_ARGS:
        raise TemplateParseError(f"unknown macro {name!r}", start)
    args: dict[str, str] = {}
    while True:
        while pos < len(body) and body[pos] in " \t\r\n":
            pos += 1
        if body.startswith("}]", pos):
            pos += 2
            break
        if pos >= len(body):
            raise TemplateParseError(f"unterminated macro {name!r}", start)
        m = _NAME_RE.match(body, pos)
        if not m:
            raise TemplateParseError(f"expected argument name in macro {name!r}", pos)
        key = m.group(0)
        pos = m.end()
        while pos < len(body) and body[pos] in " \t\r\n":
            pos += 1
        if pos >= len(body) or body[pos] != "=":
            raise TemplateParseError(f"expected '=' after argument {key!r}", pos)
        pos += 1
        while pos < len(body) and body[pos] in " \t\r\n":
            pos += 1
        if pos >= len(body) or body[pos] not in "'\"":
            raise TemplateParseError(f"expected quoted value for argument {key!r}", pos)
        quote = body[pos]
        end = body.find(quote, pos + 1)
        if end < 0:
            raise TemplateParseError(f"unterminated value for argument {key!r}", pos)
        if key in args:
            raise TemplateParseError(f"duplicate argument {key!r} in macro {name!r}", pos)
        args[key] = body[pos + 1:end]
        pos = end + 1

    required = MACRO_ARGS[name]
    for arg in required:
        if arg not in args:
            raise TemplateParseError(f"macro {name!r} is missing required argument {arg!r}", start)
    for arg in args:
        if arg not in required:
            raise TemplateParseError(f"macro {name!r} does not accept argument {arg!r}", start)

    source = body[start:pos]
    try:
        if name == "OmemoGetP":
            nodes.append(GetP(parse_element_ref(args["propName"]), source))
        elif name == "OmemoBaseURL":
            nodes.append(BaseURL(source))
        elif name == "OmemoConditionalVizFor":
            nodes.append(ConditionalViz(
                parse_element_ref(args["propName"]), args["designerID"], args["designID"], source,
            ))
        else:
            nodes.append(GetLink(parse_element_ref(args["relationName"]), source))
    except ElementRefError as exc:
        raise TemplateParseError(f"bad element coordinate in macro {name!r}: {exc}", start) from None
    return pos


def serialize_template(ast: TemplateAST) -> str:
    return "".join(node.source for node in ast)


@dataclass(frozen=True)
class RenderContext:
    """Everything expansion needs besides the AST itself.

    ``registry`` must offer ``get(designer_id, design_id)`` returning an
    object with a ``body`` attribute (used by nested rendering); it may
    be None for templates that never nest.
    """

    graph: Graph
    focus: Term | None
    base_url: str
    prefixes: PrefixRegistry
    source_url: str | None = None
    depth: int = 0
    registry: object = None
    ontology: Graph | None = None

    def nested(self, focus: Term) -> "RenderContext":
        return replace(self, focus=focus, depth=self.depth + 1)


def term_text(term: Term) -> str:
    if term.is_blank:
        return f"_:{term.value}"
    return term.value


def expand(ast: TemplateAST, ctx: RenderContext) -> str:
    """Expand an AST against the context focus; see the module docstring
    for per-macro behaviour.  Raw text passes through untouched: the
    designer owns the markup, the engine owns only what it generates."""
    if ctx.depth > MAX_DEPTH:
        raise TemplateDepthError(ctx.depth)
    out = []
    for node in ast:
        if isinstance(node, RawText):
            out.append(node.source)
        elif isinstance(node, GetP):
            values = values_of(ctx.graph, ctx.focus, resolve(node.prop, ctx.prefixes))
            out.append(", ".join(term_text(v) for v in values))
        elif isinstance(node, BaseURL):
            out.append(ctx.base_url)
        elif isinstance(node, ConditionalViz):
            out.append(_expand_conditional(node, ctx))
        elif isinstance(node, GetLink):
            out.append(_expand_link(node, ctx))
        else:  # pragma: no cover - the parser only emits the above
            raise TemplateExpandError(f"unknown AST node: {node!r}")
    return "".join(out)


def _expand_conditional(node: ConditionalViz, ctx: RenderContext) -> str:
    values = values_of(ctx.graph, ctx.focus, resolve(node.prop, ctx.prefixes))
    if not values:
        return ""
    if ctx.registry is None:
        raise TemplateNotFound("no registry available for nested template lookup")
    try:
        nested = ctx.registry.get(node.designer_id, node.design_id)
    except LookupError:
        raise TemplateNotFound(
            f"nested template {node.designer_id}.{node.design_id} is not registered"
        ) from None
    ast = parse_template(nested.body)
    return "".join(expand(ast, ctx.nested(v)) for v in values)


def _expand_link(node: GetLink, ctx: RenderContext) -> str:
    relation = resolve(node.relation, ctx.prefixes)
    values = values_of(ctx.graph, ctx.focus, relation)
    parts = []
    for v in values:
        text = html.escape(term_text(v), quote=False)
        if ctx.source_url is None:
            # without a source URL the link target could never reload the
            # data, so degrade to the plain value
            parts.append(text)
            continue
        params = [
            ("action", "renderOutput"),
            ("object", _link_target(v, node.relation, ctx)),
            ("source", ctx.source_url),
            ("focus", term_text(v)),
        ]
        href = f"{ctx.base_url}?{urlencode(params)}"
        parts.append(f'<a href="{html.escape(href)}">{text}</a>')
    return "".join(parts)


def _link_target(value: Term, relation: ElementRef, ctx: RenderContext) -> str:
    """Coordinate of the element type the link should display.

    Taken from the value's rdf:type in the data graph when one maps back
    through the prefix registry; otherwise the relation's own coordinate
    (the far end will fall back to the default visualization).
    """
    if not value.is_literal:
        for cls in values_of(ctx.graph, value, RDF_TYPE):
            if cls.is_iri:
                dotted = ctx.prefixes.element_text(cls.value)
                if dotted:
                    return dotted
    return relation.text()


# ---------------------------------------------------------------------------
# Element-level rendering

def element_instances(g: Graph, element: ElementRef, prefixes: PrefixRegistry) -> list[Term]:
    """Individuals an element request denotes in a data graph: instances
    of the class, or subjects bearing the property."""
    iri = resolve(element, prefixes)
    found = instances_of(g, iri)
    if found:
        return found
    return sorted({t.subject for t in g.match(None, iri, None)}, key=Term.sort_key)


def empty_notice(element: ElementRef) -> str:
    return f'<div class="semviz-empty">No data for {html.escape(element.text())} in this source.</div>'


def render_element(g: Graph, element: ElementRef, template, ctx: RenderContext) -> str:
    """Expand ``template`` once per individual of ``element``, concatenated
    in stable instance order."""
    ast = parse_template(template.body) if not isinstance(template, tuple) else template
    focuses = [ctx.focus] if ctx.focus is not None else element_instances(g, element, ctx.prefixes)
    if not focuses:
        return empty_notice(element)
    return "".join(expand(ast, replace(ctx, focus=f, graph=g)) for f in focuses)


def _display_term(term: Term, prefixes: PrefixRegistry) -> str:
    if term.is_iri:
        compact = prefixes.compact(term.value)
        return html.escape(compact or term.value, quote=False)
    return html.escape(term_text(term), quote=False)


def default_visualization(g: Graph, element: ElementRef, prefixes: PrefixRegistry,
                          focus: Term | None = None) -> str:
    """Generic property/value table, one block per individual."""
    focuses = [focus] if focus is not None else element_instances(g, element, prefixes)
    if not focuses:
        return empty_notice(element)
    blocks = []
    for subject in focuses:
        rows = "".join(
            f"<tr><td>{_display_term(t.predicate, prefixes)}</td>"
            f"<td>{_display_term(t.object, prefixes)}</td></tr>\n"
            for t in g.match(subject)
        )
        blocks.append(
            '<div class="semviz-default">\n'
            f"<h3>{_display_term(subject, prefixes)}</h3>\n"
            '<table>\n<tr><th>property</th><th>value</th></tr>\n'
            f"{rows}</table>\n</div>\n"
        )
    return "".join(blocks)


# ---------------------------------------------------------------------------
# Input forms

FIELD_PREFIX = "prop:"


class FormFieldError(ValueError):
    pass


def _field_name(prop_iri: Term, prefixes: PrefixRegistry) -> str | None:
    dotted = prefixes.element_text(prop_iri.value)
    if dotted is None:
        return None
    return FIELD_PREFIX + dotted


def _input_field(name: str) -> str:
    return f'<input type="text" name="{html.escape(name)}" />'


def expand_input(ast: TemplateAST, ctx: RenderContext) -> str:
    """Designer input templates: GetP turns into a form field named after
    the property; conditional rendering and links have no meaning while
    collecting data and expand to nothing."""
    out = []
    for node in ast:
        if isinstance(node, RawText):
            out.append(node.source)
        elif isinstance(node, GetP):
            # keep the dotted name exactly as written, minus any version
            out.append(_input_field(FIELD_PREFIX + f"{node.prop.prefix}.{node.prop.local}"))
        elif isinstance(node, BaseURL):
            out.append(ctx.base_url)
        else:
            out.append("")
    return "".join(out)


def render_input_form(element: ElementRef, template, ctx: RenderContext) -> str:
    """A form that collects values for an element's properties and posts
    them back to the engine endpoint as ``prop:prefix.local`` fields."""
    from .describe import describe_element, DescribeError  # local import: avoid cycle

    if ctx.ontology is not None:
        try:
            description = describe_element(ctx.ontology, element, ctx.prefixes)
        except DescribeError:
            description = None
        if description is not None and description.kind == KIND_PROPERTY:
            raise TemplateExpandError(
                f"cannot build an input form for {element.text()}: it is a property, not a class"
            )
    else:
        description = None

    if template is not None:
        inner = expand_input(parse_template(template.body), ctx)
    else:
        field_rows = []
        if description is not None:
            for prop in description.properties:
                name = _field_name(prop.iri, ctx.prefixes)
                if name is None:
                    continue
                label = html.escape(name[len(FIELD_PREFIX):])
                field_rows.append(f"<p><label>{label} {_input_field(name)}</label></p>\n")
        inner = "".join(field_rows)

    dotted = html.escape(element.text())
    return (
        f'<form method="post" action="{html.escape(ctx.base_url)}" class="semviz-input-form">\n'
        f'<input type="hidden" name="action" value="renderInput" />\n'
        f'<input type="hidden" name="object" value="{dotted}" />\n'
        f"{inner}"
        '<p><input type="submit" value="Save" /></p>\n'
        "</form>\n"
    )


def form_to_graph(fields: dict[str, str], element: ElementRef, prefixes: PrefixRegistry) -> Graph:
    """Turn submitted ``prop:*`` fields into a data graph: one fresh blank
    subject typed as the element class, one triple per nonempty field."""
    subject = Term.blank("entry0")
    triples = [Triple(subject, RDF_TYPE, resolve(element, prefixes))]
    for key in sorted(fields):
        value = fields[key]
        if not key.startswith(FIELD_PREFIX):
            raise FormFieldError(f"field key must start with {FIELD_PREFIX!r}: {key!r}")
        try:
            prop = parse_element_ref(key[len(FIELD_PREFIX):])
        except ElementRefError as exc:
            raise FormFieldError(f"bad field key {key!r}: {exc}") from None
        if value == "":
            continue
        triples.append(Triple(subject, resolve(prop, prefixes), Term.literal(value)))
    return Graph(triples)
