"""Minimal RDF data model with Turtle and N-Triples support.

Graphs are immutable once constructed and hold plain set semantics:
loading the same statement twice yields one triple.  Query results
follow a fixed total order on terms so every caller sees the same
sequence on every run.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

log = logging.getLogger(__name__)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

IRI = "iri"
LITERAL = "literal"
BLANK = "blank"

_KIND_RANK = {IRI: 0, BLANK: 1, LITERAL: 2}
_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


class RdfError(Exception):
    """Base class for data-model and serialization failures."""


class UnsupportedFormatError(RdfError):
    pass


class RdfSyntaxError(RdfError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.reason = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Term:
    """One RDF node: an IRI, a literal, or a blank node.

    ``language`` and ``datatype`` apply to literals only and are mutually
    exclusive.  IRIs must be absolute (leading scheme + ``:``).
    """

    kind: str
    value: str
    language: str | None = None
    datatype: str | None = None

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown term kind: {self.kind!r}")
        if self.kind == IRI and not _SCHEME_RE.match(self.value):
            raise ValueError(f"IRI is not absolute: {self.value!r}")
        if self.kind == BLANK and (not self.value or any(c.isspace() for c in self.value)):
            raise ValueError(f"invalid blank node label: {self.value!r}")
        if self.kind != LITERAL and (self.language or self.datatype):
            raise ValueError("language/datatype are only valid on literals")
        if self.language and self.datatype:
            raise ValueError("a literal cannot carry both language and datatype")

    @staticmethod
    def iri(value: str) -> "Term":
        return Term(IRI, value)

    @staticmethod
    def literal(value: str, language: str | None = None, datatype: str | None = None) -> "Term":
        return Term(LITERAL, value, language, datatype)

    @staticmethod
    def blank(label: str) -> "Term":
        return Term(BLANK, label)

    @property
    def is_iri(self) -> bool:
        return self.kind == IRI

    @property
    def is_literal(self) -> bool:
        return self.kind == LITERAL

    @property
    def is_blank(self) -> bool:
        return self.kind == BLANK

    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind], self.value, self.language or "", self.datatype or "")

    def ntriples(self) -> str:
        """Serialize this term in N-Triples surface form."""
        if self.kind == IRI:
            return f"<{self.value}>"
        if self.kind == BLANK:
            return f"_:{self.value}"
        text = f'"{escape_literal(self.value)}"'
        if self.language:
            return f"{text}@{self.language}"
        if self.datatype:
            return f"{text}^^<{self.datatype}>"
        return text

    def __repr__(self):  # compact, keeps pytest diffs readable
        return self.ntriples()


RDF_TYPE = Term.iri(RDF_NS + "type")


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if self.subject.kind == LITERAL:
            raise ValueError("triple subject cannot be a literal")
        if self.predicate.kind != IRI:
            raise ValueError("triple predicate must be an IRI")

    def sort_key(self) -> tuple:
        return (self.subject.sort_key(), self.predicate.sort_key(), self.object.sort_key())

    def __repr__(self):
        return f"{self.subject!r} {self.predicate!r} {self.object!r} ."


class Graph:
    """An immutable set of triples, optionally tagged with the namespace
    of the ontology or data source it was loaded from.

    Equality and hashing look at the triple set only; the namespace is
    descriptive metadata.
    """

    __slots__ = ("namespace", "_triples", "_sorted", "_by_subject")

    def __init__(self, triples=(), namespace: str | None = None):
        if namespace is not None and not _SCHEME_RE.match(namespace):
            raise ValueError(f"graph namespace is not an absolute IRI: {namespace!r}")
        self.namespace = namespace
        self._triples = frozenset(triples)
        self._sorted = tuple(sorted(self._triples, key=Triple.sort_key))
        by_subject: dict[Term, list[Triple]] = {}
        for t in self._sorted:
            by_subject.setdefault(t.subject, []).append(t)
        self._by_subject = {s: tuple(ts) for s, ts in by_subject.items()}

    def __len__(self):
        return len(self._triples)

    def __iter__(self):
        return iter(self._sorted)

    def __contains__(self, triple):
        return triple in self._triples

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __hash__(self):
        return hash(self._triples)

    def __repr__(self):
        return f"<Graph {len(self)} triples ns={self.namespace!r}>"

    @property
    def triples(self) -> frozenset:
        return self._triples

    def match(self, subject=None, predicate=None, object=None):
        """Yield triples matching the given pattern, in stable order.

        ``None`` acts as a wildcard.
        """
        pool = self._by_subject.get(subject, ()) if subject is not None else self._sorted
        for t in pool:
            if predicate is not None and t.predicate != predicate:
                continue
            if object is not None and t.object != object:
                continue
            yield t

    def subjects(self):
        """Distinct subjects in stable order."""
        return sorted(self._by_subject, key=Term.sort_key)

    def terms(self):
        seen = set()
        for t in self._sorted:
            for term in (t.subject, t.predicate, t.object):
                seen.add(term)
        return sorted(seen, key=Term.sort_key)


def values_of(g: Graph, subject: Term, predicate: Term) -> list[Term]:
    """All objects of ``subject predicate ?`` in stable term order."""
    if predicate.kind != IRI:
        raise ValueError("predicate must be an IRI")
    return [t.object for t in g.match(subject, predicate)]


def instances_of(g: Graph, cls: Term) -> list[Term]:
    """All subjects declared as instances of ``cls``, in stable order."""
    if cls.kind != IRI:
        raise ValueError("class must be an IRI")
    return sorted({t.subject for t in g.match(None, RDF_TYPE, cls)}, key=Term.sort_key)


class PrefixRegistry:
    """Maps short prefixes to namespace IRIs, optionally per version.

    A lookup with a version that was never registered falls back to the
    unversioned namespace with a warning; published data uses versions
    too loosely to make this a hard failure.
    """

    def __init__(self):
        self._base: dict[str, str] = {}
        self._versions: dict[str, dict[str, str]] = {}

    def add(self, prefix: str, namespace: str, version: str | None = None) -> None:
        if not prefix or "." in prefix:
            raise ValueError(f"invalid prefix: {prefix!r} (must be nonempty and dot-free)")
        if not _SCHEME_RE.match(namespace):
            raise ValueError(f"namespace is not an absolute IRI: {namespace!r}")
        if version is not None:
            if not version:
                raise ValueError("version must be nonempty")
            self._versions.setdefault(prefix, {})[version] = namespace
            self._base.setdefault(prefix, namespace)
        else:
            self._base[prefix] = namespace

    def __contains__(self, prefix):
        return prefix in self._base

    def namespace(self, prefix: str, version: str | None = None) -> str:
        if prefix not in self._base:
            raise KeyError(f"unknown prefix: {prefix!r}")
        if version is not None:
            versions = self._versions.get(prefix, {})
            if version in versions:
                return versions[version]
            log.warning(
                "no namespace registered for %s version %s; falling back to unversioned",
                prefix, version,
            )
        return self._base[prefix]

    def prefixes(self) -> dict[str, str]:
        return dict(sorted(self._base.items()))

    def compact(self, iri: str) -> str | None:
        """Best display form ``prefix:local`` for an IRI, or None."""
        match = self._longest(iri)
        if match is None:
            return None
        prefix, local = match
        return f"{prefix}:{local}"

    def element_text(self, iri: str) -> str | None:
        """Dotted coordinate ``prefix.local`` for an IRI.

        Only returned when the local part is nonempty and dot-free, so
        the result always parses back as an element coordinate.
        """
        match = self._longest(iri)
        if match is None:
            return None
        prefix, local = match
        if not local or "." in local:
            return None
        return f"{prefix}.{local}"

    def _longest(self, iri: str):
        best = None
        for prefix, ns in self._base.items():
            if iri.startswith(ns) and len(iri) > len(ns):
                if best is None or len(ns) > len(best[1]):
                    best = (prefix, ns)
        if best is None:
            return None
        prefix, ns = best
        return prefix, iri[len(ns):]


# ---------------------------------------------------------------------------
# Parsing

_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}

_XSD_INTEGER = XSD_NS + "integer"
_XSD_DECIMAL = XSD_NS + "decimal"
_XSD_DOUBLE = XSD_NS + "double"
_XSD_BOOLEAN = XSD_NS + "boolean"

# Anonymous nodes get control-character labels during parsing (impossible in
# source text) and are renamed to fresh readable labels afterwards.
_ANON = "\x00anon"

_PN_PREFIX_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_PN_LOCAL_CHARS = re.compile(r"[A-Za-z0-9_\-.%]")
_SAFE_LOCAL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.column = 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def startswith(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def advance(self, n: int = 1) -> str:
        taken = self.text[self.pos:self.pos + n]
        for ch in taken:
            if ch == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
        self.pos += n
        return taken

    def error(self, message: str):
        raise RdfSyntaxError(message, self.line, self.column)

    def skip_ws(self):
        while not self.at_end():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "#":
                while not self.at_end() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def expect(self, s: str, what: str):
        if not self.startswith(s):
            self.error(f"expected {what}")
        self.advance(len(s))

    def read_word(self) -> str:
        start = self.pos
        while not self.at_end() and (self.peek().isalnum() or self.peek() in "_"):
            self.advance()
        return self.text[start:self.pos]

    # -- shared token readers -------------------------------------------

    def read_iriref(self) -> Term:
        self.expect("<", "'<'")
        out = []
        while True:
            if self.at_end():
                self.error("unterminated IRI")
            ch = self.peek()
            if ch == ">":
                self.advance()
                break
            if ch in " \t\r\n<\"{}|^`":
                self.error(f"invalid character {ch!r} in IRI")
            if ch == "\\":
                out.append(self._read_unicode_escape(iri=True))
            else:
                out.append(self.advance())
        value = "".join(out)
        if not _SCHEME_RE.match(value):
            self.error(f"relative IRI not supported: {value!r}")
        return Term.iri(value)

    def _read_unicode_escape(self, iri: bool = False) -> str:
        self.advance()  # backslash
        code = self.peek()
        if code == "u":
            self.advance()
            return self._read_hex(4)
        if code == "U":
            self.advance()
            return self._read_hex(8)
        if not iri and code in _ESCAPES:
            self.advance()
            return _ESCAPES[code]
        self.error(f"invalid escape sequence \\{code}")

    def _read_hex(self, n: int) -> str:
        digits = self.text[self.pos:self.pos + n]
        if len(digits) < n or any(c not in "0123456789abcdefABCDEF" for c in digits):
            self.error(f"expected {n} hex digits in unicode escape")
        self.advance(n)
        return chr(int(digits, 16))

    def read_blank_label(self) -> str:
        self.expect("_:", "blank node label")
        start = self.pos
        while not self.at_end() and _PN_LOCAL_CHARS.match(self.peek()):
            self.advance()
        label = self.text[start:self.pos]
        # a trailing dot belongs to the statement terminator, not the label
        while label.endswith("."):
            label = label[:-1]
            self.pos -= 1
            self.column -= 1
        if not label:
            self.error("empty blank node label")
        return label

    def read_string(self, long_allowed: bool = True) -> str:
        quote = self.peek()
        if quote not in "\"'":
            self.error("expected string literal")
        if long_allowed and self.startswith(quote * 3):
            return self._read_long_string(quote)
        self.advance()
        out = []
        while True:
            if self.at_end():
                self.error("unterminated string literal")
            ch = self.peek()
            if ch == quote:
                self.advance()
                return "".join(out)
            if ch in "\r\n":
                self.error("newline in short string literal")
            if ch == "\\":
                out.append(self._read_unicode_escape())
            else:
                out.append(self.advance())

    def _read_long_string(self, quote: str) -> str:
        self.advance(3)
        out = []
        while True:
            if self.at_end():
                self.error("unterminated long string literal")
            if self.startswith(quote * 3):
                self.advance(3)
                return "".join(out)
            if self.peek() == "\\":
                out.append(self._read_unicode_escape())
            else:
                out.append(self.advance())

    def read_literal_suffix(self, value: str, restricted: bool = False) -> Term:
        if self.peek() == "@":
            self.advance()
            start = self.pos
            while not self.at_end() and (self.peek().isalnum() or self.peek() == "-"):
                self.advance()
            tag = self.text[start:self.pos]
            if not tag or tag.startswith("-") or tag.endswith("-"):
                self.error("malformed language tag")
            return Term.literal(value, language=tag)
        if self.startswith("^^"):
            self.advance(2)
            if restricted or self.peek() == "<":
                dt = self.read_iriref()
            else:
                dt = None  # replaced by caller (prefixed datatype)
            if dt is not None:
                return Term.literal(value, datatype=dt.value)
            raise _NeedPrefixedDatatype(value)
        return Term.literal(value)


class _NeedPrefixedDatatype(Exception):
    def __init__(self, value):
        self.value = value


class _TurtleParser:
    def __init__(self, text: str):
        self.s = _Scanner(text)
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []
        self.anon_count = 0

    def parse(self) -> list[Triple]:
        s = self.s
        while True:
            s.skip_ws()
            if s.at_end():
                break
            if s.startswith("@prefix"):
                self._directive(sparql=False)
            elif s.startswith("@base"):
                s.error("@base is not supported; use absolute IRIs")
            elif self._at_keyword("PREFIX"):
                self._directive(sparql=True)
            elif self._at_keyword("BASE"):
                s.error("BASE is not supported; use absolute IRIs")
            else:
                subject = self._subject()
                self._predicate_object_list(subject)
                s.skip_ws()
                s.expect(".", "'.' at end of statement")
        return self._rename_anons()

    def _at_keyword(self, word: str) -> bool:
        s = self.s
        if s.text[s.pos:s.pos + len(word)].upper() != word:
            return False
        after = s.peek(len(word))
        return after == "" or after in " \t\r\n<"

    def _directive(self, sparql: bool):
        s = self.s
        s.advance(6 if sparql else 7)
        s.skip_ws()
        m = _PN_PREFIX_RE.match(s.text, s.pos)
        prefix = ""
        if m:
            prefix = m.group(0)
            s.advance(len(prefix))
        s.expect(":", "':' after prefix name")
        s.skip_ws()
        iri = s.read_iriref()
        if not sparql:
            s.skip_ws()
            s.expect(".", "'.' after @prefix directive")
        self.prefixes[prefix] = iri.value

    def _subject(self) -> Term:
        s = self.s
        ch = s.peek()
        if ch == "<":
            return s.read_iriref()
        if s.startswith("_:"):
            return Term.blank(s.read_blank_label())
        if ch == "[":
            return self._blank_block()
        if ch in "\"'":
            s.error("literal cannot be a statement subject")
        return self._pname(verb_position=False)

    def _predicate_object_list(self, subject: Term):
        s = self.s
        while True:
            s.skip_ws()
            predicate = self._verb()
            while True:
                s.skip_ws()
                obj = self._object()
                self.triples.append(Triple(subject, predicate, obj))
                s.skip_ws()
                if s.peek() == ",":
                    s.advance()
                    continue
                break
            if s.peek() == ";":
                # consume any run of semicolons, stop before '.' or ']'
                while s.peek() == ";":
                    s.advance()
                    s.skip_ws()
                if s.peek() in ".]" or s.at_end():
                    return
                continue
            return

    def _verb(self) -> Term:
        s = self.s
        if s.peek() == "<":
            return s.read_iriref()
        if s.peek() == "a" and not (s.peek(1).isalnum() or s.peek(1) in "_-:."):
            s.advance()
            return RDF_TYPE
        return self._pname(verb_position=True)

    def _object(self) -> Term:
        s = self.s
        ch = s.peek()
        if ch == "<":
            return s.read_iriref()
        if s.startswith("_:"):
            return Term.blank(s.read_blank_label())
        if ch == "[":
            return self._blank_block()
        if ch == "(":
            s.error("collections are not supported")
        if ch in "\"'":
            value = s.read_string()
            try:
                return s.read_literal_suffix(value)
            except _NeedPrefixedDatatype:
                dt = self._pname(verb_position=False)
                return Term.literal(value, datatype=dt.value)
        if ch.isdigit() or ch in "+-" or (ch == "." and s.peek(1).isdigit()):
            return self._number()
        if s.startswith("true") and not _PN_LOCAL_CHARS.match(s.peek(4) or " "):
            s.advance(4)
            return Term.literal("true", datatype=_XSD_BOOLEAN)
        if s.startswith("false") and not _PN_LOCAL_CHARS.match(s.peek(5) or " "):
            s.advance(5)
            return Term.literal("false", datatype=_XSD_BOOLEAN)
        return self._pname(verb_position=False)

    def _number(self) -> Term:
        s = self.s
        start = s.pos
        if s.peek() in "+-":
            s.advance()
        digits = 0
        while s.peek().isdigit():
            s.advance()
            digits += 1
        datatype = _XSD_INTEGER
        if s.peek() == "." and s.peek(1).isdigit():
            s.advance()
            while s.peek().isdigit():
                s.advance()
            datatype = _XSD_DECIMAL
        if s.peek() in "eE" and (s.peek(1).isdigit() or (s.peek(1) in "+-" and s.peek(2).isdigit())):
            s.advance()
            if s.peek() in "+-":
                s.advance()
            while s.peek().isdigit():
                s.advance()
            datatype = _XSD_DOUBLE
        text = s.text[start:s.pos]
        if digits == 0:
            s.error(f"malformed numeric literal: {text!r}")
        return Term.literal(text, datatype=datatype)

    def _pname(self, verb_position: bool) -> Term:
        s = self.s
        m = _PN_PREFIX_RE.match(s.text, s.pos)
        prefix = ""
        length = 0
        if m:
            prefix = m.group(0)
            length = len(prefix)
        if s.peek(length) != ":":
            s.error("expected IRI, prefixed name, or blank node")
        s.advance(length + 1)
        start = s.pos
        while not s.at_end() and _PN_LOCAL_CHARS.match(s.peek()):
            s.advance()
        local = s.text[start:s.pos]
        while local.endswith("."):
            local = local[:-1]
            s.pos -= 1
            s.column -= 1
        if prefix not in self.prefixes:
            s.error(f"undeclared prefix: {prefix!r}")
        return Term.iri(self.prefixes[prefix] + local)

    def _blank_block(self) -> Term:
        s = self.s
        s.expect("[", "'['")
        node = Term.blank(f"{_ANON}{self.anon_count}")
        self.anon_count += 1
        s.skip_ws()
        if s.peek() == "]":
            s.advance()
            return node
        self._predicate_object_list(node)
        s.skip_ws()
        s.expect("]", "']' closing blank node block")
        return node

    def _rename_anons(self) -> list[Triple]:
        if self.anon_count == 0:
            return self.triples
        used = {t.value for tr in self.triples for t in (tr.subject, tr.object) if t.is_blank}
        mapping = {}
        counter = 0
        for i in range(self.anon_count):
            while f"anon{counter}" in used:
                counter += 1
            mapping[f"{_ANON}{i}"] = Term.blank(f"anon{counter}")
            counter += 1

        def fix(term: Term) -> Term:
            if term.is_blank and term.value in mapping:
                return mapping[term.value]
            return term

        return [Triple(fix(t.subject), t.predicate, fix(t.object)) for t in self.triples]


def _parse_ntriples(text: str) -> list[Triple]:
    s = _Scanner(text)
    triples = []
    while True:
        s.skip_ws()
        if s.at_end():
            break
        ch = s.peek()
        if ch == "<":
            subject = s.read_iriref()
        elif s.startswith("_:"):
            subject = Term.blank(s.read_blank_label())
        else:
            s.error("expected IRI or blank node subject")
        s.skip_ws()
        predicate = s.read_iriref()
        s.skip_ws()
        ch = s.peek()
        if ch == "<":
            obj = s.read_iriref()
        elif s.startswith("_:"):
            obj = Term.blank(s.read_blank_label())
        elif ch == '"':
            value = s.read_string(long_allowed=False)
            obj = s.read_literal_suffix(value, restricted=True)
        else:
            s.error("expected IRI, blank node, or literal object")
        s.skip_ws()
        s.expect(".", "'.' at end of statement")
        triples.append(Triple(subject, predicate, obj))
    return triples


def parse_graph(text: str, format: str = "turtle", namespace: str | None = None) -> Graph:
    """Parse a Turtle or N-Triples document into a Graph."""
    if format == "turtle":
        return Graph(_TurtleParser(text).parse(), namespace=namespace)
    if format == "ntriples":
        return Graph(_parse_ntriples(text), namespace=namespace)
    raise UnsupportedFormatError(f"unsupported RDF format: {format!r}")


def sniff_parse(text: str, namespace: str | None = None) -> Graph:
    """Parse data whose serialization is unknown: Turtle first, then N-Triples."""
    try:
        return parse_graph(text, "turtle", namespace=namespace)
    except RdfSyntaxError as turtle_err:
        try:
            return parse_graph(text, "ntriples", namespace=namespace)
        except RdfSyntaxError:
            raise turtle_err


# ---------------------------------------------------------------------------
# Serialization

def escape_literal(value: str) -> str:
    return (
        value.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def serialize_graph(g: Graph, format: str = "turtle", prefixes: "PrefixRegistry | dict | None" = None) -> str:
    if format == "ntriples":
        return "".join(
            f"{t.subject.ntriples()} {t.predicate.ntriples()} {t.object.ntriples()} .\n" for t in g
        )
    if format != "turtle":
        raise UnsupportedFormatError(f"unsupported RDF format: {format!r}")

    if isinstance(prefixes, PrefixRegistry):
        prefix_map = prefixes.prefixes()
    else:
        prefix_map = dict(prefixes or {})
    by_ns = sorted(prefix_map.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    used: set[str] = set()

    def render(term: Term, verb: bool = False) -> str:
        if verb and term == RDF_TYPE:
            return "a"
        if term.is_iri:
            for prefix, ns in by_ns:
                if term.value.startswith(ns):
                    local = term.value[len(ns):]
                    if local == "" or _SAFE_LOCAL_RE.match(local):
                        used.add(prefix)
                        return f"{prefix}:{local}"
            return f"<{term.value}>"
        return term.ntriples()

    body_lines = []
    for subject in g.subjects():
        rows = list(g.match(subject))
        groups: dict[Term, list[Term]] = {}
        for t in rows:
            groups.setdefault(t.predicate, []).append(t.object)
        pred_parts = []
        for predicate in sorted(groups, key=Term.sort_key):
            objs = ", ".join(render(o) for o in sorted(groups[predicate], key=Term.sort_key))
            pred_parts.append(f"{render(predicate, verb=True)} {objs}")
        joined = " ;\n    ".join(pred_parts)
        body_lines.append(f"{render(subject)} {joined} .\n")
    if not body_lines:
        return ""
    header = "".join(
        f"@prefix {p}: <{ns}> .\n" for p, ns in sorted(prefix_map.items()) if p in used
    )
    if header:
        header += "\n"
    return header + "\n".join(body_lines)


# ---------------------------------------------------------------------------
# Blank-node isomorphism

def isomorphic(a: Graph, b: Graph) -> bool:
    """True when the graphs are equal up to a renaming of blank nodes."""
    if len(a) != len(b):
        return False

    def split(g: Graph):
        ground, blankful = set(), []
        for t in g:
            if t.subject.is_blank or t.object.is_blank:
                blankful.append(t)
            else:
                ground.add(t)
        return ground, blankful

    ground_a, blank_a = split(a)
    ground_b, blank_b = split(b)
    if ground_a != ground_b or len(blank_a) != len(blank_b):
        return False
    if not blank_a:
        return True

    def signature_map(triples):
        # signatures are plain tuples so they compare across graphs
        sig: dict[Term, list] = {}
        for t in triples:
            s_blank, o_blank = t.subject.is_blank, t.object.is_blank
            if s_blank:
                other = () if o_blank else t.object.sort_key()
                sig.setdefault(t.subject, []).append(("s", t.predicate.sort_key(), other))
            if o_blank:
                other = () if s_blank else t.subject.sort_key()
                sig.setdefault(t.object, []).append(("o", t.predicate.sort_key(), other))
        return {n: tuple(sorted(entries)) for n, entries in sig.items()}

    sig_a = signature_map(blank_a)
    sig_b = signature_map(blank_b)
    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return False

    nodes_a = sorted(sig_a, key=Term.sort_key)
    target_set = set(blank_b)

    def apply(mapping):
        for t in blank_a:
            s = mapping.get(t.subject, t.subject) if t.subject.is_blank else t.subject
            o = mapping.get(t.object, t.object) if t.object.is_blank else t.object
            yield Triple(s, t.predicate, o)

    def backtrack(i, mapping, taken):
        if i == len(nodes_a):
            return set(apply(mapping)) == target_set
        node = nodes_a[i]
        for candidate in sig_b:
            if candidate in taken or sig_b[candidate] != sig_a[node]:
                continue
            mapping[node] = candidate
            taken.add(candidate)
            if backtrack(i + 1, mapping, taken):
                return True
            del mapping[node]
            taken.discard(candidate)
        return False

    return backtrack(0, {}, set())
