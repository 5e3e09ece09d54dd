"""Pick the most adequate template for a user profile.

A profile states up to three facets: the device protocol, an aesthetic
preference, and visual impairments.  Profiles, templates, and the
auxiliary ontologies that give those facets meaning live in different
namespaces, so terms are first joined through an equivalence closure
over alignment links (sameAs / equivalentClass / equivalentProperty).

Scoring is a hard protocol filter plus a weighted additive cost:

    total = aesthetic tree distance
          + 2 * (primary colour forbidden) + 1 * (secondary colour forbidden)

Lower is better; ties break on the template identifier.  Colour
conflicts are soft on purpose: a template whose primary colour an
impairment forbids stays eligible and the conflict is recorded in the
score trace, so a catalogue with no clean alternative still renders.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rdf import Graph, OWL_NS, Term, values_of
from .registry import Template

PROFILE_NS = "http://profiles.example/ns#"
PROTOCOL_NS = "http://ontologies.example/protocol#"
STYLE_NS = "http://ontologies.example/style#"
IMPAIRMENT_NS = "http://ontologies.example/impairment#"

PROFILE_CLASS = Term.iri(PROFILE_NS + "UserProfile")
P_DEVICE_PROTOCOL = Term.iri(PROFILE_NS + "deviceProtocol")
P_PREFERS_STYLE = Term.iri(PROFILE_NS + "prefersStyle")
P_HAS_IMPAIRMENT = Term.iri(PROFILE_NS + "hasImpairment")

RENDERS_MARKUP = Term.iri(PROTOCOL_NS + "rendersMarkup")
PARENT_STYLE = Term.iri(STYLE_NS + "parentStyle")
FORBIDS_COLOR = Term.iri(IMPAIRMENT_NS + "forbidsColor")

SAME_AS = Term.iri(OWL_NS + "sameAs")
EQUIVALENT_CLASS = Term.iri(OWL_NS + "equivalentClass")
EQUIVALENT_PROPERTY = Term.iri(OWL_NS + "equivalentProperty")

_LINK_PREDICATES = {
    SAME_AS: "sameAs",
    EQUIVALENT_CLASS: "equivalentClass",
    EQUIVALENT_PROPERTY: "equivalentProperty",
}

KNOWN_COLORS = frozenset({
    "red", "green", "blue", "yellow", "orange", "purple", "brown", "pink",
    "black", "white", "gray", "grey", "cyan", "magenta",
})


class MatcherError(Exception):
    pass


class NoEligibleTemplate(MatcherError):
    pass


@dataclass(frozen=True)
class AlignmentLink:
    left: Term
    right: Term
    kind: str  # sameAs | equivalentClass | equivalentProperty


@dataclass(frozen=True)
class AlignmentSet:
    links: frozenset

    @classmethod
    def from_graph(cls, g: Graph) -> "AlignmentSet":
        links = set()
        for t in g:
            kind = _LINK_PREDICATES.get(t.predicate)
            if kind is not None:
                links.add(AlignmentLink(t.subject, t.object, kind))
        return cls(frozenset(links))


class EquivalenceClosure:
    """Partition of terms induced by alignment links (union-find)."""

    def __init__(self, links):
        self._parent: dict[Term, Term] = {}
        roles: dict[Term, str] = {}
        for link in sorted(links, key=lambda l: (l.left.sort_key(), l.right.sort_key(), l.kind)):
            for term in (link.left, link.right):
                prior = roles.get(term)
                if prior is not None and prior != link.kind:
                    raise MatcherError(
                        f"term {term!r} appears in both {prior} and {link.kind} links; "
                        "link kinds must partition by term role"
                    )
                roles[term] = link.kind
                self._parent.setdefault(term, term)
            self._union(link.left, link.right)

    def _find(self, t: Term) -> Term:
        parent = self._parent
        root = t
        while parent[root] != root:
            root = parent[root]
        while parent[t] != root:  # path compression
            parent[t], t = root, parent[t]
        return root

    def _union(self, a: Term, b: Term) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra != rb:
            # deterministic root: smaller term wins
            if rb.sort_key() < ra.sort_key():
                ra, rb = rb, ra
            self._parent[rb] = ra

    def canon(self, t: Term) -> Term:
        if t not in self._parent:
            return t
        return self._find(t)

    def class_of(self, t: Term) -> frozenset:
        if t not in self._parent:
            return frozenset({t})
        root = self._find(t)
        return frozenset(x for x in self._parent if self._find(x) == root)

    def classes(self) -> list[frozenset]:
        groups: dict[Term, set[Term]] = {}
        for t in self._parent:
            groups.setdefault(self._find(t), set()).add(t)
        return [frozenset(g) for _, g in sorted(groups.items(), key=lambda kv: kv[0].sort_key())]

    def same(self, a: Term, b: Term) -> bool:
        return self.canon(a) == self.canon(b)


def equivalence_closure(alignments: AlignmentSet) -> EquivalenceClosure:
    return EquivalenceClosure(alignments.links)


@dataclass(frozen=True)
class UserProfile:
    subject: Term
    protocol: Term | None = None
    aesthetic: Term | None = None
    impairments: frozenset = frozenset()


def extract_profile(g: Graph, subject: Term, closure: EquivalenceClosure) -> UserProfile:
    """Read a profile's facets, recognizing facet predicates and values
    through the alignment closure.  Missing facets stay absent."""
    if not any(subject in (t.subject, t.object) for t in g):
        raise MatcherError(f"profile subject {subject!r} not found in the profile graph")

    protocol = None
    aesthetic = None
    impairments = []
    for t in g.match(subject):
        predicate = closure.canon(t.predicate)
        if closure.same(predicate, P_DEVICE_PROTOCOL):
            if protocol is None:
                protocol = closure.canon(t.object)
        elif closure.same(predicate, P_PREFERS_STYLE):
            if aesthetic is None:
                aesthetic = closure.canon(t.object)
        elif closure.same(predicate, P_HAS_IMPAIRMENT):
            impairments.append(closure.canon(t.object))
    return UserProfile(subject, protocol, aesthetic, frozenset(impairments))


def find_profile_subject(g: Graph, closure: EquivalenceClosure) -> Term | None:
    """Locate the profile individual in a fetched graph: an explicitly
    typed profile first, otherwise any subject bearing a facet."""
    from .rdf import RDF_TYPE

    typed = [t.subject for t in g.match(None, RDF_TYPE) if closure.same(t.object, PROFILE_CLASS)]
    if typed:
        return sorted(typed, key=Term.sort_key)[0]
    facets = (P_DEVICE_PROTOCOL, P_PREFERS_STYLE, P_HAS_IMPAIRMENT)
    bearing = {
        t.subject for t in g
        if any(closure.same(t.predicate, facet) for facet in facets)
    }
    if bearing:
        return sorted(bearing, key=Term.sort_key)[0]
    return None


class AuxOntologies:
    """The three helper vocabularies the matcher consults.

    protocol -> markup format; an aesthetic taxonomy tree (child ->
    parent edges, distance is undirected path length); impairment ->
    forbidden colour names.
    """

    def __init__(self, protocol_markup: dict, style_parent: dict, impairment_colors: dict):
        self.protocol_markup = dict(protocol_markup)
        self.style_parent = dict(style_parent)
        self.impairment_colors = {k: frozenset(v) for k, v in impairment_colors.items()}
        self._check_acyclic()
        for impairment, colors in self.impairment_colors.items():
            unknown = {c for c in colors if c not in KNOWN_COLORS}
            if unknown:
                raise MatcherError(
                    f"impairment rule for {impairment!r} names unknown colours: {sorted(unknown)}"
                )
        self._adjacency: dict[Term, set[Term]] = {}
        for child, parent in self.style_parent.items():
            self._adjacency.setdefault(child, set()).add(parent)
            self._adjacency.setdefault(parent, set()).add(child)
        self._names = {}
        for node in self._adjacency:
            self._names.setdefault(_local_name(node).lower(), node)
        self.diameter = self._compute_diameter()

    @classmethod
    def from_graphs(cls, protocol: Graph | None, style: Graph | None,
                    impairment: Graph | None) -> "AuxOntologies":
        markup = {}
        if protocol is not None:
            for t in protocol.match(None, RENDERS_MARKUP):
                markup[t.subject] = t.object.value
        parents = {}
        if style is not None:
            for t in style.match(None, PARENT_STYLE):
                if t.subject in parents:
                    raise MatcherError(f"style {t.subject!r} has two parents; taxonomy must be a tree")
                parents[t.subject] = t.object
        colors = {}
        if impairment is not None:
            for t in impairment.match(None, FORBIDS_COLOR):
                colors.setdefault(t.subject, set()).add(t.object.value.strip().lower())
        return cls(markup, parents, colors)

    def _check_acyclic(self):
        for start in self.style_parent:
            seen = {start}
            node = start
            while node in self.style_parent:
                node = self.style_parent[node]
                if node in seen:
                    raise MatcherError("style taxonomy contains a cycle")
                seen.add(node)

    def _distances_from(self, start: Term) -> dict[Term, int]:
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for node in frontier:
                for neighbour in self._adjacency.get(node, ()):
                    if neighbour not in dist:
                        dist[neighbour] = dist[node] + 1
                        nxt.append(neighbour)
            frontier = nxt
        return dist

    def _compute_diameter(self) -> int:
        best = 0
        for node in self._adjacency:
            dist = self._distances_from(node)
            if dist:
                best = max(best, max(dist.values()))
        return best

    def style_node(self, term: Term | None = None, name: str | None = None,
                   closure: EquivalenceClosure | None = None) -> Term | None:
        """Find the taxonomy node for a term (through its equivalence
        class) or for a bare style name."""
        if term is not None:
            candidates = closure.class_of(term) if closure else {term}
            for c in sorted(candidates, key=Term.sort_key):
                if c in self._adjacency:
                    return c
            for c in sorted(candidates, key=Term.sort_key):
                node = self._names.get(_local_name(c).lower())
                if node is not None:
                    return node
        if name is not None:
            return self._names.get(name.strip().lower())
        return None

    def distance(self, a: Term, b: Term) -> int:
        if a == b:
            return 0
        return self._distances_from(a).get(b, self.diameter)

    def markup_for(self, protocol: Term, closure: EquivalenceClosure) -> str | None:
        for c in sorted(closure.class_of(protocol), key=Term.sort_key):
            if c in self.protocol_markup:
                return self.protocol_markup[c]
        return None

    def forbidden_colors(self, impairments, closure: EquivalenceClosure) -> dict[Term, frozenset]:
        found = {}
        for impairment in sorted(impairments, key=Term.sort_key):
            for c in sorted(closure.class_of(impairment), key=Term.sort_key):
                if c in self.impairment_colors:
                    found[impairment] = self.impairment_colors[c]
                    break
        return found


def _local_name(term: Term) -> str:
    value = term.value
    for sep in ("#", "/", ":"):
        if sep in value:
            value = value.rsplit(sep, 1)[1]
            if value:
                break
    return value or term.value


@dataclass(frozen=True)
class MatchScore:
    hard_pass: bool
    aesthetic_distance: int
    color_penalty: int
    total: int
    trace: tuple


DEFAULT_WEIGHTS = (1, 2, 1)  # distance, primary colour hit, secondary colour hit


def score(profile: UserProfile, template: Template, aux: AuxOntologies,
          closure: EquivalenceClosure, weights: tuple = DEFAULT_WEIGHTS) -> MatchScore:
    distance_w, primary_w, secondary_w = weights
    trace = []

    hard_pass = True
    if profile.protocol is None:
        trace.append("no device protocol in profile; any markup format accepted")
    else:
        required = aux.markup_for(profile.protocol, closure)
        if required is None:
            trace.append(
                f"protocol {_local_name(profile.protocol)} has no markup mapping; treated as neutral"
            )
        elif required == template.features.markup_format:
            trace.append(
                f"protocol {_local_name(profile.protocol)} requires {required}; "
                f"template is coded in {template.features.markup_format}: pass"
            )
        else:
            hard_pass = False
            trace.append(
                f"protocol {_local_name(profile.protocol)} requires {required}; "
                f"template is coded in {template.features.markup_format}: excluded"
            )

    distance = 0
    if profile.aesthetic is None:
        trace.append("no aesthetic preference in profile; distance 0")
    else:
        want = aux.style_node(term=profile.aesthetic, closure=closure)
        have = aux.style_node(name=template.features.aesthetic)
        if want is None or have is None:
            distance = aux.diameter
            missing = "preference" if want is None else f"template style {template.features.aesthetic!r}"
            trace.append(f"{missing} not in the style taxonomy; distance set to diameter {distance}")
        else:
            distance = aux.distance(want, have)
            trace.append(
                f"aesthetic {_local_name(want)} vs {_local_name(have)}: tree distance {distance}"
            )

    penalty = 0
    rules = aux.forbidden_colors(profile.impairments, closure)
    forbidden = frozenset().union(*rules.values()) if rules else frozenset()
    for impairment, colors in sorted(rules.items(), key=lambda kv: kv[0].sort_key()):
        trace.append(
            f"impairment {_local_name(impairment)} forbids colours: {', '.join(sorted(colors))}"
        )
    primary = template.features.primary_color.strip().lower()
    secondary = template.features.secondary_color.strip().lower()
    if primary in forbidden:
        penalty += primary_w
        trace.append(
            f"colour conflict: primary colour '{primary}' is forbidden; "
            f"soft penalty +{primary_w}, template stays eligible"
        )
    if secondary in forbidden:
        penalty += secondary_w
        trace.append(
            f"colour conflict: secondary colour '{secondary}' is forbidden; "
            f"soft penalty +{secondary_w}, template stays eligible"
        )

    total = distance_w * distance + penalty
    trace.append(f"total = {distance_w}*{distance} + {penalty} = {total}")
    return MatchScore(hard_pass, distance, penalty, total, tuple(trace))


def score_all(profile: UserProfile, candidates, aux: AuxOntologies,
              closure: EquivalenceClosure, weights: tuple = DEFAULT_WEIGHTS):
    """Score every candidate, ordered by template identifier."""
    ordered = sorted(candidates, key=lambda t: t.full_id)
    return [(t, score(profile, t, aux, closure, weights)) for t in ordered]


def select_best(profile: UserProfile, candidates, aux: AuxOntologies,
                closure: EquivalenceClosure, weights: tuple = DEFAULT_WEIGHTS) -> Template:
    """The eligible candidate with the lowest total; identifier breaks ties."""
    scored = score_all(profile, candidates, aux, closure, weights)
    eligible = [(t, s) for t, s in scored if s.hard_pass]
    if not eligible:
        raise NoEligibleTemplate("no template passes the protocol filter")
    best = min(eligible, key=lambda pair: (pair[1].total, pair[0].full_id))
    return best[0]
