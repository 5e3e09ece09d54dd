import pytest

from semviz.describe import DescribeError, describe_element, render_description
from semviz.rdf import Graph, Term, Triple, parse_graph
from semviz.refs import parse_element_ref

FOAF = "http://xmlns.com/foaf/0.1/"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"


def _props(description):
    return [p.iri.value for p in description.properties]


def test_person_lists_direct_domain_properties(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.Person"), prefixes)
    assert d.kind == "class"
    assert FOAF + "name" in _props(d)
    assert FOAF + "knows" in _props(d)


def test_inherited_domain_through_superclass(foaf_mini, prefixes):
    # mbox is declared on Agent; Person subclasses Agent
    d = describe_element(foaf_mini, parse_element_ref("foaf.Person"), prefixes)
    assert d.superclasses == (Term.iri(FOAF + "Agent"),)
    assert FOAF + "mbox" in _props(d)
    # the superclass itself gets only its own properties
    agent = describe_element(foaf_mini, parse_element_ref("foaf.Agent"), prefixes)
    assert _props(agent) == [FOAF + "mbox"]


def test_class_with_no_declared_properties(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.Document"), prefixes)
    assert d.properties == ()


def test_global_properties_listed_separately(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.Person"), prefixes)
    assert [p.iri.value for p in d.global_properties] == [FOAF + "homepage"]
    assert FOAF + "homepage" not in _props(d)


def test_property_description_carries_domain_and_range(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.knows"), prefixes)
    assert d.kind == "property"
    assert d.domains == (Term.iri(FOAF + "Person"),)
    assert d.ranges == (Term.iri(FOAF + "Person"),)


def test_relation_detection_for_links(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.Person"), prefixes)
    by_name = {p.iri.value: p for p in d.properties}
    assert by_name[FOAF + "knows"].is_relation
    assert not by_name[FOAF + "name"].is_relation


def test_absent_element_is_an_error(foaf_mini, prefixes):
    with pytest.raises(DescribeError):
        describe_element(foaf_mini, parse_element_ref("foaf.Missing"), prefixes)


def test_description_is_monotone_under_new_axioms(foaf_mini, prefixes):
    before = describe_element(foaf_mini, parse_element_ref("foaf.Person"), prefixes)
    extended = Graph(
        set(foaf_mini.triples) | {
            Triple(Term.iri(FOAF + "nick"), Term.iri(RDFS + "domain"), Term.iri(FOAF + "Person")),
        }
    )
    after = describe_element(extended, parse_element_ref("foaf.Person"), prefixes)
    assert set(_props(before)) <= set(_props(after))
    assert FOAF + "nick" in _props(after)


def test_redundant_subclass_edge_is_a_fixpoint(foaf_mini, prefixes):
    ref = parse_element_ref("foaf.Person")
    once = describe_element(foaf_mini, ref, prefixes)
    again = describe_element(foaf_mini, ref, prefixes)
    assert once == again
    redundant = Graph(
        set(foaf_mini.triples) | {
            Triple(Term.iri(FOAF + "Person"), Term.iri(RDFS + "subClassOf"), Term.iri(FOAF + "Agent")),
        }
    )
    assert describe_element(redundant, ref, prefixes) == once


def test_subclass_cycle_terminates(prefixes):
    text = (
        f"<{FOAF}Person> <{RDFS}subClassOf> <{FOAF}Agent> .\n"
        f"<{FOAF}Agent> <{RDFS}subClassOf> <{FOAF}Person> .\n"
    )
    g = parse_graph(text, "ntriples")
    d = describe_element(g, parse_element_ref("foaf.Person"), prefixes)
    assert Term.iri(FOAF + "Agent") in d.superclasses


def test_render_description_shape(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.Person"), prefixes)
    text = render_description(d, prefixes)
    lines = text.splitlines()
    assert lines[0] == "element foaf.Person"
    assert lines[1] == "kind: class"
    assert "  foaf.knows (range: foaf.Person) [link]" in lines
    assert "  foaf.name (range: rdfs.Literal)" in lines
    # deterministic across runs
    assert render_description(d, prefixes) == text


def test_render_description_header_only_for_bare_class(prefixes):
    g = parse_graph(
        f"<{FOAF}Document> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <{RDFS}Class> .",
        "ntriples",
    )
    d = describe_element(g, parse_element_ref("foaf.Document"), prefixes)
    assert render_description(d, prefixes) == "element foaf.Document\nkind: class\n"


def test_property_count_matches_line_count(foaf_mini, prefixes):
    d = describe_element(foaf_mini, parse_element_ref("foaf.Agent"), prefixes)
    text = render_description(d, prefixes)
    section = text.split("properties:\n", 1)[1].split("global properties:")[0]
    assert len([l for l in section.splitlines() if l.startswith("  ")]) == len(d.properties)
