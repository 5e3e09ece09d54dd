import json
import xml.etree.ElementTree as ET
from urllib.parse import urlencode

import pytest

from semviz.channel import (
    BadRequest, Engine, FetchError, fetch_source, parse_request,
)
from semviz.config import ConfigError, load_config
from semviz.fixtures import fixture_text
from semviz.rdf import Term, isomorphic, parse_graph
from semviz.refs import parse_element_ref
from semviz.registry import Template, TemplateFeatures

from conftest import write_config, wsgi_call

CARD_BODY = "<div><h2>[{OmemoGetP propName='foaf.name'}]</h2></div>"


def register_card(engine, design="namecard", kind="output", markup="XHTML",
                  aesthetic="minimal", primary="red", secondary="yellow",
                  body=CARD_BODY, target="foaf.Person"):
    engine.registry.register(Template(
        "studio", design, parse_element_ref(target), body,
        TemplateFeatures(kind=kind, markup_format=markup, aesthetic=aesthetic,
                         primary_color=primary, secondary_color=secondary),
    ))


# -- parse_request ------------------------------------------------------------

def test_parse_request_valid_get():
    req = parse_request("GET", {
        "action": "renderOutput", "object": "foaf.Person",
        "source": "http://ex.org/d.ttl", "provider": "user3.test",
    })
    assert req.action == "renderOutput"
    assert req.object.text() == "foaf.Person"
    assert req.provider == ("user3", "test")
    assert req.output_format == "HTML"


@pytest.mark.parametrize("params", [
    {},                                                            # no action
    {"action": "renderAll", "object": "foaf.Person", "source": "http://x/d"},
    {"action": "renderOutput", "source": "http://x/d"},            # no object
    {"action": "renderOutput", "object": "Person", "source": "http://x/d"},
    {"action": "renderOutput", "object": "foaf.Person"},           # GET without source
    {"action": "renderOutput", "object": "foaf.Person", "source": "http://x/d",
     "provider": "nodot"},
    {"action": "renderOutput", "object": "foaf.Person", "source": "http://x/d",
     "provider": "a.b.c"},
    {"action": "renderOutput", "object": "foaf.Person", "source": "http://x/d",
     "outputFormat": "PDF"},
])
def test_parse_request_rejections_get(params):
    with pytest.raises(BadRequest):
        parse_request("GET", params)


def test_parse_request_post_rules():
    with pytest.raises(BadRequest):  # POST may not carry source
        parse_request("POST", {"action": "renderOutput", "object": "foaf.Person",
                               "source": "http://x/d"}, "data")
    with pytest.raises(BadRequest):  # POST renderOutput needs data
        parse_request("POST", {"action": "renderOutput", "object": "foaf.Person"})
    req = parse_request("POST", {"action": "renderOutput", "object": "foaf.Person",
                                 "data": "<urn:a> <urn:b> <urn:c> ."})
    assert req.body.startswith("<urn:a>")
    req = parse_request("POST", {"action": "renderOutput", "object": "foaf.Person"},
                        "<urn:a> <urn:b> <urn:c> .")
    assert req.body.startswith("<urn:a>")


def test_parse_request_profile_is_get_only():
    req = parse_request("POST", {"action": "renderOutput", "object": "foaf.Person",
                                 "userProfile": "http://x/p", "data": "x"})
    assert req.user_profile is None
    assert "userProfile" in req.ignored_params


def test_parse_request_collects_unknown_params():
    req = parse_request("GET", {"action": "renderInput", "object": "foaf.Person",
                                "wibble": "1"})
    assert req.ignored_params == ("wibble",)


def test_parse_request_form_fields_only_on_post():
    req = parse_request("POST", {"action": "renderInput", "object": "foaf.Person",
                                 "prop:foaf.name": "Ana"})
    assert req.fields == {"prop:foaf.name": "Ana"}
    with pytest.raises(BadRequest):  # POST renderInput without fields
        parse_request("POST", {"action": "renderInput", "object": "foaf.Person"})


def test_parse_request_focus_extension():
    req = parse_request("GET", {"action": "renderOutput", "object": "foaf.Person",
                                "source": "http://x/d", "focus": "http://x/alice"})
    assert req.focus == Term.iri("http://x/alice")
    req = parse_request("GET", {"action": "renderOutput", "object": "foaf.Person",
                                "source": "http://x/d", "focus": "_:b1"})
    assert req.focus == Term.blank("b1")


# -- handle over WSGI --------------------------------------------------------

def render_get(engine, **params):
    return wsgi_call(engine.wsgi_app, "GET", "/render", urlencode(params))


def render_post(engine, body=b"", content_type="application/x-www-form-urlencoded", **params):
    return wsgi_call(engine.wsgi_app, "POST", "/render", urlencode(params),
                     body=body, content_type=content_type)


def test_get_render_with_template_matches_render_element(engine, people, prefixes):
    from semviz.templates import RenderContext, render_element

    register_card(engine)
    status, headers, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", provider="studio.namecard",
    )
    assert status == 200
    assert headers["Content-Type"].startswith("text/html")
    # oracle: the page embeds exactly what render_element produces for
    # the fetched graph
    expected = render_element(
        people, parse_element_ref("foaf.Person"), engine.registry.get("studio", "namecard"),
        RenderContext(graph=people, focus=None, base_url=engine.base_url,
                      prefixes=engine.prefixes, source_url="http://data.example/people.ttl",
                      registry=engine.registry, ontology=engine.ontology),
    )
    assert expected in body
    for name in ("Alice", "Bob", "Carol", "Dave", "Erin"):
        assert f"<h2>{name}</h2>" in body


def test_get_render_is_side_effect_free(engine):
    def files():
        return sorted(p.relative_to(engine.config.storage_dir)
                      for p in engine.config.storage_dir.rglob("*") if p.is_file())

    before = files()
    for _ in range(2):
        status, _, _ = render_get(
            engine, action="renderOutput", object="foaf.Person",
            source="http://data.example/people.ttl",
        )
        assert status == 200
    status, _, _ = render_get(engine, action="renderInput", object="foaf.Person")
    assert status == 200
    assert files() == before  # only form submissions may write


def test_get_render_default_visualization_without_provider(engine):
    status, _, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl",
    )
    assert status == 200
    assert 'class="semviz-default"' in body
    assert "<td>foaf:name</td><td>Alice</td>" in body


def test_post_render_equals_get_render(engine):
    register_card(engine)
    data = fixture_text("people.ttl")
    status_get, _, body_get = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", provider="studio.namecard",
    )
    status_post, _, body_post = render_post(
        engine, body=data.encode(), content_type="text/turtle",
        action="renderOutput", object="foaf.Person", provider="studio.namecard",
    )
    assert (status_get, status_post) == (200, 200)
    assert body_get == body_post


def test_post_data_field_equivalent_to_raw_body(engine):
    data = fixture_text("people.ttl")
    _, _, via_field = render_post(
        engine, body=urlencode({
            "action": "renderOutput", "object": "foaf.Person", "data": data,
        }).encode(),
    )
    _, _, via_body = render_post(
        engine, body=data.encode(), content_type="text/turtle",
        action="renderOutput", object="foaf.Person",
    )
    assert via_field == via_body


def test_profile_driven_selection(engine):
    register_card(engine, design="plain", markup="HTML", aesthetic="simple",
                  primary="black", secondary="white",
                  body="<p>plain [{OmemoGetP propName='foaf.name'}]</p>")
    register_card(engine, design="design67")
    status, _, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl",
        userProfile="http://profiles.example/user34.ttl",
    )
    assert status == 200
    assert "<h2>Alice</h2>" in body      # design67's card, not the plain one
    assert "plain Alice" not in body


def test_profile_with_no_eligible_template_falls_back(engine):
    register_card(engine, design="plain", markup="HTML",
                  body="<p>plain [{OmemoGetP propName='foaf.name'}]</p>")
    status, _, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl",
        userProfile="http://profiles.example/user34.ttl",
    )
    assert status == 200
    assert 'class="semviz-default"' in body


def test_unknown_provider_is_404(engine):
    status, _, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", provider="studio.ghost",
    )
    assert status == 404
    assert "semviz-error" in body


def test_provider_target_mismatch_is_400(engine):
    register_card(engine, target="foaf.Document")
    status, _, _ = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", provider="studio.namecard",
    )
    assert status == 400


def test_input_template_cannot_render_output(engine):
    register_card(engine, design="form", kind="input")
    status, _, _ = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", provider="studio.form",
    )
    assert status == 400


def test_unreachable_source_is_502(engine):
    status, _, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://unreachable.example/x.ttl",
    )
    assert status == 502
    assert "cannot fetch" in body


def test_unparseable_source_is_502(engine, stub_fetcher):
    stub_fetcher["http://data.example/broken.ttl"] = "{{{ not rdf"
    status, _, _ = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/broken.ttl",
    )
    assert status == 502


def test_unparseable_post_payload_is_400(engine):
    status, _, _ = render_post(engine, body=b"((garbage))", content_type="text/turtle",
                               action="renderOutput", object="foaf.Person")
    assert status == 400


def test_ignored_params_surface_in_header(engine):
    status, headers, _ = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", gadget="1",
    )
    assert status == 200
    assert headers.get("X-Ignored-Params") == "gadget"


def test_xhtml_output_is_well_formed_xml(engine):
    register_card(engine)
    for extra in ({}, {"provider": "studio.namecard"}):
        status, headers, body = render_get(
            engine, action="renderOutput", object="foaf.Person",
            source="http://data.example/people.ttl", outputFormat="XHTML", **extra,
        )
        assert status == 200
        assert headers["Content-Type"].startswith("application/xhtml+xml")
        ET.fromstring(body)


def test_render_input_form_and_submission(engine):
    status, _, form = render_get(engine, action="renderInput", object="foaf.Person")
    assert status == 200
    assert 'name="prop:foaf.name"' in form

    status, _, body = render_post(
        engine,
        body=urlencode({
            "action": "renderInput", "object": "foaf.Person",
            "prop:foaf.name": "Ana", "prop:foaf.mbox": "ana@x.example",
        }).encode(),
    )
    assert status == 200
    assert "Ana" in body and "ana@x.example" in body
    stored = list(engine.submissions_dir.glob("sub-*.ttl"))
    assert len(stored) == 1
    g = parse_graph(stored[0].read_text())
    assert any(t.object == Term.literal("Ana") for t in g)


def test_designer_input_template_flow(engine):
    register_card(engine, design="form", kind="input",
                  body="<p>your name [{OmemoGetP propName='foaf.name'}]</p>")
    status, _, form = render_get(engine, action="renderInput", object="foaf.Person",
                                 provider="studio.form")
    assert status == 200
    assert "your name " in form
    assert 'name="prop:foaf.name"' in form
    # an output template cannot serve the form
    register_card(engine, design="out")
    status, _, _ = render_get(engine, action="renderInput", object="foaf.Person",
                              provider="studio.out")
    assert status == 400


def test_focus_restricts_rendering(engine):
    register_card(engine)
    status, _, body = render_get(
        engine, action="renderOutput", object="foaf.Person",
        source="http://data.example/people.ttl", provider="studio.namecard",
        focus="http://data.example/people#carol",
    )
    assert status == 200
    assert "<h2>Carol</h2>" in body
    assert "<h2>Alice</h2>" not in body


def test_multipart_form_submission(engine):
    boundary = "XbOuNdArYx"
    parts = []
    for key, value in [("action", "renderInput"), ("object", "foaf.Person"),
                       ("prop:foaf.name", "Rosa")]:
        parts.append(
            f"--{boundary}\r\nContent-Disposition: form-data; name=\"{key}\"\r\n\r\n{value}\r\n"
        )
    payload = ("".join(parts) + f"--{boundary}--\r\n").encode()
    status, _, body = wsgi_call(
        engine.wsgi_app, "POST", "/render", "", body=payload,
        content_type=f"multipart/form-data; boundary={boundary}",
    )
    assert status == 200
    assert "Rosa" in body


# -- companion endpoints ------------------------------------------------------

def test_metadata_endpoint_round_trips(engine):
    register_card(engine)
    status, headers, text = wsgi_call(engine.wsgi_app, "GET", "/metadata")
    assert status == 200
    assert headers["Content-Type"].startswith("text/turtle")
    assert isomorphic(parse_graph(text), engine.registry.metadata_graph())


def test_describe_endpoint(engine):
    status, _, text = wsgi_call(engine.wsgi_app, "GET", "/describe", "object=foaf.Person")
    assert status == 200
    assert text.startswith("element foaf.Person")
    status, _, _ = wsgi_call(engine.wsgi_app, "GET", "/describe", "object=foaf.Nope")
    assert status == 404
    status, _, _ = wsgi_call(engine.wsgi_app, "GET", "/describe")
    assert status == 400


def test_match_endpoint_reports_design67(engine):
    register_card(engine, design="plain", markup="HTML", aesthetic="simple",
                  primary="black", secondary="white")
    register_card(engine, design="baroque", aesthetic="baroque", primary="blue",
                  secondary="blue")
    register_card(engine, design="design67")
    body = urlencode({"object": "foaf.Person", "profile": fixture_text("profile-user34.ttl")})
    status, _, text = wsgi_call(engine.wsgi_app, "POST", "/match", body=body.encode())
    assert status == 200
    report = json.loads(text)
    assert report["winner"] == "studio.design67"
    assert report["candidates"][0]["id"] == "studio.design67"
    assert any("conflict" in line for line in report["candidates"][0]["trace"])


def test_templates_endpoint_register_and_list(engine):
    features = fixture_text("namecard.features")
    body_doc = fixture_text("namecard.body")
    payload = urlencode({"features": features, "body": body_doc}).encode()
    status, _, text = wsgi_call(engine.wsgi_app, "POST", "/templates", body=payload)
    assert status == 201
    assert json.loads(text)["id"] == "studio.namecard"
    status, _, _ = wsgi_call(engine.wsgi_app, "POST", "/templates", body=payload)
    assert status == 409
    status, _, listing = wsgi_call(engine.wsgi_app, "GET", "/templates")
    assert status == 200
    assert json.loads(listing)[0]["id"] == "studio.namecard"


def test_unknown_endpoint_is_404(engine):
    status, _, _ = wsgi_call(engine.wsgi_app, "GET", "/nope")
    assert status == 404


def test_ui_placeholder_without_bundle(engine):
    status, _, body = wsgi_call(engine.wsgi_app, "GET", "/ui")
    assert status == 200
    assert "/render" in body


def test_ui_static_serving(tmp_path, stub_fetcher):
    bundle = tmp_path / "dist"
    bundle.mkdir()
    (bundle / "index.html").write_text("<html><body>ui</body></html>")
    (bundle / "main.js").write_text("export {};")
    engine = Engine(load_config(write_config(tmp_path)), fetcher=stub_fetcher, ui_dir=bundle)
    status, headers, _ = wsgi_call(engine.wsgi_app, "GET", "/ui")
    assert status == 302 and headers["Location"] == "/ui/"
    status, headers, body = wsgi_call(engine.wsgi_app, "GET", "/ui/")
    assert status == 200 and body == "<html><body>ui</body></html>"
    status, headers, _ = wsgi_call(engine.wsgi_app, "GET", "/ui/main.js")
    assert status == 200 and headers["Content-Type"].startswith("text/javascript")
    status, _, _ = wsgi_call(engine.wsgi_app, "GET", "/ui/../secret")
    assert status == 404
    status, _, _ = wsgi_call(engine.wsgi_app, "GET", "/ui/missing.js")
    assert status == 404


# -- engine wiring -----------------------------------------------------------

def test_engine_creates_missing_storage_dir(tmp_path, stub_fetcher):
    config = load_config(write_config(tmp_path))
    assert not (tmp_path / "storage").exists()
    Engine(config, fetcher=stub_fetcher)
    assert (tmp_path / "storage" / "templates").is_dir()


def test_engine_rejects_invalid_aux_graph(tmp_path, stub_fetcher):
    bad = tmp_path / "broken.ttl"
    bad.write_text("((nonsense")
    config_path = write_config(tmp_path)
    text = config_path.read_text().replace("${fixtures}/z3-style.ttl", str(bad))
    config_path.write_text(text)
    with pytest.raises(ConfigError) as err:
        Engine(load_config(config_path), fetcher=stub_fetcher)
    assert "broken.ttl" in str(err.value)


def test_engine_persists_registry_across_restarts(tmp_path, stub_fetcher):
    config = load_config(write_config(tmp_path))
    first = Engine(config, fetcher=stub_fetcher)
    register_card(first)
    second = Engine(load_config(write_config(tmp_path)), fetcher=stub_fetcher)
    assert second.registry.get("studio", "namecard").body == CARD_BODY


# -- fetch_source over a real socket ------------------------------------------

def test_fetch_source_round_trip(http_fixtures):
    url = http_fixtures.add("/d.ttl", "hello turtle")
    assert fetch_source(url) == "hello turtle"


def test_fetch_source_connection_refused():
    with pytest.raises(FetchError):
        fetch_source("http://127.0.0.1:9/never.ttl", timeout=0.5)


def test_fetch_source_rejects_non_2xx(http_fixtures):
    with pytest.raises(FetchError):
        fetch_source(http_fixtures.base + "/missing.ttl")


def test_fetch_source_enforces_size_limit(http_fixtures):
    url = http_fixtures.add("/big.ttl", "x" * 2048)
    with pytest.raises(FetchError):
        fetch_source(url, max_bytes=1024)
    assert fetch_source(url, max_bytes=4096) == "x" * 2048


def test_fetch_source_rejects_other_schemes(tmp_path):
    with pytest.raises(FetchError):
        fetch_source(f"file://{tmp_path}/x.ttl")
