import socket
import threading
import urllib.parse
import urllib.request
import xml.etree.ElementTree as ET

import pytest

from semviz.channel import Engine, serve
from semviz.cli import main
from semviz.config import load_config
from semviz.fixtures import fixture_text
from semviz.refs import parse_element_ref
from semviz.registry import Template, TemplateFeatures

from conftest import write_config

ROW_BODY = "<li>[{OmemoGetP propName='foaf.name'}]</li>"

GOLDEN_RENDER = """\
<!DOCTYPE html>
<html>
<head><meta charset="utf-8" /><title>foaf.Person</title></head>
<body>
<li>Alice</li><li>Bob</li><li>Carol</li><li>Dave</li><li>Erin</li>
</body>
</html>
"""


@pytest.fixture
def workdir(tmp_path, stub_fetcher):
    config_path = write_config(tmp_path)
    data_path = tmp_path / "people.ttl"
    data_path.write_text(fixture_text("people.ttl"), encoding="utf-8")
    profile_path = tmp_path / "user34.ttl"
    profile_path.write_text(fixture_text("profile-user34.ttl"), encoding="utf-8")
    engine = Engine(load_config(config_path), fetcher=stub_fetcher)
    engine.registry.register(Template(
        "studio", "rowcard", parse_element_ref("foaf.Person"), ROW_BODY, TemplateFeatures()))
    return {"config": str(config_path), "data": str(data_path),
            "profile": str(profile_path), "tmp": tmp_path}


def test_render_matches_golden(workdir, capsys):
    code = main(["render", "--config", workdir["config"], "--object", "foaf.Person",
                 "--source", workdir["data"], "--provider", "studio", "--design", "rowcard"])
    assert code == 0
    assert capsys.readouterr().out == GOLDEN_RENDER


def test_render_is_deterministic(workdir, capsys):
    argv = ["render", "--config", workdir["config"], "--object", "foaf.Person",
            "--source", workdir["data"]]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_render_absent_template_exits_3(workdir, capsys):
    code = main(["render", "--config", workdir["config"], "--object", "foaf.Person",
                 "--source", workdir["data"], "--provider", "studio", "--design", "ghost"])
    assert code == 3


def test_render_xhtml_is_well_formed(workdir, capsys):
    code = main(["render", "--config", workdir["config"], "--object", "foaf.Person",
                 "--source", workdir["data"], "--format", "XHTML"])
    assert code == 0
    ET.fromstring(capsys.readouterr().out)


def test_render_unparseable_source_exits_5(workdir, tmp_path, capsys):
    bad = tmp_path / "bad.ttl"
    bad.write_text("((nope")
    code = main(["render", "--config", workdir["config"], "--object", "foaf.Person",
                 "--source", str(bad)])
    assert code == 5


def test_register_then_lookup(workdir, tmp_path, capsys):
    body = tmp_path / "card.body"
    body.write_text(fixture_text("namecard.body"), encoding="utf-8")
    features = tmp_path / "card.features"
    features.write_text(fixture_text("namecard.features"), encoding="utf-8")
    code = main(["register", "--config", workdir["config"],
                 "--body", str(body), "--features", str(features)])
    assert code == 0
    assert "registered studio.namecard -> foaf.Person" in capsys.readouterr().out
    # a fresh engine over the same storage sees it
    engine = Engine(load_config(workdir["config"]))
    assert engine.registry.get("studio", "namecard").body == fixture_text("namecard.body")
    # duplicate registration without --overwrite fails
    code = main(["register", "--config", workdir["config"],
                 "--body", str(body), "--features", str(features)])
    assert code == 5
    code = main(["register", "--config", workdir["config"], "--overwrite",
                 "--body", str(body), "--features", str(features)])
    assert code == 0


def test_describe_prints_listing(workdir, capsys):
    code = main(["describe", "--config", workdir["config"], "--object", "foaf.Person"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("element foaf.Person")
    assert "foaf.name" in out


def test_describe_unknown_element_exits_3(workdir, capsys):
    code = main(["describe", "--config", workdir["config"], "--object", "foaf.Nothing"])
    assert code == 3


def test_match_prints_winner_first(workdir, capsys):
    engine = Engine(load_config(workdir["config"]))
    for design, markup, aesthetic, pc, sc in [
        ("plain", "HTML", "simple", "black", "white"),
        ("baroque", "XHTML", "baroque", "blue", "blue"),
        ("design67", "XHTML", "minimal", "red", "yellow"),
    ]:
        engine.registry.register(Template(
            "studio", design, parse_element_ref("foaf.Person"), ROW_BODY,
            TemplateFeatures(markup_format=markup, aesthetic=aesthetic,
                             primary_color=pc, secondary_color=sc)))
    code = main(["match", "--config", workdir["config"], "--object", "foaf.Person",
                 "--profile", workdir["profile"]])
    assert code == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].startswith("* studio.design67 [pass] total=3")
    assert any("conflict" in line and "red" in line for line in lines)
    assert lines[-1] == "best: studio.design67"


def test_match_without_candidates_exits_3(workdir, capsys):
    code = main(["match", "--config", workdir["config"], "--object", "foaf.Document",
                 "--profile", workdir["profile"]])
    assert code == 3


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["render"])  # missing required flags
    assert err.value.code == 2


def test_bad_config_exits_5(tmp_path, capsys):
    bad = tmp_path / "engine.conf"
    bad.write_text("mystery = value\n")
    code = main(["describe", "--config", str(bad), "--object", "foaf.Person"])
    assert code == 5


def test_serve_smoke(workdir, http_fixtures):
    engine = Engine(load_config(workdir["config"]))
    server = serve(engine, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        base = f"http://127.0.0.1:{server.server_port}"
        with urllib.request.urlopen(f"{base}/describe?object=foaf.Person", timeout=5) as resp:
            assert resp.status == 200
            assert resp.read().decode().startswith("element foaf.Person")
        with urllib.request.urlopen(f"{base}/metadata", timeout=5) as resp:
            assert resp.status == 200
        source = http_fixtures.add("/people.ttl", fixture_text("people.ttl"))
        query = urllib.parse.urlencode({
            "action": "renderOutput", "object": "foaf.Person", "source": source,
            "provider": "studio.rowcard",
        })
        with urllib.request.urlopen(f"{base}/render?{query}", timeout=5) as resp:
            assert resp.status == 200
            body = resp.read().decode()
            assert "<li>Alice</li>" in body
    finally:
        server.shutdown()
        server.server_close()


def test_serve_port_busy_exits_4(workdir):
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", 0))
    blocker.listen(1)
    port = blocker.getsockname()[1]
    config_path = workdir["tmp"] / "busy.conf"
    text = (workdir["tmp"] / "engine.conf").read_text().replace("port = 8080", f"port = {port}")
    config_path.write_text(text)
    try:
        code = main(["serve", "--config", str(config_path)])
        assert code == 4
    finally:
        blocker.close()
