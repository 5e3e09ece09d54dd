import http.server
import io
import threading
from pathlib import Path

import pytest

from semviz.channel import Engine, FetchError
from semviz.config import load_config
from semviz.fixtures import fixture_text
from semviz.rdf import PrefixRegistry, parse_graph

FOAF = "http://xmlns.com/foaf/0.1/"
EX = "http://data.example/people#"

CONFIG_TEMPLATE = """\
host = 127.0.0.1
port = 8080
baseURL = http://127.0.0.1:8080/render
storageDir = ./storage
prefix.rdf = http://www.w3.org/1999/02/22-rdf-syntax-ns#
prefix.rdfs = http://www.w3.org/2000/01/rdf-schema#
prefix.owl = http://www.w3.org/2002/07/owl#
prefix.xsd = http://www.w3.org/2001/XMLSchema#
prefix.foaf = http://xmlns.com/foaf/0.1/
prefix.foaf.20050403 = http://xmlns.com/foaf/0.1/
prefix.foaf.20050603 = http://xmlns.com/foaf/0.1/
prefix.ex = http://data.example/people#
prefix.a = http://profiles.example/ns#
prefix.z1 = http://ontologies.example/protocol#
prefix.z3 = http://ontologies.example/style#
prefix.z5 = http://ontologies.example/impairment#
prefix.v = http://templates.example/ns#
ontology.foaf = ${fixtures}/foaf-mini.ttl
aux.protocol = ${fixtures}/z1-protocol.ttl
aux.style = ${fixtures}/z3-style.ttl
aux.impairment = ${fixtures}/z5-impairment.ttl
alignments = ${fixtures}/alignments.ttl
"""


def write_config(tmp_path: Path, extra: str = "") -> Path:
    path = tmp_path / "engine.conf"
    path.write_text(CONFIG_TEMPLATE + extra, encoding="utf-8")
    return path


@pytest.fixture
def prefixes() -> PrefixRegistry:
    reg = PrefixRegistry()
    reg.add("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#")
    reg.add("rdfs", "http://www.w3.org/2000/01/rdf-schema#")
    reg.add("owl", "http://www.w3.org/2002/07/owl#")
    reg.add("foaf", FOAF)
    reg.add("foaf", FOAF, version="20050403")
    reg.add("foaf", FOAF, version="20050603")
    reg.add("ex", EX)
    return reg


@pytest.fixture
def people():
    return parse_graph(fixture_text("people.ttl"))


@pytest.fixture
def foaf_mini():
    return parse_graph(fixture_text("foaf-mini.ttl"))


class StubFetcher(dict):
    """URL -> document text; unknown URLs behave like network failures."""

    def __call__(self, url: str, **kwargs) -> str:
        if url not in self:
            raise FetchError(f"{url}: stubbed connection failure")
        return self[url]


@pytest.fixture
def stub_fetcher():
    return StubFetcher({
        "http://data.example/people.ttl": fixture_text("people.ttl"),
        "http://profiles.example/user34.ttl": fixture_text("profile-user34.ttl"),
    })


@pytest.fixture
def engine(tmp_path, stub_fetcher) -> Engine:
    return Engine(load_config(write_config(tmp_path)), fetcher=stub_fetcher)


def wsgi_call(app, method: str, path: str, query: str = "", body: bytes = b"",
              content_type: str = "application/x-www-form-urlencoded"):
    """Drive a WSGI app in-process; returns (status, headers, text body)."""
    captured = {}

    def start_response(status, headers):
        captured["status"] = int(status.split(" ", 1)[0])
        captured["headers"] = dict(headers)

    environ = {
        "REQUEST_METHOD": method,
        "PATH_INFO": path,
        "QUERY_STRING": query,
        "CONTENT_LENGTH": str(len(body)),
        "CONTENT_TYPE": content_type,
        "wsgi.input": io.BytesIO(body),
    }
    data = b"".join(app(environ, start_response))
    return captured["status"], captured["headers"], data.decode("utf-8")


class FixtureHttpServer:
    """A real localhost HTTP server handing out registered documents."""

    def __init__(self):
        registry = {}

        class Handler(http.server.BaseHTTPRequestHandler):
            def do_GET(self):
                entry = registry.get(self.path)
                if entry is None:
                    self.send_error(404)
                    return
                content_type, payload = entry
                self.send_response(200)
                self.send_header("Content-Type", content_type)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.registry = registry
        self.server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def base(self) -> str:
        return f"http://127.0.0.1:{self.server.server_port}"

    def add(self, path: str, text: str, content_type: str = "text/turtle; charset=utf-8") -> str:
        self.registry[path] = (content_type, text.encode("utf-8"))
        return self.base + path

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def http_fixtures():
    server = FixtureHttpServer()
    yield server
    server.close()
