"""The GET/POST rendering protocol.

One endpoint (``/render``) accepts these parameters:

    action        renderOutput | renderInput            (required)
    object        prefix.local[.version]                (required)
    source        URL of the semantic data source       (GET only; required
                                                         for GET renderOutput)
    provider      designer template id, e.g. user3.test (optional)
    outputFormat  HTML (default) | XHTML
    userProfile   URL of a profile graph                (GET only)
    focus         render a single individual            (extension)
    data          POST field carrying the data payload
    prop:*        POST form-submission fields

POST requests carry their semantic data in the message itself (the
``data`` field, or the raw body under an RDF content type) and must not
pass ``source``.  Template selection: an explicit ``provider`` wins;
otherwise a ``userProfile`` triggers matching; otherwise (or when
matching finds nothing eligible) the default visualization renders.

The engine also serves ``/metadata`` (the template catalogue as
Turtle), ``/describe`` (element listings), and two JSON extensions used
by the bundled UI: ``POST /match`` (score candidates for an inline
profile) and ``/templates`` (list / register templates).
"""

from __future__ import annotations

import html
import io
import json
import logging
import socket
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import parse_qsl, urlsplit

from .config import ConfigError, EngineConfig
from .describe import DescribeError, describe_element, render_description
from .matcher import (
    AlignmentSet, AuxOntologies, EquivalenceClosure, MatcherError, NoEligibleTemplate,
    equivalence_closure, extract_profile, find_profile_subject, score_all, select_best,
)
from .rdf import Graph, PrefixRegistry, RdfSyntaxError, Term, parse_graph, serialize_graph, sniff_parse
from .refs import ElementRef, ElementRefError, parse_element_ref
from .registry import (
    DuplicateTemplate, RegistryError, Template, TemplateMissing, TemplateRegistry,
    KIND_INPUT, KIND_OUTPUT, TEMPLATE_NS, _targets_match, template_from_features,
)
from .templates import (
    FIELD_PREFIX, FormFieldError, RenderContext, TemplateError,
    default_visualization, form_to_graph, render_element, render_input_form,
)

log = logging.getLogger(__name__)

ACTIONS = ("renderOutput", "renderInput")
OUTPUT_FORMATS = ("HTML", "XHTML")
KNOWN_PARAMS = {"action", "object", "source", "provider", "outputFormat", "userProfile",
                "focus", "data"}

MAX_SOURCE_BYTES = 10 * 1024 * 1024
FETCH_TIMEOUT = 10.0
MAX_REDIRECTS = 3

CONTENT_TYPES = {
    "HTML": "text/html; charset=utf-8",
    "XHTML": "application/xhtml+xml; charset=utf-8",
}


class ChannelError(Exception):
    status = 500

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class BadRequest(ChannelError):
    status = 400


class NotFound(ChannelError):
    status = 404


class BadGateway(ChannelError):
    status = 502


class FetchError(Exception):
    pass


@dataclass(frozen=True)
class RenderRequest:
    action: str
    object: ElementRef
    source: str | None = None
    provider: tuple | None = None
    output_format: str = "HTML"
    user_profile: str | None = None
    body: str | None = None
    focus: Term | None = None
    form_fields: tuple = ()       # ordered (key, value) pairs of prop:* fields
    ignored_params: tuple = ()

    @property
    def fields(self) -> dict:
        return dict(self.form_fields)


def _parse_focus(text: str) -> Term:
    if text.startswith("_:"):
        return Term.blank(text[2:])
    try:
        return Term.iri(text)
    except ValueError:
        return Term.literal(text)


def parse_request(method: str, params: dict, body: str | None = None) -> RenderRequest:
    """Validate one protocol request.  Raises BadRequest for every
    parameter combination the protocol forbids."""
    if method not in ("GET", "POST"):
        raise BadRequest(f"unsupported method {method}")

    action = params.get("action")
    if action is None:
        raise BadRequest("missing required parameter: action")
    if action not in ACTIONS:
        raise BadRequest(f"unknown action {action!r}; expected renderOutput or renderInput")

    object_text = params.get("object")
    if object_text is None:
        raise BadRequest("missing required parameter: object")
    try:
        element = parse_element_ref(object_text)
    except ElementRefError as exc:
        raise BadRequest(f"malformed object parameter: {exc}") from None

    ignored = [k for k in params if k not in KNOWN_PARAMS and not k.startswith(FIELD_PREFIX)]

    source = params.get("source")
    if method == "POST" and source is not None:
        raise BadRequest("the source parameter is GET-only; POST requests carry their data")
    if method == "GET" and action == "renderOutput" and source is None:
        raise BadRequest("GET renderOutput requires the source parameter")

    provider = None
    provider_text = params.get("provider")
    if provider_text is not None:
        parts = provider_text.split(".")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise BadRequest(
                f"malformed provider {provider_text!r}; expected providerID.designID"
            )
        provider = (parts[0], parts[1])

    output_format = params.get("outputFormat", "HTML")
    if output_format not in OUTPUT_FORMATS:
        raise BadRequest(f"unknown outputFormat {output_format!r}; expected HTML or XHTML")

    user_profile = params.get("userProfile")
    if user_profile is not None and method == "POST":
        ignored.append("userProfile")  # the profile parameter is GET-only
        user_profile = None

    focus = None
    if params.get("focus"):
        focus = _parse_focus(params["focus"])

    form_fields = ()
    if method == "POST":
        form_fields = tuple(
            (k, v) for k, v in sorted(params.items()) if k.startswith(FIELD_PREFIX)
        )

    body_text = body if body else params.get("data")
    if method == "POST" and action == "renderOutput" and not body_text:
        raise BadRequest("POST renderOutput requires semantic data in the message body")
    if method == "POST" and action == "renderInput" and not form_fields:
        raise BadRequest("POST renderInput expects prop:* form fields to ingest")

    return RenderRequest(
        action=action,
        object=element,
        source=source,
        provider=provider,
        output_format=output_format,
        user_profile=user_profile,
        body=body_text,
        focus=focus,
        form_fields=form_fields,
        ignored_params=tuple(ignored),
    )


# ---------------------------------------------------------------------------
# Source fetching

class _LimitedRedirects(urllib.request.HTTPRedirectHandler):
    max_redirections = MAX_REDIRECTS


def fetch_source(url: str, timeout: float = FETCH_TIMEOUT,
                 max_bytes: int = MAX_SOURCE_BYTES) -> str:
    """Fetch a semantic data source over http(s), bounded in time, size,
    and redirect count."""
    scheme = urlsplit(url).scheme
    if scheme not in ("http", "https"):
        raise FetchError(f"unsupported URL scheme {scheme!r} in {url!r}")
    opener = urllib.request.build_opener(_LimitedRedirects)
    try:
        with opener.open(url, timeout=timeout) as resp:
            status = getattr(resp, "status", 200)
            if not 200 <= status < 300:
                raise FetchError(f"{url}: HTTP status {status}")
            data = resp.read(max_bytes + 1)
            if len(data) > max_bytes:
                raise FetchError(f"{url}: response exceeds the {max_bytes} byte limit")
            charset = resp.headers.get_content_charset() or "utf-8"
    except urllib.error.HTTPError as exc:
        raise FetchError(f"{url}: HTTP status {exc.code}") from None
    except (urllib.error.URLError, socket.timeout, OSError, ValueError) as exc:
        raise FetchError(f"{url}: {exc}") from None
    return data.decode(charset, errors="replace")


# ---------------------------------------------------------------------------
# Markup shells

def page_shell(content: str, output_format: str, title: str) -> str:
    safe_title = html.escape(title, quote=False)
    if output_format == "XHTML":
        return (
            '<?xml version="1.0" encoding="utf-8"?>\n'
            '<html xmlns="http://www.w3.org/1999/xhtml">\n'
            f"<head><title>{safe_title}</title></head>\n"
            "<body>\n"
            f"{content}\n"
            "</body>\n</html>\n"
        )
    return (
        "<!DOCTYPE html>\n<html>\n"
        f'<head><meta charset="utf-8" /><title>{safe_title}</title></head>\n'
        "<body>\n"
        f"{content}\n"
        "</body>\n</html>\n"
    )


def error_page(status: int, message: str) -> str:
    return (
        "<!DOCTYPE html>\n<html>\n"
        f'<head><meta charset="utf-8" /><title>error {status}</title></head>\n'
        "<body>\n"
        f'<h1>Request failed ({status})</h1>\n'
        f'<p class="semviz-error">{html.escape(message, quote=False)}</p>\n'
        "</body>\n</html>\n"
    )


# ---------------------------------------------------------------------------
# Engine

class Engine:
    """Everything the protocol needs, wired from one config: the template
    store, prefix registry, domain ontologies, and matcher inputs."""

    def __init__(self, config: EngineConfig, fetcher=fetch_source, ui_dir: Path | None = None):
        self.config = config
        self.base_url = config.base_url
        self.prefixes = config.prefixes
        self.fetcher = fetcher
        self.ui_dir = ui_dir if ui_dir is not None else config.ui_dir

        config.storage_dir.mkdir(parents=True, exist_ok=True)
        self.registry = TemplateRegistry(config.storage_dir / "templates")
        self.submissions_dir = config.storage_dir / "submissions"
        self.submissions_dir.mkdir(parents=True, exist_ok=True)
        self._submission_lock = threading.Lock()

        ontology_triples = []
        for name, path in sorted(config.ontology_paths.items()):
            ontology_triples.extend(self._load_graph(path))
        self.ontology = Graph(ontology_triples) if ontology_triples else None

        aux_graphs = {}
        for slot in ("protocol", "style", "impairment"):
            path = config.aux_paths.get(slot)
            aux_graphs[slot] = self._load_graph(path) if path else None
        try:
            self.aux = AuxOntologies.from_graphs(
                aux_graphs["protocol"], aux_graphs["style"], aux_graphs["impairment"]
            )
        except MatcherError as exc:
            raise ConfigError(f"invalid auxiliary ontology: {exc}") from None

        if config.alignments_path:
            alignment_graph = self._load_graph(config.alignments_path)
            self.closure = equivalence_closure(AlignmentSet.from_graph(alignment_graph))
        else:
            self.closure = equivalence_closure(AlignmentSet(frozenset()))

    @staticmethod
    def _load_graph(path: Path) -> Graph:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read graph {path}: {exc}") from None
        try:
            return sniff_parse(text)
        except RdfSyntaxError as exc:
            raise ConfigError(f"cannot parse graph {path}: {exc}") from None

    # -- protocol core -----------------------------------------------------

    def handle(self, req: RenderRequest):
        """Run one validated request; returns (status, content type, markup)."""
        try:
            if req.action == "renderOutput":
                markup = self._render_output(req)
            else:
                markup = self._render_input(req)
        except ChannelError as exc:
            return exc.status, "text/html; charset=utf-8", error_page(exc.status, exc.message)
        except (ElementRefError, FormFieldError, RegistryError) as exc:
            return 400, "text/html; charset=utf-8", error_page(400, str(exc))
        except TemplateError as exc:
            return 500, "text/html; charset=utf-8", error_page(500, str(exc))
        page = page_shell(markup, req.output_format, title=req.object.text())
        return 200, CONTENT_TYPES[req.output_format], page

    def _context(self, graph: Graph, req: RenderRequest) -> RenderContext:
        return RenderContext(
            graph=graph,
            focus=req.focus,
            base_url=self.base_url,
            prefixes=self.prefixes,
            source_url=req.source,
            registry=self.registry,
            ontology=self.ontology,
        )

    def _data_graph(self, req: RenderRequest) -> Graph:
        if req.source is not None:
            try:
                text = self.fetcher(req.source)
            except FetchError as exc:
                raise BadGateway(f"cannot fetch source: {exc}") from None
            try:
                return sniff_parse(text)
            except RdfSyntaxError as exc:
                raise BadGateway(f"source is not parseable semantic data: {exc}") from None
        try:
            return sniff_parse(req.body or "")
        except RdfSyntaxError as exc:
            raise BadRequest(f"request data is not parseable semantic data: {exc}") from None

    def _render_output(self, req: RenderRequest) -> str:
        graph = self._data_graph(req)
        if req.provider is not None:
            template = self._get_template(req.provider)
            if template.features.kind != KIND_OUTPUT:
                raise BadRequest(f"template {template.full_id} is an input template")
            if not _targets_match(req.object, template.target):
                raise BadRequest(
                    f"template {template.full_id} targets {template.target.text()}, "
                    f"not {req.object.text()}"
                )
            return render_element(graph, req.object, template, self._context(graph, req))
        if req.user_profile is not None:
            template = self._match_template(req)
            if template is not None:
                return render_element(graph, req.object, template, self._context(graph, req))
        return default_visualization(graph, req.object, self.prefixes, focus=req.focus)

    def _match_template(self, req: RenderRequest):
        try:
            text = self.fetcher(req.user_profile)
        except FetchError as exc:
            raise BadGateway(f"cannot fetch user profile: {exc}") from None
        try:
            profile_graph = sniff_parse(text)
        except RdfSyntaxError as exc:
            raise BadGateway(f"user profile is not parseable semantic data: {exc}") from None
        subject = find_profile_subject(profile_graph, self.closure)
        if subject is None:
            log.info("no profile subject found at %s; using default visualization", req.user_profile)
            return None
        profile = extract_profile(profile_graph, subject, self.closure)
        candidates = self.registry.list_for(req.object, KIND_OUTPUT)
        if not candidates:
            return None
        try:
            return select_best(profile, candidates, self.aux, self.closure)
        except NoEligibleTemplate:
            return None

    def _render_input(self, req: RenderRequest) -> str:
        if req.form_fields:
            graph = form_to_graph(req.fields, req.object, self.prefixes)
            self._store_submission(graph)
            if req.provider is not None:
                template = self._get_template(req.provider)
                if template.features.kind != KIND_OUTPUT:
                    raise BadRequest(
                        f"template {template.full_id} cannot render the submitted data"
                    )
                return render_element(graph, req.object, template, self._context(graph, req))
            return default_visualization(graph, req.object, self.prefixes)
        template = None
        if req.provider is not None:
            template = self._get_template(req.provider)
            if template.features.kind != KIND_INPUT:
                raise BadRequest(f"template {template.full_id} is not an input template")
        ctx = self._context(Graph(), req)
        return render_input_form(req.object, template, ctx)

    def _get_template(self, provider: tuple) -> Template:
        try:
            return self.registry.get(*provider)
        except TemplateMissing as exc:
            raise NotFound(str(exc)) from None

    def _store_submission(self, graph: Graph) -> None:
        with self._submission_lock:
            n = sum(1 for _ in self.submissions_dir.glob("sub-*.ttl")) + 1
            path = self.submissions_dir / f"sub-{n:06d}.ttl"
            path.write_text(serialize_graph(graph, "turtle", self.prefixes), encoding="utf-8")

    # -- extension endpoints -------------------------------------------------

    def describe_text(self, object_text: str) -> str:
        if self.ontology is None:
            raise NotFound("no ontology is configured")
        try:
            element = parse_element_ref(object_text)
        except ElementRefError as exc:
            raise BadRequest(str(exc)) from None
        try:
            description = describe_element(self.ontology, element, self.prefixes)
        except DescribeError as exc:
            raise NotFound(str(exc)) from None
        return render_description(description, self.prefixes)

    def match_report(self, object_text: str, profile_text: str) -> dict:
        try:
            element = parse_element_ref(object_text)
        except ElementRefError as exc:
            raise BadRequest(str(exc)) from None
        try:
            profile_graph = sniff_parse(profile_text)
        except RdfSyntaxError as exc:
            raise BadRequest(f"profile is not parseable semantic data: {exc}") from None
        subject = find_profile_subject(profile_graph, self.closure)
        candidates = self.registry.list_for(element, KIND_OUTPUT)
        if subject is None:
            profile = None
        else:
            profile = extract_profile(profile_graph, subject, self.closure)
        entries = []
        winner = None
        if profile is not None and candidates:
            scored = score_all(profile, candidates, self.aux, self.closure)
            try:
                winner = select_best(profile, candidates, self.aux, self.closure).full_id
            except NoEligibleTemplate:
                winner = None
            # rank: eligible first, then cheapest, then identifier
            scored.sort(key=lambda pair: (not pair[1].hard_pass, pair[1].total, pair[0].full_id))
            for template, match in scored:
                entries.append({
                    "id": template.full_id,
                    "target": template.target.text(),
                    "hardPass": match.hard_pass,
                    "aestheticDistance": match.aesthetic_distance,
                    "colorPenalty": match.color_penalty,
                    "total": match.total,
                    "trace": list(match.trace),
                    "winner": template.full_id == winner,
                })
        else:
            for template in candidates:
                entries.append({
                    "id": template.full_id,
                    "target": template.target.text(),
                    "hardPass": True,
                    "aestheticDistance": 0,
                    "colorPenalty": 0,
                    "total": 0,
                    "trace": ["no profile facets found; all candidates score 0"],
                    "winner": False,
                })
        return {"object": object_text, "profileFound": profile is not None,
                "winner": winner, "candidates": entries}

    def register_from_documents(self, features_doc: str, body: str, overwrite: bool = False) -> Template:
        template = template_from_features(features_doc, body)
        self.registry.register(template, overwrite=overwrite)
        return template

    # -- WSGI ----------------------------------------------------------------

    def wsgi_app(self, environ, start_response):
        path = environ.get("PATH_INFO", "/")
        method = environ.get("REQUEST_METHOD", "GET")
        try:
            if path == "/render":
                return self._wsgi_render(environ, start_response)
            if path == "/metadata":
                text = serialize_graph(self.registry.metadata_graph(), "turtle", {"v": TEMPLATE_NS})
                return _respond(start_response, 200, "text/turtle; charset=utf-8", text)
            if path == "/describe":
                params = dict(parse_qsl(environ.get("QUERY_STRING", "")))
                if "object" not in params:
                    raise BadRequest("missing required parameter: object")
                return _respond(start_response, 200, "text/plain; charset=utf-8",
                                self.describe_text(params["object"]))
            if path == "/match" and method == "POST":
                params, _ = _read_post(environ)
                if "object" not in params or "profile" not in params:
                    raise BadRequest("POST /match requires object and profile fields")
                report = self.match_report(params["object"], params["profile"])
                return _respond(start_response, 200, "application/json", json.dumps(report))
            if path == "/templates":
                return self._wsgi_templates(environ, start_response, method)
            if path == "/" or path == "/ui" or path.startswith("/ui/"):
                return self._wsgi_static(environ, start_response, path)
            raise NotFound(f"no such endpoint: {path}")
        except ChannelError as exc:
            return _respond(start_response, exc.status, "text/html; charset=utf-8",
                            error_page(exc.status, exc.message))

    def _wsgi_render(self, environ, start_response):
        method = environ.get("REQUEST_METHOD", "GET")
        params = dict(parse_qsl(environ.get("QUERY_STRING", "")))
        raw_body = None
        if method == "POST":
            fields, raw_body = _read_post(environ)
            params.update(fields)
        try:
            req = parse_request(method, params, raw_body)
        except BadRequest as exc:
            return _respond(start_response, exc.status, "text/html; charset=utf-8",
                            error_page(exc.status, exc.message))
        status, content_type, markup = self.handle(req)
        headers = [("Content-Type", content_type)]
        if req.ignored_params:
            headers.append(("X-Ignored-Params", ", ".join(sorted(req.ignored_params))))
        return _respond(start_response, status, None, markup, headers)

    def _wsgi_templates(self, environ, start_response, method):
        if method == "GET":
            listing = [
                {"id": t.full_id, "target": t.target.text(), "kind": t.features.kind,
                 "markupFormat": t.features.markup_format}
                for t in self.registry.all()
            ]
            return _respond(start_response, 200, "application/json", json.dumps(listing))
        if method == "POST":
            params, _ = _read_post(environ)
            if "features" not in params or "body" not in params:
                raise BadRequest("POST /templates requires features and body fields")
            overwrite = params.get("overwrite", "") == "true"
            try:
                template = self.register_from_documents(params["features"], params["body"], overwrite)
            except DuplicateTemplate as exc:
                return _respond(start_response, 409, "application/json",
                                json.dumps({"error": str(exc)}))
            except (RegistryError, ElementRefError, TemplateError) as exc:
                raise BadRequest(str(exc)) from None
            return _respond(start_response, 201, "application/json",
                            json.dumps({"id": template.full_id}))
        raise NotFound("templates endpoint supports GET and POST")

    def _wsgi_static(self, environ, start_response, path):
        if self.ui_dir is None:
            body = page_shell(
                '<h1>semviz</h1>\n<p>Endpoints: /render, /metadata, /describe, '
                "/match, /templates.</p>\n<p>No UI bundle is configured.</p>",
                "HTML", "semviz",
            )
            return _respond(start_response, 200, "text/html; charset=utf-8", body)
        if path in ("/", "/ui"):
            # relative asset URLs only resolve under the directory form
            start_response("302 Found", [("Location", "/ui/"), ("Content-Length", "0")])
            return [b""]
        rel = path[len("/ui/"):]
        if rel == "":
            rel = "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            raise NotFound(f"no such UI asset: {rel}")
        ctype = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json",
            ".svg": "image/svg+xml",
        }.get(target.suffix, "application/octet-stream")
        data = target.read_bytes()
        start_response("200 OK", [("Content-Type", ctype), ("Content-Length", str(len(data)))])
        return [data]


_STATUS_TEXT = {200: "OK", 201: "Created", 400: "Bad Request", 404: "Not Found",
                409: "Conflict", 500: "Internal Server Error", 502: "Bad Gateway"}


def _respond(start_response, status: int, content_type: str | None, body: str, headers=None):
    data = body.encode("utf-8")
    out = list(headers or [])
    if content_type is not None:
        out.append(("Content-Type", content_type))
    out.append(("Content-Length", str(len(data))))
    start_response(f"{status} {_STATUS_TEXT.get(status, 'Status')}", out)
    return [data]


def _read_post(environ):
    """Return (fields, raw_rdf_body) for a POST request."""
    try:
        length = int(environ.get("CONTENT_LENGTH") or 0)
    except ValueError:
        length = 0
    raw = environ["wsgi.input"].read(length) if length else b""
    ctype = environ.get("CONTENT_TYPE", "")
    main_type = ctype.split(";")[0].strip().lower()
    if main_type == "application/x-www-form-urlencoded":
        return dict(parse_qsl(raw.decode("utf-8", "replace"))), None
    if main_type == "multipart/form-data":
        return _parse_multipart(raw, ctype), None
    if raw:
        return {}, raw.decode("utf-8", "replace")
    return {}, None


def _parse_multipart(body: bytes, content_type: str) -> dict:
    import email.parser
    import email.policy

    raw = b"Content-Type: " + content_type.encode("latin-1") + b"\r\nMIME-Version: 1.0\r\n\r\n" + body
    msg = email.parser.BytesParser(policy=email.policy.default).parsebytes(raw)
    fields = {}
    for part in msg.iter_parts():
        name = part.get_param("name", header="content-disposition")
        if name:
            payload = part.get_payload(decode=True) or b""
            fields[str(name)] = payload.decode("utf-8", "replace")
    return fields


# ---------------------------------------------------------------------------
# Server

def serve(engine: Engine, host: str | None = None, port: int | None = None):
    """Run the engine in a threading WSGI server; returns the server object
    (callers decide between serve_forever and handle_request)."""
    import socketserver
    from wsgiref.simple_server import WSGIRequestHandler, WSGIServer, make_server

    class ThreadingServer(socketserver.ThreadingMixIn, WSGIServer):
        daemon_threads = True

    class QuietHandler(WSGIRequestHandler):
        def log_message(self, format, *args):  # noqa: A002 - wsgiref signature
            log.info("%s - %s", self.address_string(), format % args)

    host = host if host is not None else engine.config.host
    port = port if port is not None else engine.config.port
    return make_server(host, port, engine.wsgi_app,
                       server_class=ThreadingServer, handler_class=QuietHandler)
