"""Command line front end.

    semviz serve    --config engine.conf
    semviz render   --config engine.conf --object foaf.Person --source data.ttl
                    [--provider studio --design namecard] [--format XHTML] [--focus IRI]
    semviz register --config engine.conf --body card.html --features card.features
    semviz describe --config engine.conf --object foaf.Person
    semviz match    --config engine.conf --object foaf.Person --profile profile.ttl

Exit codes: 0 ok, 2 usage, 3 not found, 4 network, 5 parse/config.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from urllib.parse import urlsplit

from .channel import BadRequest, Engine, FetchError, NotFound, fetch_source, page_shell, serve
from .config import ConfigError, load_config
from .describe import DescribeError
from .rdf import RdfError, sniff_parse
from .refs import ElementRefError, parse_element_ref
from .registry import RegistryError, TemplateMissing
from .templates import RenderContext, TemplateError, default_visualization, render_element

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_NETWORK = 4
EXIT_PARSE = 5


def _is_url(text: str) -> bool:
    return urlsplit(text).scheme in ("http", "https")


def _read_source(location: str) -> str:
    if _is_url(location):
        return fetch_source(location)
    return Path(location).read_text(encoding="utf-8")


def cmd_serve(args) -> int:
    config = load_config(args.config)
    engine = Engine(config)
    server = serve(engine)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    print(f"listening on http://{config.host}:{server.server_port}/ "
          f"(render endpoint: {engine.base_url})", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cmd_render(args) -> int:
    config = load_config(args.config)
    engine = Engine(config)
    element = parse_element_ref(args.object)
    text = _read_source(args.source)
    graph = sniff_parse(text)
    source_url = args.source if _is_url(args.source) else None
    focus = None
    if args.focus:
        from .channel import _parse_focus

        focus = _parse_focus(args.focus)
    if args.provider or args.design:
        if not (args.provider and args.design):
            print("--provider and --design must be given together", file=sys.stderr)
            return EXIT_USAGE
        template = engine.registry.get(args.provider, args.design)
        ctx = RenderContext(
            graph=graph, focus=focus, base_url=engine.base_url, prefixes=engine.prefixes,
            source_url=source_url, registry=engine.registry, ontology=engine.ontology,
        )
        markup = render_element(graph, element, template, ctx)
    else:
        markup = default_visualization(graph, element, engine.prefixes, focus=focus)
    sys.stdout.write(page_shell(markup, args.format, title=element.text()))
    return EXIT_OK


def cmd_register(args) -> int:
    config = load_config(args.config)
    engine = Engine(config)
    body = Path(args.body).read_text(encoding="utf-8")
    features = Path(args.features).read_text(encoding="utf-8")
    template = engine.register_from_documents(features, body, overwrite=args.overwrite)
    print(f"registered {template.full_id} -> {template.target.text()}")
    return EXIT_OK


def cmd_describe(args) -> int:
    config = load_config(args.config)
    engine = Engine(config)
    sys.stdout.write(engine.describe_text(args.object))
    return EXIT_OK


def cmd_match(args) -> int:
    config = load_config(args.config)
    engine = Engine(config)
    profile_text = _read_source(args.profile)
    report = engine.match_report(args.object, profile_text)
    if not report["candidates"]:
        print(f"no templates registered for {args.object}")
        return EXIT_NOT_FOUND
    for entry in report["candidates"]:
        marker = "*" if entry["winner"] else " "
        status = "pass" if entry["hardPass"] else "excluded"
        print(f"{marker} {entry['id']} [{status}] total={entry['total']} "
              f"(aesthetic={entry['aestheticDistance']}, colour={entry['colorPenalty']})")
        for line in entry["trace"]:
            print(f"    {line}")
    if report["winner"]:
        print(f"best: {report['winner']}")
    else:
        print("best: none (default visualization applies)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semviz", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="engine.conf", help="engine config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP engine")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("render", parents=[common], help="render a data source to stdout")
    p.add_argument("--object", required=True)
    p.add_argument("--source", required=True, help="path or URL of the data source")
    p.add_argument("--provider")
    p.add_argument("--design")
    p.add_argument("--format", choices=("HTML", "XHTML"), default="HTML")
    p.add_argument("--focus")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("register", parents=[common], help="store a template")
    p.add_argument("--body", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("describe", parents=[common], help="describe an ontology element")
    p.add_argument("--object", required=True)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("match", parents=[common], help="score templates against a profile")
    p.add_argument("--object", required=True)
    p.add_argument("--profile", required=True, help="path or URL of the profile graph")
    p.set_defaults(func=cmd_match)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TemplateMissing, DescribeError, NotFound) as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except BadRequest as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FetchError as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except OSError as exc:
        # port busy on serve, unreadable files elsewhere
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_NETWORK if args.command == "serve" else EXIT_PARSE
    except (ConfigError, RdfError, TemplateError, RegistryError, ElementRefError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
