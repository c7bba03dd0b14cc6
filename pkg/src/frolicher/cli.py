"""Thin command-line client over the analysis service.

Requests go through the HTTP schema either in-process (default) or against
a running server given with --server; outputs are the service responses
written to disk or stdout.  Exit status is 0 exactly when every asserted
verdict passed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys


def service_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # this starlette pins an httpx-compat warning on the in-process client
        warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _manifold_argument(value: str):
    """Catalog name, or a schema file forwarded inline."""
    if os.path.exists(value):
        with open(value) as fh:
            return json.load(fh)
    return value


def _metric_argument(path: str | None):
    if path is None:
        return None
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "metric" in data:
        data = data["metric"]
    return data


def _fail_from_response(resp) -> int:
    detail = resp.json().get("detail", resp.text)
    print(f"error: {detail}", file=sys.stderr)
    return 2


def cmd_catalog(args) -> int:
    with service_client(args.server) as client:
        resp = client.get("/catalog")
        if resp.status_code != 200:
            return _fail_from_response(resp)
        for entry in resp.json():
            print(f"{entry['name']:20s} n={entry['n']}  {entry['summary']}")
    return 0


def cmd_analyze(args) -> int:
    body = {
        "manifold": _manifold_argument(args.manifold),
        "metric": _metric_argument(args.metric),
        "options": {
            "j_max": args.j_max,
            "tol": args.tol,
            "exact": args.exact,
            "seed": args.seed,
            "r_max": args.r_max,
        },
    }
    with service_client(args.server) as client:
        resp = client.post("/analyze", json=body)
        if resp.status_code != 200:
            return _fail_from_response(resp)
        data = resp.json()
    report = data["report"]
    print(f"manifold      : {report['manifold']['name']} (n={report['manifold']['n']})")
    print(f"betti         : {report['betti']}")
    print(f"degeneration  : E_{report['pages']['degeneration_page']}")
    print(f"page dims     : {report['pages']['dims_degree']}")
    print(f"hypothesis    : {'pass' if report['hypothesis']['passed'] else 'FAIL'}")
    print(f"skt           : {'pass' if report['skt']['passed'] else 'FAIL'}")
    print(f"asserted OK   : {data['all_passed']}")
    for failure in data["failures"]:
        print(f"  failed: {failure}")
    if args.emit:
        os.makedirs(args.emit, exist_ok=True)
        path = os.path.join(args.emit, "report.json")
        with open(path, "w") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
            fh.write("\n")
        print(f"report        : {path}")
    return 0 if data["all_passed"] else 1


def cmd_sweep(args) -> int:
    body = {
        "manifold": _manifold_argument(args.manifold),
        "metric": _metric_argument(args.metric),
        "j_max": args.j_max,
        "r_max": args.r_max,
        "exact": args.exact,
    }
    with service_client(args.server) as client:
        resp = client.post("/sweep", json=body)
        if resp.status_code != 200:
            return _fail_from_response(resp)
        data = resp.json()
    outdir = args.emit or "."
    os.makedirs(outdir, exist_ok=True)
    for key, fname in (("eigenvalues_csv", "eigenvalues.csv"),
                       ("classification_csv", "classification.csv"),
                       ("verdicts_csv", "verdicts.csv")):
        path = os.path.join(outdir, fname)
        with open(path, "w") as fh:
            fh.write(data[key])
        print(path)
    return 0 if data["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frolicher",
        description="Frölicher spectral sequence workbench on invariant-form models")
    parser.add_argument("--server", help="URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="list built-in manifolds")
    cat.set_defaults(func=cmd_catalog)

    for name, func, help_text in (("analyze", cmd_analyze, "full verification run"),
                                  ("sweep", cmd_sweep, "eigenvalue sweep CSV emission")):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("manifold", help="catalog name or manifold schema file")
        sp.add_argument("--metric", help="Hermitian matrix file overriding the default metric")
        sp.add_argument("--j-max", type=int, default=10, dest="j_max",
                        help="smallest scale is h = 2^-j_max")
        sp.add_argument("--tol", type=float, default=1e-10, help="relative verdict tolerance")
        sp.add_argument("--seed", type=int, default=0, help="seed for random-metric checks")
        sp.add_argument("--r-max", type=int, default=3, dest="r_max",
                        help="deepest page in the verdict tables")
        sp.add_argument("--emit", help="directory for report/CSV output")
        group = sp.add_mutually_exclusive_group()
        group.add_argument("--exact", dest="exact", action="store_true", default=True,
                           help="exact arithmetic for ranks and page dims (default)")
        group.add_argument("--float", dest="exact", action="store_false",
                           help="force the float path")
        sp.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
