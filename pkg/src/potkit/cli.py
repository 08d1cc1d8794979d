"""Command-line client for the potkit service.

The CLI is a thin client: it builds JSON requests and consumes JSON responses
through the same HTTP interface the service exposes.  By default requests run
against an in-process app instance (no server needed); ``--server URL``
targets a running ``potkit serve``.

Exit codes: 0 success (all requested checks passed), 2 malformed input,
3 mathematical failure (boundary pole, singular system, refused evaluation).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

_EXIT_OK, _EXIT_INPUT, _EXIT_MATH = 0, 2, 3


def fmt(x: float) -> str:
    """Deterministic 15-significant-digit formatting, locale independent."""
    return format(float(x), ".15g")


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------


class _Client:
    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

                from .service.app import create_app

                self._client = TestClient(create_app())

    def post(self, path: str, payload: dict):
        return self._client.post(path, json=payload)


def _call(client: _Client, path: str, payload: dict):
    """POST and translate error statuses into exit codes."""
    resp = client.post(path, payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except Exception:
        body = {"error": {"message": resp.text}}
    if resp.status_code in (400, 422):
        detail = body.get("error", body.get("detail", body))
        print(f"input error: {json.dumps(detail)}", file=sys.stderr)
        raise SystemExit(_EXIT_INPUT)
    message = body.get("error", {}).get("message", json.dumps(body))
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(_EXIT_MATH)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _parse_complex(text: str) -> list:
    """Accept 're,im', '0.7', or Python-style '0.3+0.4j' / '0.5i'."""
    text = text.strip()
    if "," in text:
        re_s, im_s = text.split(",", 1)
        return [float(re_s), float(im_s)]
    try:
        z = complex(text.replace("i", "j"))
    except ValueError:
        raise SystemExit(_EXIT_INPUT)
    return [z.real, z.imag]


def _parse_points(text: str) -> list:
    """Inline 'z1;z2;...' or a CSV file of re,im rows (optional header)."""
    import os

    if os.path.exists(text):
        pts = []
        with open(text) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.lower().startswith(("re", "#", "x,")):
                    continue
                parts = line.split(",")
                pts.append([float(parts[0]), float(parts[1]) if len(parts) > 1 else 0.0])
        return pts
    return [_parse_complex(tok) for tok in text.split(";") if tok.strip()]


def _domain_ref(arg: str):
    """A named domain, inline JSON, or a path to a domain spec file."""
    import os

    if arg.lstrip().startswith("{"):
        return json.loads(arg)
    if os.path.exists(arg):
        with open(arg) as fh:
            return json.load(fh)
    return arg


def _data_spec(arg: str) -> dict:
    """--data forms: named indicators, inline JSON, path, or a bare expression."""
    import os

    named = {"indicator-inner": {"indicator": 1}, "indicator-outer": {"indicator": 0}}
    if arg in named:
        return named[arg]
    if arg.startswith("indicator:"):
        return {"indicator": int(arg.split(":", 1)[1])}
    if arg.lstrip().startswith("{"):
        return json.loads(arg)
    if os.path.exists(arg):
        with open(arg) as fh:
            return json.load(fh)
    return {"R": arg}


def _write_table(table: dict, path: str | None, label: str):
    lines = [",".join(table["columns"])]
    for row in table["rows"]:
        lines.append(",".join(fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        print(f"{label}: wrote {len(table['rows'])} rows to {path}")
    else:
        print(text, end="")


def _emit(obj: dict, args, label: str):
    """Write the JSON artifact (and CSV table if present and csv requested)."""
    table = obj.get("table")
    if args.format == "csv" and table is not None:
        _write_table(table, args.out, label)
        rest = {k: v for k, v in obj.items() if k != "table"}
        if rest:
            print(json.dumps(rest, indent=2, sort_keys=True))
    else:
        text = json.dumps(obj, indent=2, sort_keys=True)
        if args.out:
            with open(args.out, "w", newline="\n") as fh:
                fh.write(text + "\n")
            print(f"{label}: wrote report to {args.out}")
        else:
            print(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, domain_default=None):
    if domain_default is not None:
        p.add_argument("--domain", default=domain_default, help="name, JSON, or spec file")
    else:
        p.add_argument("--domain", required=True, help="name, JSON, or spec file")
    p.add_argument("--n", type=int, default=256, help="nodes per curve (default 256)")
    p.add_argument("--a", default=None, help="Szego base point as re,im")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--server", default=None, help="remote service URL (default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="potkit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid", help="build a boundary grid and report its checks")
    _add_common(p, "unit-disc")

    p = sub.add_parser("szego", help="Szego/Garabedian boundary tables")
    _add_common(p, "unit-disc")

    p = sub.add_parser("project", help="Szego projection of boundary data")
    _add_common(p, "unit-disc")
    p.add_argument("--data", required=True)

    p = sub.add_parser("dirichlet", help="solve the Dirichlet problem")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--probe", default="", help="points 'z1;z2' or CSV file")

    p = sub.add_parser("green", help="Green's function or its w-derivatives")
    _add_common(p)
    p.add_argument("--z", required=True)
    p.add_argument("--w", required=True)
    p.add_argument("--m", type=int, default=0)

    p = sub.add_parser("poisson", help="Poisson kernel row at an interior point")
    _add_common(p)
    p.add_argument("--z", required=True)

    p = sub.add_parser("hmeasure", help="harmonic measure of component k")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--probe", default="")

    p = sub.add_parser("lambda", help="non-harmonic measure of component k")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--probe", default="")

    p = sub.add_parser("exact-dirichlet", help="exact pole-subtraction solution on the disc")
    p.add_argument("--data", required=True)
    p.add_argument("--probe", default="")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server", default=None)

    p = sub.add_parser("integrate", help="boundary arc-length integral by residues")
    p.add_argument("--domain", default="unit-disc")
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server", default=None)

    p = sub.add_parser("qd-check", help="quadrature-domain identity checks")
    p.add_argument("--model", default='{"kind":"disc"}', help="disc or polynomial-image JSON")
    p.add_argument("--g", default=None, help="holomorphic rational (expression or JSON)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server", default=None)

    p = sub.add_parser("validate", help="run a cross-validation suite")
    p.add_argument("--suite", choices=("disc", "annulus", "all"), default="disc")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--server", default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return _EXIT_OK

    client = _Client(args.server)

    if args.command == "grid":
        out = _call(client, "/api/grid", {"domain": _domain_ref(args.domain), "n": args.n})
        _emit(out, args, "grid")
        return _EXIT_OK

    if args.command == "szego":
        payload = {"domain": _domain_ref(args.domain), "n": args.n}
        if args.a:
            payload["a"] = _parse_complex(args.a)
        out = _call(client, "/api/szego", payload)
        _emit(out, args, "szego")
        return _EXIT_OK

    if args.command == "project":
        payload = {
            "domain": _domain_ref(args.domain),
            "n": args.n,
            "data": _data_spec(args.data),
            "tol": args.tol,
        }
        if args.a:
            payload["a"] = _parse_complex(args.a)
        out = _call(client, "/api/project", payload)
        _emit(out, args, "project")
        bad = out.get("exact_vs_numeric")
        return _EXIT_OK if bad is None or bad <= args.tol else _EXIT_MATH

    if args.command == "dirichlet":
        payload = {
            "domain": _domain_ref(args.domain),
            "n": args.n,
            "data": _data_spec(args.data),
            "probes": _parse_points(args.probe) if args.probe else [],
        }
        if args.a:
            payload["a"] = _parse_complex(args.a)
        out = _call(client, "/api/dirichlet", payload)
        if args.format == "csv":
            rows = [
                [p[0], p[1], v[0], v[1]] for p, v in zip(out["probes"], out["values"])
            ]
            _write_table(
                {"columns": ["re_probe", "im_probe", "re_u", "im_u"], "rows": rows},
                args.out,
                "dirichlet",
            )
            report = {k: v for k, v in out.items() if k not in ("probes", "values")}
            print(json.dumps(report, indent=2, sort_keys=True))
        else:
            _emit(out, args, "dirichlet")
        return _EXIT_OK if out["boundary_residual"] <= args.tol else _EXIT_MATH

    if args.command == "green":
        payload = {
            "domain": _domain_ref(args.domain),
            "n": args.n,
            "z": _parse_complex(args.z),
            "w": _parse_complex(args.w),
            "m": args.m,
        }
        out = _call(client, "/api/green", payload)
        _emit(out, args, "green")
        return _EXIT_OK

    if args.command == "poisson":
        payload = {"domain": _domain_ref(args.domain), "n": args.n, "z": _parse_complex(args.z)}
        out = _call(client, "/api/poisson", payload)
        _emit(out, args, "poisson")
        return _EXIT_OK if out["mass_residual"] <= 1e-5 and out["min_value"] > -1e-12 else _EXIT_MATH

    if args.command in ("hmeasure", "lambda"):
        payload = {
            "domain": _domain_ref(args.domain),
            "n": args.n,
            "k": args.k,
            "probes": _parse_points(args.probe) if args.probe else [],
        }
        out = _call(client, f"/api/{args.command}", payload)
        _emit(out, args, args.command)
        return _EXIT_OK

    if args.command == "exact-dirichlet":
        payload = {
            "data": _data_spec(args.data),
            "probes": _parse_points(args.probe) if args.probe else [],
        }
        out = _call(client, "/api/exact-dirichlet", payload)
        _emit(out, args, "exact-dirichlet")
        return _EXIT_OK

    if args.command == "integrate":
        out = _call(client, "/api/integrate", {"data": _data_spec(args.data), "n": args.n})
        print(fmt(out["value"][0]) if abs(out["value"][1]) < 1e-12 else json.dumps(out["value"]))
        if args.out:
            with open(args.out, "w", newline="\n") as fh:
                json.dump(out, fh, indent=2, sort_keys=True)
        return _EXIT_OK

    if args.command == "qd-check":
        payload = {"model": json.loads(args.model), "tol": args.tol}
        if args.g:
            payload["g"] = _data_spec(args.g)
        out = _call(client, "/api/qd-check", payload)
        _emit(out, args, "qd-check")
        return _EXIT_OK if out["passed"] else _EXIT_MATH

    if args.command == "validate":
        payload = {"suite": args.suite}
        if args.n:
            payload["n"] = args.n
        if args.tol:
            payload["tol"] = args.tol
        out = _call(client, "/api/validate", payload)
        for check in out["checks"]:
            flag = "PASS" if check["passed"] else "FAIL"
            print(
                f"[{flag}] {check['name']}: {check['residual']:.3e}"
                f" (tol {check['tolerance']:.0e})"
            )
        if args.out:
            with open(args.out, "w", newline="\n") as fh:
                json.dump(out, fh, indent=2, sort_keys=True)
        print(f"suite {args.suite}: {'PASS' if out['passed'] else 'FAIL'}")
        return _EXIT_OK if out["passed"] else _EXIT_MATH

    raise SystemExit(_EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
