"""``stlab`` command line.

Every output carries a header with the tool version, command, seed,
tolerances and the sha256 of the configuration (parallelism excluded, since
it never changes results). CSV files carry it as a leading ``#`` line.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys

from . import TOOL, __version__
from .config import RunConfig, config_hash, parse_config
from .equidist import analyze, component_conditional_test, identify
from .errors import ConfigError, StlabError
from .frobenius import read_csv, scan_primes, write_csv
from .haar import MAX_QUAD_K, trace_moments_mc, trace_moments_quadrature
from .lefschetz import MAX_ITER, SUCCESS_RESIDUAL, component_surjection_report, lefschetz_lie_algebra
from .selftest import run_selftest

DEFAULT_CATALOG = {1: ("U1", "NU1", "SU2"), 2: ("U1", "NU1", "SU2", "SU2xSU2", "USp4")}


def make_header(command: str, seed: int, digest: str, tolerances: dict, **extra) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "seed": seed,
            "config_sha256": digest, "tolerances": tolerances, **extra}


def round12(obj):
    """Floats rounded to 12 significant digits, recursively."""
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def _format(obj, indent: int) -> str:
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict) and obj:
        items = [f"{inner}{json.dumps(k)}: {_format(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in obj):
        items = [inner + _format(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj)


def dump_json(obj) -> str:
    """Indented JSON with scalar arrays kept on one line."""
    return _format(obj, 0) + "\n"


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _workers(cfg: RunConfig, override: int | None) -> int:
    if override is not None:
        return max(1, override)
    if cfg.parallelism is not None:
        return max(1, cfg.parallelism)
    return os.cpu_count() or 1


# -- commands ---------------------------------------------------------------

def run_lefschetz(cfg: RunConfig) -> str:
    space, alg, grp = cfg.space, cfg.algebra, cfg.group
    reports, verdict = component_surjection_report(space, alg, grp, cfg.budget, cfg.seed)
    tol = {"success_residual": SUCCESS_RESIDUAL, "max_iter": MAX_ITER, "budget": cfg.budget}
    body = {
        "header": make_header("lefschetz", cfg.seed, cfg.config_hash, tol),
        "n": space.n,
        "weight": space.weight,
        "algebra_dim": alg.dim,
        "algebra_basis": [b.to_json() for b in alg.basis],
        "lie_dim": lefschetz_lie_algebra(space, alg).dim,
        "group": list(grp.labels),
        "components": [r.to_json() for r in reports],
        "verdict": verdict,
    }
    return dump_json(body)


def run_haar(group: str, component: str, method: str, k: int, n: int, seed: int) -> str:
    args = {"command": "haar-moments", "group": group, "component": component,
            "method": method, "k": k, "n": n, "seed": seed}
    if method == "quad":
        mv = trace_moments_quadrature(group, component, k)
        tol = {"quad_epsabs": 1e-13, "quad_epsrel": 1e-13, "max_k": MAX_QUAD_K}
    elif method == "mc":
        mv = trace_moments_mc(group, component, k, n, seed)
        tol = {"samples": n}
    else:
        raise ConfigError(f"unknown method {method!r}")
    body = {"header": make_header("haar-moments", seed, config_hash(args), tol), **mv.to_json()}
    return dump_json(round12(body))


def _count(cfg: RunConfig, workers: int):
    return scan_primes(cfg.curve, cfg.p_max, cfg.group, workers, cfg.allow_large)


def run_count(cfg: RunConfig, workers: int) -> str:
    records = _count(cfg, workers)
    header = make_header("count", cfg.seed, cfg.config_hash, {"float_digits": 12},
                         p_max=cfg.p_max, records=len(records))
    buf = io.StringIO()
    write_csv(records, buf, json.dumps(header, separators=(",", ":")))
    return buf.getvalue()


def run_analyze(cfg: RunConfig, workers: int, traces: str | None = None) -> str:
    extra = {}
    traces = traces or cfg.traces
    if traces is not None:
        with open(traces, "rb") as fh:
            data = fh.read()
        extra["traces_sha256"] = hashlib.sha256(data).hexdigest()
        records = read_csv(io.StringIO(data.decode("utf-8")))
    else:
        if cfg.curve is None or cfg.p_max is None:
            raise ConfigError("analyze needs a 'curve' with 'p_max', or a traces CSV")
        records = _count(cfg, workers)
    pol = cfg.policy
    header = make_header("analyze", cfg.seed, cfg.config_hash, pol.to_json(), **extra)
    body: dict = {"header": header}
    body["flagged_records"] = sum(r.flagged for r in records)
    ranking = None
    if cfg.candidate is None:
        genus = cfg.curve.genus if cfg.curve else (2 if any(r.genus == 2 for r in records) else 1)
        catalog = cfg.catalog or DEFAULT_CATALOG[genus]
        ranking = identify(records, catalog, cfg.group, pol)
        main = ranking[0].report
    else:
        main = analyze(records, cfg.candidate.name, cfg.candidate.component, pol)
    body.update(main.to_json())
    if ranking is not None:
        body["ranking"] = [c.to_json() for c in ranking]
    if cfg.hypothesis is not None:
        body["conditional"] = component_conditional_test(records, cfg.group, cfg.hypothesis, pol).to_json()
    return dump_json(body)


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("lefschetz", help="twisted Lefschetz components report (JSON)")
    p.add_argument("--config", required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("haar-moments", help="Haar trace moments (JSON)")
    p.add_argument("--group", required=True)
    p.add_argument("--component", help="identity, nontrivial or mixture (default: whole group)")
    p.add_argument("--method", choices=("mc", "quad"), default="quad")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--n", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("count", help="Frobenius trace records (CSV)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--parallelism", type=int)

    p = sub.add_parser("analyze", help="equidistribution analysis (JSON)")
    p.add_argument("--config", required=True)
    p.add_argument("--traces")
    p.add_argument("--out", required=True)
    p.add_argument("--parallelism", type=int)

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return ap


def _load(path: str, command: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    cfg = parse_config(text)
    if cfg.command != command:
        raise ConfigError(f"config is for command {cfg.command!r}, not {command!r}")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "selftest":
            return 0 if run_selftest() else 1
        if args.cmd == "haar-moments":
            _emit(run_haar(args.group, args.component, args.method, args.k, args.n, args.seed), args.out)
            return 0
        cfg = _load(args.config, args.cmd)
        if args.cmd == "lefschetz":
            if args.budget is not None:
                cfg.budget = args.budget
                cfg.raw = {**cfg.raw, "budget": args.budget}
            if args.seed is not None:
                cfg.seed = args.seed
                cfg.raw = {**cfg.raw, "seed": args.seed}
            _emit(run_lefschetz(cfg), args.out)
        elif args.cmd == "count":
            _emit(run_count(cfg, _workers(cfg, args.parallelism)), args.out)
        elif args.cmd == "analyze":
            _emit(run_analyze(cfg, _workers(cfg, args.parallelism), args.traces), args.out)
        return 0
    except ConfigError as e:
        print(f"stlab: config error: {e}", file=sys.stderr)
        return 2
    except StlabError as e:
        print(f"stlab: error: {e}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as e:
        print(f"stlab: error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
