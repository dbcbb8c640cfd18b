"""Command-line entry point: ``graphda {gen-data,run,bounds,sweep}``.

Exit codes: 0 ok, 2 usage, 3 I/O or parse failure, 4 solver/graph failure,
5 a bound check failed.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .data import (DATASET_FILES, SyntheticConfig, atomic_write_text, format_float,
                   generate_synthetic, load_problem, mask_labels, save_problem,
                   subsample_target)
from .errors import (GraphError, InfeasibleWeightsError, ParseError, SingularSystemError)
from .experiments import FAMILIES, benchmark_problem, manifold_family, run_method, theory_instance
from .pipeline import METHODS, DaglConfig, load_defaults
from .theory import theorem1_bound

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER, EXIT_THEOREM = 0, 2, 3, 4, 5

log = logging.getLogger("graphda")


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"1..3,7"`` -> ``[1, 2, 3, 7]``."""
    out: list[int] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise UsageError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise UsageError("empty value list")
    return out


def _int_list(text):
    try:
        return parse_int_list(text)
    except (ValueError, UsageError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _worker_count(jobs: int) -> int:
    env = os.environ.get("GRAPHDA_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, jobs))


def _parallel_map(fn, items):
    """Ordered map; uses worker processes when GRAPHDA_THREADS allows."""
    items = list(items)
    workers = _worker_count(len(items))
    if workers == 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------------ config

def load_defaults_synthetic() -> dict:
    text = resources.files("graphda").joinpath("defaults.json").read_text()
    return json.loads(text)["synthetic"]


CONFIG_FLAGS = {
    "K": ("--K", int), "R": ("--R", int), "mu": ("--mu", float),
    "mu_s": ("--mu-s", float), "mu_t": ("--mu-t", float), "w_min": ("--w-min", float),
    "d_min": ("--d-min", float), "d_max": ("--d-max", float),
    "d_max_scale": ("--d-max-scale", float), "max_iterations": ("--iterations", int),
}


def _add_config_flags(p):
    p.add_argument("--config", type=Path, help="JSON file with DaglConfig keys")
    for key, (flag, typ) in CONFIG_FLAGS.items():
        p.add_argument(flag, dest=f"cfg_{key}", type=typ, default=None)
    p.add_argument("--sigma", dest="cfg_sigma", default=None,
                   help="kernel width or 'auto'")


def build_config(args) -> DaglConfig:
    values = load_defaults()
    if args.config is not None:
        with open(args.config) as fh:
            loaded = json.load(fh)
        values.update(loaded.get("dagl", loaded))
    for key in list(CONFIG_FLAGS) + ["sigma"]:
        v = getattr(args, f"cfg_{key}")
        if v is not None:
            values[key] = v if key != "sigma" or v == "auto" else float(v)
    try:
        return DaglConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _synthetic_from_args(args) -> SyntheticConfig:
    try:
        return SyntheticConfig(n_per_domain=args.n_per_domain, std=args.std,
                               offset=(args.offset, 0.0, 0.0),
                               rotation_deg=args.rotation, seed=getattr(args, "seed", 0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_synthetic_flags(p):
    d = load_defaults_synthetic()
    p.add_argument("--n-per-domain", type=int, default=d["n_per_domain"])
    p.add_argument("--std", type=float, default=d["std"])
    p.add_argument("--offset", type=float, default=d["offset"][0],
                   help="class mean at +/-offset on axis 0")
    p.add_argument("--rotation", type=float, default=d["rotation_deg"],
                   help="degrees about the third axis")


def _fingerprint_files(paths) -> str:
    h = hashlib.sha256()
    for path in paths:
        h.update(Path(path).name.encode() + b"\0")
        h.update(Path(path).read_bytes())
    return h.hexdigest()


def _fingerprint_obj(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


# ------------------------------------------------------------------ jobs

def _seed_job(job):
    """One (method, seed) evaluation; module-level so worker processes can run it."""
    method, cfg_dict, seed, source = job
    cfg = DaglConfig.from_dict(cfg_dict)
    t0 = time.perf_counter()
    if source["kind"] == "synthetic":
        syn = SyntheticConfig(**source["synthetic"])
        problem, held = benchmark_problem(seed, source["n_labels"], source.get("n_target"), syn)
    else:
        full = load_problem(source["path"], skip_header=source.get("skip_header", False))
        if source.get("n_target"):
            full = subsample_target(full, source["n_target"], seed)
        problem, held = mask_labels(full, keep_count=source["n_labels"], seed=seed)
    result = run_method(method, problem, cfg.replace(seed=seed), held)
    elapsed = time.perf_counter() - t0
    m = result.metrics
    entry = {
        "seed": seed,
        "error": None if m is None else m.rate,
        "wrong": None if m is None else m.errors,
        "n_eval": 0 if m is None else m.total,
        "confusion": None if m is None else m.confusion.tolist(),
        "trace": [dict(vars(r)) for r in result.trace],
    }
    return entry, elapsed


def _aggregate(entries) -> dict:
    errs = np.array([e["error"] for e in entries if e["error"] is not None], dtype=float)
    if errs.size == 0:
        return {"n": 0, "mean": None, "std": None}
    return {"n": int(errs.size), "mean": float(errs.mean()), "std": float(errs.std())}


def _source_from_args(args) -> tuple[dict, dict]:
    if args.data is not None:
        paths = [Path(args.data) / name for name in DATASET_FILES]
        for p in paths:
            if not p.is_file():
                raise FileNotFoundError(f"missing dataset file: {p}")
        source = {"kind": "csv", "path": str(args.data), "n_labels": args.n_labels,
                  "skip_header": args.skip_header, "n_target": args.n_target}
        fp = {"kind": "csv", "sha256": _fingerprint_files(paths)}
    else:
        syn = _synthetic_from_args(args)
        synd = {"n_per_domain": syn.n_per_domain, "offset": list(syn.offset),
                "std": syn.std, "rotation_deg": syn.rotation_deg}
        source = {"kind": "synthetic", "synthetic": synd, "n_labels": args.n_labels,
                  "n_target": args.n_target}
        fp = {"kind": "synthetic", "sha256": _fingerprint_obj(synd), "params": synd}
    return source, fp


# ------------------------------------------------------------------ commands

def cmd_gen_data(args) -> int:
    syn = _synthetic_from_args(args)
    problem = generate_synthetic(syn)
    if args.n_labels is not None:
        problem, _ = mask_labels(problem, keep_count=args.n_labels, seed=args.seed)
    for path in save_problem(problem, args.out):
        print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = build_config(args)
    source, fp = _source_from_args(args)
    jobs = [(args.method, cfg.to_dict(), s, source) for s in args.seeds]
    t0 = time.perf_counter()
    results = _parallel_map(_seed_job, jobs)
    entries = []
    for (entry, elapsed) in results:
        log.info("seed %d: error %s (%.2fs)", entry["seed"], entry["error"], elapsed)
        entries.append(entry)
    record = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": "run",
        "method": args.method,
        "config": cfg.to_dict(),
        "dataset": fp,
        "n_labels": args.n_labels,
        "n_target": args.n_target,
        "seeds": entries,
        "aggregate": _aggregate(entries),
    }
    if args.timings:
        record["timings"] = {"total_seconds": time.perf_counter() - t0,
                             "per_seed_seconds": [el for _, el in results]}
    _emit(json.dumps(record, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        spec = manifold_family(args.family, c=args.c, sigma=args.sigma, angle=args.angle)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inst = theory_instance(spec, args.n, args.seed, K=args.K, R=args.R,
                           label_ratio=args.label_ratio, mu=args.mu)
    report = theorem1_bound(inst)
    record = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": "bounds",
        "instance": {"family": args.family, "n": args.n, "seed": args.seed, "K": args.K,
                     "R": args.R, "label_ratio": args.label_ratio, "mu": args.mu},
        "manifold": spec.to_dict(),
        "report": report.to_dict(),
    }
    _emit(json.dumps(record, indent=2) + "\n", args.out)
    if not report.all_passed:
        log.error("bound check failed")
        return EXIT_THEOREM
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = build_config(args)
    axis = args.axis
    jobs, keys = [], []
    for value in args.values:
        cfg = base.replace(K=value) if axis == "K" else base
        # axis N counts labeled target nodes
        n_labels = value if axis == "N" else args.n_labels
        n_target = value if axis == "Nt" else args.n_target
        ns = argparse.Namespace(**{**vars(args), "n_labels": n_labels, "n_target": n_target})
        source, _ = _source_from_args(ns)
        for method in args.methods:
            for s in args.seeds:
                jobs.append((method, cfg.to_dict(), s, source))
                keys.append((value, method))
    results = _parallel_map(_seed_job, jobs)
    grouped: dict = {}
    for key, (entry, _) in zip(keys, results):
        grouped.setdefault(key, []).append(entry["error"])
    buf = io.StringIO()
    buf.write("axis,value,method,mean_error,std_error,n_seeds\n")
    for value in args.values:
        for method in args.methods:
            errs = np.array(grouped[(value, method)], dtype=float)
            buf.write(f"{axis},{value},{method},{format_float(errs.mean())},"
                      f"{format_float(errs.std())},{errs.size}\n")
            log.info("%s=%s %s: %.4f", axis, value, method, errs.mean())
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphda", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"graphda {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-q", "--quiet", action="store_true", help="no per-seed log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", parents=[common], help="write a synthetic dataset as four CSV files")
    g.add_argument("--synthetic", action="store_true", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--n-labels", type=int, default=None,
                   help="keep only this many target labels (default: keep all)")
    _add_synthetic_flags(g)
    g.set_defaults(func=cmd_gen_data)

    def data_flags(p):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--data", type=Path, help="directory holding the four dataset CSVs")
        src.add_argument("--synthetic", action="store_true",
                         help="regenerate the synthetic set per seed (default)")
        p.add_argument("--skip-header", action="store_true")
        p.add_argument("--seeds", type=_int_list, default=[1], help="e.g. 1..10 or 1,2,5")
        p.add_argument("--n-labels", type=int, default=load_defaults_synthetic()["n_labels"],
                       help="target labels kept per seed")
        p.add_argument("--n-target", type=int, default=None, help="subsample the target domain")
        p.add_argument("--out", type=Path, default=None, help="write here instead of stdout")
        _add_synthetic_flags(p)
        _add_config_flags(p)

    r = sub.add_parser("run", parents=[common], help="run one method over several seeds; JSON record")
    r.add_argument("--method", choices=sorted(METHODS), required=True)
    r.add_argument("--timings", action="store_true", help="include wall-clock timings")
    data_flags(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", parents=[common], help="mean/std error table over one axis; CSV")
    s.add_argument("--axis", choices=["K", "N", "Nt"], required=True)
    s.add_argument("--values", type=_int_list, required=True)
    s.add_argument("--methods", type=lambda t: [m for m in t.split(",") if m],
                   default=["sda", "sda-dagl"])
    data_flags(s)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", parents=[common], help="evaluate the error bound on a paired-manifold instance")
    b.add_argument("--family", choices=FAMILIES, required=True)
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--c", type=float, default=1.5, help="scale factor (scale family)")
    b.add_argument("--angle", type=float, default=90.0, help="degrees (rotation family)")
    b.add_argument("--sigma", type=float, default=0.5, help="fixed kernel width")
    b.add_argument("--K", type=int, default=8)
    b.add_argument("--R", type=int, default=5)
    b.add_argument("--mu", type=float, default=1.0)
    b.add_argument("--label-ratio", type=float, default=0.2)
    b.add_argument("--out", type=Path, default=None)
    b.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    if getattr(args, "command", None) == "sweep":
        unknown = [m for m in args.methods if m not in METHODS]
        if unknown or not args.methods:
            parser.error(f"unknown methods {unknown}; choose from {sorted(METHODS)}")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"graphda: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, IndexError) as exc:
        print(f"graphda: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GraphError, SingularSystemError, InfeasibleWeightsError) as exc:
        print(f"graphda: solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except RuntimeError as exc:
        print(f"graphda: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"graphda: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
