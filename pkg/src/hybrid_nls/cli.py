"""Command-line entry point: ``hybrid-nls <subcommand> ...``.

Exit codes: 0 success, 1 failed checks, 2 blowup, 64 bad configuration,
74 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__, operators, resonance, solver, spectral, trees, verify

EX_OK, EX_CHECKS, EX_BLOWUP, EX_CONFIG, EX_IO = 0, 1, 2, 64, 74

log = logging.getLogger("hybrid_nls")

DEFAULT_CONFIG = {
    "solver": {},
    "experiment": {"amplitude": 1.0, "tooth_width": 0.1, "slots": [0], "smoothing": 0.05},
    "v0": "knockout",
    "record_every": 10,
    "sobolev_index": 1.0,
}


class ConfigError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    """``key.sub=value`` pairs; values are parsed as JSON when possible."""
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        node = config
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = _parse_value(value)
    return config


def load_config(path: str | None, overrides: list[str]) -> dict:
    config = json.loads(json.dumps(DEFAULT_CONFIG))
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be an object")
        for k, v in user.items():
            if isinstance(v, dict) and isinstance(config.get(k), dict):
                config[k].update(v)
            else:
                config[k] = v
    return apply_overrides(config, overrides)


def solver_config(config: dict) -> solver.SolverConfig:
    known = {f.name for f in fields(solver.SolverConfig)}
    raw = config.get("solver", {})
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown solver keys: {sorted(unknown)}")
    try:
        return solver.SolverConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver configuration: {exc}") from exc


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _manifest(out: Path, command: str, config, checks, started: float, extra=None) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "numpy": np.__version__,
        "config": config,
        "length_scale": spectral.LENGTH_SCALE,
        "started": _dt.datetime.fromtimestamp(started, _dt.timezone.utc).isoformat(),
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "wall_time_s": time.time() - started,
        "checks": [c.to_dict() for c in checks],
    }
    if extra:
        doc.update(extra)
    (out / "manifest.json").write_text(json.dumps(doc, indent=2, default=str))


# ----------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    started = time.time()
    config = load_config(args.config, args.set)
    cfg = solver_config(config)
    exp_raw = dict(config.get("experiment", {}))
    exp_raw["slots"] = tuple(exp_raw.get("slots", ()))
    try:
        experiment = solver.ExperimentSpec(**exp_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid experiment: {exc}") from exc
    mode = config.get("v0", "knockout")
    if mode not in ("knockout", "zero"):
        raise ConfigError(f"v0 must be 'knockout' or 'zero', got {mode!r}")
    s_index = float(config.get("sobolev_index", 1.0))
    record_every = int(config.get("record_every", cfg.record_every))

    g = cfg.line_grid
    w0 = solver.tooth_field(cfg, experiment.amplitude, experiment.tooth_width)
    try:
        v0 = solver.knock_out(w0, experiment, g) if mode == "knockout" else spectral.LineField.zeros(g)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(args.out)

    blowup = None
    try:
        traj = solver.co_evolve(solver.HybridState(w0, v0), cfg, record_every=record_every)
    except solver.BlowupError as exc:
        blowup = exc
        traj = solver.Trajectory()
        traj.append(exc.last_state.t, exc.last_state)

    rows = [solver.observables(s, experiment.slots, s_index) for s in traj.states]
    header = list(rows[0])
    _write_csv(out / "trajectory.csv", header, [[repr(float(r[h])) for h in header] for r in rows])

    w_drift = abs(traj.final.w.l2() - w0.l2()) / max(w0.l2(), 1e-300)
    checks = [verify.check("w-mass", w_drift, 1e-8)]
    if mode == "zero":
        vmax = max(float(np.abs(s.v.values).max()) for s in traj.states)
        checks.append(verify.check("v-zero-preserved", vmax, 1e-12))
    extra = {"blowup": None if blowup is None else {"t": blowup.t}}
    _manifest(out, "simulate", {**config, "solver": cfg.to_dict()}, checks, started, extra)
    if blowup is not None:
        log.error("%s", blowup)
        return EX_BLOWUP
    return EX_OK if all(c.passed for c in checks) else EX_CHECKS


def cmd_trees(args) -> int:
    started = time.time()
    out = _out_dir(args.out)
    J, mode = args.J, args.mode
    checks = []
    if mode == "census":
        rows = [trees.census_recursive(j).row() for j in range(1, J + 1)]
        trees.write_census_csv(rows, out / "census.csv")
    elif mode == "enumerate":
        if not 1 <= J <= trees.J_MAX:
            raise ConfigError(f"enumeration supports 1 <= J <= {trees.J_MAX}")
        codes = trees.generation_codes(J)
        with open(out / "trees.txt", "w") as fh:
            for c in codes:
                fh.write(trees.ColoredTree(c).bracket() + "\n")
        census = trees.census_enumerated(J)
        trees.write_census_csv([census.row()], out / "census.csv")
        checks.append(verify.check("enumeration-matches-recursion",
                                   int(census.per_tree == trees.census_recursive(J).per_tree), 1, "=="))
    else:
        rows = []
        for j in range(1, J + 1):
            N, ba, bb, ok = trees.bound_check(j)
            rows.append((j, N, ba, bb, ok))
        _write_csv(out / "bounds.csv", ["J", "N", "bound_double_factorial", "bound_gamma", "ok"], rows)
        checks.append(verify.check("growth-bound", int(all(r[4] for r in rows)), 1, "=="))
    _manifest(out, "trees", {"J": J, "mode": mode}, checks, started)
    return EX_OK if all(c.passed for c in checks) else EX_CHECKS


def cmd_resonance(args) -> int:
    started = time.time()
    out = _out_dir(args.out)
    quads = resonance.enumerate_A_N(args.n, args.N, args.band, complement=args.complement)
    resonance.write_quads_csv(quads, args.N, out / "quads.csv")
    bad, rel = verify.phi_identity_errors(args.seed)
    checks = [verify.check("phi-integer-mismatches", bad, 0, "=="), verify.check("phi-real-relative", rel, 1e-12)]
    _manifest(out, "resonance", vars_clean(args), checks, started, {"count": len(quads)})
    return EX_OK if all(c.passed for c in checks) else EX_CHECKS


def cmd_operators(args) -> int:
    started = time.time()
    out = _out_dir(args.out)
    rng = np.random.default_rng(args.seed)
    rows = []
    checks = []
    for kind in operators.KINDS:
        if args.mode == "fir":
            part = operators.fir_audit(kind, args.count, rng)
        else:
            part = operators.expl_audit(kind, args.count, rng)
        r = np.array([x.ratio for x in part])
        if args.mode == "fir":
            checks.append(verify.check(f"fir-spread-{kind}", r.max() / np.median(r), 5.0, "<"))
        else:
            checks.append(verify.check(f"expl-bound-{kind}", r.max(), operators.YOUNG_CONSTANT[kind]))
        rows.extend(part)
    operators.write_audit_csv(rows, out / f"{args.mode}_audit.csv")
    _manifest(out, "operators", vars_clean(args), checks, started)
    return EX_OK if all(c.passed for c in checks) else EX_CHECKS


def cmd_verify(args, partition=None) -> int:
    started = time.time()
    if partition is None and getattr(args, "broken_partition", False):
        partition = verify.UnnormalizedPartition()
    checks = verify.run_suite(args.suite, partition)
    for c in checks:
        print(c.line())
    if args.out:
        _manifest(_out_dir(args.out), "verify", {"suite": args.suite}, checks, started)
    failed = [c for c in checks if not c.passed]
    for c in failed:
        log.error("violated invariant %s: measured %.6g, threshold %.6g", c.id, c.measured, c.threshold)
    return EX_OK if not failed else EX_CHECKS


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybrid-nls", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a knockout experiment")
    p.add_argument("--config")
    p.add_argument("--out", default="run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("trees", help="colored-tree census, enumeration and growth bounds")
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--mode", choices=("enumerate", "census", "bounds"), default="census")
    p.add_argument("--out", default="trees")
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("resonance", help="enumerate A_N(n) and check the phase identity")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--N", type=float, default=64)
    p.add_argument("--band", type=int, default=8)
    p.add_argument("--complement", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="resonance")
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("operators", help="bound audits of the first-generation operators")
    p.add_argument("--mode", choices=("fir", "expl"), default="fir")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="operators")
    p.set_defaults(func=cmd_operators)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=sorted(verify.SUITES) + ["all"], default="all")
    p.add_argument("--out")
    p.add_argument("--broken-partition", action="store_true",
                   help="run against an unnormalised partition (harness self-test; must fail)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EX_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EX_IO


if __name__ == "__main__":
    sys.exit(main())
