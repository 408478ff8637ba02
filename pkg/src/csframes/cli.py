"""Command-line front end: ``csframes <task> --config <path>``.

Exit status is 0 on success, 1 when a check fails or a computation is
refused, and 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import moments as mo
from .config import TASKS, ExperimentConfig, parse_config
from .errors import ConfigError, CSFramesError, InfeasibleMoments
from .families import (
    PhotonAdded,
    domain_radius,
    dual,
    dual_overlap_closed_form,
    evaluate,
    family_spec,
    in_domain,
)
from .numerics import interior
from .verify import run_checks, sample_points

DEFAULT_OUT = "csframes_out"

HELP_EPILOG = """\
config format (key = value, '#' comments):

  [family]      kind = canonical | rescaled | photon_added | binomial | gp | bg
                       | hypergeometric | squeezed, plus that kind's parameters
  [truncation]  n_max = 64, tail_tol = 1e-10, edge_margin = 2   (defaults)
  [task]        kind = eval | verify | moments | scan | dual-compare
                epsilon = 1e-3 (domain margin), output = <dir>, and
                eval:         z = <complex list>, allow_boundary = false
                verify:       z = <complex list>   (default: seeded samples)
                moments:      max_n = 12, n_nodes = 64, tol = 1e-6, n_theta
                scan:         r_min, r_max, n_r = 8, n_theta = 16, allow_boundary
                dual-compare: z = <complex list>

output directory: CSFRAMES_OUT, else --out, else [task] output, else ./csframes_out
"""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a CSV atomically: temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_fmt(v) for v in row] for row in rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _split(c: complex) -> tuple[float, float]:
    return float(np.real(c)), float(np.imag(c))


def _nan2() -> tuple[float, float]:
    return float("nan"), float("nan")


def _dual_overlap(cfg: ExperimentConfig, z: complex, res) -> tuple[float, float]:
    try:
        d = evaluate(dual(cfg.family), z, cfg.trunc, epsilon=cfg.epsilon)
    except CSFramesError:
        return _nan2()
    return _split(d.vector.inner(res.vector))


def task_eval(cfg: ExperimentConfig, out: Path) -> int:
    rows, coeff_rows = [], []
    allow = cfg.params.get("allow_boundary", False)
    for i, z in enumerate(cfg.params["z"]):
        res = evaluate(cfg.family, z, cfg.trunc, epsilon=cfg.epsilon, allow_boundary=allow)
        rows.append((i, *_split(z), res.domain_ok, res.norm_in_H, res.tail_mass, *_dual_overlap(cfg, z, res)))
        coeff_rows += [(i, n, *_split(c)) for n, c in enumerate(res.vector.coeffs)]
        print(f"z[{i}] = {z}: norm_in_H = {res.norm_in_H:.12g}, domain_ok = {_fmt(res.domain_ok)}")
    write_csv(out / "eval.csv", ["z_index", "z_re", "z_im", "domain_ok", "norm_in_H", "tail_mass", "dual_overlap_re", "dual_overlap_im"], rows)
    write_csv(out / "eval_coefficients.csv", ["z_index", "n", "re", "im"], coeff_rows)
    return 0


def task_verify(cfg: ExperimentConfig, out: Path, seed: int) -> int:
    checks = run_checks(cfg.family, cfg.trunc, seed=seed, zs=cfg.params.get("z"))
    write_csv(out / "verify.csv", ["check", "deviation", "tolerance", "passed"], [(c.name, c.deviation, c.tolerance, c.passed) for c in checks])
    failed = [c for c in checks if not c.passed]
    for c in checks:
        line = f"{'PASS' if c.passed else 'FAIL'}  {c.name}  deviation={c.deviation:.3e}  tolerance={c.tolerance:.1e}"
        print(line + (f"  ({c.detail})" if c.detail else ""))
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


def task_moments(cfg: ExperimentConfig, out: Path) -> int:
    spec = family_spec(cfg.family)
    max_n = cfg.params.get("max_n", 12)
    targets = mo.target_moments(spec, max_n + 1)
    L, _ = domain_radius(cfg.family)
    grid = None
    if "n_nodes" in cfg.params:
        grid = mo.default_grid(spec, max_n + 1, cfg.params["n_nodes"])
    status, frame_dev = "ok", float("nan")
    try:
        measure = mo.fit_discrete_measure(targets, grid, max_n, tol=cfg.params.get("tol", 1e-6))
    except InfeasibleMoments as exc:
        measure, status = exc.measure, "infeasible"
    fitted = np.exp(measure.log_moments(max_n + 1))
    if status == "ok":
        # frame check on a cutoff whose interior covers exactly the fitted moments
        trunc = cfg.trunc.with_n_max(max_n + 1 + cfg.trunc.edge_margin)
        n_theta = cfg.params.get("n_theta", 2 * trunc.n_max)
        frame_dev = mo.frame_operator(cfg.family, measure, n_theta, trunc).operator_norm_deviation
    write_csv(out / "moments.csv", ["n", "target", "fitted", "rel_error"], [(n, t, f, abs(f - t) / t) for n, (t, f) in enumerate(zip(targets.m, fitted))])
    write_csv(out / "moments_measure.csv", ["k", "node", "weight"], [(k, r, w) for k, (r, w) in enumerate(zip(measure.nodes, measure.weights))])
    write_csv(
        out / "moments_summary.csv",
        ["max_n", "n_nodes", "nonzero_weights", "residual", "frame_deviation", "status"],
        [(max_n, measure.nodes.size, int(np.count_nonzero(measure.weights)), measure.fit_residual, frame_dev, status)],
    )
    print(f"moment fit: status={status}, residual={measure.fit_residual:.3e}, frame deviation={frame_dev:.3e}")
    return 0 if status == "ok" else 1


def task_scan(cfg: ExperimentConfig, out: Path) -> int:
    L, _ = domain_radius(cfg.family)
    r_max_default = 2.0 if L.infinite else 0.9 * L.value
    r_min = cfg.params.get("r_min", 0.0)
    r_max = cfg.params.get("r_max", r_max_default)
    n_r = cfg.params.get("n_r", 8)
    n_theta = cfg.params.get("n_theta", 16)
    allow = cfg.params.get("allow_boundary", False)
    rows = []
    for r in np.linspace(r_min, r_max, n_r):
        for j in range(n_theta):
            theta = 2 * np.pi * j / n_theta
            z = complex(np.round(r * np.exp(1j * theta), 15))
            inside = in_domain(cfg.family, z, cfg.epsilon)
            try:
                res = evaluate(cfg.family, z, cfg.trunc, epsilon=cfg.epsilon, allow_boundary=allow)
                vals = (res.norm_in_H, res.tail_mass, *_dual_overlap(cfg, z, res), "ok")
            except CSFramesError as exc:
                vals = (float("nan"), float("nan"), *_nan2(), type(exc).__name__)
            rows.append((r, theta, *_split(z), inside, *vals))
    header = ["r", "theta", "z_re", "z_im", "domain_ok", "norm_in_H", "tail_mass", "dual_overlap_re", "dual_overlap_im", "status"]
    write_csv(out / "scan.csv", header, rows)
    inside = sum(1 for row in rows if row[4])
    ok = sum(1 for row in rows if row[-1] == "ok")
    print(f"scanned {len(rows)} points: {inside} inside the domain, {ok} evaluated")
    return 0


def task_dual_compare(cfg: ExperimentConfig, out: Path, seed: int) -> int:
    zs = cfg.params.get("z") or sample_points(cfg.family, 8, np.random.default_rng(seed), both=True)
    rows = []
    for z in zs:
        got = evaluate(dual(cfg.family), z, cfg.trunc, epsilon=cfg.epsilon).vector.inner(evaluate(cfg.family, z, cfg.trunc, epsilon=cfg.epsilon).vector)
        want = dual_overlap_closed_form(cfg.family, z)
        err = abs(got - want) if want is not None else float("nan")
        rows.append((*_split(z), *_split(got), *(_split(want) if want is not None else _nan2()), err))
        print(f"z = {z}: overlap = {got:.12g}, closed form = {want if want is None else format(want, '.12g')}")
    write_csv(out / "dual_compare.csv", ["z_re", "z_im", "overlap_re", "overlap_im", "expected_re", "expected_im", "abs_error"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="csframes",
        description="Evaluate and verify generalized coherent-state families in truncated Fock space.",
        epilog=HELP_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", required=True, help="path to the experiment config")
    p.add_argument("--out", help="output directory")
    p.add_argument("--nmax", type=int, help="override [truncation] n_max")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled test points (default 0)")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text, task=args.task)
        if args.nmax is not None:
            try:
                cfg = ExperimentConfig(cfg.family, cfg.trunc.with_n_max(args.nmax), cfg.task, cfg.params, cfg.epsilon, cfg.output)
            except ValueError as exc:
                raise ConfigError(str(exc), key="--nmax") from None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(os.environ.get("CSFRAMES_OUT") or args.out or cfg.output or DEFAULT_OUT)
    try:
        if cfg.task == "eval":
            return task_eval(cfg, out)
        if cfg.task == "verify":
            return task_verify(cfg, out, args.seed)
        if cfg.task == "moments":
            return task_moments(cfg, out)
        if cfg.task == "scan":
            return task_scan(cfg, out)
        return task_dual_compare(cfg, out, args.seed)
    except CSFramesError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
