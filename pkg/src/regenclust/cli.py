"""Command-line front end.

Usage::

    regenclust {simulate,indices,cylinder,decay,validate} CONFIG [--seed N] [--out PATH]

Exit status: 0 success, 1 validation failure, 2 configuration parse error,
3 precondition violation.

Outputs
-------
simulate   trajectory text file (see ``simulate.write_trajectory``)
indices    CSV ``level,e_a,g_a,theta1,cluster_mean,sojourn_mean,theta1_mc,
           theta1_mc_stderr,cluster_mean_mc,cluster_mean_mc_stderr,sojourn_mc,
           sojourn_mc_stderr,oracle_theta1_lower,oracle_theta1_upper``
cylinder   CSV ``n,s_n,r_n,mu,theta1,cluster_mean,sojourn_mean,ks``
decay      CSV ``lag,c_recursion,c_closed_form,c_mc,c_mc_stderr,envelope``
validate   JSON report (``validation.SCHEMA_VERSION``)

Floats are written with 12 significant digits; columns that do not apply
(no Monte Carlo requested, no closed form for the model) are left empty.
When writing to a file, a ``.meta.json`` sidecar records the command, config,
seed and a timestamp, so the data file itself is byte-reproducible.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import sys
from pathlib import Path

from . import cylinders as cyl
from . import decay, indices, oracle
from . import montecarlo as mc
from .config import ConfigError, ExperimentConfig, PreconditionError, load_config
from .errors import OracleBudgetExceeded, RegenError
from .observables import Exceedance
from .simulate import (RandomStream, format_trajectory, simulate_from_regeneration,
                       simulate_stationary)
from .validation import run_validation

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x:.12g}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def cmd_indices(cfg: ExperimentConfig) -> str:
    model = cfg.model()
    header = ["level", "e_a", "g_a", "theta1", "cluster_mean", "sojourn_mean", "theta1_mc",
              "theta1_mc_stderr", "cluster_mean_mc", "cluster_mean_mc_stderr", "sojourn_mc",
              "sojourn_mc_stderr", "oracle_theta1_lower", "oracle_theta1_upper"]
    rows = []
    for i, a in enumerate(cfg.levels):
        e = model.symbol_law.tail(a)
        if not 0.0 < e < 1.0:
            raise PreconditionError(f"level {a} is degenerate (e_a = {e})")
        obs = Exceedance(a)
        row = [a, e, model.block_moment_tail(a, 1) / model.nu, indices.theta1_exceedance(model, a),
               indices.cluster_mean_entering(model, a), indices.sojourn_mean(model, a)]
        if cfg.n_samples:
            seed = cfg.seed + 3 * i
            th = mc.estimate_theta_q(model, obs, 1, cfg.n_samples, seed, cfg.workers)
            cl = mc.estimate_cluster_distribution(model, obs, "entering", 1, cfg.n_samples,
                                                  seed + 1, workers=cfg.workers)
            sj = mc.estimate_cluster_distribution(model, obs, "sojourn", 1, cfg.n_samples,
                                                  seed + 2, workers=cfg.workers)
            row += [th.value, th.stderr, cl.mean.value, cl.mean.stderr, sj.mean.value,
                    sj.mean.stderr]
        else:
            row += [None] * 6
        if model.finite or cfg.oracle_max_symbol:
            b = oracle.exact_theta_q(model, obs, 1, cfg.oracle_budget, cfg.oracle_max_symbol)
            row += [b.lower, b.upper]
        else:
            row += [None, None]
        rows.append(row)
    return _csv(header, rows)


def cmd_cylinder(cfg: ExperimentConfig) -> str:
    model = cfg.model()
    a = cfg.symbol
    if a is None:
        raise PreconditionError("cylinder needs 'symbol'")
    if not 0.0 < model.pmf(a) < 1.0:
        raise PreconditionError(f"symbol {a} must have probability strictly between 0 and 1")
    lengths = cfg.lengths or [1]
    rows = []
    for i, n in enumerate(lengths):
        d = cyl.euclid_decomposition(n, a)
        ks = None
        if cfg.n_replicas:
            sample = mc.estimate_hitting_scaled(model, a, n, cfg.n_replicas, cfg.seed + i,
                                                workers=cfg.workers)
            ks = mc.ks_exponential(sample)
        rows.append([n, d.s_n, d.r_n, cyl.mu_cylinder(model, a, n), cyl.theta1_cylinder(model, a, n),
                     cyl.cluster_mean_entering_cyl(model, a, n), cyl.sojourn_mean_cyl(model, a, n),
                     ks])
    return _csv(["n", "s_n", "r_n", "mu", "theta1", "cluster_mean", "sojourn_mean", "ks"], rows)


def _morse_p1(model):
    if model.block_family.name != "block" or not model.finite:
        return None
    symbols, probs = model.symbol_law.table()
    if symbols.tolist() == [1, 2]:
        return float(probs[0])
    return None


def cmd_decay(cfg: ExperimentConfig) -> str:
    model = cfg.model()
    if not model.finite:
        raise PreconditionError("decay needs a finite-support model (set model.truncate)")
    seq = decay.regen_correlation(model, cfg.n_max)
    p1 = _morse_p1(model)
    est = mc.estimate_correlation(model, cfg.n_max, cfg.n_samples, cfg.seed, cfg.workers) \
        if cfg.n_samples else None
    rows = []
    for n in range(cfg.n_max + 1):
        rows.append([
            n, float(seq[n]),
            decay.morse_closed_form(p1, n) if p1 is not None else None,
            est[n].value if est else None, est[n].stderr if est else None,
            decay.psi_rate_bound(p1, n) if p1 is not None else None,
        ])
    return _csv(["lag", "c_recursion", "c_closed_form", "c_mc", "c_mc_stderr", "envelope"], rows)


def cmd_validate(cfg: ExperimentConfig) -> tuple[str, bool]:
    report = run_validation(n_samples=cfg.n_samples, seed=cfg.seed, sigma=cfg.sigma,
                            k_max=cfg.oracle_k_max, budget=cfg.oracle_budget, workers=cfg.workers)
    return json.dumps(report, indent=2, sort_keys=True) + "\n", report["passed"]


def cmd_simulate(cfg: ExperimentConfig) -> str:
    model = cfg.model()
    sim = simulate_stationary if cfg.start == "stationary" else simulate_from_regeneration
    return format_trajectory(sim(model, cfg.horizon, RandomStream(cfg.seed, 0)))


def _write(text: str, out: Path | None, command: str, cfg: ExperimentConfig, config_path: str):
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    _sidecar(out, command, cfg, config_path)


def _sidecar(out: Path, command: str, cfg: ExperimentConfig, config_path: str):
    meta = {
        "command": command,
        "config_path": str(config_path),
        "config": cfg.raw,
        "seed": cfg.seed,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regenclust",
                                     description="Clustering indices of regenerative processes.")
    parser.add_argument("command", choices=["simulate", "indices", "cylinder", "decay", "validate"])
    parser.add_argument("config", help="key = value configuration file")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="output path (default: config 'output', else stdout)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise PreconditionError("seed must be a 64-bit unsigned integer")
            cfg.seed = args.seed
        out = args.out or cfg.output
        out = Path(out) if out else None
        passed = True
        if args.command == "simulate":
            text = cmd_simulate(cfg)
        elif args.command == "validate":
            text, passed = cmd_validate(cfg)
        else:
            text = {"indices": cmd_indices, "cylinder": cmd_cylinder, "decay": cmd_decay}[
                args.command](cfg)
        _write(text, out, args.command, cfg, args.config)
        return EXIT_OK if passed else EXIT_FAILED
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, RegenError, OracleBudgetExceeded) as err:
        print(f"precondition violated: {err}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
