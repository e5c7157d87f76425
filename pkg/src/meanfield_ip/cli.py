"""Command-line harness: ``meanfield-ip run | list | oracle``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on
usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, parse_config
from .experiments import REGISTRY, describe

__all__ = ["RunRecord", "run_experiment", "parse_config", "main"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunRecord:
    """Contents of ``run.json``."""

    config: dict
    config_hash: str
    version: str
    wall_time_s: float
    assertions: dict
    passed: bool
    artifacts: list
    tolerances: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True, default=_jsonable) + "\n"

    @property
    def failed(self) -> list:
        return [k for k, v in self.assertions.items() if not v]


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Run the named suite, write its tables and ``run.json`` into the output directory."""
    if cfg.experiment is None:
        raise ConfigError("no experiment given; registered: " + ", ".join(EXPERIMENTS))
    if cfg.experiment not in REGISTRY:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; registered: " + ", ".join(EXPERIMENTS))
    out = Path(cfg.output_dir or Path("meanfield_ip_runs") / cfg.experiment)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = REGISTRY[cfg.experiment](cfg, out)
    record = RunRecord(
        config=cfg.echo(),
        config_hash=cfg.config_hash(),
        version=__version__,
        wall_time_s=round(time.perf_counter() - start, 3),
        assertions=dict(result.assertions),
        passed=all(result.assertions.values()),
        artifacts=sorted(result.artifacts) + ["run.json"],
        tolerances=result.tolerances,
        summary=result.summary,
        notes=result.notes,
    )
    (out / "run.json").write_text(record.to_json(), encoding="utf-8")
    return record


# --- oracle subcommand -------------------------------------------------------------


def _fmt(x) -> str:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    return " ".join(format(v, ".17g") for v in arr.ravel())


def _oracle_lines(subcase: str, cfg: ExperimentConfig) -> list:
    from . import diagnostics as dg
    from . import gaussian as ga

    Q = cfg.matrix("Q", [[1.0, 0.5], [0.5, 1.0]])
    n = Q.shape[0]
    l = cfg.vector("l", np.zeros(n))
    t = cfg.get_float("T", 1.0)
    mean0 = cfg.vector("mu0_mean", [1.0, -1.0] if n == 2 else np.ones(n))
    mu0 = ga.ProductGaussian(mean0.reshape(n, 1), np.full(n, cfg.get_float("mu0_var", 1.0)))
    if subcase == "stationary":
        st = ga.stationary_mf_gaussian(Q, l)
        return [("means", st.means), ("variances", st.covs[:, 0, 0])]
    if subcase == "gibbs":
        g = ga.gibbs_gaussian(Q, l)
        return [("mean", g.mean), ("cov", g.cov), ("log_partition", ga.log_partition(Q, l))]
    if subcase == "ip-moments":
        g = ga.ip_moments_exact(-Q, mu0, t, offset=l)
        return [("t", t), ("means", g.means), ("variances", g.covs[:, 0, 0])]
    if subcase == "ou-moments":
        g = ga.ou_moments_exact(-Q, mu0.means[:, 0], np.diag(mu0.covs[:, 0, 0]), t, offset=l)
        return [("t", t), ("mean", g.mean), ("cov", g.cov)]
    if subcase == "growth-rate":
        mu = ga.ProductGaussian.standard(n)
        return [("rate", ga.entropy_growth_rate_gaussian(mu, -Q))]
    if subcase == "contraction":
        st = ga.stationary_mf_gaussian(Q, l)
        kappa = float(np.linalg.eigvalsh(Q)[0])
        w = ga.w2_gaussian(ga.ip_moments_exact(-Q, mu0, t, offset=l), st)
        return [("t", t), ("kappa", kappa), ("w2_to_mustar", w),
                ("bound", np.exp(-kappa * t) * ga.w2_gaussian(mu0, st))]
    if subcase == "fisher":
        g = ga.ip_moments_exact(-Q, mu0, t, offset=l)
        return [("t", t), ("projected_fisher", ga.projected_fisher_gaussian(g, Q, l)),
                ("kl_to_gibbs", ga.kl_gaussian(g, ga.gibbs_gaussian(Q, l)))]
    if subcase == "poincare":
        L = float(np.linalg.norm(Q, 2))
        return [("t", t), ("L", L), ("c_t", dg.poincare_constant_bound(cfg.get_float("mu0_var", 1.0), L, t))]
    raise ConfigError(f"unknown oracle subcase {subcase!r}; available: {', '.join(ORACLE_SUBCASES)}")


ORACLE_SUBCASES = ("stationary", "gibbs", "ip-moments", "ou-moments", "growth-rate", "contraction", "fisher",
                   "poincare")


# --- entry point -------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="meanfield-ip", description="Independent-projection experiments and oracles.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a key=value config file")
    run.add_argument("config", help="config file path")
    sub.add_parser("list", help="list registered experiments")
    orc = sub.add_parser("oracle", help="print closed-form values for the Gaussian test family")
    orc.add_argument("subcase", help=", ".join(ORACLE_SUBCASES))
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    # --key=value flags are config overrides, everything else goes to argparse
    flags = [a for a in argv if a.startswith("--") and "=" in a]
    rest = [a for a in argv if a not in flags]
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        if args.command == "list":
            for name in EXPERIMENTS:
                print(f"{name}\t{describe(name)}")
            return EXIT_PASS
        if args.command == "oracle":
            cfg = parse_config(None, flags)
            for key, val in _oracle_lines(args.subcase, cfg):
                print(f"{key} = {_fmt(val)}")
            return EXIT_PASS
        cfg = parse_config(args.config, flags)
        record = run_experiment(cfg)
    except ConfigError as exc:
        print(f"meanfield-ip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for name, ok in record.assertions.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    if record.passed:
        print(f"{cfg.experiment}: all checks passed ({record.config_hash})")
        return EXIT_PASS
    print(f"{cfg.experiment}: failed: {', '.join(record.failed)}", file=sys.stderr)
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
