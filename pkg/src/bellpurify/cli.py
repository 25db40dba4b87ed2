"""Command-line experiment runner.

Subcommands ``figure1``, ``hashing``, ``recurrence``, ``tomography`` and
``plan`` each write CSV files (and ``figure1`` an SVG) into ``--out``, plus
a ``<scenario>_summary.json``.  Settings come from an optional JSON config
file; every key can also be given as a flag, and flags win, e.g.::

    {"prior": {"kind": "delta-werner", "F": 0.92},
     "N": 8, "S0": 0.6, "delta": 0.1, "zeta_target": 0.5, "seed": 7}

Prior kinds: ``uniform-werner``, ``delta-werner`` (``F``),
``uniform-simplex``, ``maxent-band`` (``o``, ``band``) and ``file``
(``path``, a CSV with columns ``w1,w2,w3,w4,F,quad,value``).

Exit codes: 0 success, 2 configuration error, 3 degenerate posterior,
4 enumeration capacity exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hashing, planner, priors, recurrence, tomography
from .bellcore import B, werner_weights
from .errors import CapacityError, DegeneratePosteriorError, DomainError
from .io import write_csv, write_line_svg
from .rng import trial_rng

FIGURE1_SIZES = (9, 18, 48, 99)
EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_CAPACITY = 0, 2, 3, 4


class ConfigError(Exception):
    pass


@dataclass
class PriorSpec:
    kind: str = "uniform-werner"
    F: float | None = None
    o: float | None = None
    band: float | None = None
    path: str | None = None


@dataclass
class ExperimentConfig:
    scenario: str = "figure1"
    prior: PriorSpec = field(default_factory=PriorSpec)
    N: int | None = None
    seed: int | None = None
    out: str = "out"
    trials: int = 1
    grid: int = 512
    simplex_m: int = 40
    S0: float | None = None
    delta: float = 0.1
    zeta_target: float = 0.5
    r: int | None = None
    Ns: int | None = None
    mode: str = "auto"
    success_mass: float = hashing.DEFAULT_SUCCESS_MASS
    M_tomography: int = 0
    true_F: float | None = None
    rounds_recurrence: int = 1
    eta: float = planner.DEFAULT_ETA
    s0_step: float = planner.DEFAULT_S0_STEP
    t_values: list = field(default_factory=lambda: [0])
    k_values: list = field(default_factory=lambda: [0, 1, 2])

    STOCHASTIC = ("hashing", "recurrence", "tomography", "plan")

    def validate(self) -> "ExperimentConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.scenario in ("figure1", "hashing", "recurrence", "tomography", "plan"),
             f"unknown scenario {self.scenario!r}")
        if self.scenario in self.STOCHASTIC:
            need(self.seed is not None, f"scenario {self.scenario} needs a seed")
        if self.seed is not None:
            need(0 <= int(self.seed) < 2 ** 64, "seed must be an unsigned 64-bit integer")
        if self.N is not None:
            need(int(self.N) >= 1, "N must be positive")
        need(self.trials >= 1, "trials must be positive")
        need(self.grid >= 8, "grid must have at least 8 nodes")
        if self.S0 is not None:
            need(0.0 <= self.S0 <= 2.0, "S0 must lie in [0, 2]")
        need(self.delta >= 0, "delta must be nonnegative")
        need(self.zeta_target > 0, "zeta_target must be positive")
        if self.Ns is not None:
            need(self.N is not None and 0 <= self.Ns <= self.N, "need 0 <= Ns <= N")
        if self.r is not None:
            need(self.N is not None and 0 <= self.r <= self.N, "need 0 <= r <= N")
        need(self.mode in ("auto", "exact", "mc"), "mode must be auto, exact or mc")
        need(0 < self.success_mass <= 1, "success_mass must lie in (0, 1]")
        need(self.M_tomography >= 0 and self.rounds_recurrence >= 1, "counts must be nonnegative")
        need(0 <= self.eta < 1 and self.s0_step > 0, "need 0 <= eta < 1 and s0_step > 0")
        for F in (self.prior.F, self.true_F):
            if F is not None:
                need(0.25 <= F <= 1.0, f"fidelity {F} outside [1/4, 1]")
        kinds = ("uniform-werner", "delta-werner", "uniform-simplex", "maxent-band", "file")
        need(self.prior.kind in kinds, f"unknown prior kind {self.prior.kind!r}")
        if self.prior.kind == "delta-werner":
            need(self.prior.F is not None, "delta-werner prior needs F")
        if self.prior.kind == "maxent-band":
            need(self.prior.o is not None and self.prior.band is not None and self.prior.band > 0,
                 "maxent-band prior needs o and a positive band")
            need(-1.0 <= self.prior.o <= 1.0, "maxent-band target outside [-1, 1]")
        if self.prior.kind == "file":
            need(self.prior.path is not None, "file prior needs a path")
        return self


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return data


def build_config(scenario: str, file_values: dict, flag_values: dict) -> ExperimentConfig:
    """Merge config-file values with command-line overrides (flags win)."""
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    merged = {k: v for k, v in file_values.items() if k != "prior"}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    prior = dict(file_values.get("prior", {}))
    for key in ("kind", "F", "o", "band", "path"):
        v = flag_values.pop(f"prior_{key}", None)
        if v is not None:
            prior[key] = v
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    merged["scenario"] = scenario
    try:
        cfg = ExperimentConfig(**merged, prior=PriorSpec(**prior))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def make_prior(cfg: ExperimentConfig) -> priors.Density:
    spec = cfg.prior
    if spec.kind == "uniform-werner":
        return priors.uniform_fidelity_prior(cfg.grid)
    if spec.kind == "delta-werner":
        return priors.delta_werner_prior(spec.F)
    if spec.kind == "uniform-simplex":
        return priors.uniform_simplex_prior(cfg.simplex_m)
    if spec.kind == "maxent-band":
        return priors.constrained_maxent_prior(priors.simplex_grid(cfg.simplex_m), B, spec.o, spec.band)
    return priors.normalize(priors.read_density_csv(spec.path))


def _summary(out: Path, name: str, data: dict) -> Path:
    path = out / f"{name}_summary.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# scenarios


def cmd_figure1(cfg: ExperimentConfig) -> dict:
    """Uniform Werner prior updated on ``Ns = 2N/3`` for N = 9, 18, 48, 99."""
    out = Path(cfg.out)
    prior = priors.uniform_fidelity_prior(cfg.grid)
    F = prior.grid.fidelity
    results = {N: recurrence.posterior_after_round_werner(prior, N, 2 * N // 3) for N in FIGURE1_SIZES}
    Fp = results[FIGURE1_SIZES[0]].after.grid.fidelity
    header = ["F", "prior", "F_prime"] + [f"posterior_N{N}" for N in FIGURE1_SIZES]
    rows = [[F[i], prior.values[i], Fp[i], *(results[N].after.values[i] for N in FIGURE1_SIZES)]
            for i in range(len(F))]
    csv_path = write_csv(out / "figure1.csv", header, rows)
    series = {"prior": prior.values}
    series.update({f"N={N}": results[N].after.values for N in FIGURE1_SIZES})
    svg_path = write_line_svg(out / "figure1.svg", Fp, series, xlabel="fidelity",
                              ylabel="density", title="Werner posterior after one recurrence round")
    modes = {N: float(F[np.argmax(results[N].before.values)]) for N in FIGURE1_SIZES}
    _summary(out, "figure1", {"grid": cfg.grid, "pre_transform_mode": {str(k): v for k, v in modes.items()}})
    return {"csv": csv_path, "svg": svg_path, "posteriors": results, "prior": prior}


def _exact_hashing(cfg, prior, N):
    S0 = cfg.S0
    ck = hashing.typical_set(N, S0, cfg.delta)
    table = hashing.StringPosterior.from_density(prior, N)
    rows, stats, plans = [], [], []
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        plan = _plan(cfg, N, rng)
        st = hashing.hashing_stats(prior, plan, ck, table)
        plans.append(plan)
        stats.append(st)
        rows.append([t, plan.r, plan.yield_pairs, st.success, st.p_typical, st.zeta_eff,
                     st.accepted_mass, st.n_accepted])
    write_csv(Path(cfg.out) / "hashing_plans.csv",
              ["trial", "r", "yield", "success", "p_typical", "zeta_eff", "accepted_mass", "n_accepted"], rows)
    succ = np.array([s.success for s in stats])
    return {
        "mode": "exact",
        "typical_set_size": len(ck),
        "mean_success": float(succ.mean()),
        "stderr_success": float(succ.std(ddof=1) / np.sqrt(len(succ))) if len(succ) > 1 else 0.0,
        "zeta_eff": float(np.mean([s.zeta_eff for s in stats])),
        "epsilon_measured": hashing.epsilon_measured(prior, ck),
        "p_typical": stats[0].p_typical,
        "plans": plans,
    }


def _plan(cfg, N, rng):
    if cfg.r is not None:
        return hashing.random_plan(N, cfg.r, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", hashing.ZeroYieldWarning)
        return hashing.make_plan(N, cfg.S0, cfg.delta, cfg.zeta_target, rng)


def _mc_hashing(cfg, prior, N):
    ck = hashing.typical_set(N, cfg.S0, cfg.delta) if N <= hashing.ENUMERATION_CAP else None
    initial = hashing.StringPosterior.from_density(prior, N)
    run_rows, trial_rows, runs = [], [], []
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        plan = _plan(cfg, N, rng)
        run = hashing.simulate_hashing(prior, plan, rng, success_mass=cfg.success_mass,
                                       ck=ck, initial=initial)
        runs.append(run)
        run_rows.extend([t, *row] for row in run.rows())
        trial_rows.append([t, plan.r, str(run.true_string), str(run.true_output), int(run.success),
                           "" if run.accept_success is None else int(run.accept_success),
                           run.posterior.mode()[1]])
    write_csv(Path(cfg.out) / "hashing_runs.csv", ["trial", *hashing.HashingRun.RECORD_COLUMNS], run_rows)
    write_csv(Path(cfg.out) / "hashing_trials.csv",
              ["trial", "r", "true_string", "true_output", "success", "accept_success", "mode_mass"],
              trial_rows)
    succ = np.array([r.success for r in runs], dtype=float)
    res = {"mode": "mc", "success_rate": float(succ.mean()),
           "stderr_success": float(succ.std(ddof=1) / np.sqrt(len(succ))) if len(succ) > 1 else 0.0,
           "runs": runs}
    if ck is not None:
        res["accept_success_rate"] = float(np.mean([r.accept_success for r in runs]))
        res["epsilon_measured"] = hashing.epsilon_measured(prior, ck)
    return res


def cmd_hashing(cfg: ExperimentConfig) -> dict:
    """Exact per-plan success (small N) or Monte Carlo runs of one-way hashing."""
    if cfg.N is None or cfg.S0 is None:
        raise ConfigError("hashing needs N and S0")
    prior = make_prior(cfg)
    N = int(cfg.N)
    exact = cfg.mode == "exact" or (cfg.mode == "auto" and N <= hashing.ENUMERATION_CAP)
    r = cfg.r if cfg.r is not None else hashing.required_rounds(N, cfg.S0, cfg.delta, cfg.zeta_target)
    res = _exact_hashing(cfg, prior, N) if exact else _mc_hashing(cfg, prior, N)
    res.update({
        "N": N, "r": min(r, N), "r_required": r, "yield": max(0, N - r), "zero_yield": r >= N,
        "zeta_nominal": 2.0 ** (N * (cfg.S0 + cfg.delta) - min(r, N)),
        "eta": priors.prob_entropy_above(prior, cfg.S0),
        "asymptotic_yield": hashing.asymptotic_yield(N, cfg.S0),
    })
    _summary(Path(cfg.out), "hashing", {k: v for k, v in res.items() if k not in ("plans", "runs")})
    return res


def cmd_recurrence(cfg: ExperimentConfig) -> dict:
    """Chain recurrence rounds on ``N`` initial pairs; stop when fewer than 2 remain."""
    if cfg.N is None:
        raise ConfigError("recurrence needs N (initial number of pairs)")
    prior = make_prior(cfg)
    werner = prior.grid.is_werner
    out = Path(cfg.out)
    rows, finals = [], []
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        d, true, pairs = prior, None, int(cfg.N)
        for k in range(cfg.rounds_recurrence):
            if pairs < 2:
                break
            res, d = recurrence.simulate_recurrence_round(d, pairs // 2, rng, true_state=true)
            true = recurrence.advance_state(res.true_state, werner)
            rows.append([t, k + 1, pairs, res.N, res.Ns, res.true_state[3], d.mean_fidelity(), d.total()])
            if t == 0:
                priors.write_density_csv(out / f"recurrence_round{k + 1}.csv", d)
            pairs = res.Ns
        finals.append(pairs)
    write_csv(out / "recurrence_rounds.csv",
              ["trial", "round", "pairs_in", "sets", "successes", "true_F", "posterior_mean_F",
               "posterior_total"], rows)
    summary = {"N": int(cfg.N), "rounds": cfg.rounds_recurrence, "trials": cfg.trials,
               "mean_final_pairs": float(np.mean(finals)), "exhausted": int(sum(p < 2 for p in finals))}
    _summary(out, "recurrence", summary)
    return {**summary, "rows": rows}


def cmd_tomography(cfg: ExperimentConfig) -> dict:
    """Measure ``M_tomography`` pairs of a Werner state in the Bell basis."""
    prior = make_prior(cfg)
    if cfg.true_F is None:
        raise ConfigError("tomography needs true_F")
    povm = tomography.bell_basis_povm()
    post, counts = tomography.run_tomography(prior, povm, werner_weights(cfg.true_F),
                                             cfg.M_tomography, trial_rng(cfg.seed, 0))
    out = Path(cfg.out)
    write_csv(out / "tomography_counts.csv", ["outcome", "count"], enumerate(counts.tolist()))
    priors.write_density_csv(out / "tomography_posterior.csv", post)
    summary = {"M": cfg.M_tomography, "true_F": cfg.true_F, "posterior_mean_F": post.mean_fidelity(),
               "counts": counts.tolist()}
    _summary(out, "tomography", summary)
    return {**summary, "posterior": post}


def cmd_plan(cfg: ExperimentConfig) -> dict:
    """Rank (tomography, recurrence) strategies by Monte Carlo expected hashing yield."""
    if cfg.N is None:
        raise ConfigError("plan needs N")
    prior = make_prior(cfg)
    plans = planner.strategy_grid(int(cfg.N), cfg.t_values, cfg.k_values)
    scores = planner.compare_strategies(prior, int(cfg.N), plans, cfg.trials, cfg.seed,
                                        eta=cfg.eta, s0_step=cfg.s0_step)
    rows = [[i + 1, s.plan.t, s.plan.k, s.mean_yield, s.stderr, s.mean_pairs, s.mean_S0]
            for i, s in enumerate(scores)]
    write_csv(Path(cfg.out) / "plan.csv",
              ["rank", "t", "k", "expected_yield", "stderr", "mean_pairs", "mean_S0_post"], rows)
    best = scores[0]
    _summary(Path(cfg.out), "plan", {"N": int(cfg.N), "trials": cfg.trials,
                                     "best": {"t": best.plan.t, "k": best.plan.k,
                                              "expected_yield": best.mean_yield}})
    return {"scores": scores}


COMMANDS = {"figure1": cmd_figure1, "hashing": cmd_hashing, "recurrence": cmd_recurrence,
            "tomography": cmd_tomography, "plan": cmd_plan}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellpurify",
                                     description="Bayesian entanglement purification experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--trials", type=int)
    common.add_argument("--grid", type=int, help="fidelity grid nodes")
    common.add_argument("--simplex-m", dest="simplex_m", type=int, help="simplex lattice resolution")
    common.add_argument("--prior", dest="prior_kind",
                        choices=["uniform-werner", "delta-werner", "uniform-simplex", "maxent-band", "file"])
    common.add_argument("--F", dest="prior_F", type=float, help="fidelity of a delta-werner prior")
    common.add_argument("--o", dest="prior_o", type=float, help="<B> target of a maxent-band prior")
    common.add_argument("--band", dest="prior_band", type=float)
    common.add_argument("--prior-file", dest="prior_path")
    common.add_argument("--N", type=int)
    sub = parser.add_subparsers(dest="scenario", required=True)

    sub.add_parser("figure1", parents=[common], help="recurrence posterior for N=9,18,48,99")

    p = sub.add_parser("hashing", parents=[common], help="one-way hashing")
    p.add_argument("--S0", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--zeta", dest="zeta_target", type=float)
    p.add_argument("--r", type=int, help="fixed number of parity rounds")
    p.add_argument("--mode", choices=["auto", "exact", "mc"])
    p.add_argument("--success-mass", dest="success_mass", type=float)

    p = sub.add_parser("recurrence", parents=[common], help="chained recurrence rounds")
    p.add_argument("--rounds", dest="rounds_recurrence", type=int)

    p = sub.add_parser("tomography", parents=[common], help="Bell-basis tomography")
    p.add_argument("--M", dest="M_tomography", type=int)
    p.add_argument("--true-F", dest="true_F", type=float)

    p = sub.add_parser("plan", parents=[common], help="strategy comparison")
    p.add_argument("--eta", type=float)
    p.add_argument("--s0-step", dest="s0_step", type=float)
    p.add_argument("--t-values", dest="t_values", type=_int_list)
    p.add_argument("--k-values", dest="k_values", type=_int_list)
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    scenario = args.pop("scenario")
    config_path = args.pop("config")
    try:
        file_values = load_config(config_path) if config_path else {}
        cfg = build_config(scenario, file_values, args)
        COMMANDS[scenario](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegeneratePosteriorError as exc:
        print(f"degenerate posterior: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    summary = Path(cfg.out) / f"{scenario}_summary.json"
    print(summary.read_text(encoding="utf-8"), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
