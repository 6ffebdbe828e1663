"""Experiment harness wiring simulation, dictionaries, and the solver.

One experiment is described by a JSON config (see ``ExperimentConfig``)
and runs the full learning pipeline: simulate bursts, add measurement
noise to the dictionary-side data, estimate velocities, build the
localized cyclic data matrix, scale it, evaluate and normalize the
Legendre dictionary, solve the basis pursuit problem per component, map
coefficients back to monomials, optionally debias on the recovered
support, and compare against the known governing equation.

Subcommands: ``simulate``, ``build-dict``, ``solve``, ``experiment``,
``table``, ``coherence``, ``fields``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, dictionary as dict_mod, dynamics, solver as solver_mod, systems

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "StageError",
    "run_experiment",
    "run_table",
    "emit_fields",
    "main",
]


class StageError(RuntimeError):
    """Pipeline failure with the responsible stage attached."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one learning experiment."""

    system: str
    n: int
    params: dict
    bursts: int
    dt_fine: float
    record_times: tuple
    noise: dynamics.NoiseSpec
    block_size: int
    block_origin: tuple | None
    radius: int
    degree: int
    sigma: object | None
    solver: solver_mod.SolverConfig
    seed: int
    comparison: dict | None = None

    def __post_init__(self):
        if self.system not in systems.SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        if self.bursts < 1:
            raise ValueError("need at least one burst")
        if self.degree not in (1, 2, 3):
            raise ValueError("degree must be 1, 2, or 3")
        if len(self.record_times) < 2:
            raise ValueError("need at least two record times")
        object.__setattr__(self, "record_times", tuple(float(t) for t in self.record_times))
        if self.block_origin is not None:
            object.__setattr__(self, "block_origin", tuple(int(x) for x in self.block_origin))

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        data = dict(raw)
        noise = data.get("noise") or {}
        noise_spec = dynamics.NoiseSpec(
            kind=noise.get("kind", "none"),
            level=float(noise.get("level", 0.0)),
            seed=int(noise.get("seed", 0)),
        )
        sol = data.get("solver") or {}
        solver_cfg = solver_mod.SolverConfig(
            gamma=sol.get("gamma"),
            gamma_scale=float(sol.get("gamma_scale", 0.05)),
            mu=float(sol.get("mu", 1.0)),
            max_iters=int(sol.get("max_iters", 100_000)),
            tol=float(sol.get("tol", 1e-8)),
        )
        return cls(
            system=data["system"],
            n=int(data["n"]),
            params=dict(data["params"]),
            bursts=int(data["bursts"]),
            dt_fine=float(data["dt_fine"]),
            record_times=tuple(data["record_times"]),
            noise=noise_spec,
            block_size=int(data["block_size"]),
            block_origin=data.get("block_origin"),
            radius=int(data["radius"]),
            degree=int(data["degree"]),
            sigma=data.get("sigma"),
            solver=solver_cfg,
            seed=int(data["seed"]),
            comparison=data.get("comparison"),
        )

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "n": self.n,
            "params": dict(self.params),
            "bursts": self.bursts,
            "dt_fine": self.dt_fine,
            "record_times": list(self.record_times),
            "noise": {
                "kind": self.noise.kind,
                "level": self.noise.level,
                "seed": self.noise.seed,
            },
            "block_size": self.block_size,
            "block_origin": list(self.block_origin) if self.block_origin is not None else None,
            "radius": self.radius,
            "degree": self.degree,
            "sigma": self.sigma,
            "solver": {
                "gamma": self.solver.gamma,
                "gamma_scale": self.solver.gamma_scale,
                "mu": self.solver.mu,
                "max_iters": self.solver.max_iters,
                "tol": self.solver.tol,
            },
            "seed": self.seed,
            "comparison": dict(self.comparison) if self.comparison else None,
        }


@dataclass(frozen=True)
class ExperimentResult:
    """Learned coefficients, metrics, and diagnostics for one experiment."""

    config: dict
    record_times: list
    sizes: dict
    sigma: dict
    components: dict

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentResult":
        return cls(**json.loads(text))


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _block_indices(config: ExperimentConfig):
    size = config.block_size
    n = config.n
    if size < 1:
        raise ValueError("block size must be positive")
    if config.system == "lorenz96":
        start = config.block_origin[0] if config.block_origin else (n - size) // 2
        if start < 0 or start + size > n:
            raise ValueError("block does not fit in the domain")
        return list(range(start, start + size))
    if config.block_origin:
        oi, oj = config.block_origin
    else:
        oi = oj = (n - size) // 2
    if oi < 0 or oj < 0 or oi + size > n or oj + size > n:
        raise ValueError("block does not fit in the domain")
    return [(i, j) for i in range(oi, oi + size) for j in range(oj, oj + size)]


def _component_names(system: str):
    return ("u", "v") if system == "grayscott" else ("u",)


def _simulate_bursts(config: ExperimentConfig):
    rhs = systems.make_rhs(config.system, config.params)
    streams = np.random.SeedSequence(config.seed).spawn(config.bursts)
    bursts = []
    for k in range(config.bursts):
        rng = np.random.default_rng(streams[k])
        state0 = systems.initial_state(config.system, config.n, config.params, rng)
        bursts.append(
            dynamics.integrate(rhs, state0, config.dt_fine, config.record_times, burst_id=k)
        )
    return bursts


def _noisy_dictionary_state(burst: dynamics.Burst, config: ExperimentConfig):
    """Measurement noise hits the dictionary-side snapshot only.

    The recorded pair that feeds the finite-difference velocity stays as
    simulated; reference noise radii correspond to the truncation error
    of that difference, not to noise amplified by 1/dt.
    """
    snap = burst.snapshots[0]
    if config.noise.kind == "none" or config.noise.level == 0.0:
        return snap
    spec = dynamics.NoiseSpec(
        config.noise.kind, config.noise.level, config.noise.seed + burst.burst_id
    )
    wrapped = dynamics.Burst((snap,), (burst.times[0],), burst.burst_id)
    return dynamics.add_noise(wrapped, spec).snapshots[0]


def _localized(config: ExperimentConfig, state, block, burst_id):
    if config.system == "lorenz96":
        return dict_mod.localized_data_1d(state, config.radius, block, burst_id=burst_id)
    if config.system == "burgers2d":
        return dict_mod.localized_data_2d(state, config.radius, block, burst_id=burst_id)
    return dict_mod.localized_multicomponent_data(state, config.radius, block, burst_id=burst_id)


def _restrict_velocity(config: ExperimentConfig, velocity, centers):
    if config.system == "grayscott":
        du, dv = velocity
        return {
            "u": np.array([du[c] for c in centers]),
            "v": np.array([dv[c] for c in centers]),
        }
    if config.system == "lorenz96":
        return {"u": np.array([velocity[c] for c in centers])}
    return {"u": np.array([velocity[c] for c in centers])}


def _superset_refit(A_mono, velocity, c_mono):
    """Minimum-norm refit on the thresholded support (capped at row count)."""
    support = c_mono.support(1e-4)
    if support.size == 0:
        return c_mono
    cap = max(A_mono.n_rows - 1, 1)
    if support.size > cap:
        mags = np.abs(c_mono.values)
        support = np.sort(np.argsort(-mags, kind="stable")[:cap])
    out = np.zeros(A_mono.n_columns)
    coef, *_ = np.linalg.lstsq(A_mono.entries[:, support], velocity, rcond=None)
    out[support] = coef
    return dict_mod.CoefficientVector(
        out, A_mono.basis, A_mono.column_index, A_mono.variable_labels
    )


def _resolve_sigma(config: ExperimentConfig) -> dict:
    comps = _component_names(config.system)
    sigma = config.sigma
    if sigma is None:
        sigma = systems.default_sigma(
            config.system,
            config.params,
            block_size=config.block_size,
            bursts=config.bursts,
            noise_level=config.noise.level,
        )
    if isinstance(sigma, (int, float)):
        sigma = (float(sigma),) * len(comps)
    if len(sigma) != len(comps):
        raise ValueError("one sigma per component required")
    return dict(zip(comps, (float(s) for s in sigma)))


def _build_problem(config: ExperimentConfig):
    """Stages 1-6: bursts, noise, velocities, data matrix, scaling, dictionaries."""
    bursts = _stage("simulate", _simulate_bursts, config)
    block = _stage("block", _block_indices, config)
    parts = []
    velocities = {name: [] for name in _component_names(config.system)}
    for burst in bursts:
        vel = _stage("velocity", lambda b: dynamics.approximate_velocity(b)[0], burst)
        noisy = _stage("noise", _noisy_dictionary_state, burst, config)
        data = _stage("data-matrix", _localized, config, noisy, block, burst.burst_id)
        restricted = _stage("velocity", _restrict_velocity, config, vel, data.centers)
        parts.append(data)
        for name, values in restricted.items():
            velocities[name].append(values)
    stacked = _stage("data-matrix", dict_mod.stack_data, parts)
    scaling = _stage("scaling", dict_mod.fit_component_scaling, stacked)
    legendre = _stage(
        "dictionary", dict_mod.legendre_dictionary, stacked, config.degree, scaling
    )
    normalized = _stage("normalize", dict_mod.normalize_columns, legendre)
    monomial = _stage("dictionary", dict_mod.monomial_dictionary, stacked, config.degree)
    vel_arrays = {name: np.concatenate(v) for name, v in velocities.items()}
    return bursts, normalized, monomial, vel_arrays


def _comparison_error(config: ExperimentConfig, bursts, learned_terms: dict):
    """Simulate exact and learned systems side by side and compare at T."""
    spec = config.comparison or {}
    horizon = float(spec["horizon"])
    dt = float(spec["dt"])
    state0 = bursts[0].snapshots[0]
    exact_rhs = systems.make_rhs(config.system, config.params)
    if config.system == "grayscott":
        learned_rhs = systems.stencil_rhs(learned_terms["u"], learned_terms["v"])
    else:
        learned_rhs = systems.stencil_rhs(learned_terms["u"])
    times = [0.0, horizon]
    exact_end = dynamics.integrate(exact_rhs, state0, dt, times).snapshots[-1]
    learned_end = dynamics.integrate(learned_rhs, state0, dt, times).snapshots[-1]
    if config.system == "grayscott":
        return {
            "u": analysis.solution_error(exact_end.u.values, learned_end.u.values),
            "v": analysis.solution_error(exact_end.v.values, learned_end.v.values),
        }
    return {"u": analysis.solution_error(exact_end.values, learned_end.values)}


def run_experiment(config: ExperimentConfig, debias: bool = True) -> ExperimentResult:
    """Execute the full learning pipeline and compare with the exact system."""
    bursts, A_L, A_mono, velocities = _build_problem(config)
    sigma = _stage("solve", _resolve_sigma, config)

    components = {}
    learned_terms = {}
    for name in _component_names(config.system):
        V = velocities[name]
        problem = solver_mod.BasisPursuitProblem(A_L, V, sigma[name])
        solution = _stage("solve", solver_mod.douglas_rachford, problem, config.solver)
        c_mono = _stage("basis", dict_mod.legendre_to_monomial, solution.coefficients, A_L)

        comp = "u" if config.system != "grayscott" else name
        exact = systems.exact_vector(
            systems.exact_terms(config.system, config.params, comp), A_mono
        )
        true_support = np.flatnonzero(exact)
        if debias:
            # First refit on the thresholded support: the unpenalized
            # least-squares pass undoes l1 shrinkage and collapses mass
            # that leaked onto near-collinear columns, then the s largest
            # coefficients are refit alone.
            refit = _stage("debias", _superset_refit, A_mono, V, c_mono)
            support = refit.top_indices(true_support.size)
            final = _stage("debias", solver_mod.debias, A_mono, V, support)
        else:
            support = c_mono.top_indices(true_support.size)
            final = c_mono
        support_exact = set(int(j) for j in support) == set(int(j) for j in true_support)
        e_c = analysis.coefficient_error(exact, final.values)
        learned_terms[name] = systems.terms_from_coefficients(final)
        components[name] = {
            "coefficients": {
                label: value for label, value in final.nonzero_terms()
            },
            "support_labels": [
                A_mono.column_index[j].label(A_mono.variable_labels) for j in support
            ],
            "solver": {
                "iterations": solution.iterations,
                "residual": solution.residual,
                "converged": solution.converged,
                "gamma": solution.gamma,
                "threshold_support_size": int(c_mono.support().size),
            },
            "metrics": {"e_c": e_c, "e_u": None, "support_exact": bool(support_exact)},
        }

    if config.comparison:
        e_u = _stage("compare", _comparison_error, config, bursts, learned_terms)
        for name, value in e_u.items():
            components[name]["metrics"]["e_u"] = value

    if config.system == "grayscott":
        agg = systems.aggregate_grayscott_parameters(
            learned_terms["u"], learned_terms["v"], config.params["h"]
        )
        components["u"]["aggregated_parameters"] = agg

    return ExperimentResult(
        config=config.to_dict(),
        record_times=list(config.record_times),
        sizes={"rows": A_L.n_rows, "columns": A_L.n_columns},
        sigma=sigma,
        components=components,
    )


TABLE_COLUMNS = [
    "row",
    "system",
    "n",
    "block_size",
    "bursts",
    "radius",
    "degree",
    "noise_kind",
    "noise_level",
    "seed",
    "sigma_u",
    "sigma_v",
    "e_c_u",
    "e_c_v",
    "e_u_u",
    "e_u_v",
    "support_exact_u",
    "support_exact_v",
    "error",
]


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _table_row(index: int, raw_config: dict, debias: bool) -> dict:
    config = ExperimentConfig.from_dict(raw_config)
    row = {
        "row": index,
        "system": config.system,
        "n": config.n,
        "block_size": config.block_size,
        "bursts": config.bursts,
        "radius": config.radius,
        "degree": config.degree,
        "noise_kind": config.noise.kind,
        "noise_level": config.noise.level,
        "seed": config.seed,
        "error": "",
    }
    try:
        result = run_experiment(config, debias=debias)
        for name in _component_names(config.system):
            comp = result.components[name]
            row[f"sigma_{name}"] = result.sigma[name]
            row[f"e_c_{name}"] = comp["metrics"]["e_c"]
            row[f"e_u_{name}"] = comp["metrics"]["e_u"]
            row[f"support_exact_{name}"] = comp["metrics"]["support_exact"]
    except StageError as exc:
        row["error"] = str(exc)
    return row


def run_table(base: dict, sweeps: list, jobs: int = 1, debias: bool = True):
    """One experiment per sweep override; partial failures become error rows."""
    if not sweeps:
        raise ValueError("sweep list is empty")
    configs = [_merge(base, override) for override in sweeps]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda ic: _table_row(ic[0], ic[1], debias), enumerate(configs)))
    else:
        rows = [_table_row(i, cfg, debias) for i, cfg in enumerate(configs)]

    means = {"row": "mean", "system": "", "error": ""}
    for key in TABLE_COLUMNS:
        values = [
            row[key]
            for row in rows
            if isinstance(row.get(key), (int, float)) and not row.get("error")
        ]
        if key.startswith(("e_c", "e_u", "sigma")) and values:
            means[key] = float(np.mean(values))
    rows.append(means)
    return rows


def write_table_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def emit_fields(config: ExperimentConfig, result: ExperimentResult, times, out_dir, dt: float | None = None):
    """Write exact/learned/difference field snapshots at the given times.

    Divergence of the learned simulation is flagged in the manifest and
    whatever snapshots were completed are kept.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if dt is None:
        dt = float((config.comparison or {}).get("dt", config.dt_fine))
    times = sorted(float(t) for t in times)
    bursts = _simulate_bursts(config)
    state0 = bursts[0].snapshots[0]
    exact_rhs = systems.make_rhs(config.system, config.params)
    learned = _terms_from_labels(config, result)
    if config.system == "grayscott":
        learned_rhs = systems.stencil_rhs(learned["u"], learned["v"])
    else:
        learned_rhs = systems.stencil_rhs(learned["u"])

    manifest = {"times": times, "diverged": False, "files": []}

    def arrays(state):
        if config.system == "grayscott":
            return {"u": state.u.values, "v": state.v.values}
        return {"u": state.values if state.values.ndim == 2 else state.values[None, :]}

    exact_states = dynamics.integrate(exact_rhs, state0, dt, times).snapshots
    try:
        learned_states = dynamics.integrate(learned_rhs, state0, dt, times).snapshots
    except dynamics.DivergenceError:
        manifest["diverged"] = True
        learned_states = []
    for idx, t in enumerate(times):
        for tag, state in (("exact", exact_states[idx]),) + (
            (("learned", learned_states[idx]),) if idx < len(learned_states) else ()
        ):
            for name, grid in arrays(state).items():
                fname = f"{tag}_{name}_t{idx}.csv"
                np.savetxt(out / fname, np.atleast_2d(grid), delimiter=",")
                manifest["files"].append(fname)
        if idx < len(learned_states):
            for name in arrays(exact_states[idx]):
                diff = arrays(learned_states[idx])[name] - arrays(exact_states[idx])[name]
                fname = f"diff_{name}_t{idx}.csv"
                np.savetxt(out / fname, np.atleast_2d(diff), delimiter=",")
                manifest["files"].append(fname)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
    return manifest


def _terms_from_labels(config: ExperimentConfig, result: ExperimentResult) -> dict:
    """Rebuild sparse term dictionaries from labeled coefficient mappings."""
    out = {}
    for name, comp in result.components.items():
        terms = {}
        for label, value in comp["coefficients"].items():
            key = []
            if label != "1":
                for part in label.split("*"):
                    if "^" in part:
                        var_text, power = part.rsplit("^", 1)
                        power = int(power)
                    else:
                        var_text, power = part, 1
                    comp_name, inside = var_text.split("[", 1)
                    inside = inside.rstrip("]")
                    if "," in inside:
                        off = tuple(int(x) for x in inside.split(","))
                    else:
                        off = int(inside)
                    if config.system == "grayscott":
                        key.append(((comp_name, off), power))
                    else:
                        key.append((off, power))
            terms[tuple(sorted(key))] = value
        out[name] = terms
    return out


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _cmd_experiment(args) -> int:
    raw = _load_config(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    config = ExperimentConfig.from_dict(raw)
    result = run_experiment(config, debias=args.debias)
    text = result.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_table(args) -> int:
    raw = _load_config(args.config)
    rows = run_table(raw["base"], raw["sweeps"], jobs=args.jobs, debias=args.debias)
    write_table_csv(rows, args.out)
    failed = [row for row in rows if row.get("error")]
    for row in failed:
        print(f"row {row['row']}: {row['error']}", file=sys.stderr)
    return 0


def _cmd_simulate(args) -> int:
    config = ExperimentConfig.from_dict(_load_config(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for burst in _simulate_bursts(config):
        for idx, snap in enumerate(burst.snapshots):
            if config.system == "grayscott":
                np.savetxt(out / f"burst{burst.burst_id}_t{idx}_u.csv", snap.u.values, delimiter=",")
                np.savetxt(out / f"burst{burst.burst_id}_t{idx}_v.csv", snap.v.values, delimiter=",")
            else:
                np.savetxt(
                    out / f"burst{burst.burst_id}_t{idx}.csv",
                    np.atleast_2d(snap.values),
                    delimiter=",",
                )
    return 0


def _cmd_build_dict(args) -> int:
    config = ExperimentConfig.from_dict(_load_config(args.config))
    _, A_L, A_mono, velocities = _build_problem(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    A_L.to_csv(out / "dictionary_legendre.csv")
    A_mono.to_csv(out / "dictionary_monomial.csv")
    for name, V in velocities.items():
        dict_mod.VelocityVector(V).to_csv(out / f"velocity_{name}.csv")
    return 0


def _cmd_solve(args) -> int:
    config = ExperimentConfig.from_dict(_load_config(args.config))
    _, A_L, _, velocities = _build_problem(config)
    sigma = _resolve_sigma(config)
    records = {}
    for name, V in velocities.items():
        problem = solver_mod.BasisPursuitProblem(A_L, V, sigma[name])
        solution = solver_mod.douglas_rachford(problem, config.solver)
        record = solution.to_record()
        record["sigma"] = sigma[name]
        records[name] = record
    payload = {"config": config.to_dict(), "solutions": records}
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_coherence(args) -> int:
    report = analysis.coherence_study(args.n, args.p, args.trials, args.seed)
    payload = dataclasses.asdict(report)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_fields(args) -> int:
    config = ExperimentConfig.from_dict(_load_config(args.config))
    result = ExperimentResult.from_json(Path(args.result).read_text())
    times = [float(t) for t in args.times.split(",")]
    emit_fields(config, result, times, args.out, dt=args.dt)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cyclearn",
        description="Learn sparse cyclic governing equations from snapshot bursts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="experiment config JSON")

    p = sub.add_parser("experiment", help="run the full learning pipeline")
    add_config(p)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="result JSON path (stdout if omitted)")
    p.add_argument("--debias", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("table", help="run a sweep and emit a CSV table")
    add_config(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--debias", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(fn=_cmd_table)

    p = sub.add_parser("simulate", help="simulate bursts and write snapshots")
    add_config(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("build-dict", help="write dictionary and velocity CSVs")
    add_config(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_build_dict)

    p = sub.add_parser("solve", help="solve the basis pursuit problem only")
    add_config(p)
    p.add_argument("--out", default=None, help="solution JSON path (stdout if omitted)")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("coherence", help="Monte Carlo coherence study")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_coherence)

    p = sub.add_parser("fields", help="emit exact/learned/difference field CSVs")
    add_config(p)
    p.add_argument("--result", required=True, help="experiment result JSON")
    p.add_argument("--times", required=True, help="comma-separated times")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_fields)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
