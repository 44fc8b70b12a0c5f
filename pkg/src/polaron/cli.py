"""Command-line pipeline reproducing the solver's figure datasets.

Subcommands
-----------
discretize  dump a discretized bath as JSON
solve       coherence + displacement tables over an alpha sweep, N = 1..N_max
wigner      single-mode Wigner slice CSVs from a solved state
thermal     Toulouse vs one-polaron coherence over a log temperature grid
ed-check    variational vs exact-diagonalization convergence table

Inputs are a JSON config file; individual keys can be overridden on the
command line as --section.key=value (e.g. --bath.alpha=0.5).  Outputs are
CSV/JSON files in the configured output directory; every CSV carries the
full resolved config in '#' header comments, so reruns with the same
config and seed are byte-identical.

Exit codes: 0 success, 2 config error, 3 physics-domain error,
4 convergence failure (partial outputs are kept).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .ansatz import ModelParams, VariationalState, sh_solve
from .bath import DiscretizedBath, SpectralDensity, default_num_modes, discretize
from .errors import ConfigError, PhysicsDomainError, PolaronError
from .observables import coherence, default_x_grid, wigner_diag, wigner_offdiag
from .optimizer import OptimizerConfig, solve_sequence
from .oracles import EDProblem, ToulouseParams, ed_ground, onepolaron_thermal, toulouse_coherence

DEFAULT_CONFIG = {
    "model": {"delta": 0.01},
    "bath": {
        "alpha": 0.5,
        "alpha_list": None,
        "omega_c": 1.0,
        "lambda": 1.05,
        "num_modes": None,  # None -> automatic infrared depth
        "modes": None,      # explicit [[omega, g], ...] (ed-check)
    },
    "solver": {
        "N_max": 4,
        "grad_tol": 1e-9,
        "max_iters": 50000,
        "restarts": 4,
        "seed": 0,
    },
    "thermal": {
        "delta_list": None,
        "t_min": 1e-7,
        "t_max": 1e-1,
        "num_t": 40,
    },
    "ed": {"fock_cutoff": 30, "N_max": 6},
    "outputs": {"directory": "out"},
}


def _deep_update(base: dict, overrides: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in overrides.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], val)
        else:
            out[key] = val
    return out


def _parse_override(token: str):
    if not token.startswith("--") or "=" not in token:
        raise ConfigError(f"unrecognized argument {token!r}; expected --a.b=value")
    path, raw = token[2:].split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.split("."), value


def load_config(path=None, overrides=()):
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                cfg = _deep_update(cfg, json.load(fh))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config JSON in {path}: {exc}") from exc
    for token in overrides:
        keys, value = _parse_override(token)
        node = cfg
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return cfg


def _config_header(cfg: dict) -> list[str]:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return [f"# config: {blob}"]


def _write_csv(path, header_lines, columns, rows):
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _build_bath(cfg, alpha=None) -> DiscretizedBath:
    bc = cfg["bath"]
    if bc.get("modes"):
        omegas = np.array([m[0] for m in bc["modes"]], dtype=float)
        gs = np.array([m[1] for m in bc["modes"]], dtype=float)
        return DiscretizedBath(
            omegas, gs, lam=bc["lambda"], alpha=alpha or bc["alpha"],
            omega_c=bc["omega_c"],
        )
    sd = SpectralDensity(alpha if alpha is not None else bc["alpha"], bc["omega_c"])
    num = bc["num_modes"]
    if num is None:
        num = default_num_modes(sd, cfg["model"]["delta"], bc["lambda"])
    return discretize(sd, bc["lambda"], num)


def _solver_config(cfg) -> OptimizerConfig:
    sc = cfg["solver"]
    return OptimizerConfig(
        grad_tol=sc["grad_tol"],
        max_iters=int(sc["max_iters"]),
        num_restarts=int(sc["restarts"]),
        seed=int(sc["seed"]),
    )


def _alpha_list(cfg):
    alphas = cfg["bath"]["alpha_list"]
    if alphas is None:
        alphas = [cfg["bath"]["alpha"]]
    if not alphas:
        raise ConfigError("bath.alpha_list must be nonempty")
    return [float(a) for a in alphas]


def _solve_point(cfg, alpha):
    """One sweep point: returns per-N rows and the solved reports."""
    bath = _build_bath(cfg, alpha=alpha)
    params = ModelParams(cfg["model"]["delta"])
    _, delta_r = sh_solve(bath, params)
    reports = solve_sequence(bath, params, int(cfg["solver"]["N_max"]), _solver_config(cfg))
    rows = []
    for n, rep in enumerate(reports, start=1):
        rows.append(
            (alpha, n, rep.energy, coherence(rep.state), delta_r, int(rep.converged))
        )
    return rows, reports, bath


def cmd_solve(cfg, jobs=1):
    outdir = Path(cfg["outputs"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    alphas = _alpha_list(cfg)
    if jobs > 1 and len(alphas) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_point, [cfg] * len(alphas), alphas))
    else:
        results = [_solve_point(cfg, a) for a in alphas]

    header = _config_header(cfg)
    coh_rows = []
    disp_rows = []
    any_nonconverged = False
    for (rows, reports, bath), alpha in zip(results, alphas):
        coh_rows.extend(rows)
        any_nonconverged |= any(not r.converged for r in reports)
        final = reports[-1]
        for n in range(final.state.num_polarons):
            for k in range(bath.num_modes):
                disp_rows.append(
                    (alpha, final.state.num_polarons, n + 1, k,
                     bath.omegas[k], final.state.F[n, k])
                )
        state_path = outdir / f"state_alpha{alpha:g}.json"
        bath_path = outdir / f"bath_alpha{alpha:g}.json"
        bath.save(bath_path)
        final.state.save(state_path, bath_file=bath_path.name)
        with open(outdir / f"report_alpha{alpha:g}.json", "w") as fh:
            json.dump(final.to_json(), fh, indent=1)

    _write_csv(
        outdir / "coherence.csv", header,
        ["alpha", "N", "energy", "coherence", "delta_R_SH", "converged"], coh_rows,
    )
    _write_csv(
        outdir / "displacements.csv", header,
        ["alpha", "N", "n", "k", "omega_k", "f_nk"], disp_rows,
    )
    return 4 if any_nonconverged else 0


def cmd_wigner(cfg, mode_index, channel, jobs=1):
    outdir = Path(cfg["outputs"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    alpha = _alpha_list(cfg)[0]
    bath = _build_bath(cfg, alpha=alpha)
    if not 0 <= mode_index < bath.num_modes:
        raise ConfigError(
            f"mode index {mode_index} out of range [0, {bath.num_modes})"
        )
    params = ModelParams(cfg["model"]["delta"])
    reports = solve_sequence(bath, params, int(cfg["solver"]["N_max"]), _solver_config(cfg))
    func = wigner_diag if channel == "diag" else wigner_offdiag
    grid = default_x_grid(reports[-1].state)
    header = _config_header(cfg)
    for n, rep in enumerate(reports, start=1):
        curve = func(rep.state, bath, mode_index, grid)
        rows = list(zip(curve.X_grid.tolist(), curve.values.tolist()))
        extra = [
            f"# alpha={alpha!r} delta={cfg['model']['delta']!r} "
            f"lambda={cfg['bath']['lambda']!r} M={bath.num_modes} N={n} "
            f"k={mode_index} omega_k={curve.omega_k!r} channel={channel} "
            f"convention={curve.convention}"
        ]
        _write_csv(
            outdir / f"wigner_{channel}_k{mode_index}_N{n}.csv",
            header + extra, ["X", "W"], rows,
        )
    return 4 if any(not r.converged for r in reports) else 0


def cmd_thermal(cfg, jobs=1):
    alpha = cfg["bath"]["alpha"]
    if abs(alpha - 0.5) > 1e-12:
        raise PhysicsDomainError(
            "thermal comparison is only exact on the Toulouse line alpha=0.5; "
            f"got alpha={alpha}"
        )
    deltas = cfg["thermal"]["delta_list"]
    if deltas is None:
        deltas = [cfg["model"]["delta"]]
    if not deltas:
        raise ConfigError("thermal.delta_list must be nonempty")
    outdir = Path(cfg["outputs"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    tc = cfg["thermal"]
    t_grid = np.geomspace(float(tc["t_min"]), float(tc["t_max"]), int(tc["num_t"]))
    header = _config_header(cfg)
    omega_c = cfg["bath"]["omega_c"]
    for delta in deltas:
        sub = _deep_update(cfg, {"model": {"delta": float(delta)}, "bath": {"alpha": 0.5}})
        bath = _build_bath(sub, alpha=0.5)
        _, delta_r = sh_solve(bath, ModelParams(float(delta)))
        rows = []
        for t in t_grid:
            exact = toulouse_coherence(ToulouseParams(float(delta), omega_c, float(t)))
            onepol = onepolaron_thermal(delta_r, float(delta), float(t))
            rows.append((float(t), exact, onepol))
        _write_csv(
            outdir / f"thermal_delta{delta:g}.csv",
            header + [f"# delta={float(delta)!r} delta_R={delta_r!r}"],
            ["T", "exact", "one_polaron"], rows,
        )
    return 0


def cmd_ed_check(cfg, jobs=1):
    bath = _build_bath(cfg)
    if bath.num_modes > 4:
        raise ConfigError(
            f"ed-check requires at most 4 modes, got {bath.num_modes}"
        )
    outdir = Path(cfg["outputs"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    delta = cfg["model"]["delta"]
    problem = EDProblem(
        tuple(zip(bath.omegas.tolist(), bath.couplings.tolist())),
        int(cfg["ed"]["fock_cutoff"]), delta,
    )
    result = ed_ground(problem)
    params = ModelParams(delta)
    reports = solve_sequence(bath, params, int(cfg["ed"]["N_max"]), _solver_config(cfg))
    rows = [
        (n, rep.energy, result.energy, coherence(rep.state), result.coherence)
        for n, rep in enumerate(reports, start=1)
    ]
    _write_csv(
        outdir / "ed_check.csv",
        _config_header(cfg) + [f"# ed_cutoff_converged={result.cutoff_converged}"],
        ["N", "E_var", "E_ed", "coherence_var", "coherence_ed"], rows,
    )
    with open(outdir / "ed_result.json", "w") as fh:
        json.dump(
            {
                "energy": result.energy,
                "coherence": result.coherence,
                "cutoff_converged": result.cutoff_converged,
                "energy_shift_on_refine": result.energy_shift_on_refine,
                "problem": {
                    "modes": [list(m) for m in problem.modes],
                    "fock_cutoff": problem.fock_cutoff,
                    "delta": problem.delta,
                },
            },
            fh, indent=1,
        )
    return 0


def cmd_discretize(cfg, jobs=1):
    outdir = Path(cfg["outputs"]["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    bath = _build_bath(cfg)
    bath.save(outdir / "bath.json")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polaron",
        description="Variational coherent-state solver for the Ohmic spin-boson model",
    )
    parser.add_argument("--jobs", type=int,
                        default=int(os.environ.get("POLARON_JOBS", "1")),
                        help="worker processes for sweep points")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", default=None, help="JSON config file")
        return p

    add("discretize", help="dump the discretized bath as JSON")
    add("solve", help="coherence and displacement tables for an alpha sweep")
    w = add("wigner", help="single-mode Wigner slice CSVs")
    w.add_argument("--mode", type=int, required=True, help="bath mode index")
    w.add_argument("--channel", choices=["diag", "offdiag"], default="diag")
    add("thermal", help="Toulouse vs one-polaron coherence over temperature")
    add("ed-check", help="variational vs exact diagonalization table")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, unknown = parser.parse_known_args(argv)
    try:
        cfg = load_config(args.config, overrides=unknown)
        if args.command == "solve":
            return cmd_solve(cfg, jobs=args.jobs)
        if args.command == "wigner":
            return cmd_wigner(cfg, args.mode, args.channel, jobs=args.jobs)
        if args.command == "thermal":
            return cmd_thermal(cfg, jobs=args.jobs)
        if args.command == "ed-check":
            return cmd_ed_check(cfg, jobs=args.jobs)
        if args.command == "discretize":
            return cmd_discretize(cfg, jobs=args.jobs)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PhysicsDomainError as exc:
        print(f"physics domain error: {exc}", file=sys.stderr)
        return 3
    except PolaronError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
