"""Command-line front end: scenario configs in, tables/CSV out.

Commands: solve, conditioned, moment, sweep, fig1, fig2, mc, verify.
Configs are JSON documents with complex numbers written as [re, im] pairs;
see README for the schema.  Exit codes: 0 success, 1 parse/usage errors,
2 observable not reconstructable, 3 vanishing postselection probability.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .averaging import ConditionedSetup, conditioned_average, moment as moment_fn
from .errors import (
    ContextualValueError,
    NotReconstructable,
    ZeroPostselectionProbability,
)
from .montecarlo import (
    RunConfig,
    empirical_average,
    empirical_conditioned_average,
    empirical_moment,
)
from .operators import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityOperator,
    MeasurementContext,
    Observable,
    context_from_kraus,
    pure_state_density,
    spectral_decompose,
)
from .scenarios import (
    DetectorModel,
    QpcParams,
    detector_context,
    detector_cv_grid,
    f_state,
    projective_context,
    psi_state,
    qpc_cv,
)
from .solver import DEFAULT_SVD_TOL, solve_contextual_values
from .verify import SUITES, run_suite

SUITE_NAMES = list(SUITES)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NOT_RECONSTRUCTABLE = 2
EXIT_ZERO_POSTSELECTION = 3

NAMED_OBSERVABLES = {"sigma_x": SIGMA_X, "sigma_y": SIGMA_Y, "sigma_z": SIGMA_Z}


class ConfigError(ValueError):
    """Config document failed to parse; message is field-addressed."""


# --- config parsing -------------------------------------------------------


def _parse_complex_matrix(data, where: str) -> np.ndarray:
    try:
        arr = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in data]
        )
    except (TypeError, IndexError) as exc:
        raise ConfigError(f"{where}: expected matrix of [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError(f"{where}: matrix must be square")
    return arr


def _matrix_to_json(M: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _parse_grid(spec, where: str):
    if spec is None:
        return None
    try:
        lo, hi, n = str(spec).split(":")
        return float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"{where}: grid must be MIN:MAX:POINTS") from exc


def _psd_sqrt(E: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(E)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


def _parse_context(data, where: str) -> MeasurementContext:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    if "kraus" in data:
        ops = [
            _parse_complex_matrix(M, f"{where}.kraus[{i}]")
            for i, M in enumerate(data["kraus"])
        ]
        return context_from_kraus(ops)
    if "povm" in data:
        # declared convention: Kraus operators are the PSD square roots
        ops = [
            _psd_sqrt(_parse_complex_matrix(E, f"{where}.povm[{i}]"))
            for i, E in enumerate(data["povm"])
        ]
        return context_from_kraus(ops)
    builder = data.get("builder")
    if builder == "polarization":
        if "gamma" in data:
            gamma = float(data["gamma"])
        elif "gamma_sq" in data:
            gamma = math.sqrt(float(data["gamma_sq"]))
        else:
            raise ConfigError(f"{where}: polarization needs gamma or gamma_sq")
        from .scenarios import polarization_context

        return polarization_context(gamma)
    if builder in ("gaussian-detector", "box-detector"):
        kind = "gaussian" if builder == "gaussian-detector" else "box"
        width_key = "sigma" if kind == "gaussian" else "width"
        if width_key not in data or "g" not in data:
            raise ConfigError(f"{where}: {builder} needs g and {width_key}")
        grid = _parse_grid(data.get("grid"), where)
        if grid is None:
            model = DetectorModel.with_default_grid(
                kind, float(data[width_key]), float(data["g"])
            )
        else:
            model = DetectorModel(
                kind, float(data[width_key]), float(data["g"]), *grid
            )
        return detector_context(model)
    if builder == "qpc":
        if "tau" in data:
            tau = float(data["tau"])
        else:
            try:
                tau = QpcParams(
                    float(data["I1"]),
                    float(data["I2"]),
                    float(data["S_I"]),
                    float(data["t"]),
                ).tau
            except KeyError as exc:
                raise ConfigError(
                    f"{where}: qpc needs tau or (I1, I2, S_I, t)"
                ) from exc
        grid = _parse_grid(data.get("grid"), where)
        n_points = grid[2] if grid else 1201
        from .scenarios import qpc_context

        return detector_context(qpc_context(tau, n_points))
    raise ConfigError(f"{where}: unknown context specification")


def _detector_model_from_context(data) -> DetectorModel | None:
    """Recover the DetectorModel for builder contexts that have one."""
    builder = data.get("builder") if isinstance(data, dict) else None
    if builder in ("gaussian-detector", "box-detector"):
        kind = "gaussian" if builder == "gaussian-detector" else "box"
        width = float(data["sigma" if kind == "gaussian" else "width"])
        grid = _parse_grid(data.get("grid"), "context")
        if grid is None:
            return DetectorModel.with_default_grid(kind, width, float(data["g"]))
        return DetectorModel(kind, width, float(data["g"]), *grid)
    if builder == "qpc":
        from .scenarios import qpc_context

        tau = float(data["tau"]) if "tau" in data else QpcParams(
            float(data["I1"]), float(data["I2"]), float(data["S_I"]), float(data["t"])
        ).tau
        grid = _parse_grid(data.get("grid"), "context")
        return qpc_context(tau, grid[2] if grid else 1201)
    return None


def _parse_state(data, where: str) -> DensityOperator:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    if "matrix" in data:
        return DensityOperator(_parse_complex_matrix(data["matrix"], where))
    if "psi" in data:
        return pure_state_density(psi_state(float(data["psi"])))
    if "vector" in data:
        vec = [complex(z[0], z[1]) for z in data["vector"]]
        return pure_state_density(np.array(vec))
    raise ConfigError(f"{where}: need matrix, psi, or vector")


def _parse_postselection(data, where: str, dim: int):
    """Returns (second context, postselect index)."""
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    if "f" in data:
        return projective_context(f_state(float(data["f"]))), 0
    if "vector" in data:
        vec = np.array([complex(z[0], z[1]) for z in data["vector"]])
        return projective_context(vec), 0
    if "rotation_x" in data:
        theta = float(data["rotation_x"])
        R = math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * SIGMA_X
        P_up = np.diag([1.0, 0.0]).astype(complex)
        P_dn = np.diag([0.0, 1.0]).astype(complex)
        return MeasurementContext((P_up @ R, P_dn @ R)), 0
    if "context" in data:
        ctx = _parse_context(data["context"], f"{where}.context")
        return ctx, int(data.get("index", 0))
    raise ConfigError(f"{where}: need f, vector, rotation_x, or context")


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario: domain objects plus the normalized source document."""

    observable: Observable | None
    context: MeasurementContext
    detector_model: DetectorModel | None
    state: DensityOperator | None
    postselection: tuple | None  # (MeasurementContext, index)
    svd_tol: float
    trials: int
    seed: int
    raw: dict


def parse_config(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    observable = None
    if "observable" in doc:
        spec = doc["observable"]
        if isinstance(spec, str):
            if spec not in NAMED_OBSERVABLES:
                raise ConfigError(f"observable: unknown name {spec!r}")
            M = NAMED_OBSERVABLES[spec]
        else:
            M = _parse_complex_matrix(spec, "observable")
        observable = spectral_decompose(M)
    if "context" not in doc:
        raise ConfigError("context: required")
    context = _parse_context(doc["context"], "context")
    model = _detector_model_from_context(doc["context"])
    state = _parse_state(doc["state"], "state") if "state" in doc else None
    postselection = None
    if "postselection" in doc:
        postselection = _parse_postselection(
            doc["postselection"], "postselection", context.dim
        )
    options = doc.get("options", {})
    return ScenarioConfig(
        observable=observable,
        context=context,
        detector_model=model,
        state=state,
        postselection=postselection,
        svd_tol=float(options.get("svd_tol", DEFAULT_SVD_TOL)),
        trials=int(options.get("trials", 100_000)),
        seed=int(options.get("seed", 0)),
        raw=doc,
    )


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Serialize back to a document that re-parses to identical objects."""
    return cfg.raw


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return parse_config(doc)


# --- output helpers -------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_document(header_lines, columns, names) -> str:
    lines = [f"# ctxval {__version__}"]
    lines += [f"# {line}" for line in header_lines]
    lines.append(",".join(names))
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# --- commands -------------------------------------------------------------


def _solve_from_config(cfg: ScenarioConfig, strict: bool):
    if cfg.observable is None:
        raise ConfigError("observable: required for this command")
    return solve_contextual_values(
        cfg.observable, cfg.context, svd_tol=cfg.svd_tol, strict=strict
    )


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    if args.svd_tol is not None:
        cfg = parse_config({**cfg.raw, "options": {**cfg.raw.get("options", {}), "svd_tol": args.svd_tol}})
    sol = _solve_from_config(cfg, strict=False)
    report = {
        "mode": sol.mode,
        "alpha0": [float(a) for a in sol.alpha0],
        "null_space_dimension": len(sol.null_basis),
        "null_basis": [[float(x) for x in v] for v in sol.null_basis],
        "residual": sol.residual,
        "singular_values": [float(s) for s in sol.singular_values],
        "exact": sol.exact,
    }
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [
            "contextual values: " + " ".join(_fmt(a) for a in sol.alpha0),
            f"mode: {sol.mode}",
            f"null space dimension: {len(sol.null_basis)}",
            f"residual: {_fmt(sol.residual)}",
            "singular values: " + " ".join(_fmt(s) for s in sol.singular_values),
            f"exact: {sol.exact}",
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if sol.exact else EXIT_NOT_RECONSTRUCTABLE


def _conditioned_setup(cfg: ScenarioConfig) -> ConditionedSetup:
    if cfg.postselection is None:
        raise ConfigError("postselection: required for this command")
    sol = _solve_from_config(cfg, strict=True)
    second, index = cfg.postselection
    return ConditionedSetup(cfg.context, sol.alpha0, second, index)


def cmd_conditioned(args) -> int:
    cfg = load_config(args.config)
    if cfg.state is None:
        raise ConfigError("state: required for this command")
    setup = _conditioned_setup(cfg)
    value = conditioned_average(setup, cfg.state)
    report = {"conditioned_average": value}
    eigs = cfg.observable.eigenvalues
    if value < eigs.min() - 1e-12 or value > eigs.max() + 1e-12:
        report["note"] = "outside eigenvalue range"
    if args.mc:
        res = empirical_conditioned_average(
            setup, cfg.state, RunConfig(args.mc, args.seed)
        )
        report["mc_estimate"] = res.estimate
        report["mc_stderr"] = res.stderr
        report["mc_postselection_rate"] = res.postselection_rate
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [f"conditioned average: {_fmt(value)}"]
        if "note" in report:
            lines.append(report["note"])
        if args.mc:
            lines.append(
                f"monte carlo: {_fmt(report['mc_estimate'])}"
                f" +- {_fmt(report['mc_stderr'])}"
                f" (postselection rate {_fmt(report['mc_postselection_rate'])})"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_moment(args) -> int:
    cfg = load_config(args.config)
    if cfg.state is None:
        raise ConfigError("state: required for this command")
    sol = _solve_from_config(cfg, strict=True)
    value = moment_fn(sol.alpha0, cfg.context, cfg.state, args.n, obs=cfg.observable)
    report = {"order": args.n, "moment": value}
    if args.mc:
        res = empirical_moment(
            sol.alpha0, cfg.context, cfg.state, args.n, RunConfig(args.mc, args.seed)
        )
        report["mc_estimate"] = res.estimate
        report["mc_stderr"] = res.stderr
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [f"moment[{args.n}]: {_fmt(value)}"]
        if args.mc:
            lines.append(
                f"monte carlo: {_fmt(report['mc_estimate'])} +- {_fmt(report['mc_stderr'])}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _set_by_path(doc: dict, path: str, value):
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    lo, hi, n = _parse_grid(args.range, "--range")
    values = np.linspace(lo, hi, n)
    results = []
    for v in values:
        doc = json.loads(json.dumps(cfg.raw))
        _set_by_path(doc, args.param, float(v))
        point = parse_config(doc)
        if point.postselection is not None and point.state is not None:
            setup = _conditioned_setup(point)
            results.append(conditioned_average(setup, point.state))
        elif point.state is not None:
            sol = _solve_from_config(point, strict=True)
            from .averaging import reconstructed_average

            results.append(reconstructed_average(sol.alpha0, point.context, point.state))
        else:
            raise ConfigError("state: required for sweep")
    text = _csv_document(
        [f"sweep of {args.param}", f"config: {json.dumps(cfg.raw)}"],
        [values, np.array(results)],
        [args.param, "value"],
    )
    _emit(text, args.out)
    return EXIT_OK


def cmd_fig1(args) -> int:
    from .averaging import weak_value

    g, sigma, alpha = args.g, args.sigma, args.alpha
    grid = _parse_grid(args.grid, "--grid") or (-3.0, 3.0, 1201)
    q_min, q_max, n_points = grid
    width_box = sigma * math.sqrt(12.0)  # box with matching standard deviation
    models = {
        "gaussian": DetectorModel("gaussian", sigma, g, q_min, q_max, n_points),
        "box": DetectorModel("box", width_box, g, q_min, q_max, n_points),
    }
    strong = {
        kind: DetectorModel(kind, m.width, 1.0, q_min, q_max, n_points)
        for kind, m in models.items()
    }
    rho = pure_state_density(psi_state(alpha))
    f = f_state(args.f_theta)
    obs = spectral_decompose(SIGMA_Z)
    wv = weak_value(obs, np.outer(f, f.conj()), rho)
    q, dq = models["gaussian"].grid()
    columns = [q]
    names = ["q"]
    header = [
        f"g = {_fmt(g)}, sigma = {_fmt(sigma)}, alpha = {_fmt(alpha)},"
        f" postselection f({_fmt(args.f_theta)})",
        f"box width = {_fmt(width_box)} (matches the gaussian standard deviation)",
        f"weak value = {_fmt(wv)}",
        "eigenvalue range = [-1, 1]",
        f"strong measurement regime CV columns use g = 1.0",
        "conditioned_weight columns are cv * P(outcome | postselected) / dq",
    ]
    for kind, model in models.items():
        cv = detector_cv_grid(model)
        columns.append(cv)
        names.append(f"cv_{kind}")
    for kind, model in strong.items():
        columns.append(detector_cv_grid(model))
        names.append(f"cv_{kind}_strong")
    for kind, model in models.items():
        ctx = detector_context(model)
        cv = detector_cv_grid(model)
        setup = ConditionedSetup(ctx, cv, projective_context(f), 0)
        from .averaging import joint_postselection_probabilities

        probs = joint_postselection_probabilities(setup, rho)
        pf = probs.sum()
        columns.append(cv * probs / pf / dq)
        names.append(f"conditioned_weight_{kind}")
        value = float(cv @ probs / pf)
        header.append(f"conditioned average ({kind}) = {_fmt(value)}")
    text = _csv_document(header, columns, names)
    _emit(text, args.out)
    return EXIT_OK


def cmd_fig2(args) -> int:
    taus = [float(t) for t in args.tau.split(",")]
    lo, hi, n = _parse_grid(args.u_range, "--u-range")
    u = np.linspace(lo, hi, n)
    columns = [u]
    names = ["u"]
    for tau in taus:
        columns.append(np.asarray(qpc_cv(u, tau)))
        names.append(f"sigma_z_tau_{_fmt(tau)}")
    smallest = min(taus)
    # the linear small-time limit deviates by ~u^2 tau/2, so check it on the
    # window |u| <= 1 where that stays within the 1% budget for tau <= 0.01
    mask = (np.abs(u) > 1e-9) & (np.abs(u) <= 1.0)
    if smallest <= 0.01 and mask.any():
        ref = 2.0 * math.sqrt(2.0) * u
        col = np.asarray(qpc_cv(u, smallest))
        worst = np.max(np.abs(col[mask] / ref[mask] - 1.0))
        if worst > 0.01:
            print(
                f"error: small-tau limit check failed (deviation {worst:.3e})",
                file=sys.stderr,
            )
            return EXIT_PARSE
    header = [f"qpc contextual values, tau in {{{', '.join(_fmt(t) for t in taus)}}}"]
    _emit(_csv_document(header, columns, names), args.out)
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = load_config(args.config)
    if cfg.state is None:
        raise ConfigError("state: required for this command")
    trials = args.trials or cfg.trials
    seed = args.seed if args.seed is not None else cfg.seed
    run = RunConfig(trials, seed)
    if cfg.postselection is not None:
        setup = _conditioned_setup(cfg)
        res = empirical_conditioned_average(setup, cfg.state, run)
        report = {
            "estimate": res.estimate,
            "stderr": res.stderr,
            "postselection_rate": res.postselection_rate,
            "trials": trials,
            "seed": seed,
        }
    else:
        sol = _solve_from_config(cfg, strict=True)
        res = empirical_average(sol.alpha0, cfg.context, cfg.state, run)
        report = {
            "estimate": res.estimate,
            "stderr": res.stderr,
            "trials": trials,
            "seed": seed,
        }
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [f"estimate: {_fmt(res.estimate)} +- {_fmt(res.stderr)}"]
        if res.postselection_rate is not None:
            lines.append(f"postselection rate: {_fmt(res.postselection_rate)}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = run_suite(args.suite)
    except KeyError:
        print(f"error: unknown suite {args.suite!r}", file=sys.stderr)
        print(f"known suites: all, {', '.join(sorted(SUITE_NAMES))}", file=sys.stderr)
        return EXIT_PARSE
    failed = [name for name, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if failed:
        print(f"first failing property: {failed[0]}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


# --- argument parsing -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxval",
        description="Contextual values of observables under general measurements.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON scenario config")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("solve", help="contextual values of the configured observable")
    add_common(p)
    p.add_argument("--svd-tol", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("conditioned", help="postselected conditioned average")
    add_common(p)
    p.add_argument("--mc", type=int, default=0, help="add a Monte Carlo estimate")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_conditioned)

    p = sub.add_parser("moment", help="observable moment via outcome sequences")
    add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mc", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("sweep", help="vary one config parameter over a range")
    add_common(p)
    p.add_argument("--param", required=True, help="dotted config path, e.g. context.gamma")
    p.add_argument("--range", required=True, help="MIN:MAX:POINTS")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig1", help="pointer-detector CV and conditioned weights CSV")
    add_common(p, config=False)
    p.add_argument("--g", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--alpha", type=float, default=47 * math.pi / 32)
    p.add_argument("--f-theta", type=float, default=math.pi / 2)
    p.add_argument("--grid", default=None, help="MIN:MAX:POINTS (default -3:3:1201)")
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("fig2", help="QPC CV versus measurement time CSV")
    add_common(p, config=False)
    p.add_argument("--tau", default="0.01,0.5,2,10", help="comma-separated list")
    p.add_argument("--u-range", default="-2:2:401", help="MIN:MAX:POINTS")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("mc", help="Monte Carlo estimate for the configured scenario")
    add_common(p)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", help="one of: all, " + ", ".join(SUITE_NAMES))
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotReconstructable as exc:
        print(f"error: observable not reconstructable ({exc})", file=sys.stderr)
        return EXIT_NOT_RECONSTRUCTABLE
    except ZeroPostselectionProbability as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO_POSTSELECTION
    except (ContextualValueError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
