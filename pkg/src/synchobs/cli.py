"""Command-line entry point: scenario simulation, accessibility analysis,
and verification suites.

Subcommands:

* ``simulate``  run the hybrid observer loop and write the trace CSV.
* ``analyze``   build the accessibility basis of a scenario (or a field-spec
  JSON file), report dimension, structure constants, controllability, and
  the catalog match; writes a machine-readable JSON report.
* ``verify``    run the fundamental / synchrony / differential-decrease
  checks and print a residual table.

Configuration is a flat ``key = value`` text file; every key can be
overridden by the flag of the same name (flags win).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .accessibility import (
    AlgebraBasis,
    NonClosureError,
    build_accessibility_basis,
    controllability_check,
    default_sample_points,
    match_algebra,
)
from .actions import EuclideanRn, ManifoldPoint
from .observer import (
    check_lyapunov_monotonicity,
    differential_decrease_check,
    run_hybrid,
    SimTrace,
)
from .scenarios import SCENARIOS, ScenarioBundle, VAAGains, load_scenario, vaa_scenario
from .systems import AffineSystem, verify_fundamental, verify_synchrony

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CHECK_FAILED = 2
EXIT_NON_CLOSURE = 3


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class SimConfig:
    scenario: str = "vaa"
    t_end: float = 10.0
    dt: float = 0.01
    integrator: str = "exact"
    gnss_rate_hz: float = 1.0
    mag_rate_hz: float = 5.0
    k_v: float = 5.0
    k_c: float = 1.0
    k_m: float = 5.0
    alpha: float = 1.0
    gnss_tau: float = 1.0
    mag_tau: float = 0.2
    flow_steps: int = 50
    seed: int = 0
    no_updates: bool = False
    output: str = ""

    def gains(self) -> VAAGains:
        return VAAGains(self.k_v, self.k_c, self.k_m, self.alpha)

    def output_path(self) -> Path:
        return Path(self.output or f"{self.scenario}_trace.csv")

    def validate(self, enforce_gain_condition: bool = True) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown value {self.scenario!r}")
        for key in ("t_end", "dt", "gnss_rate_hz", "mag_rate_hz", "gnss_tau", "mag_tau"):
            if getattr(self, key) <= 0.0:
                raise ConfigError(f"{key}: must be positive")
        if self.integrator not in ("exact", "euler"):
            raise ConfigError(f"integrator: must be 'exact' or 'euler', got {self.integrator!r}")
        if self.flow_steps < 1:
            raise ConfigError("flow_steps: must be >= 1")
        n = round(self.t_end / self.dt)
        if n < 1 or abs(n * self.dt - self.t_end) > 1e-9:
            raise ConfigError("dt: does not divide t_end")
        if self.scenario == "vaa" and not self.no_updates:
            for key, rate in (("gnss_rate_hz", self.gnss_rate_hz), ("mag_rate_hz", self.mag_rate_hz)):
                period = 1.0 / rate
                if abs(round(period / self.dt) * self.dt - period) > 1e-12 * max(1.0, period):
                    raise ConfigError(f"{key}: dt does not divide the period 1/{rate}")
            for key, value in (("k_v", self.k_v), ("k_c", self.k_c), ("k_m", self.k_m), ("alpha", self.alpha)):
                if value <= 0.0:
                    raise ConfigError(f"{key}: must be positive")
            if enforce_gain_condition and self.k_v <= self.k_c / (2.0 * self.alpha):
                raise ConfigError(f"k_v: gain condition requires k_v > k_c / (2 alpha) = "
                                  f"{self.k_c / (2.0 * self.alpha)}")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "no_updates":
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values: dict = {}
    field_types = {f.name: f.type for f in fields(SimConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in field_types:
            raise ConfigError(f"{key}: unknown configuration key")
        values[key] = _coerce(key, value)
    return values


def _coerce(key: str, value: str):
    kind = {f.name: f.type for f in fields(SimConfig)}[key]
    try:
        if kind == "bool":
            if value.lower() in ("true", "1", "yes"):
                return True
            if value.lower() in ("false", "0", "no"):
                return False
            raise ValueError(value)
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse value {value!r}") from exc


def load_config(
    config_path: str | None, overrides: dict, enforce_gain_condition: bool = True
) -> SimConfig:
    values: dict = {}
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config: file not found: {config_path}")
        values.update(parse_config_text(path.read_text()))
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = SimConfig(**values)
    cfg.validate(enforce_gain_condition)
    return cfg


def build_bundle(cfg: SimConfig, enforce_gain_condition: bool = True) -> ScenarioBundle:
    if cfg.scenario == "vaa":
        return vaa_scenario(
            cfg.gains(),
            gnss_rate_hz=cfg.gnss_rate_hz,
            mag_rate_hz=cfg.mag_rate_hz,
            gnss_tau=cfg.gnss_tau,
            mag_tau=cfg.mag_tau,
            flow_steps=cfg.flow_steps,
            enforce_gain_condition=enforce_gain_condition,
        )
    return load_scenario(cfg.scenario)


def csv_header(bundle: ScenarioBundle) -> str:
    labels = bundle.structure.action.manifold.labels
    cols = ["t", "event"]
    cols += [f"truth_{name}" for name in labels]
    cols += [f"est_{name}" for name in labels]
    cols += ["attitude_error_rad", "velocity_error", "lyapunov"]
    return ",".join(cols)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def trace_to_csv(bundle: ScenarioBundle, trace: SimTrace) -> str:
    lines = [csv_header(bundle)]
    for row in trace.rows:
        att, vel = bundle.error_metrics(row.truth, row.estimate)
        cells = [_fmt(row.t), str(row.event)]
        cells += [_fmt(x) for x in row.truth.coords]
        cells += [_fmt(x) for x in row.estimate.coords]
        cells += [_fmt(att), _fmt(vel), _fmt(row.lyapunov)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config, _config_overrides(args))
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bundle = build_bundle(cfg)
    channels = () if cfg.no_updates else bundle.channels
    trace = run_hybrid(
        bundle.structure, bundle.initial_state(), bundle.initial_truth,
        bundle.input_signal, channels, bundle.cost, cfg.t_end, cfg.dt,
        integrator=cfg.integrator,
    )
    out = cfg.output_path()
    out.write_text(trace_to_csv(bundle, trace))

    # Chart Euler drifts between events by construction, so flatness is only
    # diagnosed for the exact integrator.
    flat_tol = 1e-9 if cfg.integrator == "exact" else float("inf")
    mono = check_lyapunov_monotonicity(trace, flat_tol=flat_tol)
    last = trace.rows[-1]
    att, vel = bundle.error_metrics(last.truth, last.estimate)
    print(f"scenario:           {cfg.scenario}")
    print(f"rows:               {len(trace.rows)}")
    for ch in bundle.channels:
        print(f"{ch.name + ' events:':<20}{trace.event_count(ch.channel_id)}")
    print(f"final attitude err: {att:.6e} rad")
    print(f"final velocity err: {vel:.6e}")
    print(f"final lyapunov:     {last.lyapunov:.6e}")
    verdict = "ok" if mono.passed else "VIOLATED"
    print(f"lyapunov monotone:  {verdict} (max event increase {mono.max_event_increase:.3e}, "
          f"max flat drift {mono.max_flat_drift:.3e})")
    print(f"wrote {out}")
    return EXIT_OK if mono.passed else EXIT_CHECK_FAILED


def _config_overrides(args: argparse.Namespace) -> dict:
    keys = [f.name for f in fields(SimConfig)]
    out = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "no_updates", False):
        out["no_updates"] = True
    else:
        out.pop("no_updates", None)
    return out


# ---------------------------------------------------------------------------
# analyze


def _poly_term_eval(coords: np.ndarray, coeff: float, exps: list[int]) -> float:
    out = coeff
    for x, e in zip(coords, exps):
        if e:
            out *= x**e
    return out


class _PolyField:
    """Polynomial vector field on R^n from a field-spec document."""

    def __init__(self, components: list, dim: int):
        self.dim = dim
        self.terms: list[list[tuple[float, list[int]]]] = []
        for comp in components:
            if isinstance(comp, (int, float)):
                self.terms.append([(float(comp), [0] * dim)])
            elif isinstance(comp, dict) and "terms" in comp:
                parsed = []
                for coeff, exps in comp["terms"]:
                    if len(exps) != dim:
                        raise ConfigError("fields: exponent list length must equal dim")
                    parsed.append((float(coeff), [int(e) for e in exps]))
                self.terms.append(parsed)
            else:
                raise ConfigError(f"fields: cannot parse component {comp!r}")

    def __call__(self, p: ManifoldPoint) -> np.ndarray:
        x = p.coords
        return np.array([
            sum(_poly_term_eval(x, c, e) for c, e in comp) for comp in self.terms
        ])

    def jacobian(self, p: ManifoldPoint) -> np.ndarray:
        x = p.coords
        J = np.zeros((len(self.terms), self.dim))
        for i, comp in enumerate(self.terms):
            for coeff, exps in comp:
                for j, e in enumerate(exps):
                    if e == 0:
                        continue
                    d_exps = list(exps)
                    d_exps[j] -= 1
                    J[i, j] += _poly_term_eval(x, coeff * e, d_exps)
        return J


def load_field_spec(path: str) -> AffineSystem:
    """Affine system on R^n from a JSON document.

    Schema: {"dim": n, "drift": field | null, "fields": [field, ...]} where a
    field is a list of n components, each a number (constant) or
    {"terms": [[coeff, [exponents...]], ...]} (polynomial).
    """
    doc = json.loads(Path(path).read_text())
    if "dim" not in doc:
        raise ConfigError("dim: missing from field spec")
    dim = int(doc["dim"])
    manifold = EuclideanRn(dim)
    raw_fields = doc.get("fields", [])
    if not raw_fields and not doc.get("drift"):
        raise ConfigError("fields: field spec defines no vector fields")
    polys = [_PolyField(f, dim) for f in raw_fields]
    drift = _PolyField(doc["drift"], dim) if doc.get("drift") else None

    zero = lambda p: np.zeros(dim)
    zero_jac = lambda p: np.zeros((dim, dim))
    return AffineSystem(
        manifold,
        drift if drift else zero,
        tuple(polys),
        drift_jacobian=drift.jacobian if drift else zero_jac,
        input_jacobians=tuple(p.jacobian for p in polys),
    )


def analysis_report(basis: AlgebraBasis, n_points: int, seed: int) -> dict:
    manifold = basis.sample_points[0].manifold
    points = default_sample_points(manifold, n_points, seed=seed + 1)
    ctrl = controllability_check(basis, points)
    match = match_algebra(basis.constants)
    return {
        "dimension": basis.dimension,
        "structure_constants": basis.constants.c.tolist(),
        "residual": basis.constants.residual,
        "controllable": ctrl.controllable,
        "match": match.name,
        "basis": list(basis.labels),
        "min_rank": ctrl.min_rank,
        "manifold_dim": ctrl.manifold_dim,
        "invariants": {k: list(v) if isinstance(v, tuple) else v for k, v in match.invariants.items()},
    }


def format_analysis(name: str, report: dict) -> str:
    c = np.asarray(report["structure_constants"])
    nonzero = [
        f"c[{i + 1},{j + 1},{k + 1}] = {c[i, j, k]:+.6f}"
        for i in range(c.shape[0]) for j in range(i + 1, c.shape[0]) for k in range(c.shape[0])
        if abs(c[i, j, k]) > 1e-6
    ]
    lines = [
        f"system: {name}",
        f"dimension: {report['dimension']}",
        f"basis: {', '.join(report['basis']) if report['basis'] else '(empty)'}",
        f"closure residual: {report['residual']:.3e}",
        "structure constants: " + ("; ".join(nonzero) if nonzero else "all zero"),
        f"controllable: {'true' if report['controllable'] else 'false'} "
        f"(min rank {report['min_rank']} of {report['manifold_dim']})",
        f"match: {report['match']}",
    ]
    return "\n".join(lines)


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        if args.spec:
            name = Path(args.spec).stem
            system = load_field_spec(args.spec)
        elif args.scenario:
            name = args.scenario
            if name not in SCENARIOS:
                raise ConfigError(f"scenario: unknown value {name!r}")
            system = load_scenario(name).structure.system
        else:
            raise ConfigError("scenario: provide --scenario or --spec")
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    samples = default_sample_points(system.manifold, args.samples, seed=args.seed)
    try:
        basis = build_accessibility_basis(system, samples, tol=args.tol, max_dim=args.max_dim)
    except NonClosureError as exc:
        print(f"non-closure: {exc}", file=sys.stderr)
        print(f"budget: reached {exc.reached_dim} fields with max_dim = {exc.max_dim}",
              file=sys.stderr)
        return EXIT_NON_CLOSURE

    report = analysis_report(basis, args.points, args.seed)
    text = format_analysis(name, report)
    print(text)
    out = Path(args.output or f"{name}_analysis.txt")
    out.write_text(text + "\n")
    out.with_suffix(".json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {out} and {out.with_suffix('.json')}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args: argparse.Namespace) -> int:
    # Diagnostic mode: gain-violating configurations are admitted here so the
    # decrease check itself can exhibit the failure.
    try:
        cfg = load_config(args.config, _config_overrides(args), enforce_gain_condition=False)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        bundle = build_bundle(cfg, enforce_gain_condition=False)
    except (ValueError, RuntimeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    reports = [
        verify_fundamental(bundle.structure, args.samples_fundamental, 1e-9, seed=cfg.seed),
        verify_synchrony(bundle.structure, args.samples_synchrony, 1e-5, seed=cfg.seed),
    ]
    for ch in bundle.channels:
        reports.append(differential_decrease_check(
            bundle.structure, bundle.cost, ch, args.samples_decrease, 1e-12, seed=cfg.seed,
        ))
    width = max(len(r.name) for r in reports)
    print(f"scenario: {cfg.scenario}")
    for r in reports:
        verdict = "pass" if r.passed else "FAIL"
        print(f"  {r.name:<{width}}  max residual {r.max_residual: .3e}  tol {r.tol:.1e}  {verdict}")
    if all(r.passed for r in reports):
        return EXIT_OK
    return EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# argument parsing


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--scenario", choices=sorted(SCENARIOS))
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--integrator", choices=("exact", "euler"))
    p.add_argument("--gnss-rate-hz", dest="gnss_rate_hz", type=float)
    p.add_argument("--mag-rate-hz", dest="mag_rate_hz", type=float)
    p.add_argument("--k-v", dest="k_v", type=float)
    p.add_argument("--k-c", dest="k_c", type=float)
    p.add_argument("--k-m", dest="k_m", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gnss-tau", dest="gnss_tau", type=float)
    p.add_argument("--mag-tau", dest="mag_tau", type=float)
    p.add_argument("--flow-steps", dest="flow_steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="output path")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synchobs",
        description="Synchronous observer simulation and analysis for fundamental systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the hybrid observer and write a trace CSV")
    _add_config_flags(p_sim)
    p_sim.add_argument("--no-updates", dest="no_updates", action="store_true",
                       help="disable all measurement channels")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="accessibility algebra analysis")
    p_an.add_argument("--scenario", choices=sorted(SCENARIOS))
    p_an.add_argument("--spec", help="field-spec JSON file (fields on R^n)")
    p_an.add_argument("--samples", type=int, default=25, help="independence sample points")
    p_an.add_argument("--points", type=int, default=20, help="controllability test points")
    p_an.add_argument("--tol", type=float, default=1e-8)
    p_an.add_argument("--max-dim", dest="max_dim", type=int, default=None)
    p_an.add_argument("--seed", type=int, default=0)
    p_an.add_argument("--output", help="text report path (JSON written beside it)")
    p_an.set_defaults(func=cmd_analyze)

    p_ver = sub.add_parser("verify", help="fundamental / synchrony / decrease checks")
    _add_config_flags(p_ver)
    p_ver.add_argument("--samples-fundamental", type=int, default=500)
    p_ver.add_argument("--samples-synchrony", type=int, default=200)
    p_ver.add_argument("--samples-decrease", type=int, default=1000)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
