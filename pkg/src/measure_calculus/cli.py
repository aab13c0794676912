"""Command line entry point: ``verify`` runs identity suites, ``compute`` evaluates one derivative.

Exit status is 0 when every report passes, 1 when any identity fails and 2
on configuration or I/O errors.

    measure-calculus verify --suite all --seed 42 --out report.json
    measure-calculus compute --kind extrinsic --functional first_moment_squared \\
        --manifold euclidean:1 --measure "1 0; 1 1" --point 2
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import calculus, fields
from .calculus import FDConfig, FlowConfig
from .errors import ConfigError, MeasureCalculusError
from .functionals import L1_ONLY, Functional, builtin, cylindrical_from_config
from .geometry import Manifold
from .measures import ParticleMeasure, as_measure, load_measure, parse_measure, wasserstein_p
from .report import emit_report, fmt_float, render, to_json
from .suites import DEFAULT_MANIFOLDS, SUITE_NAMES, SuiteContext, run_suites
from .verification import check_dirac_gradient, check_intrinsic_vs_grad, check_lfd_identity

KINDS = ("extrinsic", "centered", "grad_extrinsic", "intrinsic", "l_directional", "l_field", "wasserstein")


@dataclass
class ScenarioConfig:
    """Everything a run needs; mirrors the JSON config document key for key."""

    manifold: list = field(default_factory=lambda: list(DEFAULT_MANIFOLDS))
    measures: dict = field(default_factory=dict)
    functionals: list = field(default_factory=list)
    suites: list = field(default_factory=lambda: ["all"])
    fd: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    seed: int = 42
    out: str | None = None
    format: str = "json"
    tol: float | None = None
    query: dict = field(default_factory=dict)
    base_dir: Path = field(default=Path("."), repr=False)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dc_fields(cls)} - {"base_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**doc, base_dir=path.parent)
        if isinstance(cfg.manifold, str):
            cfg.manifold = [cfg.manifold]
        if isinstance(cfg.suites, str):
            cfg.suites = [cfg.suites]
        return cfg

    def validate(self):
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be an unsigned integer")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        for s in self.suites:
            if s not in SUITE_NAMES + ["all"]:
                raise ConfigError(f"unknown suite {s!r}; known: {SUITE_NAMES + ['all']}")
        for name, m in self.measures.items():
            if isinstance(m, str) and not self.resolve(m).exists():
                raise ConfigError(f"measure file for {name!r} not found: {m}")

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def manifolds(self) -> list[Manifold]:
        return [Manifold.from_string(s) for s in self.manifold]

    def fd_config(self) -> FDConfig:
        return FDConfig(**self.fd)

    def flow_config(self) -> FlowConfig:
        return FlowConfig(**self.flow)

    def load_measure(self, spec, m: Manifold) -> ParticleMeasure:
        if isinstance(spec, str):
            if spec in self.measures:
                return self.load_measure(self.measures[spec], m)
            path = self.resolve(spec)
            if path.exists():
                return load_measure(path, m)
            # inline text: atoms separated by ';' or newlines
            return parse_measure(spec.replace(";", "\n"), m)
        return as_measure(m, spec)

    def load_functional(self, spec, m: Manifold) -> Functional:
        if isinstance(spec, str):
            return builtin(spec)
        return cylindrical_from_config(spec, m)


def parse_field(spec: str, m: Manifold):
    """``zero``, ``identity``, ``rotation`` or ``constant:a,b,...``.

    On Euclidean space every field is cut off beyond radius 3 so that its flow
    is complete; on the sphere fields are projected to the tangent space.
    """
    spec = spec.strip()
    cutoff = None if m.is_sphere else fields.radial_cutoff(3.0, 4.0)
    if spec == "zero":
        return fields.zero_field()
    if spec == "identity":
        v = fields.linear_field(np.eye(m.dim), cutoff=cutoff, manifold=m)
        return fields.VectorField(v.value, v.compact_support, "identity")
    if spec == "rotation":
        if m.dim < 2:
            raise ConfigError("rotation field needs dimension >= 2")
        A = np.zeros((m.dim, m.dim))
        A[0, 1], A[1, 0] = -1.0, 1.0
        v = fields.linear_field(A, cutoff=cutoff, manifold=m)
        return fields.VectorField(v.value, v.compact_support, "rotation")
    if spec.startswith("constant:"):
        c = [float(t) for t in spec.split(":", 1)[1].split(",")]
        if len(c) != m.dim:
            raise ConfigError(f"constant field needs {m.dim} components")
        v = fields.constant_field(c, manifold=m, cutoff=cutoff)
        return fields.VectorField(v.value, v.compact_support, spec)
    raise ConfigError(f"unknown vector field {spec!r}")


def _parse_point(text, m: Manifold) -> np.ndarray:
    if isinstance(text, str):
        text = [float(t) for t in text.replace(",", " ").split()]
    return m.check_point(np.asarray(text, dtype=float))


# ----------------------------------------------------------------------
# verbs
# ----------------------------------------------------------------------


def scenario_reports(cfg: ScenarioConfig, ctx: SuiteContext):
    """Checks on the user-supplied measures and functionals of a config file."""
    out = []
    for m in ctx.manifolds:
        measures = [cfg.load_measure(spec, m) for spec in cfg.measures.values()]
        for fspec in cfg.functionals:
            f = cfg.load_functional(fspec, m)
            if f.tag == L1_ONLY:
                continue
            v = parse_field("rotation" if m.is_sphere else "identity", m)
            for i, eta in enumerate(measures):
                if eta.is_zero:
                    continue
                out.append(check_intrinsic_vs_grad(f, eta, v, ctx.cfg, ctx.flow, ctx.tolerance(1e-5), "identity"))
                out.append(check_dirac_gradient(f, eta, 0.5, eta.points[0], ctx.cfg, ctx.tolerance(1e-6)))
                if len(measures) > 1:
                    gamma = measures[(i + 1) % len(measures)]
                    out.append(check_lfd_identity(f, eta, gamma, 16, ctx.cfg, ctx.tolerance(1e-6)))
    return out


def metadata(cfg: ScenarioConfig) -> dict:
    fd = cfg.fd_config()
    return {
        "generator": "numpy PCG64 seeded by SeedSequence([seed, suite_index])",
        "seed": cfg.seed,
        "manifolds": list(cfg.manifold),
        "suites": list(cfg.suites),
        "fd": {"s0": fd.s0, "levels": fd.levels, "order": fd.order, "tol": fd.tol,
               "spread_threshold": fd.spread_threshold, "h": fd.h},
        "flow": {"substeps": cfg.flow_config().substeps},
        "tol_override": cfg.tol,
    }


def run_verify(cfg: ScenarioConfig) -> int:
    cfg.validate()
    ctx = SuiteContext(cfg.manifolds(), cfg.seed, cfg.fd_config(), cfg.flow_config(), cfg.tol)
    results = run_suites(cfg.suites, ctx)
    if cfg.measures and cfg.functionals:
        results.append(("scenario", scenario_reports(cfg, ctx)))
    reports = [r for _, reps in results for r in reps]
    failed = [r for r in reports if not r.passed]
    if cfg.out:
        try:
            emit_report(results, cfg.out, cfg.format, metadata(cfg))
        except OSError as e:
            raise ConfigError(f"cannot write report to {cfg.out}: {e.strerror}") from None
    else:
        sys.stdout.write(render(results, cfg.format, metadata(cfg)))
    for name, reps in results:
        n_fail = sum(not r.passed for r in reps)
        print(f"{name}: {len(reps) - n_fail}/{len(reps)} passed", file=sys.stderr)
    for r in failed:
        print(str(r), file=sys.stderr)
    return 1 if failed else 0


def run_compute(cfg: ScenarioConfig) -> int:
    q = cfg.query
    kind = q.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown derivative kind {kind!r}; known: {list(KINDS)}")
    if len(cfg.manifold) != 1:
        raise ConfigError("compute needs exactly one manifold")
    m = cfg.manifolds()[0]
    fd, flow = cfg.fd_config(), cfg.flow_config()
    if "measure" not in q:
        raise ConfigError("compute needs a measure")
    eta = cfg.load_measure(q["measure"], m)
    result: dict = {"kind": kind, "manifold": str(m)}
    if kind == "wasserstein":
        if "gamma" not in q:
            raise ConfigError("wasserstein needs a second measure (gamma)")
        p = float(q.get("p", 1.0))
        result.update(p=p, value=wasserstein_p(eta, cfg.load_measure(q["gamma"], m), p))
    else:
        if "functional" not in q:
            raise ConfigError("compute needs a functional")
        f = cfg.load_functional(q["functional"], m)
        result["functional"] = f.name
        if kind in ("intrinsic", "l_directional"):
            v = parse_field(q.get("field", "zero"), m)
            est = (calculus.intrinsic_directional(f, eta, v, fd, flow) if kind == "intrinsic"
                   else calculus.l_directional(f, eta, v, fd))
        else:
            if "point" not in q:
                raise ConfigError(f"{kind} needs a point")
            x = _parse_point(q["point"], m)
            if kind == "extrinsic":
                est = calculus.extrinsic_fd(f, eta, x, fd)
            elif kind == "centered":
                est = calculus.centered_extrinsic_fd(f, eta, x, fd)
            elif kind == "l_field":
                est = calculus.l_field_via_dirac(f, eta, x, fd)
            else:
                est = None
                result["value"] = calculus.grad_extrinsic(f, eta, x, fd)
        if est is not None:
            result.update(value=est.value, converged=est.converged, steps=est.steps,
                          ladder=est.ladder, extrapolated=est.extrapolated, spread=est.spread)
    if cfg.format == "csv":
        val = np.atleast_1d(np.asarray(result["value"], dtype=float))
        text = "kind,value,converged\n" + f"{kind},{' '.join(fmt_float(t) for t in val)},{str(result.get('converged', True)).lower()}\n"
    else:
        text = to_json(result) + "\n"
    sys.stdout.write(text)
    if cfg.out:
        try:
            Path(cfg.out).write_text(text)
        except OSError as e:
            raise ConfigError(f"cannot write {cfg.out}: {e.strerror}") from None
    return 0


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="measure-calculus", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="JSON scenario config; flags override its fields")
        p.add_argument("--manifold", help="euclidean:<d> or sphere:<d_ambient>")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="write the report here (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"])
        p.add_argument("--tol", type=float, help="residual tolerance for seeded random instances (closed-form cases keep their own)")

    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("--suite", action="append", help=f"one of {SUITE_NAMES + ['all']}; repeatable or comma separated")

    c = sub.add_parser("compute", help="evaluate one derivative or metric")
    common(c)
    c.add_argument("--kind", help=f"one of {list(KINDS)}")
    c.add_argument("--functional", help="catalog name, e.g. first_moment_squared or moment(2)")
    c.add_argument("--measure", help="inline atoms 'w x1 .. xd; w x1 .. xd', a file path or a config measure name")
    c.add_argument("--gamma", help="second measure for --kind wasserstein")
    c.add_argument("--point", help="query point, e.g. '2' or '1,0,0'")
    c.add_argument("--field", help="vector field: zero, identity, rotation or constant:a,b,..")
    c.add_argument("--p", type=float, help="Wasserstein exponent")
    return parser


def config_from_args(args) -> ScenarioConfig:
    cfg = ScenarioConfig.from_file(args.config) if args.config else ScenarioConfig()
    if args.manifold:
        cfg.manifold = [args.manifold]
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    if args.format:
        cfg.format = args.format
    if args.tol is not None:
        cfg.tol = args.tol
    if args.verb == "verify" and args.suite:
        cfg.suites = [s.strip() for item in args.suite for s in item.split(",") if s.strip()]
    if args.verb == "compute":
        if args.manifold is None and len(cfg.manifold) > 1 and not args.config:
            cfg.manifold = ["euclidean:1"]
        for key in ("kind", "functional", "measure", "gamma", "point", "field", "p"):
            val = getattr(args, key)
            if val is not None:
                cfg.query[key] = val
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return run_verify(cfg) if args.verb == "verify" else run_compute(cfg)
    except (ConfigError, MeasureCalculusError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
