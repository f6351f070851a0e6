"""Command-line runner: ``hardy-verify run <config>`` and ``hardy-verify list``.

A config is a single flat document (JSON, or YAML when the file name ends in
``.yaml``/``.yml``).  Keys:

=================  ==========================================================
``experiment``     one of the names printed by ``hardy-verify list``
``manifold``       ``euclidean`` | ``hyperbolic`` | ``sphere``
``N``              dimension (alias ``dimension``)
``R``              hyperbolic curvature scale (alias ``curvature_scale``)
``poles``          list of pole coordinate vectors (chart coordinates; ambient
                   unit vectors on the sphere)
``p``              exponent
``eps_list``       decreasing list of epsilons (``sweep``)
``samples``        samples per integral, or points for pointwise checks
``seed``           integer seed
``output_path``    report stem; ``<stem>.json`` and ``<stem>.csv`` are written
``bumps``          number of seeded test bumps (``rayleigh``, ``residual``)
``potential``      ``full`` | ``tilde`` | ``ch_lower`` | ``sphere_lower``
=================  ==========================================================

Exit status: 0 if every pass flag is true, 1 if some check failed, 2 when
the config is rejected, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .geometry import PointError, PoleSet, make_manifold
from .potentials import make_params
from .quadrature import QuadConfig, QuadratureError, QuadratureEstimate

CSV_COLUMNS = (
    "experiment",
    "manifold",
    "N",
    "p",
    "eps",
    "I",
    "I_stderr",
    "J",
    "J_stderr",
    "K",
    "K_stderr",
    "ratio",
    "margin",
    "pass",
)

# name -> (required fields, claim exercised)
EXPERIMENTS = {
    "reduction": (
        "N, poles, p",
        "flat-space potential equals the classical multipolar (p=2) and two-pole L^p potentials",
    ),
    "eikonal": ("manifold, N", "unit gradient of distance; Laplacian/Hessian comparison is equality in constant curvature"),
    "rayleigh": (
        "manifold, N, poles, p",
        "multipolar Hardy inequality I >= J for seeded smooth test functions",
    ),
    "minimizer": ("manifold, N, poles, p", "two-pole extremal attains the constant 1 for 2 < p < N"),
    "sweep": ("manifold, N, poles, p, eps_list", "sharpness of C1(2,p) via the u_eps sequence"),
    "audit": ("manifold, N, poles, p", "sign of the potential's term groups (Cartan-Hadamard positivity)"),
    "residual": ("manifold, N, poles, p", "weak supersolution identity -Delta_p phi = V phi^(p-1)"),
    "bounds": (
        "manifold, N, poles, p",
        "curvature lower bounds V_lower <= V and the scalar coth / cot / c(delta) inequalities",
    ),
}

REDUCTION_TOL = 1e-9
BRIDGE_TOL = 1e-12
EIKONAL_TOL = 1e-8
FD_TOL = 1e-4
FD_GRADIENT_TOL = 1e-5
DOMINATION_TOL = 1e-10
ML_TOL = 1e-3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    manifold: str = "euclidean"
    N: int = 4
    R: float = 1.0
    poles: list = field(default_factory=list)
    p: float = 2.0
    eps_list: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    samples: int = 200_000
    seed: int = 0
    output_path: str = "hardy_report"
    bumps: int = 20
    potential: str = "full"


_ALIASES = {"dimension": "N", "curvature_scale": "R"}


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"{path}: cannot read config ({err.strerror})") from None
    if path.suffix in (".yaml", ".yml"):
        import yaml

        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as err:
            raise ConfigError(f"{path}: YAML parse error: {err}") from None
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a key-value mapping")
    return parse_config(raw, str(path))


def parse_config(raw: dict, source: str = "<config>") -> ExperimentConfig:
    known = set(ExperimentConfig.__dataclass_fields__)
    data = {}
    for k, v in raw.items():
        key = _ALIASES.get(k, k)
        if key not in known:
            raise ConfigError(f"{source}: field '{k}': unknown field")
        data[key] = v

    def fail(name, msg):
        raise ConfigError(f"{source}: field '{name}': {msg}")

    if "experiment" not in data:
        fail("experiment", "missing")
    if data["experiment"] not in EXPERIMENTS:
        fail("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    cfg = ExperimentConfig(**data)
    if cfg.manifold not in ("euclidean", "hyperbolic", "sphere"):
        fail("manifold", "must be euclidean, hyperbolic or sphere")
    if not isinstance(cfg.N, int) or isinstance(cfg.N, bool) or cfg.N < 3:
        fail("N", "must be an integer >= 3")
    if not isinstance(cfg.R, (int, float)) or not cfg.R > 0:
        fail("R", "must be a positive number")
    if not isinstance(cfg.p, (int, float)) or isinstance(cfg.p, bool) or not 1 < cfg.p < cfg.N:
        fail("p", f"must satisfy 1 < p < N = {cfg.N}")
    if not isinstance(cfg.samples, int) or cfg.samples < 64:
        fail("samples", "must be an integer >= 64")
    if not isinstance(cfg.seed, int) or cfg.seed < 0:
        fail("seed", "must be a nonnegative integer")
    if not isinstance(cfg.bumps, int) or cfg.bumps < 1:
        fail("bumps", "must be a positive integer")
    if cfg.potential not in verify.POTENTIAL_TAGS:
        fail("potential", f"must be one of {', '.join(verify.POTENTIAL_TAGS)}")
    if not isinstance(cfg.eps_list, list) or not cfg.eps_list:
        fail("eps_list", "must be a nonempty list")
    if any(not isinstance(e, (int, float)) or not 0 < e < 1 for e in cfg.eps_list):
        fail("eps_list", "entries must lie in (0, 1)")
    if any(b >= a for a, b in zip(cfg.eps_list, cfg.eps_list[1:])):
        fail("eps_list", "must be strictly decreasing")
    if cfg.experiment != "eikonal":
        width = cfg.N + 1 if cfg.manifold == "sphere" else cfg.N
        P = cfg.poles
        if not isinstance(P, list) or len(P) < 2:
            fail("poles", "need a list of at least two points")
        for i, a in enumerate(P):
            if not isinstance(a, list) or len(a) != width or not all(isinstance(t, (int, float)) for t in a):
                fail("poles", f"entry {i} must be a list of {width} numbers")
    return cfg


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _manifold(cfg: ExperimentConfig):
    return make_manifold(cfg.manifold, cfg.N, cfg.R)


def _poles(cfg: ExperimentConfig, M):
    try:
        return PoleSet(M, np.asarray(cfg.poles, dtype=float))
    except ValueError as err:
        raise ConfigError(f"field 'poles': {err}") from None


def _params(cfg: ExperimentConfig, n: int):
    try:
        return make_params(float(cfg.p), cfg.N, n)
    except ValueError as err:
        raise ConfigError(f"field 'p': {err}") from None


def _row(cfg, experiment, **kw):
    row = {c: None for c in CSV_COLUMNS}
    row.update(experiment=experiment, manifold=cfg.manifold, N=cfg.N, p=float(cfg.p))
    row.update(kw)
    return row


def _est(e: QuadratureEstimate | None):
    return None if e is None else e.as_dict()


def _quad(cfg: ExperimentConfig) -> QuadConfig:
    return QuadConfig(total_samples=cfg.samples, seed=cfg.seed)


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Run one experiment; return CSV rows and the JSON detail block."""
    kind = cfg.experiment
    M = _manifold(cfg)
    rows, detail = [], {}
    if kind == "eikonal":
        res = verify.eikonal_check(M, count=500, fd_count=100, seed=cfg.seed)
        limits = {
            "gradient_norm": EIKONAL_TOL,
            "gradient_fd": FD_GRADIENT_TOL,
            "laplacian_fd": FD_TOL,
            "hessian_fd": FD_TOL,
        }
        for k, tol in limits.items():
            rows.append(_row(cfg, f"eikonal/{k}", margin=res[k], **{"pass": res[k] <= tol}))
        return rows, {"checks": res, "tolerances": limits}

    P = _poles(cfg, M)
    params = _params(cfg, P.n)
    q = _quad(cfg)
    if kind == "reduction":
        if cfg.manifold != "euclidean":
            raise ConfigError("field 'manifold': the reduction experiment runs on euclidean")
        if cfg.p != 2 and (P.n != 2 or cfg.p < 2):
            raise ConfigError("field 'p': reductions need p = 2, or two poles with 2 <= p < N")
        n_pts = min(cfg.samples, 10_000)
        res = verify.reduction_check(cfg.N, P.poles, float(cfg.p), n_pts, cfg.seed)
        for k in ("multipolar_p2", "bipolar_lp", "bridge"):
            if k in res:
                tol = BRIDGE_TOL if k == "bridge" else REDUCTION_TOL
                rows.append(_row(cfg, f"reduction/{k}", margin=res[k], **{"pass": res[k] <= tol}))
        return rows, {"checks": res}

    if kind == "rayleigh":
        fields = verify.default_bumps(M, P, cfg.seed, cfg.bumps)
        out, rate = verify.check_inequality(M, P, params, fields, cfg.potential, q)
        reps = []
        for k, margin, ok, rep in out:
            rows.append(
                _row(
                    cfg,
                    "rayleigh",
                    I=rep.I.value,
                    I_stderr=rep.I.std_error,
                    J=rep.J.value,
                    J_stderr=rep.J.std_error,
                    ratio=rep.ratio,
                    margin=margin,
                    **{"pass": ok},
                )
            )
            reps.append(
                {
                    "field": k,
                    "I": _est(rep.I),
                    "J": _est(rep.J),
                    "margin": _est(rep.margin),
                    "ratio": rep.ratio,
                    "rel_error": rep.rel_error,
                    "potential_tag": rep.potential_tag,
                }
            )
        return rows, {"pass_rate": rate, "reports": reps}

    if kind == "minimizer":
        rep = verify.minimizer_equality(M, P, params, q)
        rows.append(
            _row(
                cfg,
                "minimizer",
                I=rep.I.value,
                I_stderr=rep.I.std_error,
                J=rep.J.value,
                J_stderr=rep.J.std_error,
                ratio=rep.I.value / rep.J.value,
                margin=rep.difference.value,
                **{"pass": rep.passed},
            )
        )
        return rows, {
            "I": _est(rep.I),
            "J": _est(rep.J),
            "difference": _est(rep.difference),
            "gap": rep.gap,
            "rel_error": rep.rel_error,
            "tolerance": rep.tolerance,
            "boundary_flux": _est(rep.boundary_flux),
            "truncation_radius": rep.truncation_radius,
            "notes": rep.notes,
        }

    if kind == "sweep":
        sweep = verify.sharpness_sweep(M, P, params, cfg.eps_list, q)
        checks = verify.sweep_checks(sweep, params.C1)
        ok = all(v for k, v in checks.items() if isinstance(v, bool))
        for r in sweep:
            rows.append(
                _row(
                    cfg,
                    "sweep",
                    eps=r.eps,
                    I=r.I,
                    I_stderr=r.std_errors[0],
                    J=r.J,
                    J_stderr=r.std_errors[1],
                    K=r.K,
                    K_stderr=r.std_errors[2],
                    ratio=r.ratio,
                    margin=r.ratio - params.C1,
                    **{"pass": ok},
                )
            )
        return rows, {"rows": [asdict(r) for r in sweep], "checks": checks, "target": params.C1}

    if kind == "audit":
        rep = verify.positivity_audit(M, P, params, min(cfg.samples, 100_000), cfg.seed)
        rows.append(
            _row(cfg, "audit", margin=rep.groups["total"]["min_relative"], **{"pass": rep.passed})
        )
        return rows, asdict(rep)

    if kind == "residual":
        fields = verify.default_bumps(M, P, cfg.seed, cfg.bumps)
        out = verify.weak_supersolution_residual(M, P, params, fields, q)
        reps = []
        for r in out:
            rows.append(
                _row(
                    cfg,
                    "residual",
                    I=r.lhs.value,
                    I_stderr=r.lhs.std_error,
                    J=r.rhs.value,
                    J_stderr=r.rhs.std_error,
                    ratio=r.lhs.value / r.rhs.value,
                    margin=r.residual,
                    **{"pass": r.passed},
                )
            )
            reps.append(
                {
                    "lhs": _est(r.lhs),
                    "rhs": _est(r.rhs),
                    "difference": _est(r.difference),
                    "residual": r.residual,
                    "rel_error": r.rel_error,
                    "tolerance": r.tolerance,
                }
            )
        return rows, {"reports": reps}

    if kind == "bounds":
        n_pts = min(cfg.samples, 10_000)
        detail = {}
        if cfg.manifold in ("hyperbolic", "sphere"):
            m = verify.domination_check(M, params, P, n_pts, cfg.seed)
            name = "ch_domination" if cfg.manifold == "hyperbolic" else "sphere_domination"
            rows.append(_row(cfg, f"bounds/{name}", margin=m, **{"pass": m >= -DOMINATION_TOL}))
            detail[name] = m
        sc = verify.scalar_bounds_check()
        rows.append(_row(cfg, "bounds/coth_gap", margin=sc["coth_gap_min"], **{"pass": sc["coth_gap_min"] >= 0}))
        rows.append(
            _row(cfg, "bounds/c_delta", margin=sc["c_delta_margin_min"], **{"pass": sc["c_delta_margin_min"] >= 0})
        )
        rows.append(
            _row(
                cfg,
                "bounds/mittag_leffler",
                margin=sc["mittag_leffler_max_error"],
                **{"pass": sc["mittag_leffler_max_error"] <= ML_TOL},
            )
        )
        detail.update(sc)
        return rows, detail

    raise ConfigError(f"field 'experiment': unknown experiment {kind!r}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else repr(f)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_reports(cfg: ExperimentConfig, rows: list[dict], detail: dict) -> tuple[Path, Path]:
    stem = Path(cfg.output_path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path = stem.with_name(stem.name + ".csv")
    json_path = stem.with_name(stem.name + ".json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(rows))
    report = {
        "config": asdict(cfg),
        "seed": cfg.seed,
        "passed": all(bool(r["pass"]) for r in rows),
        "rows": rows,
        "detail": detail,
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def list_experiments() -> str:
    """One line per experiment kind: name, required config fields and the claim it checks."""
    w0 = max(len(k) for k in (*EXPERIMENTS, "experiment"))
    w1 = max(len(v[0]) for v in EXPERIMENTS.values())
    lines = [f"{'experiment':<{w0}}  {'required fields':<{w1}}  claim"]
    for name, (req, claim) in EXPERIMENTS.items():
        lines.append(f"{name:<{w0}}  {req:<{w1}}  {claim}")
    return "\n".join(lines)


def run(config_file: str | Path) -> int:
    try:
        cfg = load_config(config_file)
        rows, detail = run_experiment(cfg)
    except ConfigError as err:
        print(f"config rejected: {err}", file=sys.stderr)
        return 2
    except (QuadratureError, PointError, FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except ValueError as err:
        # preconditions checked inside the library
        print(f"config rejected: {err}", file=sys.stderr)
        return 2
    csv_path, json_path = write_reports(cfg, rows, detail)
    ok = all(bool(r["pass"]) for r in rows)
    print(f"{cfg.experiment}: {sum(bool(r['pass']) for r in rows)}/{len(rows)} rows pass; wrote {csv_path} and {json_path}")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="hardy-verify", description="Numerical checks of multipolar Hardy inequalities.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    sub.add_parser("list", help="list the experiment kinds")
    args = ap.parse_args(argv)
    if args.command == "list":
        print(list_experiments())
        return 0
    return run(args.config)


if __name__ == "__main__":
    sys.exit(main())
