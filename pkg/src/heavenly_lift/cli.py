"""Command-line driver: verify / curvature / noninv.

Configurations are TOML files with [solution], [box], [run], [tolerances]
and [outputs] tables; command-line flags override the file.  Reports are
deterministic JSON (see :mod:`heavenly_lift.report`); the curvature and
verify paths can additionally emit per-point CSV and quick-look PNG figures
next to the report.

Exit codes: 0 all checks passed, 1 a tolerance check failed, 2 usage or
configuration error, 3 the non-invariance test found an invariance
direction (a finding, not an error).
"""

from __future__ import annotations

import argparse
import math
import multiprocessing
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.10
    import tomli as tomllib

from heavenly_lift import curvature as curv
from heavenly_lift import geometry as geom
from heavenly_lift import noninv as ninv
from heavenly_lift import pde
from heavenly_lift.funcspace import HoloFn, RealFn1
from heavenly_lift.jets import Point4
from heavenly_lift.report import render_report, write_csv
from heavenly_lift.sampling import Box
from heavenly_lift.solutions import (
    DomainError,
    NewtonError,
    SolutionSpec,
    legendre_invert,
    psi_jet,
)

DEFAULT_TOLERANCES = {
    "leghcma": 1e-8,
    "realbf": 1e-8,
    "legrot": 1e-8,
    "backlund": 1e-7,
    "zeta": 1e-7,
    "roundtrip": 1e-11,
    "ricci": 1e-8,
    "metric_consistency": 1e-9,
    "coframe": 1e-10,
    "curv_closed": 1e-8,
    "frame_pattern": 1e-9,
}

_METRIC_FORM_BY_FAMILY = {
    "sol1": "metr1", "sol2": "metr2", "sol3": "metr3",
    "special1": "metric1", "special2": "metric2",
}
_COFRAMES_BY_FAMILY = {
    "sol1": ("legtetrad", "legtetrad2", "tetr1"),
    "sol2": ("legtetrad", "legtetrad2", "tetr2", "tetr3"),
    "sol3": ("legtetrad", "legtetrad2", "tetr2", "tetr3"),
    "special1": ("frame2sol1",),
    "special2": ("frame2sol2",),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    spec: SolutionSpec
    box: Box
    points: int = 200
    seed: int = 0
    jobs: int = 1
    grid: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    formats: tuple = ("json",)
    plots: bool = False
    out_dir: Path | None = None
    warnings: list = field(default_factory=list)
    degrees: tuple = (4, 6, 8)


# ---------------------------------------------------------------------------
# Configuration parsing
# ---------------------------------------------------------------------------

def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v), 0.0)


def _holo_from_cfg(tbl) -> HoloFn:
    kind = tbl.get("kind", "polynomial")
    if kind == "zero":
        return HoloFn.zero()
    if kind == "constant":
        return HoloFn.constant(_as_complex(tbl["value"]))
    if kind == "polynomial":
        return HoloFn.polynomial([_as_complex(c) for c in tbl.get("coeffs", [0.0])])
    if kind == "exp":
        return HoloFn.exp_linear(_as_complex(tbl["a"]), _as_complex(tbl["beta"]))
    if kind == "rational":
        return HoloFn.rational([_as_complex(c) for c in tbl["num"]],
                               [_as_complex(c) for c in tbl["den"]])
    raise ConfigError(f"unknown holomorphic function kind {kind!r}")


def _real_from_cfg(tbl) -> RealFn1:
    kind = tbl.get("kind", "polynomial")
    if kind == "zero":
        return RealFn1.zero()
    if kind == "polynomial":
        return RealFn1.polynomial([float(c) for c in tbl.get("coeffs", [0.0])])
    if kind == "trig":
        return RealFn1.trig(float(tbl.get("a", 0.0)), float(tbl.get("b", 0.0)),
                            float(tbl.get("omega", 1.0)))
    if kind == "exponential":
        return RealFn1.exponential(float(tbl["a"]), float(tbl["gamma"]))
    if kind == "affine":
        return RealFn1.affine(float(tbl.get("mu", 0.0)), float(tbl.get("nu", 0.0)))
    raise ConfigError(f"unknown real function kind {kind!r}")


def _describe_holo(f: HoloFn) -> dict:
    if f.kind == "polynomial":
        return {"kind": "polynomial", "coeffs": [complex(c) for c in f.coeffs]}
    if f.kind == "exp":
        return {"kind": "exp", "a": f.a, "beta": f.beta}
    return {"kind": "rational", "num": [complex(c) for c in f.num],
            "den": [complex(c) for c in f.den]}


def _describe_real(f: RealFn1) -> dict:
    if f.kind == "polynomial":
        return {"kind": "polynomial", "coeffs": list(f.coeffs)}
    if f.kind == "trig":
        return {"kind": "trig", "a": f.a, "b": f.b, "omega": f.omega}
    if f.kind == "exponential":
        return {"kind": "exponential", "a": f.a, "gamma": f.gamma}
    return {"kind": "affine", "mu": f.mu, "nu": f.nu}


def build_spec(tbl: dict, warnings: list) -> SolutionSpec:
    family = tbl.get("family")
    if family not in ("sol1", "sol2", "sol3", "special1", "special2"):
        raise ConfigError(f"solution.family must name a known family, got {family!r}")
    if "b" not in tbl:
        raise ConfigError("solution.b is required")
    b = _holo_from_cfg(tbl["b"])
    alpha = float(tbl.get("alpha", 0.0))
    r0 = float(tbl.get("r0", 0.0))
    k = _real_from_cfg(tbl["k"]) if "k" in tbl else None
    if family in ("special1", "special2"):
        if "r" in tbl:
            r = _real_from_cfg(tbl["r"])
            spec = SolutionSpec(family=family, b=b, r=r, k=k, alpha=alpha, r0=r0)
            if not spec.special_r_is_consistent():
                warnings.append(
                    f"solution.r overrides the affine restriction of {family}; "
                    "constraint checks are expected to fail")
            return spec
        if family == "special1":
            return SolutionSpec.special1(b, alpha, r0)
        return SolutionSpec.special2(b, alpha, r0)
    if "r" not in tbl:
        raise ConfigError(f"solution.r is required for family {family}")
    r = _real_from_cfg(tbl["r"])
    if family == "sol3" and k is None:
        raise ConfigError("solution.k is required for family sol3")
    return SolutionSpec(family=family, b=b, r=r, k=k, alpha=alpha, r0=r0)


def load_config(path: str) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        with open(p, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}") from e
    warnings: list = []
    if "solution" not in raw:
        raise ConfigError("missing [solution] table")
    spec = build_spec(raw["solution"], warnings)
    box_tbl = raw.get("box", {})
    try:
        box = Box(
            re_q=tuple(box_tbl.get("re_q", (0.6, 2.0))),
            im_q=tuple(box_tbl.get("im_q", (-0.4, 0.4))),
            re_z=tuple(box_tbl.get("re_z", (0.6, 2.0))),
            im_z=tuple(box_tbl.get("im_z", (-0.4, 0.4))),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e
    run = raw.get("run", {})
    tol = dict(DEFAULT_TOLERANCES)
    for k_, v in raw.get("tolerances", {}).items():
        if k_ not in tol:
            raise ConfigError(f"unknown tolerance name {k_!r}")
        tol[k_] = float(v)
    outputs = raw.get("outputs", {})
    formats = tuple(outputs.get("formats", ("json",)))
    for f in formats:
        if f not in ("json", "csv"):
            raise ConfigError(f"unknown output format {f!r}")
    return RunConfig(
        spec=spec, box=box,
        points=int(run.get("points", 200)),
        seed=int(run.get("seed", 0)),
        jobs=int(run.get("jobs", 1)),
        tolerances=tol, formats=formats,
        plots=bool(outputs.get("plots", False)),
        warnings=warnings,
        degrees=tuple(run.get("degrees", (4, 6, 8))),
    )


def _config_payload(cfg: RunConfig) -> dict:
    return {
        "solution": {
            "family": cfg.spec.family,
            "alpha": cfg.spec.alpha,
            "r0": cfg.spec.r0,
            "b": _describe_holo(cfg.spec.b),
            "r": _describe_real(cfg.spec.r),
            "k": _describe_real(cfg.spec.k) if cfg.spec.k is not None else None,
        },
        "box": {"re_q": list(cfg.box.re_q), "im_q": list(cfg.box.im_q),
                "re_z": list(cfg.box.re_z), "im_z": list(cfg.box.im_z)},
        "points": cfg.points,
        "seed": cfg.seed,
        "jobs": cfg.jobs,
        "tolerances": cfg.tolerances,
        "warnings": cfg.warnings,
    }


def _map_points(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(it) for it in items]
    with multiprocessing.Pool(jobs) as pool:
        return pool.map(fn, items)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_point(args):
    spec, p, run_constraints = args
    out = {"x": p.reals()}
    try:
        psi3 = psi_jet(spec, p, 3)
        out["leghcma"] = pde.residual_leghcma(psi3).rel
        out["realbf"] = pde.residual_bf(psi3).rel
        if run_constraints:
            r1, r2 = pde.residual_legrot(psi3, spec.alpha)
            out["legrot1"] = r1.rel
            out["legrot2"] = r2.rel
            if max(r1.rel, r2.rel) <= 1e-8:
                out["backlund"] = pde.backlund_compatibility(psi3, spec.alpha).rel
            else:
                out["backlund"] = max(r1.rel, r2.rel)
    except DomainError as e:
        out["error"] = str(e)
    return out


def run_verify(cfg: RunConfig) -> tuple[int, dict, dict]:
    t0 = time.time()
    pts = cfg.box.points(cfg.points, seed=cfg.seed)
    run_constraints = cfg.spec.family in ("special1", "special2")
    rows = _map_points(_verify_point, [(cfg.spec, p, run_constraints) for p in pts],
                       cfg.jobs)
    # Legendre round-trip & exponentiated-picture residual on a subset
    n_rt = min(cfg.points, 50)
    roundtrip, zeta = [], []
    rt_errors = []
    for p in pts[:n_rt]:
        try:
            psi = psi_jet(cfg.spec, p, 2)
            target = (psi.wirtinger("q"), p.z)
            inv = legendre_invert(cfg.spec, target)
            closure = abs(psi_jet(cfg.spec, Point4(inv.q, p.z), 2).wirtinger("q") - target[0])
            roundtrip.append(closure)
            zeta.append(pde.residual_zeta(inv.u_jet).rel)
        except (DomainError, NewtonError) as e:
            rt_errors.append(str(e))
    results = {}
    eq_names = ["leghcma", "realbf"] + (["legrot1", "legrot2", "backlund"]
                                        if run_constraints else [])
    for name in eq_names:
        vals = [r[name] for r in rows if name in r]
        key = "legrot" if name.startswith("legrot") else name
        results.setdefault(key, 0.0)
        if vals:
            results[key] = max(results[key], float(np.max(vals)))
    results["zeta"] = float(np.max(zeta)) if zeta else float("nan")
    results["roundtrip"] = float(np.max(roundtrip)) if roundtrip else float("nan")
    failed = []
    for key, worst in results.items():
        tol = cfg.tolerances[key]
        if not (worst <= tol):
            failed.append(key)
    n_errors = sum(1 for r in rows if "error" in r) + len(rt_errors)
    payload = {
        "command": "verify",
        "config": _config_payload(cfg),
        "results": {k: {"max_rel_residual": v, "tolerance": cfg.tolerances[k]}
                    for k, v in results.items()},
        "failed": sorted(failed),
        "evaluation_errors": n_errors,
        "pass": not failed and n_errors == 0,
        "curvature_convention": None,
        "runtime_s": time.time() - t0,
    }
    csv = {
        "header": ["x1", "x2", "x3", "x4", "leghcma", "realbf",
                   "legrot1", "legrot2", "backlund"],
        "rows": [[*r["x"], r.get("leghcma"), r.get("realbf"), r.get("legrot1"),
                  r.get("legrot2"), r.get("backlund")] for r in rows],
        "residual_series": {name: [r.get(name) for r in rows]
                            for name in eq_names},
    }
    return (0 if payload["pass"] else 1), payload, csv


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def _curvature_point(args):
    spec, p, form, coframes, want_consistency = args
    out = {"x": p.reals()}
    try:
        g = geom.metric_closed(form, spec, p, 2)
    except (geom.DegenerateMetricError, ValueError) as e:
        out["error"] = str(e)
        return out
    rep = curv.riemann_ricci(g)
    out["g"] = [g.comps[a, b, 0] for a in range(4) for b in range(a, 4)]
    out["eigen"] = sorted(g.eigenvalues().tolist())
    npos, nneg = g.signature_counts()
    out["signature"] = (npos, nneg)
    out["ricci_rel"] = rep.ricci_rel
    out["riemann_max"] = rep.riemann_max
    conv = curv.select_convention()
    s = [curv._SLOT[t] for t in conv.labels]
    r_low_c = curv.complexify(rep.riemann_lower)
    out["r3434_numeric"] = conv.sign * r_low_c[s[2], s[3], s[2], s[3]]
    if spec.is_special:
        out["r3434_closed"] = curv.closed_r3434(spec, p)
    if want_consistency:
        try:
            g2 = geom.metric_from_psi(spec, p, 2)
            scale = max(float(np.max(np.abs(g.comps))), 1e-300)
            out["consistency"] = float(np.max(np.abs(g.comps - g2.comps))) / scale
        except geom.DegenerateMetricError as e:
            out["consistency_error"] = str(e)
    out["coframe"] = {}
    for cform in coframes:
        try:
            c = geom.coframe(cform, spec, p, 2)
            dev = geom.coframe_metric_check(c, g)
            # relative to the co-frame bilinear scale: near-singular frames
            # carry large components whose roundoff would otherwise swamp
            # the absolute deviation
            sc = max(max(abs(j.value) for j in c.l), max(abs(j.value) for j in c.m))
            out["coframe"][cform] = dev / max(1.0, sc * sc)
        except geom.SingularCoframeError:
            out["coframe"][cform] = None
        except geom.DegenerateMetricError:
            out["coframe"][cform] = None
    if spec.is_special:
        cform = _COFRAMES_BY_FAMILY[spec.family][0]
        try:
            c = geom.coframe(cform, spec, p, 2)
            F = curv.frame_curvature(rep, c)
            pat = curv.frame_pattern_check(spec, F, p)
            out["frame_pattern_rel"] = pat.max_rel
            out["frame_factor"] = pat.combination_factor
        except geom.SingularCoframeError:
            pass
    return out


def run_curvature(cfg: RunConfig) -> tuple[int, dict, dict]:
    t0 = time.time()
    spec = cfg.spec
    form = _METRIC_FORM_BY_FAMILY[spec.family]
    coframes = _COFRAMES_BY_FAMILY[spec.family]
    n_pts = min(cfg.points, 100)
    pts = cfg.box.points(n_pts, seed=cfg.seed)
    if cfg.grid:
        pts_csv = cfg.box.grid(cfg.grid)
    else:
        pts_csv = pts
    want_consistency = not spec.is_special
    conv = curv.select_convention()
    rows = _map_points(_curvature_point,
                       [(spec, p, form, coframes, want_consistency) for p in pts],
                       cfg.jobs)
    ok_rows = [r for r in rows if "error" not in r]
    failed = []
    ricci_max = max((r["ricci_rel"] for r in ok_rows), default=float("nan"))
    if not (ricci_max <= cfg.tolerances["ricci"]):
        failed.append("ricci")
    signatures = sorted({tuple(r["signature"]) for r in ok_rows})
    signature_ok = signatures == [(2, 2)]
    if not signature_ok:
        failed.append("signature")
    consistency = [r["consistency"] for r in ok_rows if "consistency" in r]
    consistency_max = float(np.max(consistency)) if consistency else None
    if want_consistency and consistency:
        if not (consistency_max <= cfg.tolerances["metric_consistency"]):
            failed.append("metric_consistency")
    coframe_summary = {}
    for cform in coframes:
        vals = [r["coframe"][cform] for r in ok_rows
                if r.get("coframe", {}).get(cform) is not None]
        coframe_summary[cform] = {
            "applicable_points": len(vals),
            "max_dev": float(np.max(vals)) if vals else None,
        }
        if vals and not (float(np.max(vals)) <= cfg.tolerances["coframe"]):
            failed.append(f"coframe:{cform}")
    curv_match = None
    if spec.is_special:
        match = curv.compare_curv_closed(spec, pts)
        curv_match = {
            "max_rel_dev": match.max_rel_dev,
            "relation_dev": match.relation_dev,
            "n_points": match.n_points,
        }
        if not (max(match.max_rel_dev, match.relation_dev)
                <= cfg.tolerances["curv_closed"]):
            failed.append("curv_closed")
        frame_rels = [r["frame_pattern_rel"] for r in ok_rows if "frame_pattern_rel" in r]
        if frame_rels:
            worst = float(np.max(frame_rels))
            curv_match["frame_pattern_rel"] = worst
            curv_match["frame_factor"] = ok_rows[0].get("frame_factor")
            if not (worst <= cfg.tolerances["frame_pattern"]):
                failed.append("frame_pattern")
    payload = {
        "command": "curvature",
        "config": _config_payload(cfg),
        "metric_form": form,
        "results": {
            "ricci_max_rel": ricci_max,
            "riemann_max": max((r["riemann_max"] for r in ok_rows), default=None),
            "signatures_observed": [list(s) for s in signatures],
            "signature_constant": signature_ok,
            "metric_consistency_max": consistency_max,
            "coframes": coframe_summary,
            "closed_curvature": curv_match,
            "evaluation_errors": len(rows) - len(ok_rows),
        },
        "failed": sorted(failed),
        "pass": not failed,
        "curvature_convention": conv.describe(),
        "runtime_s": time.time() - t0,
    }
    # CSV grid rows (recompute on the lattice when --grid was given)
    if cfg.grid:
        grid_rows = _map_points(_curvature_point,
                                [(spec, p, form, (), False) for p in pts_csv],
                                cfg.jobs)
    else:
        grid_rows = rows
    comp_names = [f"g{a + 1}{b + 1}" for a in range(4) for b in range(a, 4)]
    header = ["x1", "x2", "x3", "x4", *comp_names, "ricci_max",
              "r3434_numeric_re", "r3434_numeric_im", "r3434_closed_re", "r3434_closed_im"]
    csv_rows = []
    for r in grid_rows:
        if "error" in r:
            continue
        closed = r.get("r3434_closed")
        csv_rows.append([
            *r["x"], *r["g"], r["ricci_rel"],
            r["r3434_numeric"].real, r["r3434_numeric"].imag,
            closed.real if closed is not None else None,
            closed.imag if closed is not None else None,
        ])
    csv = {"header": header, "rows": csv_rows,
           "eigenvalues": np.array([r["eigen"] for r in ok_rows]) if ok_rows else None}
    return (0 if payload["pass"] else 1), payload, csv


# ---------------------------------------------------------------------------
# noninv
# ---------------------------------------------------------------------------

def run_noninv(cfg: RunConfig, points_override: int | None = None) -> tuple[int, dict, dict]:
    t0 = time.time()
    reports = []
    for deg in cfg.degrees:
        basis = ninv.GeneratorBasis(deg)
        n = points_override if points_override is not None else 4 * basis.dimension
        reports.append(ninv.kernel_rank(cfg.spec, n, basis, seed=cfg.seed, box=cfg.box))
    verdict = ("noninvariant" if all(r.kernel_dim == 0 for r in reports)
               else "invariant-direction-found")
    payload = {
        "command": "noninv",
        "config": _config_payload(cfg),
        "degrees": list(cfg.degrees),
        "verdict": verdict,
        "reports": [r.to_dict() for r in reports],
        "caveat": ninv.NONLOCAL_CAVEAT,
        "curvature_convention": None,
        "runtime_s": time.time() - t0,
    }
    csv = {
        "header": ["degree", "index", "singular_value"],
        "rows": [[r.degree, i, float(s)] for r in reports
                 for i, s in enumerate(r.singular_values)],
        "spectra": {r.degree: r.singular_values for r in reports},
    }
    return (0 if verdict == "noninvariant" else 3), payload, csv


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--spec", required=True, help="TOML configuration file")
    sub.add_argument("--points", type=int, default=None, help="sample point count")
    sub.add_argument("--seed", type=int, default=None, help="Halton sequence offset")
    sub.add_argument("--jobs", type=int, default=None, help="worker pool size")
    sub.add_argument("--out", default=None, help="output directory for report/CSV/figures")
    sub.add_argument("--format", choices=("json", "csv"), default=None,
                     help="add an output format (json is always produced)")
    sub.add_argument("--plots", action="store_true", help="render figures next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heavenly-lift",
                                 description="verification suite for the lifted solutions")
    subs = ap.add_subparsers(dest="command", required=True)
    for name in ("verify", "curvature", "noninv"):
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "curvature":
            sub.add_argument("--grid", type=int, default=0,
                             help="emit a per-axis lattice CSV (downsampled to <= 10^4 rows)")
    return ap


def _emit(payload: dict, csv: dict, cfg: RunConfig, command: str) -> None:
    text = render_report(payload)
    if cfg.out_dir is None:
        sys.stdout.write(text)
        return
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / f"{command}_report.json").write_text(text)
    if "csv" in cfg.formats and csv.get("rows") is not None:
        write_csv(cfg.out_dir / f"{command}.csv", csv["header"], csv["rows"])
    if cfg.plots:
        from heavenly_lift import plots
        if command == "verify" and csv.get("residual_series"):
            plots.save_residual_histogram(csv["residual_series"],
                                          cfg.out_dir / "verify_residuals.png")
        if command == "curvature" and csv.get("eigenvalues") is not None:
            plots.save_eigenvalue_plot(csv["eigenvalues"],
                                       cfg.out_dir / "curvature_eigenvalues.png")
        if command == "noninv" and csv.get("spectra"):
            plots.save_singular_values(csv["spectra"],
                                       cfg.out_dir / "noninv_spectrum.png")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.spec)
        if args.points is not None:
            if args.points <= 0:
                raise ConfigError("--points must be positive")
            cfg.points = args.points
        if args.seed is not None:
            cfg.seed = args.seed
        if args.jobs is not None:
            cfg.jobs = max(1, args.jobs)
        if args.out is not None:
            cfg.out_dir = Path(args.out)
        if args.format is not None and args.format not in cfg.formats:
            cfg.formats = tuple(cfg.formats) + (args.format,)
        if args.plots:
            cfg.plots = True
        if getattr(args, "grid", 0):
            cfg.grid = args.grid
        if args.command == "verify":
            code, payload, csv = run_verify(cfg)
        elif args.command == "curvature":
            code, payload, csv = run_curvature(cfg)
        else:
            points_override = args.points
            code, payload, csv = run_noninv(cfg, points_override)
    except (ConfigError, ninv.SamplingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    _emit(payload, csv, cfg, args.command)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
