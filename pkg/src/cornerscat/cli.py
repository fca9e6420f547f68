"""Command-line entry point.

Subcommands::

    cornerscat certify  --m-min M --m-max M [--pairs LIST] [--out DIR]
    cornerscat forward   CONFIG.json
    cornerscat invert    CONFIG.json
    cornerscat landscape CONFIG.json
    cornerscat gap       CONFIG.json

Every run is driven either by flags (certify) or by one self-describing
JSON config, writes its outputs into a per-run directory, and is fully
deterministic given the config; the only varying field is an ISO-8601
timestamp inside JSON sidecars.

Exit codes: 0 success, 1 domain failure (refuted certificate,
non-convergent inversion, solver failure), 2 usage or config error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from .corner_certifier import (
    BadOrder,
    DegeneratePair,
    WavenumberPair,
    certify_vanishing,
)
from .exact_linalg import as_rational
from .geometry import Disk, Medium, PlaneWave, Rectangle
from .inverse_recovery import (
    MeasurementSetup,
    OptimizerConfig,
    RectangleParams,
    canonicalize,
    far_field_gap,
    invert,
    landscape,
    synthesize_measurement,
)
from .scatter_forward import (
    FarFieldPattern,
    SingularSystem,
    discretize,
    disk_series_solution,
    evaluate_far,
    helmholtz_residual,
    TooCloseToBoundary,
    self_convergence_estimate,
    solve_transmission,
    transmission_residuals,
)

__all__ = ["main"]


class ConfigError(Exception):
    """Config field violates its contract; `path` names the bad field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"config error at {path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# Config parsing helpers
# ---------------------------------------------------------------------------


def _req(cfg: dict, path: str, key: str, kind=None):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}", "missing required field")
    v = cfg[key]
    if kind is not None and not isinstance(v, kind):
        names = kind if isinstance(kind, tuple) else (kind,)
        raise ConfigError(
            f"{path}.{key}",
            f"expected {'/'.join(k.__name__ for k in names)},"
            f" got {type(v).__name__}",
        )
    return v


def _num(cfg: dict, path: str, key: str, default=None, positive=False):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {v}")
    return float(v)


def _parse_medium(cfg: dict, path: str) -> Medium:
    block = _req(cfg, path, "medium", dict)
    kappa = _num(block, f"{path}.medium", "kappa", positive=True)
    q0 = _num(block, f"{path}.medium", "q0", positive=True)
    return Medium(kappa=kappa, q0=q0)


def _parse_wave(cfg: dict, path: str) -> PlaneWave:
    block = _req(cfg, path, "wave", dict)
    if "angle" in block:
        return PlaneWave.from_angle(_num(block, f"{path}.wave", "angle"))
    if "direction" in block:
        d = block["direction"]
        if not (isinstance(d, list) and len(d) == 2):
            raise ConfigError(f"{path}.wave.direction", "expected [dx, dy]")
        try:
            return PlaneWave((float(d[0]), float(d[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}.wave.direction", str(exc)) from exc
    raise ConfigError(f"{path}.wave", "need either 'angle' or 'direction'")


def _parse_rect_params(block: dict, path: str) -> RectangleParams:
    try:
        return RectangleParams(
            c1=_num(block, path, "c1", default=0.0),
            c2=_num(block, path, "c2", default=0.0),
            a=_num(block, path, "a", positive=True),
            b=_num(block, path, "b", positive=True),
            phi=_num(block, path, "phi", default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_geometry(cfg: dict, path: str):
    block = _req(cfg, path, "geometry", dict)
    kind = _req(block, f"{path}.geometry", "kind", str)
    gp = f"{path}.geometry"
    if kind == "rectangle":
        center = block.get("center", [0.0, 0.0])
        if not (isinstance(center, list) and len(center) == 2):
            raise ConfigError(f"{gp}.center", "expected [x, y]")
        try:
            return Rectangle(
                (float(center[0]), float(center[1])),
                _num(block, gp, "half_width", positive=True),
                _num(block, gp, "half_height", positive=True),
                rotation=_num(block, gp, "rotation", default=0.0),
            )
        except ValueError as exc:
            raise ConfigError(gp, str(exc)) from exc
    if kind == "disk":
        center = block.get("center", [0.0, 0.0])
        if not (isinstance(center, list) and len(center) == 2):
            raise ConfigError(f"{gp}.center", "expected [x, y]")
        try:
            return Disk(
                (float(center[0]), float(center[1])),
                _num(block, gp, "radius", positive=True),
            )
        except ValueError as exc:
            raise ConfigError(gp, str(exc)) from exc
    raise ConfigError(f"{gp}.kind", f"unknown geometry kind {kind!r}")


def _parse_setup(cfg: dict, path: str) -> MeasurementSetup:
    try:
        return MeasurementSetup(
            medium=_parse_medium(cfg, path),
            wave=_parse_wave(cfg, path),
            n_directions=int(_num(cfg, path, "n_directions", default=64)),
            noise_level=_num(cfg, path, "noise_level", default=0.0),
            seed=int(_num(cfg, path, "seed", default=0)),
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _load_config(config_path: str) -> dict:
    p = Path(config_path)
    if not p.exists():
        raise ConfigError(config_path, "config file not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            config_path, f"malformed JSON at line {exc.lineno}, column {exc.colno}"
        ) from exc


def _out_dir(cfg: dict, default_tag: str) -> Path:
    block = cfg.get("output", {})
    if not isinstance(block, dict):
        raise ConfigError("output", "expected an object")
    base = Path(block.get("dir", "runs"))
    tag = block.get("tag", default_tag)
    out = base / str(tag)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _farfield_csv(pattern: FarFieldPattern) -> str:
    lines = ["theta,re,im"]
    for th, v in zip(pattern.directions, pattern.values):
        lines.append(f"{th:.17g},{v.real:.17g},{v.imag:.17g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

_DEFAULT_PAIR_SPEC = "1,2,2,3,3,5,7/2,1/3,5/7,9/2"


def _parse_pairs(spec: str):
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    if len(parts) % 2 != 0:
        raise ConfigError("--pairs", "expected an even number of rationals")
    pairs = []
    for i in range(0, len(parts), 2):
        try:
            q1, q2 = as_rational(parts[i]), as_rational(parts[i + 1])
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError("--pairs", f"bad rational {parts[i]!r}: {exc}") from exc
        try:
            pair = WavenumberPair.of(q1, q2)
            pair.validate()
        except DegeneratePair as exc:
            raise ConfigError("--pairs", str(exc)) from exc
        pairs.append(pair)
    return pairs


def cmd_certify(args) -> int:
    if args.m_min < 6:
        print("error: --m-min must be at least 6", file=sys.stderr)
        return 2
    if args.m_max < args.m_min:
        print("error: --m-max must be >= --m-min", file=sys.stderr)
        return 2
    try:
        pairs = _parse_pairs(args.pairs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    all_ok = True
    print(f"{'M':>4}  {'rank':>6}  {'nullity':>7}  verdict")
    for m in range(args.m_min, args.m_max + 1):
        report = certify_vanishing(m, pairs=pairs)
        (out / f"certificate_M{m}.json").write_text(report.to_json())
        print(f"{m:>4}  {report.rank:>6}  {report.nullity:>7}  {report.verdict}")
        if report.verdict != "certified":
            all_ok = False
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------


def cmd_forward(args) -> int:
    cfg = _load_config(args.config)
    geom = _parse_geometry(cfg, "forward")
    medium = _parse_medium(cfg, "forward")
    wave = _parse_wave(cfg, "forward")
    n = int(_num(cfg, "forward", "n_per_side", default=128, positive=True))
    grading_p = int(_num(cfg, "forward", "grading_p", default=4, positive=True))
    n_dir = int(_num(cfg, "forward", "n_directions", default=64, positive=True))
    out = _out_dir(cfg, "forward")

    disc = discretize(geom, n, grading_p=grading_p)
    try:
        sol = solve_transmission(geom, medium, wave, disc)
    except SingularSystem as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    far = evaluate_far(sol, n_dir)
    (out / "farfield.csv").write_text(_farfield_csv(far))

    if medium.q0 == 1.0:
        print("warning: q0 = 1 means no contrast; far field is identically zero")

    diagnostics = {"n_nodes": disc.n_nodes}
    if medium.q0 != 1.0:
        try:
            res = transmission_residuals(sol)
        except TooCloseToBoundary:
            # probe annulus does not fit between the near-evaluation guard
            # radius and the corner clearance on a very coarse mesh
            print("warning: mesh too coarse for interface residual probes")
        else:
            diagnostics["transmission_residual_value"] = float(res["value"])
            diagnostics["transmission_residual_derivative"] = float(
                res["derivative"]
            )
    sidecar = {
        "timestamp": _timestamp(),
        "geometry": cfg["geometry"],
        "medium": {"kappa": medium.kappa, "q0": medium.q0},
        "wave": {"d": list(wave.d)},
        "n_directions": n_dir,
        "diagnostics": diagnostics,
    }
    (out / "forward_meta.json").write_text(json.dumps(sidecar, indent=2))

    if cfg.get("oracle", False):
        if not isinstance(geom, Disk):
            raise ConfigError("oracle", "series oracle only applies to disks")
        oracle = disk_series_solution(
            medium,
            geom.radius,
            wave,
            n_terms=int(_num(cfg, "forward", "oracle_terms", default=60)),
            n_directions=n_dir,
            center=geom.center,
        )
        (out / "oracle.csv").write_text(_farfield_csv(oracle))
        print(f"oracle relative L2 discrepancy: {far.rel_l2_distance(oracle):.3e}")
    print(f"wrote {out / 'farfield.csv'}")
    return 0


# ---------------------------------------------------------------------------
# invert
# ---------------------------------------------------------------------------


def _read_farfield_csv(path: Path) -> FarFieldPattern:
    lines = path.read_text().strip().split("\n")
    if lines[0].strip() != "theta,re,im":
        raise ConfigError(str(path), "expected header 'theta,re,im'")
    th, vals = [], []
    for ln in lines[1:]:
        t, re_, im_ = ln.split(",")
        th.append(float(t))
        vals.append(complex(float(re_), float(im_)))
    return FarFieldPattern(np.array(th), np.array(vals))


def _parse_opt_config(cfg: dict) -> OptimizerConfig:
    block = cfg.get("optimizer", {})
    if not isinstance(block, dict):
        raise ConfigError("optimizer", "expected an object")
    kwargs = {}
    for key in (
        "probe_n_per_side",
        "coarse_n_per_side",
        "fine_n_per_side",
        "coarse_maxiter",
        "fine_maxiter",
        "n_refine",
    ):
        if key in block:
            kwargs[key] = int(_num(block, "optimizer", key, positive=True))
    if "tol" in block:
        kwargs["tol"] = _num(block, "optimizer", "tol", positive=True)
    if "grid_shape" in block:
        gs = block["grid_shape"]
        if not (isinstance(gs, list) and len(gs) == 5):
            raise ConfigError("optimizer.grid_shape", "expected 5 integers")
        kwargs["grid_shape"] = tuple(int(x) for x in gs)
    if "center_bounds" in block:
        cb = block["center_bounds"]
        try:
            kwargs["center_bounds"] = (
                (float(cb[0][0]), float(cb[0][1])),
                (float(cb[1][0]), float(cb[1][1])),
            )
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError(
                "optimizer.center_bounds", "expected [[lo,hi],[lo,hi]]"
            ) from exc
    if "halfsize_bounds" in block:
        hb = block["halfsize_bounds"]
        try:
            kwargs["halfsize_bounds"] = (float(hb[0]), float(hb[1]))
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError("optimizer.halfsize_bounds", "expected [lo, hi]") from exc
    if "estimate_q0" in block:
        if not isinstance(block["estimate_q0"], bool):
            raise ConfigError("optimizer.estimate_q0", "expected true or false")
        kwargs["estimate_q0"] = block["estimate_q0"]
    if "q0_bounds" in block:
        qb = block["q0_bounds"]
        try:
            kwargs["q0_bounds"] = (float(qb[0]), float(qb[1]))
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError("optimizer.q0_bounds", "expected [lo, hi]") from exc
    return OptimizerConfig(**kwargs)


def cmd_invert(args) -> int:
    cfg = _load_config(args.config)
    setup = _parse_setup(cfg, "invert")
    out = _out_dir(cfg, "invert")
    truth = None
    if "truth" in cfg:
        truth = _parse_rect_params(_req(cfg, "invert", "truth", dict), "invert.truth")
        g = synthesize_measurement(truth, setup)
    elif "data_csv" in cfg:
        g = _read_farfield_csv(Path(cfg["data_csv"]))
        if len(g.values) != setup.n_directions:
            raise ConfigError(
                "invert.data_csv",
                f"CSV has {len(g.values)} rows, config expects {setup.n_directions}",
            )
    else:
        raise ConfigError("invert", "need either 'truth' or 'data_csv'")

    result = invert(g, setup, _parse_opt_config(cfg))
    payload = result.to_json_dict()
    payload["timestamp"] = _timestamp()
    if truth is not None:
        ct = canonicalize(truth)
        rel = {}
        print(f"{'param':>6}  {'true':>12}  {'recovered':>12}  {'rel err':>10}")
        for name in ("c1", "c2", "a", "b", "phi"):
            tv = getattr(ct, name)
            rv = getattr(result.theta_hat, name)
            e = abs(rv - tv) / max(abs(tv), 1e-12)
            rel[name] = e
            print(f"{name:>6}  {tv:>12.6f}  {rv:>12.6f}  {e:>10.2e}")
        payload["truth"] = ct.to_json_dict()
        payload["relative_errors"] = rel
    (out / "inversion.json").write_text(json.dumps(payload, indent=2))
    print(f"misfit {result.misfit:.3e} after {result.n_forward_solves} solves")
    if not result.converged:
        print("warning: optimizer did not converge; partial result written")
        return 1
    return 0


# ---------------------------------------------------------------------------
# landscape
# ---------------------------------------------------------------------------


def _parse_axis(cfg: dict, key: str):
    block = _req(cfg, "landscape", key, dict)
    name = _req(block, f"landscape.{key}", "name", str)
    lo = _num(block, f"landscape.{key}", "min")
    hi = _num(block, f"landscape.{key}", "max")
    n = int(_num(block, f"landscape.{key}", "n", positive=True))
    if n < 2:
        raise ConfigError(f"landscape.{key}.n", "need at least 2 grid values")
    if hi <= lo:
        raise ConfigError(f"landscape.{key}", "max must exceed min")
    return name, np.linspace(lo, hi, n)


def cmd_landscape(args) -> int:
    cfg = _load_config(args.config)
    setup = _parse_setup(cfg, "landscape")
    truth = _parse_rect_params(
        _req(cfg, "landscape", "truth", dict), "landscape.truth"
    )
    axis1 = _parse_axis(cfg, "axis1")
    axis2 = _parse_axis(cfg, "axis2")
    n = int(_num(cfg, "landscape", "n_per_side", default=32, positive=True))
    out = _out_dir(cfg, "landscape")
    g = synthesize_measurement(truth, setup)
    try:
        grid = landscape(g, setup, axis1, axis2, truth, n_per_side=n)
    except ValueError as exc:
        raise ConfigError("landscape", str(exc)) from exc
    (out / "landscape.csv").write_text(grid.to_csv())
    sidecar = {
        "timestamp": _timestamp(),
        "axis1": {"name": axis1[0], "values": [float(v) for v in axis1[1]]},
        "axis2": {"name": axis2[0], "values": [float(v) for v in axis2[1]]},
        "truth": canonicalize(truth).to_json_dict(),
    }
    (out / "landscape_meta.json").write_text(json.dumps(sidecar, indent=2))
    print(f"wrote {out / 'landscape.csv'} ({grid.misfit_values.size} rows)")
    return 0


# ---------------------------------------------------------------------------
# gap
# ---------------------------------------------------------------------------


def cmd_gap(args) -> int:
    cfg = _load_config(args.config)
    setup = _parse_setup(cfg, "gap")
    t1 = _parse_rect_params(_req(cfg, "gap", "rect1", dict), "gap.rect1")
    t2 = _parse_rect_params(_req(cfg, "gap", "rect2", dict), "gap.rect2")
    n = int(_num(cfg, "gap", "n_per_side", default=64, positive=True))
    out = _out_dir(cfg, "gap")
    gap = far_field_gap(t1, t2, setup, n_per_side=n)
    if "threshold" in cfg:
        threshold = _num(cfg, "gap", "threshold", positive=True)
    else:
        # noise floor: the solver's own far-field self-convergence estimate
        threshold = self_convergence_estimate(
            canonicalize(t1).to_rectangle(), setup.medium, setup.wave, n
        )
    payload = {
        "timestamp": _timestamp(),
        "gap": gap,
        "threshold": threshold,
        "exceeds": bool(gap > threshold),
    }
    (out / "gap.json").write_text(json.dumps(payload, indent=2))
    print(f"gap {gap:.6e}  threshold {threshold:.6e}  exceeds={payload['exceeds']}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cornerscat",
        description="Rectangular-scatterer uniqueness experiments: exact "
        "corner certification, transmission forward solves, and "
        "single-wave shape recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="run the exact vanishing certification")
    cert.add_argument("--m-min", type=int, required=True)
    cert.add_argument("--m-max", type=int, required=True)
    cert.add_argument(
        "--pairs",
        default=_DEFAULT_PAIR_SPEC,
        help="flat comma list of rationals, consecutive entries pairing up",
    )
    cert.add_argument("--out", default="runs/certify")
    cert.set_defaults(func=cmd_certify)

    for name, func in (
        ("forward", cmd_forward),
        ("invert", cmd_invert),
        ("landscape", cmd_landscape),
        ("gap", cmd_gap),
    ):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the JSON run config")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BadOrder, DegeneratePair) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SingularSystem as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
