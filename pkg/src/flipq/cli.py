"""Command line interface: verify | scan | match | report.

Outputs are machine readable (JSON reports, CSV scan tables) and byte
deterministic for a fixed config and seed: randomness comes from spawned
seed sequences keyed by row index, and rows are emitted in sorted order,
so --threads never changes the bytes.  Exit codes: 0 pass, 1 check
failure, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config_io import RunConfig, load_run_config, parse_vector, phi_from_config
from .core import BasePoint, FiberPoint
from .errors import ConfigInvalid, ConfigParse, FlipQError
from .perturbation import (
    matching_map,
    rest_bound_scan,
    solve_rho,
    solve_rho_blowup,
    verify_conditions,
)
from .blowup import BlowupPoint
from .quotient import FiberType, level_rho_batch, moment_value, segre_point
from .sampling import complex_gaussian, random_domain_batch, random_unit_direction

SCAN_RESIDUAL_TOL = 1e-12
MOMENT_RESIDUAL_TOL = 1e-12
ORBIT_DEVIATION_TOL = 1e-11
BLOWUP_R_GRID = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class ScanRow:
    theta: float
    t: float
    fiber_type: str
    n_stable_samples: int
    mean_level_residual: float


def _c2j(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _v2j(v) -> list[list[float]]:
    return [_c2j(z) for z in np.asarray(v)]


def _fiber_to_json(p: FiberPoint) -> dict:
    return {
        "theta": float(p.base.theta),
        "t": float(p.base.t),
        "y_prime": _v2j(p.y_prime),
        "y_second": _v2j(p.y_second),
    }


def _dump(doc, out_path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def run_verify(run_cfg: RunConfig, seed: int, samples: int, fd_step: float, tol: float,
               theta_grid: int = 64) -> tuple[dict, bool]:
    cfg = run_cfg.model
    phi = phi_from_config(run_cfg)
    report = verify_conditions(cfg, phi, n_theta=theta_grid, fd_step=fd_step, tol=tol)
    rest = rest_bound_scan(cfg, n_samples=samples, seed=seed)
    doc = {
        "config_digest": run_cfg.digest,
        "seed": seed,
        "condition_report": {
            "p1_ok": report.p1_ok,
            "p2_ok": report.p2_ok,
            "p3_ok": report.p3_ok,
            "worst_p1": report.worst_p1,
            "worst_p2": report.worst_p2,
            "worst_p3": report.worst_p3,
            "samples": report.samples,
        },
        "rest_bound": {
            "empirical_M": rest.empirical_M,
            "max_ratio_point": _fiber_to_json(rest.max_ratio_point),
            "samples": rest.samples,
            "margin_value": rest.margin_value,
            "margin_bound": rest.margin_bound,
            "margin_ok": rest.margin_ok,
        },
        "pass": report.all_ok,
    }
    return doc, report.all_ok


def _scan_row(cfg, theta: float, t: float, k: int, row_seed) -> ScanRow:
    ftype = FiberType.QPrime if t < 0 else (FiberType.QSecond if t > 0 else FiberType.QZero)
    if k == 0:
        return ScanRow(theta, t, ftype.value, 0, 0.0)
    rng = np.random.default_rng(row_seed)
    y_prime = complex_gaussian(rng, (k, cfg.r_prime))
    y_second = complex_gaussian(rng, (k, cfg.r_second))
    thetas = np.full(k, theta)
    ts = np.full(k, t)
    rho = level_rho_batch(cfg, thetas, ts, y_prime, y_second)
    scaled_p = y_prime * rho[:, None]
    scaled_s = y_second / rho[:, None]
    from .quotient import moment_value_batch

    resid = np.abs(moment_value_batch(cfg, thetas, ts, scaled_p, scaled_s))
    return ScanRow(theta, t, ftype.value, k, float(resid.mean()))


def run_scan(run_cfg: RunConfig, seed: int, theta_steps: int, t_steps: int,
             samples: int, threads: int = 1) -> list[ScanRow]:
    cfg = run_cfg.model
    thetas = np.linspace(0.0, 2.0 * np.pi, theta_steps, endpoint=False)
    ts = np.linspace(-cfg.epsilon, cfg.epsilon, t_steps + 2)[1:-1]
    # a symmetric grid is meant to hit the wall exactly
    ts[np.abs(ts) < 1e-15] = 0.0
    grid = [(float(th), float(t)) for th in thetas for t in ts]
    seeds = np.random.SeedSequence(seed).spawn(len(grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda i: _scan_row(cfg, grid[i][0], grid[i][1], samples, seeds[i]),
                range(len(grid)),
            ))
    else:
        rows = [_scan_row(cfg, th, t, samples, s) for (th, t), s in zip(grid, seeds)]
    rows.sort(key=lambda r: (r.theta, r.t))
    return rows


def _scan_csv(rows: list[ScanRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "t", "fiber_type", "n_stable_samples", "mean_level_residual"])
    for r in rows:
        writer.writerow([r.theta, r.t, r.fiber_type, r.n_stable_samples, r.mean_level_residual])
    return buf.getvalue()


def _match_point(cfg, p: FiberPoint) -> dict:
    try:
        sol = solve_rho(cfg, p)
        matched = matching_map(cfg, p)
    except FlipQError as e:
        return {
            "input": _fiber_to_json(p),
            "error": type(e).__name__,
            "message": str(e),
        }
    resid = abs(moment_value(cfg, matched))
    deviation = float(np.abs(segre_point(p) - segre_point(matched)).max())
    return {
        "input": _fiber_to_json(p),
        "rho": sol.rho,
        "newton_iterations": sol.iterations,
        "matched": _fiber_to_json(matched),
        "moment_residual": resid,
        "orbit_deviation": deviation,
    }


def _blowup_ray(cfg, ray_seed) -> dict:
    rng = np.random.default_rng(ray_seed)
    theta = float(rng.uniform(0.0, 2.0 * np.pi))
    w_prime, w_second = random_unit_direction(rng, cfg, theta)
    base = BasePoint(theta, 0.0)
    residuals = []
    for r in BLOWUP_R_GRID:
        bp = BlowupPoint(r=r, w_prime=w_prime, w_second=w_second, base=base)
        sol = solve_rho_blowup(cfg, bp)
        residuals.append(abs(sol.rho - 1.0))
    factors = [
        residuals[i] / residuals[i + 1] if residuals[i + 1] > 0 else None
        for i in range(len(residuals) - 1)
    ]
    finite = [x for x in residuals if x > 0]
    slope = None
    if len(finite) == len(residuals):
        slope = float(np.polyfit(np.log(BLOWUP_R_GRID), np.log(residuals), 1)[0])
    return {
        "theta": theta,
        "w_prime": _v2j(w_prime),
        "w_second": _v2j(w_second),
        "r_grid": list(BLOWUP_R_GRID),
        "rho_deviation": residuals,
        "decay_factors": factors,
        "slope": slope,
    }


def run_match(run_cfg: RunConfig, seed: int, points: list[FiberPoint],
              random_n: int, blowup_rays: int) -> dict:
    cfg = run_cfg.model
    entries = [_match_point(cfg, p) for p in points]
    if random_n > 0:
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        thetas, y_prime, y_second = random_domain_batch(rng, cfg, random_n)
        for i in range(random_n):
            p = FiberPoint(base=BasePoint(float(thetas[i]), 0.0),
                           y_prime=y_prime[i], y_second=y_second[i])
            entries.append(_match_point(cfg, p))
    rays = []
    if blowup_rays > 0:
        ray_seeds = np.random.SeedSequence(seed + 1).spawn(blowup_rays)
        rays = [_blowup_ray(cfg, s) for s in ray_seeds]
    ok_entries = [e for e in entries if "error" not in e]
    stats = {
        "max_moment_residual": max((e["moment_residual"] for e in ok_entries), default=None),
        "max_orbit_deviation": max((e["orbit_deviation"] for e in ok_entries), default=None),
        "rho_boundary_slope": _median_slope(rays),
        "n_points": len(entries),
        "n_errors": len(entries) - len(ok_entries),
    }
    return {
        "config_digest": run_cfg.digest,
        "seed": seed,
        "points": entries,
        "blowup_rays": rays,
        "matching_stats": stats,
    }


def _median_slope(rays: list[dict]):
    slopes = [r["slope"] for r in rays if r.get("slope") is not None]
    return float(np.median(slopes)) if slopes else None


def run_report(run_cfg: RunConfig, seed: int, args) -> tuple[dict, bool]:
    verify_doc, conditions_ok = run_verify(
        run_cfg, seed, args.samples, args.fd_step, args.tol, theta_grid=args.theta_grid
    )
    rows = run_scan(run_cfg, seed, args.theta_steps, args.t_steps, args.scan_samples, args.threads)
    match_doc = run_match(run_cfg, seed, [], args.match_samples, args.blowup_rays)
    stats = match_doc["matching_stats"]
    scan_ok = all(r.mean_level_residual <= SCAN_RESIDUAL_TOL for r in rows)
    match_ok = (
        stats["n_errors"] == 0
        and stats["max_moment_residual"] is not None
        and stats["max_moment_residual"] <= MOMENT_RESIDUAL_TOL
        and stats["max_orbit_deviation"] <= ORBIT_DEVIATION_TOL
    )
    passed = bool(conditions_ok and scan_ok and match_ok)
    doc = {
        "config_digest": run_cfg.digest,
        "seed": seed,
        "condition_report": verify_doc["condition_report"],
        "rest_bound": verify_doc["rest_bound"],
        "scan": [vars(r) for r in rows],
        "matching_stats": stats,
        "checks": {
            "conditions_ok": bool(conditions_ok),
            "scan_ok": bool(scan_ok),
            "match_ok": bool(match_ok),
        },
        "pass": passed,
    }
    return doc, passed


def _parse_point(text: str) -> FiberPoint:
    try:
        doc = json.loads(text)
        theta = float(doc.get("theta", 0.0))
        y_prime = parse_vector(doc["y_prime"])
        y_second = parse_vector(doc["y_second"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigParse(f"bad --point payload: {e}") from e
    return FiberPoint(base=BasePoint(theta, 0.0), y_prime=y_prime, y_second=y_second)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flipq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="write JSON here instead of stdout")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")

    p = sub.add_parser("verify", help="check the normalization conditions and the rest bound")
    common(p)
    p.add_argument("--samples", type=int, default=2000, help="rest-bound scan sample count")
    p.add_argument("--fd-step", type=float, default=1e-3, dest="fd_step")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--theta-grid", type=int, default=64, dest="theta_grid")

    p = sub.add_parser("scan", help="tabulate fiber types and level residuals over the base")
    common(p)
    p.add_argument("--theta-steps", type=int, default=8, dest="theta_steps")
    p.add_argument("--t-steps", type=int, default=5, dest="t_steps")
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--csv", default=None, help="also write the table as CSV here")

    p = sub.add_parser("match", help="rescale points onto the moment level set")
    common(p)
    p.add_argument("--point", action="append", default=[],
                   help='JSON fiber vector {"theta": .., "y_prime": [..], "y_second": [..]}')
    p.add_argument("--random", type=int, default=0, help="additionally match N seeded random points")
    p.add_argument("--blowup-rays", type=int, default=0, dest="blowup_rays",
                   help="sample R boundary directions and tabulate rho decay")

    p = sub.add_parser("report", help="full run: verify + scan + match statistics")
    common(p)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--fd-step", type=float, default=1e-3, dest="fd_step")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--theta-grid", type=int, default=64, dest="theta_grid")
    p.add_argument("--theta-steps", type=int, default=8, dest="theta_steps")
    p.add_argument("--t-steps", type=int, default=5, dest="t_steps")
    p.add_argument("--scan-samples", type=int, default=32, dest="scan_samples")
    p.add_argument("--match-samples", type=int, default=200, dest="match_samples")
    p.add_argument("--blowup-rays", type=int, default=8, dest="blowup_rays")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run_cfg = load_run_config(args.config)
        seed = args.seed if args.seed is not None else run_cfg.seed

        if args.command == "verify":
            doc, ok = run_verify(run_cfg, seed, args.samples, args.fd_step, args.tol,
                                 theta_grid=args.theta_grid)
            _dump(doc, args.out)
            return 0 if ok else 1

        if args.command == "scan":
            rows = run_scan(run_cfg, seed, args.theta_steps, args.t_steps,
                            args.samples, args.threads)
            doc = {
                "config_digest": run_cfg.digest,
                "seed": seed,
                "scan": [vars(r) for r in rows],
            }
            if args.csv:
                with open(args.csv, "w") as f:
                    f.write(_scan_csv(rows))
            _dump(doc, args.out)
            ok = all(r.mean_level_residual <= SCAN_RESIDUAL_TOL for r in rows)
            return 0 if ok else 1

        if args.command == "match":
            points = [_parse_point(text) for text in args.point]
            doc = run_match(run_cfg, seed, points, args.random, args.blowup_rays)
            _dump(doc, args.out)
            return 0

        doc, ok = run_report(run_cfg, seed, args)
        _dump(doc, args.out)
        return 0 if ok else 1

    except ConfigParse as e:
        print(f"config parse error: {e}", file=sys.stderr)
        return 2
    except ConfigInvalid as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return 2


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
