"""Spherical-blowup coordinates (r, w) at the zero section.

Off the zero section a fiber vector y factors as y = r w with r its metric
norm and w on the unit sphere of the fiber metric at theta.  The scaling
action extends to these coordinates and preserves the boundary r = 0; over
the wall t = 0 the boundary carries projective coordinates [w' : conj(w'')],
conjugation making both blocks weight +1 under the residual circle action.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BasePoint, FiberPoint, ModelConfig, fiber_norms, metric_at, norm_sq
from .errors import ConfigInvalid, NotOnBoundary, OnCenter, ZeroScalar

UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BlowupPoint:
    """Polar fiber coordinates: radius r >= 0 and unit direction (w', w'')."""

    r: float
    w_prime: np.ndarray
    w_second: np.ndarray
    base: BasePoint

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "w_prime", _frozen_vector(self.w_prime))
        object.__setattr__(self, "w_second", _frozen_vector(self.w_second))


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """Pivot-normalized representative of [w' : conj(w'')] over the wall."""

    homog: np.ndarray
    base: BasePoint

    def __post_init__(self):
        object.__setattr__(self, "homog", _frozen_vector(self.homog))


def _frozen_vector(v) -> np.ndarray:
    arr = np.array(v, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


def make_blowup_point(cfg, r, w_prime, w_second, base) -> BlowupPoint:
    """Construct with the unit-sphere invariant checked at base theta."""
    bp = BlowupPoint(r=float(r), w_prime=np.asarray(w_prime, dtype=complex),
                     w_second=np.asarray(w_second, dtype=complex), base=base)
    if bp.r < 0:
        raise ConfigInvalid(f"blowup radius must be >= 0, got {bp.r}")
    G1, G2 = metric_at(cfg, base.theta)
    total = norm_sq(G1, bp.w_prime) + norm_sq(G2, bp.w_second)
    if abs(total - 1.0) > UNIT_NORM_TOL:
        raise ConfigInvalid(f"direction norm^2 = {total} is not 1 to {UNIT_NORM_TOL}")
    return bp


def to_blowup(cfg: ModelConfig, p: FiberPoint) -> BlowupPoint:
    """Polar decomposition y = r w off the zero section."""
    ap, app = fiber_norms(cfg, p)
    r = float(np.sqrt(ap + app))
    if r == 0.0:
        raise OnCenter("polar coordinates are undefined on the zero section")
    return BlowupPoint(r=r, w_prime=p.y_prime / r, w_second=p.y_second / r, base=p.base)


def from_blowup(bp: BlowupPoint) -> FiberPoint:
    """Inverse parameterization y = r w; r = 0 blows down to the zero section."""
    return FiberPoint(base=bp.base, y_prime=bp.r * bp.w_prime, y_second=bp.r * bp.w_second)


def cstar_act_blowup(cfg: ModelConfig, zeta: complex, bp: BlowupPoint) -> BlowupPoint:
    """Extended scaling action on polar coordinates.

    zeta . (r, w) = (r u, (zeta w', zeta^-1 w'') / u)  with
    u = (|zeta|^2 |w'|^2 + |zeta|^-2 |w''|^2)^(1/2); keeps |w| = 1 and
    preserves the boundary r = 0.
    """
    zeta = complex(zeta)
    if zeta == 0:
        raise ZeroScalar("the scaling action requires zeta != 0")
    G1, G2 = metric_at(cfg, bp.base.theta)
    m2 = abs(zeta) ** 2
    u = np.sqrt(m2 * norm_sq(G1, bp.w_prime) + norm_sq(G2, bp.w_second) / m2)
    return BlowupPoint(
        r=bp.r * u,
        w_prime=(zeta / u) * bp.w_prime,
        w_second=bp.w_second / (zeta * u),
        base=bp.base,
    )


def boundary_coords(cfg: ModelConfig, bp: BlowupPoint) -> BoundaryPoint:
    """Projective boundary coordinates [w' : conj(w'')] at r = 0, t = 0."""
    if bp.r != 0.0 or bp.base.t != 0.0:
        raise NotOnBoundary(f"needs r = 0 and t = 0, got r = {bp.r}, t = {bp.base.t}")
    homog = np.concatenate([bp.w_prime, bp.w_second.conj()])
    k = int(np.argmax(np.abs(homog)))
    return BoundaryPoint(homog=homog / homog[k], base=bp.base)
