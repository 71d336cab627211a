"""Atomic observables aggregated over photon sectors.

P_e and P_g are channel weights as fractions of the instantaneous norm,
so the inversion W = P_e - P_g of an uncoupled excited atom is exactly 1
at every step regardless of rounding in the norm itself.  With absorbing
boundaries enabled the fractions still sum to one while the norm decays;
the norm series is carried alongside for that case.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridMismatchError, InvalidParameterError
from .solver import Trajectory

__all__ = ["ObservableSeries", "series_from_trajectory", "aggregate_inversion"]


@dataclass(frozen=True)
class ObservableSeries:
    """Time series of sector-averaged atomic populations and inversion."""

    times: np.ndarray
    norm: np.ndarray
    p_e: np.ndarray
    p_g: np.ndarray
    inversion: np.ndarray

    def __post_init__(self):
        n = self.times.size
        for name in ("norm", "p_e", "p_g", "inversion"):
            if getattr(self, name).size != n:
                raise InvalidParameterError(f"series '{name}' length mismatch")

    def rows(self):
        """(t, norm, P_e, P_g, W) tuples, CSV-ready."""
        return zip(self.times.tolist(), self.norm.tolist(), self.p_e.tolist(),
                   self.p_g.tolist(), self.inversion.tolist())


def series_from_trajectory(traj: Trajectory) -> ObservableSeries:
    """Single-sector view of one propagation."""
    return ObservableSeries(times=traj.times, norm=traj.norms, p_e=traj.p_e,
                            p_g=traj.p_g, inversion=traj.inversion)


def aggregate_inversion(trajectories: Sequence[Trajectory],
                        weights: Sequence[float]) -> ObservableSeries:
    """Combine per-sector trajectories with photon-number weights.

    W(t) = sum_n w_n (P_e,n(t) - P_g,n(t)).  All trajectories must share
    one time grid; weights must sum to 1 within 1e-9 and are renormalized
    exactly so a single weight-1 sector reproduces its input bit for bit.
    """
    if len(trajectories) == 0:
        raise InvalidParameterError("no trajectories to aggregate")
    if len(trajectories) != len(weights):
        raise InvalidParameterError(
            f"{len(trajectories)} trajectories but {len(weights)} weights")
    w = [float(x) for x in weights]
    if any(x < 0 for x in w):
        raise InvalidParameterError("sector weights must be non-negative")
    total = math.fsum(w)
    if abs(total - 1.0) > 1e-9:
        raise InvalidParameterError(
            f"sector weights must sum to 1 within 1e-9, got {total!r}")
    w = [x / total for x in w]

    base = trajectories[0].times
    for traj in trajectories[1:]:
        if traj.times.shape != base.shape or not np.array_equal(traj.times, base):
            raise GridMismatchError("trajectories do not share a time grid")

    def mix(attr: str) -> np.ndarray:
        acc = w[0] * getattr(trajectories[0], attr)
        for weight, traj in zip(w[1:], trajectories[1:]):
            acc = acc + weight * getattr(traj, attr)
        return acc

    p_e = mix("p_e")
    p_g = mix("p_g")
    return ObservableSeries(times=base.copy(), norm=mix("norms"),
                            p_e=p_e, p_g=p_g, inversion=p_e - p_g)
