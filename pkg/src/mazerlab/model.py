"""Core model of a slow two-level atom crossing a single-mode cavity.

Internal units everywhere: hbar = 1 and 2M = 1, so the kinetic operator is
-d^2/dz^2 and every other quantity is an energy in units of the vacuum
coupling strength `lam`.  With this choice the kinetic scale gamma obeys
gamma**2 = lam.

At fixed photon number n the dynamics closes on the two bare states
(excited atom, n photons) and (ground atom, n+1 photons), called the
e- and g-channels below.  The dressed channels are the rotation of that
pair by the mixing angle theta_n.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateThresholdError, InvalidParameterError

__all__ = [
    "ModelParams",
    "make_params",
    "DressedRotation",
    "dressed_angle",
    "dressed_rotate",
    "bare_from_dressed",
    "ChannelWavenumbers",
    "claimed_wavenumbers",
    "true_wavenumbers",
    "sector_hamiltonian",
    "potential_blocks",
    "MesaMode",
    "SampledMode",
    "coupling_off",
    "PhotonSector",
    "photon_distribution",
    "branch_sqrt",
]


def branch_sqrt(x) -> complex:
    """Square root on the fixed branch: negative reals map to +i*sqrt(|x|)."""
    z = complex(x)
    if z.imag == 0.0:
        # normalize -0.0j so the cut is approached from above
        z = complex(z.real, 0.0)
    return cmath.sqrt(z)


# =====================================================================
# parameters
# =====================================================================

@dataclass(frozen=True)
class ModelParams:
    """Constants of the atom-cavity Hamiltonian.

    lam            vacuum Rabi coupling (the energy unit, > 0)
    delta          atom-field detuning omega0 - omega (any sign)
    omega          cavity frequency; bookkeeping only, the common
                   (n + 1/2) * omega offset is dropped everywhere
    cavity_length  mesa mode length L > 0
    """

    lam: float = 1.0
    delta: float = 0.0
    omega: float = 0.0
    cavity_length: float = 1.0

    @property
    def gamma(self) -> float:
        """Kinetic coupling scale; gamma**2 = lam in these units."""
        return math.sqrt(self.lam)

    @property
    def omega0(self) -> float:
        """Atomic transition frequency."""
        return self.omega + self.delta

    def rabi(self, n: int) -> float:
        """n-photon coupling lam * sqrt(n + 1)."""
        return self.lam * math.sqrt(n + 1)

    def omega_n(self, n: int) -> float:
        """Half Rabi splitting Omega_n = sqrt(delta**2/4 + lam**2 (n+1))."""
        return math.hypot(0.5 * self.delta, self.rabi(n))


def make_params(lam: float = 1.0, delta: float = 0.0, omega: float = 0.0,
                cavity_length: float = 1.0) -> ModelParams:
    """Validate and build ModelParams."""
    for name, value in (("lam", lam), ("delta", delta), ("omega", omega),
                        ("cavity_length", cavity_length)):
        if not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    if lam <= 0:
        raise InvalidParameterError(f"lam must be > 0, got {lam!r}")
    if cavity_length <= 0:
        raise InvalidParameterError(
            f"cavity_length must be > 0, got {cavity_length!r}")
    return ModelParams(float(lam), float(delta), float(omega),
                       float(cavity_length))


def _require_sector(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
        raise InvalidParameterError(f"photon number must be an int >= 0, got {n!r}")
    return int(n)


# =====================================================================
# dressed basis
# =====================================================================

@dataclass(frozen=True)
class DressedRotation:
    """Mixing angle of sector n; maps bare (e, g) onto dressed (+, -)."""

    theta: float
    n: int

    @property
    def sin(self) -> float:
        return math.sin(self.theta)

    @property
    def cos(self) -> float:
        return math.cos(self.theta)

    @property
    def sin2(self) -> float:
        return math.sin(2.0 * self.theta)

    @property
    def cos2(self) -> float:
        return math.cos(2.0 * self.theta)


def dressed_angle(n: int, params: ModelParams) -> DressedRotation:
    """Mixing angle theta_n in (0, pi/2).

    tan(theta_n) = lam sqrt(n+1) / (Omega_n - delta/2).  The denominator is
    strictly positive for lam > 0, so atan2 lands on the branch where
    cos(2 theta_n) = -(delta/2) / Omega_n for either sign of the detuning.
    """
    n = _require_sector(n)
    theta = math.atan2(params.rabi(n), params.omega_n(n) - 0.5 * params.delta)
    return DressedRotation(theta, n)


def dressed_rotate(e_component, g_component, rotation: DressedRotation):
    """Bare (e, g) amplitudes to dressed (+, -) amplitudes.

    Accepts scalars or numpy arrays; the rotation is z-independent.
    """
    s, c = rotation.sin, rotation.cos
    plus = s * e_component + c * g_component
    minus = c * e_component - s * g_component
    return plus, minus


def bare_from_dressed(plus_component, minus_component, rotation: DressedRotation):
    """Inverse of dressed_rotate (the rotation matrix is its own inverse)."""
    s, c = rotation.sin, rotation.cos
    e = s * plus_component + c * minus_component
    g = c * plus_component - s * minus_component
    return e, g


# =====================================================================
# channel wavenumbers
# =====================================================================

@dataclass(frozen=True)
class ChannelWavenumbers:
    """Interior/exterior wavenumbers of sector n at incident wavenumber k.

    Two families can be populated:

    * the published interior wavenumbers k_plus/k_minus with their
      impedance combinations upsilon/delta_imp (claimed_wavenumbers), and
    * the energy-conserving set kappa_plus/kappa_minus plus the bare
      ground-channel exterior wavenumber k_g (true_wavenumbers).

    Unpopulated members are None.  Evanescent values sit on the branch
    +i*|.| so e^{ikz} decays to the right.
    """

    k: float
    n: int
    energy: float = 0.0
    k_plus: Optional[complex] = None
    k_minus: Optional[complex] = None
    upsilon_plus: Optional[complex] = None
    upsilon_minus: Optional[complex] = None
    delta_imp_plus: Optional[complex] = None
    delta_imp_minus: Optional[complex] = None
    kappa_plus: Optional[complex] = None
    kappa_minus: Optional[complex] = None
    k_g: Optional[complex] = None
    closed_exit: bool = False


def _impedances(k: float, kappa: complex):
    ups = 0.5 * (kappa / k - k / kappa)
    dim = 0.5 * (kappa / k + k / kappa)
    return ups, dim


def claimed_wavenumbers(k: float, n: int, params: ModelParams) -> ChannelWavenumbers:
    """Published interior wavenumbers k_pm = sqrt(k**2 -+ Omega_n).

    The gamma**2 * sqrt(delta**2/(4 lam**2) + n + 1) combination of the
    original solution collapses to Omega_n in internal units.  Exactly
    vanishing k_pm makes the impedance ratios blow up and is rejected.
    """
    n = _require_sector(n)
    if not (k > 0) or not math.isfinite(k):
        raise InvalidParameterError(f"incident wavenumber must be > 0, got {k!r}")
    omega_n = params.omega_n(n)
    k_plus = branch_sqrt(k * k - omega_n)
    k_minus = branch_sqrt(k * k + omega_n)
    if k_plus == 0 or k_minus == 0:
        raise DegenerateThresholdError(
            f"channel threshold k**2 = -+Omega_n hit exactly at k={k!r}, n={n}")
    up, dp = _impedances(k, k_plus)
    um, dm = _impedances(k, k_minus)
    return ChannelWavenumbers(k=float(k), n=n, energy=k * k,
                              k_plus=k_plus, k_minus=k_minus,
                              upsilon_plus=up, upsilon_minus=um,
                              delta_imp_plus=dp, delta_imp_minus=dm)


def true_wavenumbers(k: float, n: int, params: ModelParams) -> ChannelWavenumbers:
    """Energy-conserving wavenumbers at total energy E = k**2 + delta/2.

    Outside the cavity the g-channel sees the bare offset -delta/2, so
    k_g = sqrt(k**2 + delta); inside, the dressed channels see -+Omega_n,
    so kappa_pm = sqrt(E -+ Omega_n).  A negative k_g**2 closes the exit
    channel; that is flagged, not rejected.
    """
    n = _require_sector(n)
    if not (k > 0) or not math.isfinite(k):
        raise InvalidParameterError(f"incident wavenumber must be > 0, got {k!r}")
    energy = k * k + 0.5 * params.delta
    omega_n = params.omega_n(n)
    return ChannelWavenumbers(
        k=float(k), n=n, energy=energy,
        kappa_plus=branch_sqrt(energy - omega_n),
        kappa_minus=branch_sqrt(energy + omega_n),
        k_g=branch_sqrt(k * k + params.delta),
        closed_exit=bool(k * k + params.delta < 0),
    )


# =====================================================================
# sector Hamiltonian blocks
# =====================================================================

def potential_blocks(f, n: int, params: ModelParams, basis: str):
    """Local 2x2 potential block at mode value(s) f, kinetic part excluded.

    Returns (diag_first, diag_second, coupling) with the channel order
    (e, g) for basis="bare" and (+, -) for basis="dressed".  Works for
    scalar f or an ndarray of mode samples.  The (n + 1/2) * omega shift
    common to both channels is dropped (interaction picture).
    """
    n = _require_sector(n)
    f = np.asarray(f, dtype=float) if isinstance(f, np.ndarray) else f
    half_delta = 0.5 * params.delta
    g = params.rabi(n)
    if basis == "bare":
        coupling = g * f
        diag_e = half_delta * np.ones_like(coupling) if isinstance(coupling, np.ndarray) else half_delta
        return diag_e, -diag_e, coupling
    if basis == "dressed":
        rot = dressed_angle(n, params)
        diag_plus = -rot.cos2 * half_delta + g * f * rot.sin2
        coupling = g * f * rot.cos2 + rot.sin2 * half_delta
        return diag_plus, -diag_plus, coupling
    raise InvalidParameterError(f"basis must be 'bare' or 'dressed', got {basis!r}")


def sector_hamiltonian(z_region: str, n: int, params: ModelParams,
                       basis: str) -> np.ndarray:
    """2x2 potential block of sector n inside or outside the cavity.

    z_region is "inside" (mesa f = 1) or "outside" (f = 0).  In the
    dressed basis the inside block is diag(+Omega_n, -Omega_n) with zero
    coupling; outside it keeps the off-diagonal remnant
    lam sqrt(n+1) sin(2 theta_n) * delta/2 / ... that spoils separability
    off resonance.
    """
    if z_region == "inside":
        f = 1.0
    elif z_region == "outside":
        f = 0.0
    else:
        raise InvalidParameterError(
            f"z_region must be 'inside' or 'outside', got {z_region!r}")
    d1, d2, c = potential_blocks(f, n, params, basis)
    return np.array([[d1, c], [c, d2]], dtype=complex)


# =====================================================================
# cavity mode functions
# =====================================================================

class MesaMode:
    """Mesa profile: exactly 1 on (0, L), exactly 0 outside.

    Grid nodes that land exactly on 0 or L sample as 1/2; the midpoint
    value keeps the discrete barrier edge centered and the sampling error
    at O(dz**2) instead of O(dz).
    """

    kind = "mesa"

    def __init__(self, length: float):
        if not (length > 0):
            raise InvalidParameterError(f"mode length must be > 0, got {length!r}")
        self.length = float(length)

    def values(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.where((z > 0.0) & (z < self.length), 1.0, 0.0)
        out = np.where((z == 0.0) | (z == self.length), 0.5, out)
        return out

    def __repr__(self):
        return f"MesaMode(length={self.length})"


class SampledMode:
    """Arbitrary nonnegative profile given as a callable f(z)."""

    kind = "sampled"

    def __init__(self, profile: Callable[[np.ndarray], np.ndarray], name: str = "sampled"):
        self.profile = profile
        self.name = name

    def values(self, z) -> np.ndarray:
        out = np.asarray(self.profile(np.asarray(z, dtype=float)), dtype=float)
        if out.size and np.min(out) < 0:
            raise InvalidParameterError("mode function must be nonnegative")
        return out

    def __repr__(self):
        return f"SampledMode({self.name})"


def coupling_off() -> SampledMode:
    """The f = 0 mode: atom and field never talk."""
    return SampledMode(lambda z: np.zeros_like(z), name="off")


# =====================================================================
# photon-number sectors
# =====================================================================

@dataclass(frozen=True)
class PhotonSector:
    """One photon-number sector and its probability weight |D_n|**2."""

    n: int
    weight: float


def photon_distribution(weights) -> tuple:
    """Validate {n: weight} (or iterable of (n, weight)) into sectors.

    Weights must be nonnegative and sum to 1 within 1e-12; the stored
    weights are renormalized by the exact float sum so downstream
    aggregation can rely on sum == 1 at machine precision.
    """
    items = sorted(weights.items()) if isinstance(weights, dict) else sorted(weights)
    if not items:
        raise InvalidParameterError("photon distribution must not be empty")
    total = math.fsum(w for _, w in items)
    sectors = []
    seen = set()
    for n, w in items:
        n = _require_sector(n)
        if n in seen:
            raise InvalidParameterError(f"duplicate photon sector n={n}")
        seen.add(n)
        if not (w >= 0) or not math.isfinite(w):
            raise InvalidParameterError(f"sector weight must be >= 0, got {w!r}")
        sectors.append(PhotonSector(n, w / total))
    if abs(total - 1.0) > 1e-12:
        raise InvalidParameterError(
            f"sector weights must sum to 1 within 1e-12, got {total!r}")
    return tuple(sectors)
