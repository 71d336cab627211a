"""The published piecewise-plane-wave solution for the detuned cavity crossing.

The construction scatters the incident excited-atom wave independently in
the two dressed channels: each channel sees a mesa step of height
-+Omega_n with the interior wavenumbers k_pm = sqrt(k**2 -+ Omega_n) and a
source amplitude sin(theta_n).  That recipe solves the decoupled channel
equations exactly for every detuning, but the decoupled equations
themselves only agree with the real coupled dynamics at delta = 0; the
verifier module quantifies the mismatch.

Conventions.  `claimed_coefficients` returns the eight published
amplitudes verbatim.  As printed, the interior and transmitted ones carry
one extra factor e^{-ikL} relative to the reflected one, which would break
continuity at z = 0; the assembled state therefore multiplies interior and
transmitted amplitudes by e^{+ikL} (a per-channel global phase with no
effect on any probability).  The bare-basis view recombines the dressed
channels with the published (+-)/sqrt(2) map.  All exponentials are
factored so deeply evanescent channels never overflow.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import DegenerateThresholdError, InvalidParameterError, OutOfValidityError
from .model import (
    ChannelWavenumbers,
    DressedRotation,
    ModelParams,
    claimed_wavenumbers,
    dressed_angle,
    true_wavenumbers,
)

__all__ = [
    "ClaimedCoefficients",
    "claimed_coefficients",
    "ChannelScattering",
    "per_channel_scattering",
    "PlaneWaveTerm",
    "SourceConvention",
    "ClaimedStationaryState",
    "assemble_claimed_state",
    "resonant_emission_probability",
]

_SQRT_HALF = math.sqrt(0.5)


# =====================================================================
# published coefficients
# =====================================================================

@dataclass(frozen=True)
class ClaimedCoefficients:
    """The eight published amplitudes of one (k, n) scattering solution.

    a_* are the reflected amplitudes, b_* the transmitted ones, and
    alpha_*/beta_* the right-/left-moving interior amplitudes, everything
    quoted exactly as printed (both channels sourced by sin(theta_n),
    interior and transmitted values carrying the extra e^{-ikL}).
    validity is "resonant" at delta = 0 and "claimed-not-physical"
    otherwise: off resonance these numbers solve only the decoupled model.
    """

    k: float
    n: int
    a_plus: complex
    a_minus: complex
    b_plus: complex
    b_minus: complex
    alpha_plus: complex
    alpha_minus: complex
    beta_plus: complex
    beta_minus: complex
    wavenumbers: ChannelWavenumbers
    rotation: DressedRotation
    validity: str


def _channel_pieces(k: float, kappa: complex, length: float):
    """Stable building blocks of one mesa channel with interior wavenumber kappa.

    Returns (eu, e2, inv_denom, upsilon, k_ratio) where eu = e^{i kappa L},
    e2 = eu**2, and inv_denom = 1/[(1 + delta_imp)(1 + rho e2)] with
    rho = (1 - delta_imp)/(1 + delta_imp).  In these factors the channel
    denominator is D = cos(kappa L) - i delta_imp sin(kappa L)
    = (1/2)(1 + delta_imp) e^{-i kappa L} (1 + rho e2), so 1/D = 2 eu inv_denom.
    |eu| <= 1 on the +i branch, hence no overflow however opaque the barrier.
    """
    upsilon = 0.5 * (kappa / k - k / kappa)
    delta_imp = 0.5 * (kappa / k + k / kappa)
    eu = cmath.exp(1j * kappa * length)
    e2 = eu * eu
    rho = (1.0 - delta_imp) / (1.0 + delta_imp)
    inv_denom = 1.0 / ((1.0 + delta_imp) * (1.0 + rho * e2))
    return eu, e2, inv_denom, upsilon, k / kappa


def claimed_coefficients(k: float, n: int, params: ModelParams) -> ClaimedCoefficients:
    """Literal evaluation of the published reflection/transmission/interior set."""
    wn = claimed_wavenumbers(k, n, params)
    rot = dressed_angle(n, params)
    length = params.cavity_length
    source = rot.sin
    phase_in = cmath.exp(-1j * k * length)

    out = {}
    for tag, kappa in (("plus", wn.k_plus), ("minus", wn.k_minus)):
        eu, e2, inv_denom, upsilon, k_ratio = _channel_pieces(k, kappa, length)
        out["a_" + tag] = upsilon * source * (e2 - 1.0) * inv_denom
        out["b_" + tag] = 2.0 * source * phase_in * eu * inv_denom
        out["alpha_" + tag] = (1.0 + k_ratio) * source * phase_in * inv_denom
        out["beta_" + tag] = (1.0 - k_ratio) * source * phase_in * e2 * inv_denom

    validity = "resonant" if params.delta == 0.0 else "claimed-not-physical"
    return ClaimedCoefficients(k=float(k), n=int(n), wavenumbers=wn,
                               rotation=rot, validity=validity, **out)


# =====================================================================
# single-channel scattering amplitudes
# =====================================================================

@dataclass(frozen=True)
class ChannelScattering:
    """Unit-source reflection/transmission of one dressed channel.

    branch selects which interior wavenumber family is used: "claimed"
    takes k_pm = sqrt(k**2 -+ Omega_n); "true" takes the energy-conserving
    kappa_pm = sqrt(k**2 + delta/2 -+ Omega_n).  The two coincide at
    delta = 0.  r and t obey |r|**2 + |t|**2 = 1 for real k.
    """

    k: float
    n: int
    channel: str
    branch: str
    interior_wavenumber: complex
    r: complex
    t: complex
    evanescent: bool


def per_channel_scattering(k: float, channel: str, n: int, params: ModelParams,
                           branch: str = "claimed") -> ChannelScattering:
    """Mesa-step amplitudes r = i Upsilon sin(kappa L)/D, t = e^{-ikL}/D."""
    if channel not in ("+", "-"):
        raise InvalidParameterError(f"channel must be '+' or '-', got {channel!r}")
    if branch == "claimed":
        wn = claimed_wavenumbers(k, n, params)
        kappa = wn.k_plus if channel == "+" else wn.k_minus
    elif branch == "true":
        wn = true_wavenumbers(k, n, params)
        kappa = wn.kappa_plus if channel == "+" else wn.kappa_minus
        if kappa == 0:
            raise DegenerateThresholdError(
                f"interior threshold kappa{channel} = 0 at k={k!r}; "
                "single-channel amplitudes are undefined there")
    else:
        raise InvalidParameterError(f"branch must be 'claimed' or 'true', got {branch!r}")

    length = params.cavity_length
    eu, e2, inv_denom, upsilon, _ = _channel_pieces(k, kappa, length)
    r = upsilon * (e2 - 1.0) * inv_denom
    t = 2.0 * cmath.exp(-1j * k * length) * eu * inv_denom
    return ChannelScattering(k=float(k), n=int(n), channel=channel, branch=branch,
                             interior_wavenumber=kappa, r=r, t=t,
                             evanescent=bool(kappa.real == 0.0))


# =====================================================================
# assembled stationary state
# =====================================================================

@dataclass(frozen=True)
class PlaneWaveTerm:
    """One plane-wave component amp * exp(i q (z - ref)).

    Evanescent terms always pair a decay direction with a reference point
    on the near edge of their region, so the stored amplitude is the
    largest value the term takes there.
    """

    amplitude: complex
    q: complex
    ref: float = 0.0

    def value(self, z):
        return self.amplitude * np.exp(1j * self.q * (np.asarray(z) - self.ref))

    def derivative(self) -> "PlaneWaveTerm":
        return PlaneWaveTerm(1j * self.q * self.amplitude, self.q, self.ref)


RegionTerms = Dict[str, Tuple[PlaneWaveTerm, ...]]

REGIONS = ("left", "inside", "right")


@dataclass(frozen=True)
class SourceConvention:
    """Bookkeeping of the published normalization quirks.

    prefactor        the printed global 1/sqrt(2) in front of the bracket
    source_plus/minus incident amplitude fed to each dressed channel; the
                     published formulas use sin(theta_n) for both, which
                     is why the total outgoing probability drifts from 1
                     off resonance
    alignment_phase  e^{+ikL} applied to interior/transmitted amplitudes
                     so the assembled channels are continuous; pure phase
    incident_bare_e  resulting incident amplitude in the bare e-channel
                     after the (+-)/sqrt(2) recombination, equal to
                     sqrt(2) sin(theta_n) (unity exactly at delta = 0)
    """

    prefactor: float
    source_plus: float
    source_minus: float
    alignment_phase: complex
    incident_bare_e: float


@dataclass(frozen=True)
class ClaimedStationaryState:
    """Piecewise plane-wave state assembled from the published coefficients.

    channels maps "+"/"-" to {region: terms}; bare_view() recombines them
    with the printed (+-)/sqrt(2) map into "e"/"g" term lists.  Both
    dressed channels are continuous with continuous slope at z = 0 and
    z = L by construction.
    """

    k: float
    n: int
    params: ModelParams
    coefficients: ClaimedCoefficients
    source: SourceConvention
    channels: Dict[str, RegionTerms]

    @property
    def validity(self) -> str:
        return self.coefficients.validity

    def region_of(self, z: float) -> str:
        if z < 0.0:
            return "left"
        if z > self.params.cavity_length:
            return "right"
        return "inside"

    def bare_view(self) -> Dict[str, RegionTerms]:
        """Bare-basis term lists: e = (+ + -)/sqrt(2), g = (+ - -)/sqrt(2)."""
        out: Dict[str, RegionTerms] = {}
        for bare, sign in (("e", 1.0), ("g", -1.0)):
            regions: RegionTerms = {}
            for region in REGIONS:
                merged: Dict[Tuple[complex, float], complex] = {}
                for channel, weight in (("+", _SQRT_HALF), ("-", sign * _SQRT_HALF)):
                    for term in self.channels[channel][region]:
                        key = (term.q, term.ref)
                        merged[key] = merged.get(key, 0.0) + weight * term.amplitude
                regions[region] = tuple(PlaneWaveTerm(a, q, ref)
                                        for (q, ref), a in merged.items())
            out[bare] = regions
        return out

    def evaluate(self, z, channel: str, basis: str = "dressed") -> np.ndarray:
        """Sample one channel of the state on arbitrary points."""
        if basis == "dressed":
            terms_by_region = self.channels[channel]
        elif basis == "bare":
            terms_by_region = self.bare_view()[channel]
        else:
            raise InvalidParameterError(f"basis must be 'bare' or 'dressed', got {basis!r}")
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        length = self.params.cavity_length
        masks = {
            "left": z < 0.0,
            "inside": (z >= 0.0) & (z <= length),
            "right": z > length,
        }
        for region, mask in masks.items():
            if not np.any(mask):
                continue
            zr = z[mask]
            acc = np.zeros(zr.shape, dtype=complex)
            for term in terms_by_region[region]:
                acc += term.value(zr)
            out[mask] = acc
        return out


def _value_and_slope(terms, z: float):
    v = 0.0 + 0.0j
    d = 0.0 + 0.0j
    for term in terms:
        tv = complex(term.value(z))
        v += tv
        d += 1j * term.q * tv
    return v, d


def assemble_claimed_state(k: float, n: int, params: ModelParams) -> ClaimedStationaryState:
    """Build the full three-region state the published coefficients encode."""
    coeffs = claimed_coefficients(k, n, params)
    wn = coeffs.wavenumbers
    rot = coeffs.rotation
    length = params.cavity_length
    align = cmath.exp(1j * k * length)
    source = rot.sin

    channels: Dict[str, RegionTerms] = {}
    for tag, sym, kappa in (("plus", "+", wn.k_plus), ("minus", "-", wn.k_minus)):
        a = getattr(coeffs, "a_" + tag)
        alpha = getattr(coeffs, "alpha_" + tag) * align
        # the left-moving interior term referenced at z = L stays bounded
        # for evanescent kappa: beta_ref = beta * align * e^{-i kappa L}
        beta_ref = (getattr(coeffs, "beta_" + tag) * align
                    * cmath.exp(-1j * kappa * length))
        b = getattr(coeffs, "b_" + tag) * align
        channels[sym] = {
            "left": (PlaneWaveTerm(source, k, 0.0), PlaneWaveTerm(a, -k, 0.0)),
            "inside": (PlaneWaveTerm(alpha, kappa, 0.0),
                       PlaneWaveTerm(beta_ref, -kappa, length)),
            "right": (PlaneWaveTerm(b, k, length),),
        }

    src = SourceConvention(prefactor=_SQRT_HALF, source_plus=source,
                           source_minus=source, alignment_phase=align,
                           incident_bare_e=math.sqrt(2.0) * source)
    return ClaimedStationaryState(k=float(k), n=int(n), params=params,
                                  coefficients=coeffs, source=src,
                                  channels=channels)


def continuity_defects(state: ClaimedStationaryState) -> Dict[str, float]:
    """Worst value/slope jumps of each dressed channel at z = 0 and z = L.

    Diagnostic used by the tests; exact assembly keeps these at rounding
    level for any detuning.
    """
    length = state.params.cavity_length
    out = {}
    for sym in ("+", "-"):
        regions = state.channels[sym]
        v0l, d0l = _value_and_slope(regions["left"], 0.0)
        v0r, d0r = _value_and_slope(regions["inside"], 0.0)
        vLl, dLl = _value_and_slope(regions["inside"], length)
        vLr, dLr = _value_and_slope(regions["right"], length)
        out[sym] = max(abs(v0l - v0r), abs(d0l - d0r),
                       abs(vLl - vLr), abs(dLl - dLr))
    return out


# =====================================================================
# resonant emission probabilities
# =====================================================================

def resonant_emission_probability(k: float, n: int, params: ModelParams) -> Dict[str, float]:
    """Reflection/transmission probabilities per exit channel at delta = 0.

    Uses the published recombination R_e = |A+ + A-|**2 / 2 and so on;
    the division by two restores unit incident flux (the printed bracket
    under-weights the incident wave by sqrt(2)).  P_emission is the total
    probability of leaving a photon behind, R_g + T_g.  Values are only
    physical on resonance; off resonance this raises.
    """
    if params.delta != 0.0:
        raise OutOfValidityError(
            "emission probabilities from the published solution are only "
            f"physical at delta = 0, got delta = {params.delta!r}")
    c = claimed_coefficients(k, n, params)
    r_e = 0.5 * abs(c.a_plus + c.a_minus) ** 2
    r_g = 0.5 * abs(c.a_plus - c.a_minus) ** 2
    t_e = 0.5 * abs(c.b_plus + c.b_minus) ** 2
    t_g = 0.5 * abs(c.b_plus - c.b_minus) ** 2
    return {
        "R_e": r_e,
        "R_g": r_g,
        "T_e": t_e,
        "T_g": t_g,
        "P_emission": r_g + t_g,
    }
