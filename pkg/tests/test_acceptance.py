"""Acceptance gate: seven numbered criteria, one verdict line each.

Every test measures first, records its PASS/FAIL line (echoed again in the
terminal summary), and only then asserts, so a red criterion still reports
its numbers.  Criteria 2 and 6 each contain one clause that the measured
physics cannot meet; those asserts carry the quantitative reason.
"""
import math
import time
import warnings

import numpy as np
import pytest

from mazerlab import (
    DegenerateThresholdError,
    Grid,
    MesaMode,
    WavePacketSpec,
    aggregate_inversion,
    basis_equivalence_check,
    claimed_coefficients,
    claimed_residual,
    coupling_off,
    flux_probabilities,
    init_wavepacket,
    loglog_slope,
    make_params,
    matching_oracle,
    per_channel_scattering,
    propagate,
    region_probabilities,
    residual_sweep,
    separability_audit,
    stationary_scatter,
)

SEED = 20260814


def _verdict(num: int, ok: bool, detail: str) -> str:
    return f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"


# =====================================================================
# 1. resonant correctness of the published coefficients
# =====================================================================

def test_criterion_1_resonant_coefficients(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_oracle = 0.0
    worst_unitarity = 0.0
    for _ in range(50):
        k = float(rng.uniform(0.05, 5.0))
        n = int(rng.integers(0, 5))
        length = float(rng.uniform(0.5, 20.0))
        params = make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=length)
        worst_oracle = max(worst_oracle, matching_oracle(k, n, params))
        for channel in "+-":
            s = per_channel_scattering(k, channel, n, params)
            defect = abs(abs(s.r) ** 2 + abs(s.t) ** 2 - 1.0)
            worst_unitarity = max(worst_unitarity, defect)
    elapsed = time.perf_counter() - t0

    ok = worst_oracle < 1e-12 and worst_unitarity < 1e-12 and elapsed < 1.0
    acceptance_log(_verdict(
        1, ok,
        f"50 resonant draws: oracle deviation <= {worst_oracle:.1e}, "
        f"per-channel |r|^2+|t|^2 defect <= {worst_unitarity:.1e} "
        f"({elapsed:.2f} s)"))
    assert worst_oracle < 1e-12
    assert worst_unitarity < 1e-12
    assert elapsed < 1.0


# =====================================================================
# 2. the residual vanishes on resonance only
# =====================================================================

def test_criterion_2_residual_localizes_failure(acceptance_log):
    t0 = time.perf_counter()
    resonant = make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=1.0)
    detuned = make_params(lam=1.0, delta=1.0, omega=0.0, cavity_length=1.0)

    # k = 1 sits exactly on the kappa_+ = 0 interior threshold at delta = 0,
    # where the published impedances divide by zero; the contract is a
    # DegenerateThresholdError there, so the zero-residual statement is
    # checked at the two regular points and one-sided at the threshold.
    at_zero = {k: claimed_residual(k, 0, resonant).max_norm for k in (0.5, 2.0)}
    threshold_raised = False
    try:
        claimed_residual(1.0, 0, resonant)
    except DegenerateThresholdError:
        threshold_raised = True
    near_threshold = max(claimed_residual(1.0 - 1e-6, 0, resonant).max_norm,
                         claimed_residual(1.0 + 1e-6, 0, resonant).max_norm)
    at_lam = {k: claimed_residual(k, 0, detuned).max_norm for k in (0.5, 1.0, 2.0)}

    deltas = np.geomspace(1.0, 1e-4, 9)
    decreasing = True
    slopes = {}
    tails = {}
    for k in (0.5, 1.0, 2.0):
        rows = residual_sweep(k, 0, deltas, resonant)
        norms = [row.max_norm for row in rows]
        decreasing = decreasing and all(b < a for a, b in zip(norms, norms[1:]))
        small = [(row.delta, row.max_norm) for row in rows if row.delta <= 1e-2]
        slopes[k] = loglog_slope([d for d, _ in small], [v for _, v in small])
        tails[k] = norms[-1]
    elapsed = time.perf_counter() - t0

    worst_zero = max(max(at_zero.values()), near_threshold)
    worst_tail = max(tails.values())
    ok = (worst_zero < 1e-10 and threshold_raised
          and min(at_lam.values()) > 1e-3
          and decreasing
          and all(abs(s - 1.0) <= 0.1 for s in slopes.values())
          and worst_tail < 1e-8
          and elapsed < 1.0)
    acceptance_log(_verdict(
        2, ok,
        f"residual(delta=0) <= {worst_zero:.1e} (k=1 raises at the exact "
        f"threshold), residual(delta=lambda) >= {min(at_lam.values()):.2f}, "
        f"sweep decreasing with slopes {min(slopes.values()):.3f}.."
        f"{max(slopes.values()):.3f}; norm at delta=1e-4 is {worst_tail:.1e}, "
        f"so the < 1e-8 target is unreachable: unit slope from ~0.4 at "
        f"delta=0.4 puts the floor near 4e-5 ({elapsed:.2f} s)"))
    assert worst_zero < 1e-10
    assert threshold_raised
    assert min(at_lam.values()) > 1e-3
    assert decreasing
    for k, s in slopes.items():
        assert s == pytest.approx(1.0, abs=0.1), f"slope at k={k}"
    assert elapsed < 1.0
    assert worst_tail < 1e-8, (
        f"residual norm at delta=1e-4 is {worst_tail:.3e}; the defect is "
        "linear in delta (slope 1.00) with magnitude ~0.4 at delta=0.4, so "
        "its value at delta=1e-4 is ~4e-5 and a 1e-8 target cannot coexist "
        "with the required slope of 1.0 +- 0.1")


# =====================================================================
# 3. separability audit identities
# =====================================================================

def test_criterion_3_separability_identities(acceptance_log):
    t0 = time.perf_counter()
    params = make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=1.0)
    grid = np.linspace(-5.0, 5.0, 201)
    worst_inside = 0.0
    worst_outside = 0.0
    worst_closed_form = 0.0
    for n in (0, 1, 2):
        audit = separability_audit(n, params, grid)
        worst_inside = max(worst_inside, audit.max_dressed_inside)
        worst_outside = max(worst_outside, audit.max_bare_outside)
        worst_closed_form = max(worst_closed_form, audit.max_closed_form_defect)
    elapsed = time.perf_counter() - t0

    ok = (worst_inside < 1e-14 and worst_outside < 1e-14
          and worst_closed_form < 1e-12 and elapsed < 1.0)
    acceptance_log(_verdict(
        3, ok,
        f"dressed-inside off-diagonal <= {worst_inside:.1e}, bare-outside "
        f"<= {worst_outside:.1e}, closed-form defect <= "
        f"{worst_closed_form:.1e} over 201 detunings x n in {{0,1,2}} "
        f"({elapsed:.2f} s)"))
    assert worst_inside < 1e-14
    assert worst_outside < 1e-14
    assert worst_closed_form < 1e-12
    assert elapsed < 1.0


# =====================================================================
# 4. true off-resonant solver
# =====================================================================

def test_criterion_4_coupled_solver(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_flux = 0.0
    drawn = 0
    while drawn < 100:
        k = float(rng.uniform(0.1, 4.0))
        delta = float(rng.uniform(-2.0, 2.0))
        if k * k + delta <= 1e-3:
            continue  # closed or borderline exit channel: redraw
        n = int(rng.integers(0, 5))
        length = float(rng.uniform(0.5, 10.0))
        params = make_params(lam=1.0, delta=delta, omega=0.0, cavity_length=length)
        sol = stationary_scatter(k, n, params)
        worst_flux = max(worst_flux, flux_probabilities(sol)["unitarity_defect"])
        drawn += 1

    worst_agree = 0.0
    s = 2.0 ** -0.5
    for _ in range(20):
        k = float(rng.uniform(0.1, 4.0))
        n = int(rng.integers(0, 5))
        length = float(rng.uniform(0.5, 10.0))
        params = make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=length)
        sol = stationary_scatter(k, n, params)
        c = claimed_coefficients(k, n, params)
        worst_agree = max(
            worst_agree,
            abs(sol.r_e - s * (c.a_plus + c.a_minus)),
            abs(sol.r_g - s * (c.a_plus - c.a_minus)),
            abs(sol.t_e - s * (c.b_plus + c.b_minus)),
            abs(sol.t_g - s * (c.b_plus - c.b_minus)))
    elapsed = time.perf_counter() - t0

    ok = worst_flux < 1e-10 and worst_agree < 1e-10 and elapsed < 2.0
    acceptance_log(_verdict(
        4, ok,
        f"flux unitarity defect <= {worst_flux:.1e} over 100 open-channel "
        f"draws, resonant agreement with the published coefficients <= "
        f"{worst_agree:.1e} ({elapsed:.2f} s)"))
    assert worst_flux < 1e-10
    assert worst_agree < 1e-10
    assert elapsed < 2.0


# =====================================================================
# 5. propagator contracts
# =====================================================================

@pytest.mark.slow
def test_criterion_5_propagator_contracts(acceptance_log):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)

        # norm drift over 1e4 steps on a ~6000-point grid
        params = make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=1.0)
        grid = Grid.around_cavity(1.0, dz=0.02, pad_left=60.0, pad_right=60.0)
        field = init_wavepacket(WavePacketSpec(k0=1.5, sigma_k=1.0, z0=-6.0),
                                grid, params)
        traj = propagate(field, params, MesaMode(1.0), 0.005, 10_000)
        drift = max(abs(n - traj.norms[0]) for n in traj.norms)

        # dressed and bare runs agree after 1e3 steps at delta = 1
        detuned = make_params(lam=1.0, delta=1.0, omega=0.0, cavity_length=2.0)
        g2 = Grid.around_cavity(2.0, dz=0.02, pad_left=25.0, pad_right=25.0)
        basis_dev = basis_equivalence_check(
            WavePacketSpec(k0=1.5, sigma_k=1.0, z0=-5.2), detuned,
            0.005, 1000, grid=g2)

        # free packet follows the closed-form dispersion law
        g3 = Grid.around_cavity(1.0, dz=0.025, pad_left=30.0, pad_right=60.0)
        spec = WavePacketSpec(k0=1.0, sigma_k=0.4, z0=-14.0)
        f3 = init_wavepacket(spec, g3, params)
        t_end = 10.0
        traj3 = propagate(f3, params, coupling_off(), 0.005, 2000)
        dens = np.abs(traj3.final.psi_e) ** 2
        center = float(np.sum(g3.z * dens) / np.sum(dens))
        width = float(math.sqrt(np.sum((g3.z - center) ** 2 * dens) / np.sum(dens)))
        travel = 2.0 * spec.k0 * t_end
        exp_width = math.hypot(spec.sigma_z, 2.0 * spec.sigma_k * t_end)
        center_rel = abs(center - (spec.z0 + travel)) / travel
        width_rel = abs(width - exp_width) / exp_width
    elapsed = time.perf_counter() - t0

    ok = (drift < 1e-9 and basis_dev < 1e-8
          and center_rel < 1e-3 and width_rel < 1e-3 and elapsed < 120.0)
    acceptance_log(_verdict(
        5, ok,
        f"norm drift {drift:.1e} over 1e4 steps ({grid.npoints} points), "
        f"basis equivalence {basis_dev:.1e}, dispersion law within "
        f"{max(center_rel, width_rel):.1e} ({elapsed:.1f} s)"))
    assert drift < 1e-9
    assert basis_dev < 1e-8
    assert center_rel < 1e-3
    assert width_rel < 1e-3
    assert elapsed < 120.0


# =====================================================================
# 6. packet probabilities against stationary flux
# =====================================================================

def _packet_vs_stationary(delta: float, sigma_k: float) -> dict:
    """Long-grid scattering run; returns per-channel |packet - flux|."""
    params = make_params(lam=1.0, delta=delta, omega=0.0, cavity_length=2.0)
    z0 = -(5.0 / sigma_k) - 1.0
    sigma_z = 0.5 / sigma_k
    pad_left = abs(z0) + 8.7 * sigma_z + 10.0
    t_end = (abs(z0) + params.cavity_length + 6.0 * sigma_z + 30.0) / 2.0
    dt = 0.01
    n_steps = int(round(t_end / dt))
    spread = math.hypot(sigma_z, 2.0 * sigma_k * t_end)
    fastest = max(1.0, math.sqrt(1.0 + max(delta, 0.0)))
    pad_right = 2.0 * fastest * t_end - abs(z0) + 8.0 * spread + 20.0
    grid = Grid.around_cavity(params.cavity_length, dz=0.025,
                              pad_left=pad_left, pad_right=pad_right)
    field = init_wavepacket(WavePacketSpec(k0=1.0, sigma_k=sigma_k, z0=z0),
                            grid, params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = propagate(field, params, MesaMode(params.cavity_length), dt, n_steps)
    packet = region_probabilities(traj.final, params)
    flux = flux_probabilities(stationary_scatter(1.0, 0, params))
    return {ch: abs(packet[ch] - flux[ch]) for ch in ("R_e", "R_g", "T_e", "T_g")}


@pytest.mark.slow
def test_criterion_6_packet_matches_flux(acceptance_log):
    t0 = time.perf_counter()
    disc_resonant = _packet_vs_stationary(0.0, 0.02)
    disc_detuned = _packet_vs_stationary(1.0, 0.02)
    disc_narrow = _packet_vs_stationary(0.0, 0.01)
    elapsed = time.perf_counter() - t0

    worst = max(max(disc_resonant.values()), max(disc_detuned.values()))
    ratio = max(disc_resonant.values()) / max(disc_narrow.values())
    ok = worst < 0.01 and 2.0 / 1.5 <= ratio <= 2.0 * 1.5 and elapsed < 600.0
    acceptance_log(_verdict(
        6, ok,
        f"packet vs flux discrepancy <= {worst:.1e} at sigma_k=0.02 "
        f"(budget 1e-2); halving sigma_k divides it by {ratio:.2f}, outside "
        f"the required [1.33, 3.00]: the discrepancy is quadratic in "
        f"sigma_k, not linear ({elapsed:.0f} s)"))
    assert worst < 0.01
    assert elapsed < 600.0
    assert 2.0 / 1.5 <= ratio <= 2.0 * 1.5, (
        f"halving sigma_k at delta=0 divides the discrepancy by {ratio:.2f}, "
        "not ~2: channel probabilities average the stationary values over "
        "|G(k)|^2, so the leading deviation is the curvature term "
        "~ sigma_k^2 P''(k0)/2 and quartering is the expected behavior")


# =====================================================================
# 7. inversion observable
# =====================================================================

def test_criterion_7_inversion_observable(acceptance_log):
    t0 = time.perf_counter()
    params = make_params(lam=1.0, delta=0.0, omega=0.0, cavity_length=1.0)
    grid = Grid.around_cavity(1.0, dz=0.05, pad_left=25.0, pad_right=25.0)
    spec = WavePacketSpec(k0=1.5, sigma_k=0.6, z0=-10.0)
    field = init_wavepacket(spec, grid, params)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        coupled = propagate(field, params, MesaMode(1.0), 0.005, 400)
        free = propagate(field, params, coupling_off(), 0.005, 400)
        detuned = propagate(field,
                            make_params(lam=1.0, delta=1.0, omega=0.0,
                                        cavity_length=1.0),
                            MesaMode(1.0), 0.005, 400)

    starts_at_one = coupled.inversion[0] == 1.0
    free_flat = float(np.max(np.abs(free.inversion - 1.0)))

    weights = (0.2, 0.5, 0.3)
    agg = aggregate_inversion([coupled, free, detuned], weights)
    by_hand = sum(w * t.inversion for w, t in zip(weights, (coupled, free, detuned)))
    linearity = float(np.max(np.abs(agg.inversion - by_hand)))
    identity = np.array_equal(
        aggregate_inversion([coupled], [1.0]).inversion, coupled.inversion)
    elapsed = time.perf_counter() - t0

    ok = starts_at_one and free_flat <= 1e-12 and linearity <= 1e-12 and identity
    acceptance_log(_verdict(
        7, ok,
        f"W(0) = 1 exactly, |W - 1| <= {free_flat:.1e} with the coupling "
        f"off, aggregation linearity <= {linearity:.1e} and weight-1 "
        f"identity bitwise ({elapsed:.1f} s)"))
    assert starts_at_one
    assert free_flat <= 1e-12
    assert linearity <= 1e-12
    assert identity
