"""Acceptance gate: the ten headline checks at their stated tolerances.

Each test prints one ``ACCEPTANCE Cnn <label>: PASS`` line (shown with
``pytest -s`` or in captured output on failure).  Run the whole module:

    pytest tests/test_acceptance.py -v
"""

import numpy as np
from massclock import (
    GridSpec,
    HamiltonianKind,
    InternalSpace,
    PhysicalParams,
    Potential,
    bargmann_loop_element,
    commutator_residual,
    extended_loop_element,
    frame_transform,
    gaussian_packet,
    internal_space_from_masses,
    loop_phase,
    make_superposition,
    overlap,
    propagate,
    propagate_history,
    proper_time,
    schrodinger_residual,
    sinusoidal_trajectory,
    triangular_trajectory,
    wrap_angle,
)
from massclock.experiments import (
    exp_bargmann,
    exp_clock_dilation,
    exp_frame_phase,
    exp_newtonian_sweep,
    exp_wep,
)

import oracles


def _report(tag: str, label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    print(f"ACCEPTANCE {tag} {label}: {status}{suffix}")
    assert ok, f"{tag} {label}: {detail}"


PARAMS = PhysicalParams(hbar=1.0, c=10.0, E0=100.0)


def test_c01_bargmann_loop():
    """Abstract loop element is the identity exactly; the unitary loop
    yields -M_i a w / hbar within 1e-8 across a 5-point (a, w) sweep."""
    result = exp_bargmann()  # five default pairs
    abstract_ok = all(
        bargmann_loop_element(a, w).is_identity()
        for a, w in result.parameters["pairs"]
    )
    branch_rows = [r for r in result.rows if r["branch"] != "relative"]
    worst = max(r["abs_error"] for r in branch_rows)
    _report("C01", "bargmann-loop", abstract_ok and worst < 1e-8,
            f"5-pair sweep, worst |phase error| = {worst:.2e}")


def test_c02_mass_energy_relative_phase():
    """Relative phase (M2 - M1) a w / hbar = 0.04 within 1e-8, with the
    dense-matrix oracle cross-check at N = 64."""
    result = exp_bargmann(pairs=[(0.5, 0.8)], masses=(1.0, 1.1))
    rel = [r for r in result.rows if r["branch"] == "relative"][0]
    err = abs(rel["phase_measured"] - 0.04)

    # dense-matrix oracle on a 64-point grid
    grid64 = GridSpec(-20.0, 20.0, 64)
    internal = internal_space_from_masses([1.0, 1.1], 10.0)
    params = PhysicalParams(hbar=1.0, c=10.0, E0=internal.E0)
    psi = gaussian_packet(grid64, 0.0, 0.0, 3.0)
    state = make_superposition(grid64, internal, np.full(2, 2**-0.5), psi)
    pipeline = loop_phase(state, 0.5, 0.8, params)
    dense = [oracles.dense_loop_phase(grid64, m, 0.5, 0.8, 1.0, psi)
             for m in internal.mass_energies(10.0)]
    oracle_gap = max(abs(wrap_angle(bp.phase - d))
                     for bp, d in zip(pipeline, dense))
    _report("C02", "mass-energy-relative-phase",
            err < 1e-8 and oracle_gap < 1e-10,
            f"|rel - 0.04| = {err:.2e}, dense-oracle gap = {oracle_gap:.2e}")


def test_c03_extended_loop():
    """alpha == a w within 1e-12 on 1000 random pairs, Galilei part identity."""
    rng = np.random.default_rng(2024)
    worst = 0.0
    ok = True
    for _ in range(1000):
        a, w = rng.uniform(-3, 3, size=2)
        el = extended_loop_element(a, w)
        worst = max(worst, abs(el.alpha - a * w))
        ok &= el.g.is_identity()
    _report("C03", "extended-loop-alpha", ok and worst < 1e-12,
            f"1000 pairs, worst |alpha - a w| = {worst:.2e}")


def test_c04_operational_equivalence():
    """low_energy and dynamical_mass(+rest) terminal states agree to 1e-12."""
    grid = GridSpec(-40.0, 40.0, 2048)
    internal = InternalSpace(E0=100.0, levels=(0.0, 10.0))
    params = PhysicalParams(hbar=1.0, c=10.0, E0=100.0,
                            potential=Potential.uniform_field(0.5))
    psi = gaussian_packet(grid, -5.0, 1.0, 1.0)
    state = make_superposition(grid, internal, np.full(2, 2**-0.5), psi)
    a = propagate(state, HamiltonianKind.low_energy(), params, 5e-4, 2000)
    b = propagate(state, HamiltonianKind.dynamical_mass(include_rest=True),
                  params, 5e-4, 2000)
    infidelity = abs(1.0 - abs(overlap(a, b)) ** 2)
    _report("C04", "low-energy-equals-dynamical-mass", infidelity < 1e-12,
            f"terminal infidelity = {infidelity:.2e}")


def test_c05_time_dilation():
    """Semiclassical shifts within 1e-6 relative for the stated ratio sets;
    wavepacket mode within 2% at v/c = 0.1."""
    semi = exp_clock_dilation(v_over_c=[0.05, 0.1, 0.2],
                              gh_over_c2=[1e-3, 1e-2], mode="semiclassical")
    semi_worst = max(r["rel_error"] for r in semi.rows)
    wave = exp_clock_dilation(v_over_c=[0.1], gh_over_c2=[], mode="wavepacket")
    wave_err = wave.rows[0]["rel_error"]
    _report("C05", "clock-time-dilation",
            semi_worst < 1e-6 and wave_err < 2e-2,
            f"semiclassical worst rel = {semi_worst:.2e}, "
            f"wavepacket rel = {wave_err:.2e}")


def test_c06_proper_time_closed_path():
    """Triangular path at 0.1c: delta_tau = 1 - sqrt(0.99) within 1e-10 of
    quadrature; frame-transform round-trip phase = (M/hbar) int xi_dot^2/2 dt
    within 1e-6."""
    traj = triangular_trajectory(0.1 * PARAMS.c, 1.0, 2001)
    res = proper_time(traj, PARAMS)
    tau_err = abs(res.delta_tau - (1.0 - np.sqrt(0.99)))

    frame = exp_frame_phase(speed=1.0, total_time=1.0)
    phase_err = max(r["abs_error"] for r in frame.rows)
    _report("C06", "proper-time-closed-path",
            tau_err < 1e-10 and phase_err < 1e-6,
            f"|delta_tau - closed form| = {tau_err:.2e}, "
            f"worst |phase error| = {phase_err:.2e}")


def test_c07_primed_frame_equation():
    """Residual against p'^2/2M + M xi_ddot x' converges at order >= 1.9
    over a 3-point dt refinement; without the term it stalls."""
    grid = GridSpec(-20.0, 20.0, 512)
    internal = InternalSpace(E0=100.0, levels=(0.0,))
    params = PhysicalParams(hbar=1.0, c=10.0, E0=100.0)
    kind = HamiltonianKind.dynamical_mass()

    def residual(dt, with_term):
        steps = int(round(1.0 / dt))
        traj = sinusoidal_trajectory(0.5, 1.0, steps + 1)
        psi = gaussian_packet(grid, 0.0, 0.0, 1.0)
        state = make_superposition(grid, internal, [1.0], psi)
        times, hist = propagate_history(state, kind, params, dt, steps)
        primed = [frame_transform(s, traj, t, params)
                  for s, t in zip(hist, times)]
        acc = traj.acceleration() if with_term else None
        return schrodinger_residual(primed, dt, kind, params,
                                    non_inertial_accel=acc)

    dts = (2e-3, 1e-3, 5e-4)
    res = [residual(dt, True) for dt in dts]
    orders = [np.log2(res[i] / res[i + 1]) for i in range(2)]
    neg = [residual(dt, False) for dt in dts]
    stalls = neg[-1] > 0.5 * neg[0] and neg[-1] > 100.0 * res[-1]
    _report("C07", "primed-frame-schrodinger",
            min(orders) >= 1.9 and stalls,
            f"orders = {orders[0]:.3f}, {orders[1]:.3f}; "
            f"control residual = {neg[-1]:.2e} vs {res[-1]:.2e}")


def test_c08_newtonian_limit_convergence():
    """Split-vs-newtonian discrepancy scales as eps with log-log slope
    1.0 +/- 0.1 over eps in [1e-3, 1e-1]."""
    result = exp_newtonian_sweep()
    slope = result.details["slope"]
    _report("C08", "newtonian-limit-slope", abs(slope - 1.0) <= 0.1,
            f"slope = {slope:.3f}")


def test_c09_weak_equivalence_principle():
    """d<v>/dt = -g within 1e-6 relative for both branches under all four
    kinds; clock rates shift under low_energy but not under newtonian."""
    result = exp_wep()
    accel_rows = [r for r in result.rows if r["quantity"] == "acceleration"]
    accel_worst = max(r["rel_error"] for r in accel_rows)
    clock = {r["kind"]: r for r in result.rows if r["quantity"] == "clock_shift"}
    newton_flat = abs(clock["newtonian"]["measured"]) < 1e-8
    dilated = (abs(clock["low_energy"]["measured"]) > 1e-3
               and clock["low_energy"]["rel_error"] < 0.1)
    _report("C09", "weak-equivalence-principle",
            accel_worst < 1e-6 and newton_flat and dilated,
            f"worst accel rel = {accel_worst:.2e}, newtonian shift = "
            f"{clock['newtonian']['measured']:.2e}, low_energy shift = "
            f"{clock['low_energy']['measured']:.3e}")


def test_c10_propagator_health():
    """Norm drift < 1e-10 over 1e4 steps, Strang order ratio >= 3.5,
    commutator residual < 1e-6 on centered packets."""
    grid = GridSpec(-40.0, 40.0, 2048)
    internal = InternalSpace(E0=100.0, levels=(0.0, 10.0))
    psi = gaussian_packet(grid, 0.0, 1.0, 1.0)
    state = make_superposition(grid, internal, np.full(2, 2**-0.5), psi)
    final = propagate(state, HamiltonianKind.low_energy(), PARAMS, 5e-4, 10000)
    drift = abs(final.norm() - 1.0)

    order_grid = GridSpec(-20.0, 20.0, 512)
    xs = np.linspace(-20.0, 20.0, 801)
    params_h = PhysicalParams(hbar=1.0, c=10.0, E0=100.0,
                              potential=Potential.tabulated(xs, 0.05 * xs**2))
    single = InternalSpace(E0=100.0, levels=(0.0,))
    packet = make_superposition(order_grid, single, [1.0],
                                gaussian_packet(order_grid, 4.0, 0.0, 1.0))

    def terminal(steps):
        return propagate(packet, HamiltonianKind.newtonian(), params_h,
                         2.0 / steps, steps)

    ref = terminal(8000)
    e1 = oracles.l2_distance(order_grid, terminal(1000).amplitudes, ref.amplitudes)
    e2 = oracles.l2_distance(order_grid, terminal(2000).amplitudes, ref.amplitudes)
    ratio = e1 / e2

    resid = float(np.max(commutator_residual(state, 0.0, PARAMS)))
    _report("C10", "propagator-health",
            drift < 1e-10 and ratio >= 3.5 and resid < 1e-6,
            f"norm drift = {drift:.2e}, Strang ratio = {ratio:.2f}, "
            f"[p,K] residual = {resid:.2e}")
