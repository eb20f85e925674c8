"""Acceptance gate: the ten headline quantitative claims, one test each.

Each test prints one PASS/FAIL line per underlying check (visible with
`pytest -s` or on failure) and fails if any measured value exceeds its
tolerance. The same checks back the `cohtrack verify` CLI subcommand.
"""

import time

from cohtrack.verify import (
    check_breakdown_time,
    check_equivalence,
    check_exact_algebra,
    check_fig1_sweep,
    check_fig2,
    check_fig3,
    check_field_magnitude,
    check_oracle,
    check_purity_monotonicity,
    check_singularity,
)


def run_criterion(name, check_fn, **kwargs):
    start = time.perf_counter()
    results = check_fn(**kwargs)
    elapsed = time.perf_counter() - start
    for res in results:
        print(res.line())
    failed = [res.name for res in results if not res.passed]
    status = "FAIL" if failed else "PASS"
    print(f"{status} criterion {name} ({elapsed:.2f}s)")
    assert not failed, f"criterion {name}: failed checks {failed}"


def test_criterion_01_breakdown_time():
    # t_b = 25/3 from the closed form; detected breakdown within 1%; < 1 s.
    run_criterion("1: breakdown time", check_breakdown_time)


def test_criterion_02_controlled_vs_free_trajectories():
    # Controlled run holds v_x to 1e-6 with v_z on its closed form; the free
    # run decays as sqrt(0.15) e^{-0.1 t} with constant v_z; < 1 s.
    run_criterion("2: controlled/free trajectories", check_fig2)


def test_criterion_03_field_synthesis_and_divergence():
    # omega1(0) = 3.9 sqrt(0.3), omega2(0) = -4.1 sqrt(0.3), both to 1e-9;
    # fitted divergence exponent -0.5 +/- 0.02 near breakdown.
    run_criterion("3: synthesized fields", check_fig3)


def test_criterion_04_breakdown_sweep():
    # 100x100 (c, p) grid matches (p - c) / (0.2 c) exactly; 10 random cells
    # cross-checked by simulation within 1%; < 10 s.
    run_criterion("4: breakdown sweep", check_fig1_sweep)


def test_criterion_05_two_picture_oracle():
    # Coherence-vector vs density-matrix propagation agree to 1e-8 on 100
    # random channels with piecewise-constant fields; < 30 s.
    run_criterion("5: propagation oracle", check_oracle)


def test_criterion_06_purity_monotonicity():
    # Unital channels never increase purity (per step >= -1e-10); initial
    # dp/dt agrees across 10 Hamiltonians to 1e-8 (no cooling by control).
    run_criterion("6: purity monotonicity", check_purity_monotonicity)


def test_criterion_07_field_magnitude_closed_form():
    # |Omega|^2 closed form matches omega0^2 + omega1^2 + omega2^2 to 1e-12
    # at 100 samples and equals 25.606 at t = 0 to 1e-9.
    run_criterion("7: field magnitude", check_field_magnitude)


def test_criterion_08_equivalence_machinery():
    # Hadamard maps phase flip to bit flip; the y half-turn maps to
    # diag(-1, 1, -1); homomorphism/double-cover on 100 random pairs;
    # t_b invariant under class-stabilizing rotations to 1e-14.
    run_criterion("8: equivalence transforms", check_equivalence)


def test_criterion_09_singularity_classification():
    # Tracked run -> nontrivial-a at t_b; equator start -> trivial at t = 0
    # with the no-control diagnostic; gamma = 0 -> none.
    run_criterion("9: singularity classification", check_singularity)


def test_criterion_10_exact_algebra_and_round_trip():
    # so(3) commutators hold exactly in integer arithmetic; 1000 random
    # picture round trips agree to 1e-14.
    run_criterion("10: exact algebra", check_exact_algebra)
