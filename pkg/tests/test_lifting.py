from fractions import Fraction

import pytest

from padiclf.lifting import (
    LiftError,
    LiftNonConvergence,
    eigen_residual,
    iterate_control,
    naive_lift,
    prepare_lift,
    specialization_residual,
)


def test_naive_lift_zero_symbol(control_symbol, control_config):
    zero = control_symbol.space.zero_classical(control_symbol.ctx)
    lift = naive_lift(zero, control_config.M, control_config.N)
    assert all(d.is_zero() for d in lift.values)


def test_naive_lift_specializes_exactly(control_symbol, control_config):
    lift = naive_lift(control_symbol.phi, control_config.M, control_config.N)
    assert specialization_residual(lift, control_symbol.phi) is None
    assert control_symbol.space.check_relations(lift)


def test_two_naive_lifts_differ_only_above_k(control_symbol, control_config):
    k = control_symbol.weight.k[0]
    l0 = naive_lift(control_symbol.phi, control_config.M, control_config.N)
    l1 = naive_lift(control_symbol.phi, control_config.M, control_config.N, seed=3)
    diff = l0 - l1
    some_high_nonzero = False
    for d in diff.values:
        for idx, m in d.moments.items():
            if sum(idx) <= k:
                assert m % (d.p ** d.precs[idx]) == 0 or d.precs[idx] == 0
            elif m:
                some_high_nonzero = True
    assert some_high_nonzero


def test_truncation_too_small_rejected(control_symbol):
    with pytest.raises(LiftError):
        naive_lift(control_symbol.phi, control_symbol.weight.k[0], 6)


def test_control_iteration_ordinary(control_lift, control_symbol):
    rep = control_lift.report
    assert rep.converged
    assert rep.specialization_residual is None
    assert all(v is None for v in rep.eigen_residuals.values())
    assert control_lift.scale_exponent == 0
    assert eigen_residual(control_lift.psi, 1 if False else _lam_rep(control_lift)) is None


def _lam_rep(lifted):
    from padiclf.lifting import _eigen_int_rep

    return _eigen_int_rep(lifted.symbol.eigenvalue, lifted.psi.values[0].N)


def test_already_eigen_fixed_in_one_iteration(control_lift):
    psi, rep = iterate_control(control_lift.psi, control_lift.symbol.eigenvalue)
    assert rep.iterations == 1
    assert all((a - b).is_zero() for a, b in zip(psi.values, control_lift.psi.values))


def test_uniqueness_across_seeds(control_lift, control_symbol, control_config):
    lift2, phi_scaled, _, _ = prepare_lift(
        control_symbol.phi, control_config.M, control_config.N,
        control_symbol.eigenvalue.valuation(), seed=23,
    )
    psi2, _ = iterate_control(lift2, control_symbol.eigenvalue, phi=phi_scaled)
    assert all((a - b).is_zero() for a, b in zip(psi2.values, control_lift.psi.values))


def test_specialization_preserved_each_iteration(control_symbol, control_config):
    from padiclf.lifting import _eigen_int_rep

    lift = naive_lift(control_symbol.phi, 6, 6)
    lam_rep = _eigen_int_rep(control_symbol.eigenvalue, 10)
    psi = lift
    for _ in range(3):
        psi = psi.hecke(5).map_values(lambda d: d.divide_exact(lam_rep))
        assert specialization_residual(psi, control_symbol.phi) is None


def test_contraction_certificate(control_symbol, control_config):
    # successive differences gain at least one uniformizer power per step
    from padiclf.lifting import _eigen_int_rep

    lift = naive_lift(control_symbol.phi, 8, 8)
    lam_rep = _eigen_int_rep(control_symbol.eigenvalue, 14)
    prev = lift
    prev_gain = -1
    for step in range(4):
        nxt = prev.hecke(5).map_values(lambda d: d.divide_exact(lam_rep))
        diff = nxt - prev
        floors = [d.max_residual_valuation() for d in diff.values]
        floors = [f for f in floors if f is not None]
        if not floors:
            break
        gain = min(floors)
        assert gain > prev_gain
        prev_gain = gain
        prev = nxt


def test_negative_control_raises(control_lift, control_symbol, control_config):
    bad = control_symbol.ctx.from_int(5)  # slope k + 1 = 1
    lift2, _, _, _ = prepare_lift(
        control_symbol.phi, control_config.M, control_config.N, Fraction(0), seed=1
    )
    with pytest.raises(LiftNonConvergence):
        iterate_control(lift2, bad, enforce_small_slope=False,
                        budget=control_config.M + control_config.N)


def test_small_slope_gate(control_lift, control_symbol):
    bad = control_symbol.ctx.from_int(5)
    with pytest.raises(LiftNonConvergence):
        iterate_control(control_lift.psi, bad)


def test_non_ordinary_lift(wt4_lift, wt4_symbol):
    rep = wt4_lift.report
    assert rep.converged
    assert rep.specialization_residual is None
    assert all(v is None for v in rep.eigen_residuals.values())
    assert wt4_lift.scale_exponent > 0  # slope-one lifts carry denominators
