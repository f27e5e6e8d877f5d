import random
from fractions import Fraction

import pytest

from padiclf.characters import HeckeCharacter
from padiclf.lfunction import (
    EvaluationError,
    build_mu,
    classical_intrinsic_integral,
    ev_classical_1,
    ev_classical_2,
    ev_phi,
    interpolation_multiplier,
    unramified_extension_identity,
    _to_ctx,
)
from padiclf.lifting import naive_lift
from padiclf.padics import cyclotomic_context, qp_context
from padiclf.pipeline import load_battery
from padiclf.rayclass import Modulus, build_ray_class_group, compatible_representatives


@pytest.fixture(scope="module")
def groups(control_symbol):
    F = control_symbol.field
    g1 = build_ray_class_group(F, Modulus((0,)))
    g5 = build_ray_class_group(F, Modulus((1,)))
    g25 = build_ray_class_group(F, Modulus((2,)))
    return g1, g5, g25


@pytest.fixture(scope="module")
def mus(control_lift, groups):
    _, g5, g25 = groups
    sym = control_lift.symbol
    mu5 = build_mu(control_lift.psi, sym.eigenvalue, Modulus((1,)), sym.ctx,
                   group=g5, check_eigen=False)
    mu25 = build_mu(control_lift.psi, sym.eigenvalue, Modulus((2,)), sym.ctx,
                    group=g25, check_eigen=False)
    return mu5, mu25


@pytest.fixture(scope="module")
def battery(control_symbol, control_config):
    chars, ctx = load_battery(control_symbol.field, control_config.characters_path, 26)
    return chars


def test_zero_symbol_evaluates_to_zero(control_symbol, control_config, groups):
    _, g5, _ = groups
    sym = control_symbol
    zero = sym.space.zero_classical(sym.ctx)
    zlift = naive_lift(zero, control_config.M, control_config.N)
    mu = build_mu(zlift, sym.eigenvalue, Modulus((1,)), sym.ctx, group=g5,
                  check_eigen=False)
    for label in g5.class_labels:
        assert mu.affine_evaluator(label).is_zero()
        assert mu.intrinsic_moment(label, 0).is_zero_at_precision()
    assert ev_classical_2(zero, Modulus((1,)), 0, 1).is_zero_at_precision()


def test_diagram_commutation(control_lift, groups):
    _, g5, g25 = groups
    sym = control_lift.symbol
    k = sym.weight.k[0]
    for group, exps in ((g5, (1,)), (g25, (2,))):
        mu = build_mu(control_lift.psi, sym.eigenvalue, Modulus(exps), sym.ctx,
                      group=group, check_eigen=False)
        for label in group.class_labels:
            aff = mu.affine_evaluator(label)
            alpha = group.representatives[label][0]
            for j in range(k + 1):
                lhs = aff.moment_element((k - j,), sym.ctx)
                rhs = ev_classical_2(sym.phi, Modulus(exps), j, alpha)
                assert (lhs - rhs).is_zero_at_precision()


def test_total_mass_is_classical_period(control_lift, groups):
    # at k = 0 the affine evaluator's total mass is the classical evaluation
    _, g5, _ = groups
    sym = control_lift.symbol
    mu = build_mu(control_lift.psi, sym.eigenvalue, Modulus((1,)), sym.ctx,
                  group=g5, check_eigen=False)
    for label in g5.class_labels:
        alpha = g5.representatives[label][0]
        lhs = mu.affine_evaluator(label).moment_element((0,), sym.ctx)
        rhs = ev_classical_2(sym.phi, Modulus((1,)), 0, alpha)
        assert (lhs - rhs).is_zero_at_precision()


def test_ev_classical_linearity(control_symbol):
    sym = control_symbol
    phi = sym.phi
    doubled = phi.map_values(lambda v: v.scale(2))
    for alpha in (1, 3):
        a = ev_classical_2(doubled, Modulus((1,)), 0, alpha)
        b = ev_classical_2(phi, Modulus((1,)), 0, alpha) * 2
        assert (a - b).is_zero_at_precision()


def test_trackiso_uniformizer_power(wt4_lift):
    sym = wt4_lift.symbol
    F = sym.field
    g5 = build_ray_class_group(F, Modulus((1,)))
    cy = cyclotomic_context(5, 1, 100)
    for j in (0, 1, 2):
        chi = HeckeCharacter(F, Modulus((1,)), {"r0": j},
                             [(((2,),), cy.from_int(-1))], cy)
        e2 = ev_phi(sym.phi, chi, g5, normalization=2)
        e1 = ev_phi(sym.phi, chi, g5, normalization=1)
        assert (e2 - e1 * 5 ** j).is_zero_at_precision()


def test_ev_phi_wrong_parity_vanishes(control_lift, groups):
    _, g5, _ = groups
    sym = control_lift.symbol
    cy = cyclotomic_context(5, 1, 60)
    w = cy.teichmuller(2)
    # the order-four character mod 5 is odd; the plus symbol pairs to zero
    quartic = HeckeCharacter(sym.field, Modulus((1,)), {"r0": 0},
                             [(((2,),), w)], cy)
    assert quartic.eps_value().eq_at_precision(cy.from_int(-1))
    val = ev_phi(sym.phi, quartic, g5, normalization=2)
    assert val.is_zero_at_precision()
    # the even quadratic character does not vanish
    quad = HeckeCharacter(sym.field, Modulus((1,)), {"r0": 0},
                          [(((2,),), cy.from_int(-1))], cy)
    assert not ev_phi(sym.phi, quad, g5, normalization=2).is_zero_at_precision()


def test_ev_phi_representative_independence(control_lift, groups, battery):
    _, g5, _ = groups
    sym = control_lift.symbol
    g5b = build_ray_class_group(sym.field, Modulus((1,)),
                                rep_shifts={lab: 1 for lab in g5.class_labels})
    for chi in battery:
        if chi.conductor.exponents[0] != 1:
            continue
        r = sum(chi.infinity_type.values())
        if not 0 <= r <= sym.weight.k[0]:
            continue
        a = ev_phi(sym.phi, chi, g5, normalization=2)
        b = ev_phi(sym.phi, chi, g5b, normalization=2)
        assert (a - b).is_zero_at_precision()


def test_mu_compatibility_battery(control_lift, groups, battery, mus):
    g1, g5, _ = groups
    sym = control_lift.symbol
    mu5, _ = mus
    g25c, urs = compatible_representatives(g5, 0)
    mu25c = build_mu(control_lift.psi, sym.eigenvalue, Modulus((2,)), sym.ctx,
                     group=g25c, check_eigen=False)
    count = 0
    for label in g5.class_labels:
        for m in range(5):
            a = mu25c.coset_monomial(g5, label, m)
            b = mu5.coset_monomial(g5, label, m)
            assert (a - b).is_zero_at_precision()
            count += 1
    assert count >= 20
    for chi in battery:
        r = sum(chi.infinity_type.values())
        if not 0 <= r <= sym.weight.k[0]:
            continue
        if not chi.conductor.divides(Modulus((1,))):
            continue
        a = mu25c.evaluate_character(chi)
        b = mu5.evaluate_character(chi)
        assert (a - b).is_zero_at_precision(), chi.name


def test_mu_representative_independence(control_lift, groups, battery, mus):
    _, g5, _ = groups
    mu5, _ = mus
    sym = control_lift.symbol
    g5b = build_ray_class_group(sym.field, Modulus((1,)),
                                rep_shifts={lab: 2 for lab in g5.class_labels})
    mu5b = build_mu(control_lift.psi, sym.eigenvalue, Modulus((1,)), sym.ctx,
                    group=g5b, check_eigen=False)
    for chi in battery:
        r = sum(chi.infinity_type.values())
        if not 0 <= r <= sym.weight.k[0]:
            continue
        if not chi.conductor.divides(Modulus((1,))):
            continue
        assert (mu5.evaluate_character(chi) - mu5b.evaluate_character(chi)).is_zero_at_precision()


def test_fincor2_identity(control_lift, groups, battery, mus):
    _, g5, g25 = groups
    mu5, mu25 = mus
    sym = control_lift.symbol
    lam = sym.eigenvalue
    for chi in battery:
        r = sum(chi.infinity_type.values())
        if not 0 <= r <= sym.weight.k[0]:
            continue
        nexp = chi.conductor.exponents[0]
        if nexp == 1:
            mu, group = mu5, g5
        elif nexp == 2:
            mu, group = mu25, g25
        else:
            continue
        lhs = mu.evaluate_character(chi)
        rhs = _to_ctx(lam ** nexp, chi.ctx).inverse() * ev_phi(
            sym.phi, chi, group, normalization=2
        )
        assert (lhs - rhs).is_zero_at_precision(), chi.name


def test_unramified_multiplier_trivial_character(control_lift, groups, mus):
    g1, _, _ = groups
    mu5, _ = mus
    sym = control_lift.symbol
    ctx = sym.ctx
    triv = HeckeCharacter(sym.field, Modulus((0,)), {"r0": 0}, [], ctx)
    lhs = mu5.evaluate_character(triv)
    ev1 = ev_phi(sym.phi, triv, g1, normalization=1)
    rhs = (ctx.one() - sym.eigenvalue.inverse()) * ev1
    assert (lhs - rhs).is_zero_at_precision()
    assert not lhs.is_zero_at_precision()  # nonvanishing central value
    report = interpolation_multiplier(triv, {"p0": sym.eigenvalue}, [0], sym.weight)
    assert (report.product - (ctx.one() - sym.eigenvalue.inverse())).is_zero_at_precision()


def test_norm_power_multipliers_weight_four(wt4_lift):
    sym = wt4_lift.symbol
    F, ctx, lam = sym.field, sym.ctx, sym.eigenvalue
    g1 = build_ray_class_group(F, Modulus((0,)))
    g5 = build_ray_class_group(F, Modulus((1,)))
    mu5 = build_mu(wt4_lift.psi, lam, Modulus((1,)), ctx, group=g5,
                   check_eigen=False)
    for j in (0, 1, 2):
        normj = HeckeCharacter(F, Modulus((0,)), {"r0": j}, [], ctx)
        lhs = mu5.evaluate_character(normj)
        ev1 = ev_phi(sym.phi, normj, g1, normalization=1)
        mult = ctx.one() - lam.inverse() * 5 ** j
        assert (lhs - mult * ev1).is_zero_at_precision(), j
        report = interpolation_multiplier(normj, {"p0": lam}, [0], sym.weight)
        assert (report.product - mult).is_zero_at_precision(), j


def test_multiplier_edge_cases(control_symbol):
    sym = control_symbol
    ctx = sym.ctx
    triv = HeckeCharacter(sym.field, Modulus((0,)), {"r0": 0}, [], ctx)
    report = interpolation_multiplier(triv, {"p0": sym.eigenvalue}, [], sym.weight)
    assert report.product.eq_at_precision(1)  # empty product
    # trivial zero: phi(p) lam = 1 forces Z = 0
    one = ctx.one()
    report0 = interpolation_multiplier(triv, {"p0": one}, [0], sym.weight)
    assert report0.product.is_zero_at_precision()
    # ramified primes are rejected
    cy = cyclotomic_context(5, 1, 40)
    quad = HeckeCharacter(sym.field, Modulus((1,)), {"r0": 0},
                          [(((2,),), cy.from_int(-1))], cy)
    with pytest.raises(EvaluationError):
        interpolation_multiplier(quad, {"p0": sym.eigenvalue}, [0], sym.weight)


def test_unramified_extension_identity(control_lift, groups):
    g1, g5, _ = groups
    sym = control_lift.symbol
    triv = HeckeCharacter(sym.field, Modulus((0,)), {"r0": 0}, [], sym.ctx)
    lhs, rhs = unramified_extension_identity(
        sym.phi, triv, 0, {"p0": sym.eigenvalue}, g1, g5
    )
    assert (lhs - rhs).is_zero_at_precision()
    assert not lhs.is_zero_at_precision()


def test_unramified_identity_requires_eigensymbol(control_lift, groups):
    g1, g5, _ = groups
    sym = control_lift.symbol
    triv = HeckeCharacter(sym.field, Modulus((0,)), {"r0": 0}, [], sym.ctx)
    broken = sym.phi + sym.phi.weyl()  # not a U_5 eigenvector
    broken = broken + sym.space.zero_classical(sym.ctx)
    bad = sym.phi.map_values(lambda v: v)  # same symbol: eigen, passes
    lhs, rhs = unramified_extension_identity(
        sym.phi, triv, 0, {"p0": sym.eigenvalue}, g1, g5
    )
    assert (lhs - rhs).is_zero_at_precision()
    # a genuinely non-eigen symbol is refused
    from padiclf.symbols import classical_basis

    basis = classical_basis(sym.space)
    non_eigen = basis[0].map_values(
        lambda v: v.map_values(lambda x: sym.ctx.from_fraction(Fraction(x)), sym.ctx)
    )
    with pytest.raises(EvaluationError):
        unramified_extension_identity(
            non_eigen, triv, 0, {"p0": sym.eigenvalue}, g1, g5
        )


def test_non_critical_character_rejected(control_lift, mus):
    mu5, _ = mus
    sym = control_lift.symbol
    normj = HeckeCharacter(sym.field, Modulus((0,)), {"r0": 3}, [], sym.ctx)
    with pytest.raises(EvaluationError):
        mu5.evaluate_character(normj)


def test_build_mu_requires_eigen_and_full_modulus(control_lift, control_symbol, control_config):
    sym = control_lift.symbol
    with pytest.raises(EvaluationError):
        build_mu(control_lift.psi, sym.eigenvalue, Modulus((0,)), sym.ctx)
    bad_eig = sym.ctx.from_int(3)
    with pytest.raises(EvaluationError):
        build_mu(control_lift.psi, bad_eig, Modulus((1,)), sym.ctx, check_eigen=True)


def test_mu_serialization_hash_stability(control_lift, groups):
    _, g5, _ = groups
    sym = control_lift.symbol
    mu_a = build_mu(control_lift.psi, sym.eigenvalue, Modulus((1,)), sym.ctx,
                    group=g5, check_eigen=False)
    mu_b = build_mu(control_lift.psi, sym.eigenvalue, Modulus((1,)), sym.ctx,
                    group=g5, check_eigen=False)
    assert mu_a.to_record()["content_hash"] == mu_b.to_record()["content_hash"]
    assert mu_a.growth_diagnostics()
