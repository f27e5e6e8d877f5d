import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padiclf.coefficients import (
    CoefficientError,
    MomentDistribution,
    PolyDualValues,
    Sigma0Matrix,
    Weight,
    is_small_slope,
    star_twist_request,
)
from padiclf.fields import load_builtin_field
from padiclf.padics import qp_context


F5 = load_builtin_field("q_p5")
FI = load_builtin_field("q_i_p5")


def test_weight_invariants():
    w = Weight.from_field(F5, {"r0": 2}, {"r0": 0})
    assert w.small_slope_bound(F5, F5.primes_above_p[0]) == 3
    with pytest.raises(CoefficientError):
        Weight.from_field(F5, {"r0": -2}, {"r0": 0})
    wi = Weight.from_field(FI, {"c0": 2, "c0bar": 2}, {"c0": 1, "c0bar": 1})
    assert wi.min_k_at_prime(FI, FI.primes_above_p[0]) == 2
    with pytest.raises(CoefficientError):
        Weight.from_field(FI, {"c0": 2, "c0bar": 4}, {"c0": 0, "c0bar": 0})
    # k + 2v parallel enforced
    with pytest.raises(CoefficientError):
        Weight.from_field(FI, {"c0": 2, "c0bar": 2}, {"c0": 0, "c0bar": 1})


def test_small_slope_examples():
    ctx = qp_context(5, 20)
    w0 = Weight.from_field(F5, {"r0": 0}, {"r0": 0})
    w2 = Weight.from_field(F5, {"r0": 2}, {"r0": 0})
    assert is_small_slope(F5, w0, {"p0": ctx.from_int(1)})      # ordinary
    assert is_small_slope(F5, w2, {"p0": ctx.from_int(-5)})     # slope 1 < 3
    assert not is_small_slope(F5, w0, {"p0": ctx.from_int(5)})  # slope 1 = k+1
    # mixed cubic: both complex embeddings sit over one prime, so the bound
    # there uses min k over the fiber plus the v-sum
    FC = load_builtin_field("q_cbrt2_p5")
    wc = Weight.from_field(FC, {"r0": 4, "c0": 2, "c0bar": 2},
                           {"r0": 0, "c0": 1, "c0bar": 1})
    assert wc.small_slope_bound(FC, FC.primes_above_p[1]) == Fraction(2 + 2 + 1, 1)
    assert wc.small_slope_bound(FC, FC.primes_above_p[0]) == Fraction(4 + 0 + 1, 1)


def test_sigma0_validation():
    Sigma0Matrix(5, ((1, 3, 5, 2),))
    with pytest.raises(CoefficientError):
        Sigma0Matrix(5, ((1, 3, 1, 2),))   # c not divisible by p
    with pytest.raises(CoefficientError):
        Sigma0Matrix(5, ((5, 3, 5, 2),))   # a not a unit
    with pytest.raises(CoefficientError):
        Sigma0Matrix(5, ((1, 0, 5, 0),))   # singular


# -- polynomial dual action -----------------------------------------------------

def test_act_v_identity_and_scalar():
    k = 2
    vals = PolyDualValues(((k, 0),), {(j,): Fraction(j + 1) for j in range(k + 1)})
    out = vals.act(((1, 0, 0, 1),))
    assert out.values == vals.values
    # scalar matrix multiplies by z^(k + 2v)
    z = 3
    out = vals.act(((z, 0, 0, z),))
    assert all(out.values[(j,)] == z ** k * vals.values[(j,)] for j in range(k + 1))
    vals_tw = PolyDualValues(((k, 1),), vals.values)
    out = vals_tw.act(((z, 0, 0, z),))
    assert all(out.values[(j,)] == z ** (k + 2) * vals.values[(j,)] for j in range(k + 1))


def test_act_v_antidiagonal_symbolic():
    # gamma = (0,1;1,0): X^(k-j) Y^j -> Y^(k-j) X^j, i.e. slot j -> slot k - j
    k = 2
    vals = PolyDualValues(((k, 0),), {(j,): Fraction(10 + j) for j in range(k + 1)})
    out = vals.act(((0, 1, 1, 0),))
    for j in range(k + 1):
        assert out.values[(j,)] == vals.values[(k - j,)]


def test_act_v_composition_random():
    rng = random.Random(0)
    k = 3
    for _ in range(30):
        vals = PolyDualValues(((k, 1),),
                              {(j,): Fraction(rng.randrange(-9, 10)) for j in range(k + 1)})
        def randmat():
            while True:
                m = tuple(rng.randrange(-4, 5) for _ in range(4))
                if m[0] * m[3] - m[1] * m[2] != 0:
                    return m
        A, B = randmat(), randmat()
        AB = (A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
              A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3])
        lhs = vals.act((A,)).act((B,))
        rhs = vals.act((AB,))
        assert lhs.values == rhs.values


# -- moment distributions ---------------------------------------------------------

def _random_moments(rng, p, N, M, coord_weights):
    ncoords = len(coord_weights)
    moments = {
        idx: rng.randrange(0, p ** max(N - sum(idx), 1))
        for idx in MomentDistribution.index_tuples(ncoords, M)
    }
    return MomentDistribution(p, N, M, coord_weights, moments)


def test_act_d_identity_and_diagonal_p():
    rng = random.Random(1)
    mu = _random_moments(rng, 5, 10, 10, ((2, 0),))
    out = mu.act(Sigma0Matrix(5, ((1, 0, 0, 1),)))
    assert all((out.moments[i] - mu.moments[i]) % 5 ** out.precs[i] == 0
               for i in out.moments)
    # gamma = (1,0;0,p): moment_j -> p^j moment_j
    out = mu.act(Sigma0Matrix(5, ((1, 0, 0, 5),)), audit=True)
    for idx in mu.moments:
        j = idx[0]
        pk = 5 ** out.precs[idx]
        assert (out.moments[idx] - 5 ** j * mu.moments[idx]) % pk == 0
        # compactness: at least j extra uniformizer divisibility
        if j and out.moments[idx]:
            assert out.moments[idx] % 5 ** min(j, out.precs[idx]) == 0


def test_act_d_binomial_shift():
    from math import comb

    rng = random.Random(2)
    mu = _random_moments(rng, 5, 9, 9, ((0, 0),))
    b = 3
    out = mu.act(Sigma0Matrix(5, ((1, b, 0, 1),)))
    for idx in mu.moments:
        m = idx[0]
        expect = sum(comb(m, i) * b ** (m - i) * mu.moments[(i,)] for i in range(m + 1))
        assert (out.moments[idx] - expect) % 5 ** out.precs[idx] == 0


def test_act_d_right_action_law():
    rng = random.Random(3)
    gens = [(1, 0, 0, 5), (1, 1, 0, 1), (2, 0, 0, 3), (1, 3, 5, 2)]
    for _ in range(12):
        mu = _random_moments(rng, 5, 8, 8, ((2, 0),))
        A = rng.choice(gens)
        B = rng.choice(gens)
        AB = (A[0] * B[0] + A[1] * B[2], A[0] * B[1] + A[1] * B[3],
              A[2] * B[0] + A[3] * B[2], A[2] * B[1] + A[3] * B[3])
        lhs = mu.act(Sigma0Matrix(5, (A,))).act(Sigma0Matrix(5, (B,)))
        rhs = mu.act(Sigma0Matrix(5, (AB,)))
        for idx in lhs.moments:
            prec = min(lhs.precs[idx], rhs.precs[idx])
            assert (lhs.moments[idx] - rhs.moments[idx]) % 5 ** prec == 0, (A, B, idx)


def test_specialize_equivariance_random():
    rng = random.Random(4)
    ctx = qp_context(5, 30)
    gens = [(1, 0, 0, 5), (1, 1, 0, 1), (3, 0, 0, 2), (1, 2, 5, 3)]
    for _ in range(50):
        mu = _random_moments(rng, 5, 8, 8, ((2, 0),))
        g = rng.choice(gens)
        lhs = mu.act(Sigma0Matrix(5, (g,))).specialize(ctx)
        rhs = mu.specialize(ctx).act((g,))
        for j in range(3):
            assert (lhs.values[(j,)] - rhs.values[(j,)]).is_zero_at_precision()


def test_specialize_unit_vector_and_zero():
    ctx = qp_context(5, 20)
    k = 2
    mu = MomentDistribution.zero(5, 10, 10, ((k, 0),))
    assert mu.specialize(ctx).is_zero()
    moments = dict(mu.moments)
    moments[(1,)] = 1
    mu2 = mu.copy_with(moments, mu.precs)
    spec = mu2.specialize(ctx)
    assert spec.values[(k - 1,)].eq_at_precision(1)
    assert spec.values[(k,)].is_zero_at_precision()


def test_multivariate_tensor_action():
    # two split coordinate lines (Gaussian shape): right-action law holds
    rng = random.Random(5)
    cw = ((1, 0), (2, 0))
    for _ in range(6):
        mu = _random_moments(rng, 5, 6, 6, cw)
        A = Sigma0Matrix(5, ((1, 1, 0, 1), (1, 0, 0, 5)))
        B = Sigma0Matrix(5, ((2, 0, 0, 1), (1, 2, 0, 1)))
        AB = A.compose(B)
        lhs = mu.act(A).act(B)
        rhs = mu.act(AB)
        for idx in lhs.moments:
            prec = min(lhs.precs[idx], rhs.precs[idx])
            assert (lhs.moments[idx] - rhs.moments[idx]) % 5 ** prec == 0


def test_star_twist_requests():
    w0 = Weight.from_field(F5, {"r0": 2}, {"r0": 0})
    idx, scalar = star_twist_request(w0, ("r0",), Fraction(7), {"r0": 1})
    assert idx == (1,) and scalar == 7
    idx, _ = star_twist_request(w0, ("r0",), 1, {"r0": 0})
    assert idx == (2,)
    idx, _ = star_twist_request(w0, ("r0",), 1, {"r0": 2})
    assert idx == (0,)
    with pytest.raises(CoefficientError):
        star_twist_request(w0, ("r0",), 1, {"r0": 3})


def test_profile_audit_detects_violation():
    # a matrix outside the p-triangular monoid is rejected before acting
    with pytest.raises(CoefficientError):
        Sigma0Matrix(5, ((1, 0, 1, 1),))


def test_act_on_polynomial_examples():
    from padiclf.coefficients import act_on_polynomial

    k = 2
    poly = {(0,): Fraction(1), (1,): Fraction(0), (2,): Fraction(0)}  # X^2
    # identity fixes it
    assert act_on_polynomial(((1, 0, 0, 1),), ((k, 0),), poly) == poly
    # the antidiagonal swaps X and Y: X^2 -> Y^2
    flipped = act_on_polynomial(((0, 1, 1, 0),), ((k, 0),), poly)
    assert flipped[(2,)] == 1 and flipped[(0,)] == 0
    # scalars act by z^(k + 2v)
    tripled = act_on_polynomial(((3, 0, 0, 3),), ((k, 1),), poly)
    assert tripled[(0,)] == 3 ** (k + 2)
    # duality: P(gamma . f) computed either way agrees
    from padiclf.coefficients import PolyDualValues

    dual = PolyDualValues(((k, 0),), {(j,): Fraction(5 - j) for j in range(k + 1)})
    gamma = ((1, 2, 5, 3),)
    f = {(0,): Fraction(2), (1,): Fraction(-1), (2,): Fraction(4)}
    lhs = sum(dual.act(gamma).values[(j,)] * f[(j,)] for j in range(k + 1))
    gf = act_on_polynomial(gamma, ((k, 0),), f)
    rhs = sum(dual.values[(j,)] * gf[(j,)] for j in range(k + 1))
    assert lhs == rhs
