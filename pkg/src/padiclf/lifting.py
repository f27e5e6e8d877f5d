"""The control theorem as an algorithm: unique small-slope eigenlifts.

naive_lift produces any relation-satisfying moment-valued preimage of a
classical symbol under specialization; iterate_control contracts it to the
eigenlift by iterating the normalized U_p operator over the truncated
moment module, reporting residuals and the filtration depth reached.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coefficients import MomentDistribution, PolyDualValues, Weight, is_small_slope
from .linalg import solve_mod_prime_power
from .padics import PadicElement, int_valuation
from .symbols import ModularSymbol, SymbolSpace


class LiftError(RuntimeError):
    pass


class LiftNonConvergence(LiftError):
    """The eigenvalue is not small-slope or the profile is inconsistent."""


@dataclass
class LiftReport:
    iterations: int
    filtration_depth: int
    specialization_residual: int | None  # v_p floor of rho(Psi) - phi (None: zero)
    eigen_residuals: dict                # prime name -> v_p floor of U Psi - lam Psi
    converged: bool = True
    notes: str = ""


def prepare_lift(phi: ModularSymbol, M: int, N: int, slope: Fraction,
                 seed: int | None = None, max_denominator: int | None = None):
    """Adaptive naive lift: scales the symbol by p powers when the truncated
    relation system forces denominators (nonzero slope), and pads the
    working profile so the lam^{-1} U_p iteration keeps N honest digits.

    Returns (lift, scaled_phi, scale_exponent, working_N).
    """
    space = phi.space
    p = space.p
    pad = int(-(-slope * (M + N + 2) // 1))  # ceil(slope * budget)
    max_denominator = M if max_denominator is None else max_denominator
    last_error = None
    for B in range(max_denominator + 1):
        scaled = phi.map_values(lambda v: v.scale(p ** B)) if B else phi
        n_work = N + B + pad
        try:
            lift = naive_lift(scaled, M, n_work, seed=seed)
            return lift, scaled, B, n_work
        except LiftError as exc:
            last_error = exc
    raise LiftError(
        f"no lift found with denominator exponent <= {max_denominator}: {last_error}"
    )


def naive_lift(phi: ModularSymbol, M: int, N: int, seed: int | None = None) -> ModularSymbol:
    """Moment-valued lift with rho(lift) = phi and the relations enforced.

    Moments of degree <= k come from the classical values; higher moments
    start at zero (or a deterministic seed) and are corrected by solving
    the finite relation system over the truncation.
    """
    space = phi.space
    p = space.p
    k = space.weight.k[0]
    v = space.weight.v[0]
    if M <= k:
        raise LiftError("truncation must exceed the weight")
    coord_weights = ((k, v),)
    values = []
    for dual in phi.values:
        moments = {}
        for idx in MomentDistribution.index_tuples(1, M):
            t = idx[0]
            if t <= k:
                elt = dual.values[(k - t,)]
                if not isinstance(elt, PadicElement):
                    raise LiftError("classical values must be p-adic for lifting")
                prec = min(elt.prec, max(N - t, 0))
                moments[idx] = elt.integral_coeffs()[0][0] if prec > 0 else 0
            else:
                moments[idx] = 0
        values.append(MomentDistribution(p, N, M, coord_weights, moments))
    lift = ModularSymbol(space, values, "moments")
    if seed is not None:
        lift = _seed_higher_moments(lift, seed)
    return _enforce_relations(lift, phi)


def _seed_higher_moments(lift: ModularSymbol, seed: int) -> ModularSymbol:
    import random

    rng = random.Random(seed)
    space = lift.space
    k = space.weight.k[0]
    new_values = []
    for dist in lift.values:
        moments = dict(dist.moments)
        for idx in moments:
            if sum(idx) > k:
                moments[idx] = rng.randrange(0, dist.p ** dist.precs[idx])
        new_values.append(dist.copy_with(moments, dist.precs))
    return ModularSymbol(space, new_values, "moments")


def _enforce_relations(lift: ModularSymbol, phi: ModularSymbol) -> ModularSymbol:
    """Correct moments of degree > k so every relation row vanishes."""
    from .coefficients import _moment_transition

    space = lift.space
    p = space.p
    template = lift.values[0]
    M, N = template.M, template.N
    k = space.weight.k[0]
    v = space.weight.v[0]
    K = N + 2
    pK = p ** K
    free = [idx for idx in MomentDistribution.index_tuples(1, M) if idx[0] > k]
    nfree = len(free)
    col_of = {(g, idx): g * nfree + i for g in range(space.ngens())
              for i, idx in enumerate(free)}
    rows = []
    rhs = []
    for rel in space.relations:
        defect = None
        for gen, mat, sign in rel.terms:
            term = lift.values[gen].act(space.sigma0(mat))
            if sign < 0:
                term = -term
            defect = term if defect is None else defect + term
        blocks = []
        for gen, mat, sign in rel.terms:
            T = _moment_transition(tuple(mat), k, v, M, p, K)
            blocks.append((gen, T, sign))
        for m_idx in MomentDistribution.index_tuples(1, M):
            m = m_idx[0]
            row = [0] * (space.ngens() * nfree)
            for gen, T, sign in blocks:
                for i, idx in enumerate(free):
                    row[col_of[(gen, idx)]] += sign * T[m][idx[0]]
            rows.append([x % pK for x in row])
            rhs.append((-defect.moments[m_idx]) % pK)
    sol = solve_mod_prime_power(rows, rhs, p, K)
    if sol is None:
        raise LiftError("relation system unsolvable at this truncation (raise M)")
    correction, achieved = sol
    if achieved < N:
        raise LiftError(
            f"relation correction only achieved precision {achieved} < {N}"
        )
    new_values = []
    for g, dist in enumerate(lift.values):
        moments = dict(dist.moments)
        for i, idx in enumerate(free):
            moments[idx] = moments[idx] + correction[g * nfree + i]
        new_values.append(dist.copy_with(moments, dist.precs))
    out = ModularSymbol(space, new_values, "moments")
    res = space.relation_residual(out)
    if res is not None:
        raise LiftError("relations still fail after correction")
    return out


def specialization_residual(lift: ModularSymbol, phi: ModularSymbol):
    """v_p floor of rho(lift) - phi over all generators (None if zero)."""
    space = lift.space
    k = space.weight.k[0]
    worst = None
    for dist, dual in zip(lift.values, phi.values):
        for j in range(k + 1):
            elt = dual.values[(j,)]
            m = dist.moments[(k - j,)]
            prec = dist.precs[(k - j,)]
            diff = elt - elt.ctx.from_int(m, prec)
            if diff.is_zero_at_precision():
                continue
            val = diff.valuation_pi()
            worst = val if worst is None else min(worst, val)
    return worst


def eigen_residual(symbol: ModularSymbol, lam_int_rep: int) -> int | None:
    """v_p floor of U_p symbol - lam * symbol, None if it vanishes."""
    space = symbol.space
    img = symbol.hecke(space.p)
    diff_floor = None
    for a, b in zip(img.values, symbol.values):
        scaled = b.scale_int(lam_int_rep)
        d = a - scaled
        floor = d.max_residual_valuation()
        if floor is None:
            continue
        diff_floor = floor if diff_floor is None else min(diff_floor, floor)
    return diff_floor


def iterate_control(psi0: ModularSymbol, eigenvalue: PadicElement,
                    phi: ModularSymbol | None = None,
                    budget: int | None = None,
                    enforce_small_slope: bool = True) -> tuple:
    """Fixed point of lam^{-1} U_p on lifts; the constructive control theorem.

    Returns (Psi, LiftReport).  Raises LiftNonConvergence when the slope is
    not small for the weight (detected dynamically, so artificial
    eigenvalues can be probed by passing enforce_small_slope=False).
    """
    space = psi0.space
    field = space.field
    weight = space.weight
    p = space.p
    lam_val = eigenvalue.valuation()
    if lam_val is None:
        raise LiftError("eigenvalue is zero at precision")
    if enforce_small_slope:
        prime = field.primes_above_p[0]
        if not lam_val < weight.small_slope_bound(field, prime):
            raise LiftNonConvergence(
                f"slope {lam_val} is not small for this weight"
            )
    template = psi0.values[0]
    budget = budget if budget is not None else template.M + template.N
    lam_shift = int(lam_val * eigenvalue.ctx.e)
    lam_rep = _eigen_int_rep(eigenvalue, template.N + lam_shift + 2)
    psi = psi0
    converged = False
    iterations = 0
    for it in range(1, budget + 1):
        iterations = it
        try:
            nxt = psi.hecke(p).map_values(lambda d: d.divide_exact(lam_rep))
        except Exception as exc:  # divisibility failure: divergence signal
            raise LiftNonConvergence(
                f"iteration failed to divide by the eigenvalue at step {it}: {exc}"
            )
        diff = nxt - psi
        stable = all(d.is_zero() for d in diff.values)
        psi = nxt
        if stable:
            converged = True
            break
    if not converged:
        raise LiftNonConvergence(
            f"no fixed point within {budget} iterations (slope too large "
            "or precision profile inconsistent)"
        )
    depth = min(d.filtration_depth() for d in psi.values)
    spec_res = specialization_residual(psi, phi) if phi is not None else None
    eig_res = eigen_residual(psi, lam_rep)
    report = LiftReport(
        iterations=iterations,
        filtration_depth=depth,
        specialization_residual=spec_res,
        eigen_residuals={field.primes_above_p[0].name: eig_res},
        converged=True,
    )
    return psi, report


def _eigen_int_rep(lam: PadicElement, digits: int) -> int:
    """Integer representative of the eigenvalue modulo p^digits."""
    if lam.ctx.degree != 1:
        raise LiftError("eigenvalues live in Q_p for the rational backend")
    if lam.prec - lam.shift < digits:
        raise LiftError("eigenvalue known to insufficient precision")
    coeff = lam.coeffs[0][0] % (lam.ctx.p ** digits)
    return coeff * lam.ctx.p ** lam.shift if lam.shift >= 0 else coeff
