"""Evaluation maps, the ray class distribution, and interpolation identities.

The rational (q = 1) backend realizes the evaluation of a symbol along the
cycle through a class representative alpha as the value on the path from
alpha/f0 to infinity, twisted by the matrix (1, alpha; 0, f0).  Stored
evaluators keep the raw untwisted values together with (alpha, f0), so both
the affine moments (the twisted distribution) and intrinsic monomial
integrals over each coset are exact finite sums.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction

from .characters import HeckeCharacter
from .coefficients import MomentDistribution, _smul
from .fields import NumberField
from .padics import PadicContext, PadicElement, embed_qp
from .rayclass import Modulus, RayClassGroup, build_ray_class_group
from .symbols import INF, ModularSymbol, SymbolSpace


class EvaluationError(ValueError):
    pass


def _binom(n, k):
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def _modulus_generator(field: NumberField, modulus: Modulus) -> int:
    """Positive generator of the modulus ideal (rational backend)."""
    if field.degree != 1:
        raise EvaluationError("evaluation backend is rational (q = 1 over Q)")
    return field.p ** modulus.exponents[0]


# ---------------------------------------------------------------------------
# classical evaluation maps
# ---------------------------------------------------------------------------

def ev_classical_2(phi: ModularSymbol, modulus: Modulus, j: int, alpha: int):
    """Value at the dual slot X^{k-j} Y^j of phi({alpha/f0}-{inf}) | (1,a;0,f0)."""
    space = phi.space
    k = space.weight.k[0]
    if not 0 <= j <= k:
        raise EvaluationError("slot out of the critical range")
    f0 = _modulus_generator(space.field, modulus)
    twisted = space.evaluate_divisor(phi, Fraction(alpha, f0), INF,
                                     post=(1, alpha, 0, f0))
    return twisted.values[(j,)]


def ev_classical_1(phi: ModularSymbol, modulus: Modulus, j: int, alpha: int):
    """The untwisted-system evaluation: chart alpha/f0 + w, determinant free."""
    space = phi.space
    k = space.weight.k[0]
    if not 0 <= j <= k:
        raise EvaluationError("slot out of the critical range")
    f0 = _modulus_generator(space.field, modulus)
    post = (1, Fraction(alpha, f0), 0, 1)
    twisted = space.evaluate_divisor(phi, Fraction(alpha, f0), INF, post=post)
    return twisted.values[(j,)]


def _raw_class_value(phi: ModularSymbol, modulus: Modulus, alpha: int):
    space = phi.space
    f0 = _modulus_generator(space.field, modulus)
    return space.evaluate_divisor(phi, Fraction(alpha, f0), INF)


def classical_intrinsic_integral(phi: ModularSymbol, modulus: Modulus,
                                 alpha: int, r: int, normalization: int = 2):
    """Integral of x^r over the coset of alpha (classical coefficients).

    normalization 2: the chart x = alpha + f0 w with the determinant twist;
    normalization 1: the untwisted chart x/f0 = alpha/f0 + w.  The two are
    independent pipelines; their ratio realizes the uniformizer power
    f0^{r + v} relating the two local-system normalizations.
    """
    space = phi.space
    k = space.weight.k[0]
    v = space.weight.v[0]
    if not 0 <= r <= k + v:
        raise EvaluationError("non-critical exponent")
    f0 = _modulus_generator(space.field, modulus)
    if normalization == 2:
        raw = _raw_class_value(phi, modulus, alpha)
        acc = None
        for i in range(r + 1):
            coeff = _binom(r, i) * alpha ** (r - i) * f0 ** i * f0 ** v
            term = _smul(Fraction(coeff), raw.values[(k - i,)], raw.ctx)
            acc = term if acc is None else acc + term
        return acc
    if normalization == 1:
        # the untwisted chart integrates x1^r in a single dual slot
        post = (1, Fraction(alpha, f0), 0, 1)
        tw = space.evaluate_divisor(phi, Fraction(alpha, f0), INF, post=post)
        return tw.values[(k - r,)]
    raise EvaluationError("normalization must be 1 or 2")


def ev_phi(phi: ModularSymbol, chi: HeckeCharacter, group: RayClassGroup,
           normalization: int = 2):
    """Character-weighted sum of classical evaluations over the class group."""
    space = phi.space
    if not chi.conductor.divides(group.modulus):
        raise EvaluationError("character conductor must divide the modulus")
    r = sum(chi.infinity_type.values())  # single embedding over Q
    k = space.weight.k[0]
    v = space.weight.v[0]
    if not 0 <= r - v <= k:
        raise EvaluationError("non-critical character")
    acc = None
    for label in group.class_labels:
        alpha = group.representatives[label][0]
        c_y = chi.coset_constant(group, label)
        val = classical_intrinsic_integral(phi, group.modulus, alpha, r,
                                           normalization)
        term = c_y * _to_ctx(val, chi.ctx)
        acc = term if acc is None else acc + term
    return acc


def _to_ctx(value, ctx: PadicContext) -> PadicElement:
    if isinstance(value, PadicElement):
        if value.ctx is ctx or (value.ctx.p, value.ctx.upoly, value.ctx.epoly) == (
            ctx.p, ctx.upoly, ctx.epoly,
        ):
            return value
        return embed_qp(value, ctx)
    raise EvaluationError("expected a p-adic value")


# ---------------------------------------------------------------------------
# the ray class distribution
# ---------------------------------------------------------------------------

@dataclass
class ClassEvaluator:
    label: tuple
    alpha: int
    theta: MomentDistribution  # raw Psi({alpha/f0} - {inf})


class RayClassDistribution:
    """Per-class moment evaluators plus the eigenvalue normalization."""

    def __init__(self, psi: ModularSymbol, modulus: Modulus, group: RayClassGroup,
                 eigenvalue: PadicElement, ctx: PadicContext):
        space = psi.space
        field = space.field
        if any(n == 0 for n in modulus.exponents):
            raise EvaluationError("modulus must be divisible by every prime above p")
        self.space = space
        self.field = field
        self.modulus = modulus
        self.group = group
        self.ctx = ctx
        self.f0 = _modulus_generator(field, modulus)
        self.weight = space.weight
        self.eigenvalue = eigenvalue
        n = modulus.exponents[0]
        self.lam_f = eigenvalue ** n
        self.classes = {}
        for label in group.class_labels:
            alpha = group.representatives[label][0]
            theta = _raw_class_value(psi, modulus, alpha)
            self.classes[label] = ClassEvaluator(label, alpha, theta)

    # -- evaluators -------------------------------------------------------------

    def affine_evaluator(self, label) -> MomentDistribution:
        """The twisted distribution Psi({a/f0}-{inf}) | (1,a;0,f0)."""
        ce = self.classes[label]
        from .coefficients import Sigma0Matrix

        return ce.theta.act(Sigma0Matrix(self.field.p, ((1, ce.alpha, 0, self.f0),)))

    def intrinsic_moment(self, label, s: int) -> PadicElement:
        """Integral of x^s over the coset of the class (s >= 0, exact sum)."""
        if s < 0:
            raise EvaluationError("intrinsic moments implemented for s >= 0")
        ce = self.classes[label]
        v = self.weight.v[0]
        acc = None
        for i in range(min(s, ce.theta.M - 1) + 1):
            coeff = _binom(s, i) * ce.alpha ** (s - i) * self.f0 ** (i + v)
            if coeff == 0:
                continue
            term = ce.theta.moment_element((i,), self.ctx) * coeff
            acc = term if acc is None else acc + term
        if acc is None:
            acc = self.ctx.zero()
        if s >= ce.theta.M:
            # truncated tail: binomial terms beyond the stored moments carry
            # at least f0-valuation M, so cap the claimed precision there
            n = self.modulus.exponents[0]
            acc = acc.with_precision(min(acc.prec, ce.theta.M * n))
        return acc

    def coset_monomial(self, coarse_group: RayClassGroup, coarse_label, m: int,
                       normalized: bool = True) -> PadicElement:
        """Integral of 1_{coset} x^m for a coset of a coarser modulus."""
        acc = None
        for label in self.group.class_labels:
            if coarse_group.project_class(self.group, label) != coarse_label:
                continue
            term = self.intrinsic_moment(label, m)
            acc = term if acc is None else acc + term
        if acc is None:
            raise EvaluationError("no classes above the requested coset")
        if normalized:
            acc = acc * self.lam_f.inverse()
        return acc

    def evaluate_character(self, chi: HeckeCharacter) -> PadicElement:
        """mu(phi_{p-fin}) for a critical character of conductor dividing f."""
        if not chi.conductor.divides(self.modulus):
            raise EvaluationError("character conductor must divide the modulus")
        r = sum(chi.infinity_type.values())
        k = self.weight.k[0]
        v = self.weight.v[0]
        if not 0 <= r - v <= k:
            raise EvaluationError("non-critical character")
        acc = None
        for label in self.group.class_labels:
            c_y = chi.coset_constant(self.group, label)
            term = c_y * _to_ctx(self.intrinsic_moment(label, r), chi.ctx)
            acc = term if acc is None else acc + term
        lam_inv = _to_ctx(self.lam_f, chi.ctx).inverse()
        return acc * lam_inv

    # -- diagnostics / serialization ---------------------------------------------

    def growth_diagnostics(self) -> dict:
        """Filtration depths of the class evaluators (no uniqueness claim)."""
        return {
            _label_str(label): ce.theta.filtration_depth()
            for label, ce in self.classes.items()
        }

    def to_record(self) -> dict:
        table = {_label_str(lab): ce.alpha for lab, ce in self.classes.items()}
        rec = {
            "modulus": list(self.modulus.exponents),
            "f0": self.f0,
            "representative_table_hash": hashlib.sha256(
                json.dumps(table, sort_keys=True).encode()
            ).hexdigest(),
            "eigenvalue_digits": _digits(self.eigenvalue),
            "classes": [
                {
                    "label": _label_str(label),
                    "alpha": ce.alpha,
                    "moments": [
                        [list(idx), ce.theta.moments[idx], ce.theta.precs[idx]]
                        for idx in sorted(ce.theta.moments)
                    ],
                }
                for label, ce in sorted(self.classes.items(), key=lambda kv: _label_str(kv[0]))
            ],
        }
        rec["content_hash"] = hashlib.sha256(
            json.dumps(rec, sort_keys=True).encode()
        ).hexdigest()
        return rec


def _label_str(label) -> str:
    return json.dumps(label, sort_keys=True)


def _digits(elt: PadicElement) -> dict:
    return {
        "coeffs": [list(row) for row in elt.coeffs],
        "prec": elt.prec,
        "shift": elt.shift,
    }


def build_mu(psi: ModularSymbol, eigenvalue: PadicElement, modulus: Modulus,
             ctx: PadicContext, group: RayClassGroup | None = None,
             check_eigen: bool = True) -> RayClassDistribution:
    """The normalized ray class distribution of an eigen moment-symbol."""
    if psi.kind != "moments":
        raise EvaluationError("build_mu needs a moment-valued symbol")
    if check_eigen:
        from .lifting import eigen_residual, _eigen_int_rep

        template = psi.values[0]
        lam_rep = _eigen_int_rep(eigenvalue, template.N)
        res = eigen_residual(psi, lam_rep)
        if res is not None:
            raise EvaluationError(
                f"symbol is not an eigenvector at precision (residual v_p {res})"
            )
    field = psi.space.field
    if group is None:
        group = build_ray_class_group(field, modulus)
    return RayClassDistribution(psi, modulus, group, eigenvalue, ctx)


# ---------------------------------------------------------------------------
# interpolation identities
# ---------------------------------------------------------------------------

@dataclass
class MultiplierReport:
    product: PadicElement
    factors: dict
    sign_exponent: int
    pi_f_power: int


def interpolation_multiplier(chi: HeckeCharacter, eigenvalues: dict,
                             unramified_indices, weight) -> MultiplierReport:
    """prod over unramified primes of phi_pfin(pi)(1 - lam^{-1} phi(p)^{-1}).

    Also exposes the sign exponent sum(k over complex) + sum(k + j over real)
    and the uniformizer power attached to the conductor; the transcendental
    block of the headline identity is replaced by the classical evaluation
    the caller supplies.
    """
    field = chi.field
    ctx = chi.ctx
    prod = ctx.one()
    factors = {}
    for idx in unramified_indices:
        q = field.primes_above_p[idx]
        if chi.conductor.exponents[idx] != 0:
            raise EvaluationError("multiplier primes must avoid the conductor")
        gen = q.uniformizer_coords
        if not field.is_totally_positive(gen):
            raise EvaluationError("declared uniformizer must be totally positive")
        lam = _to_ctx(eigenvalues[q.name], ctx)
        phi_p = chi.ideal_value(gen, idx)
        z = chi.avatar_at_uniformizer(gen, idx) * (
            ctx.one() - lam.inverse() * phi_p.inverse()
        )
        factors[q.name] = z
        prod = prod * z
    r_total = sum(chi.infinity_type.values())
    sign_exp = 0
    for e in field.embeddings:
        k_e, v_e = weight.at(e.name)
        if e.kind == "complex":
            sign_exp += k_e
        elif e.kind == "real":
            sign_exp += k_e + (chi.infinity_type[e.name] - v_e)
    f0_power = 1
    for q, n in zip(field.primes_above_p, chi.conductor.exponents):
        f0_power *= (field.p ** n) ** r_total
    return MultiplierReport(prod, factors, sign_exp, f0_power)


def unramified_extension_identity(phi: ModularSymbol, chi: HeckeCharacter,
                                  prime_index: int, eigenvalues: dict,
                                  group_coarse: RayClassGroup,
                                  group_fine: RayClassGroup,
                                  check_eigen: bool = True) -> tuple:
    """Both sides of: sum over Cl(f p) = (phi(p) lam_p - 1) sum over Cl(f).

    Sums are the normalization-1 character-weighted evaluations; the symbol
    must be a Hecke eigensymbol at the prime.
    """
    field = phi.space.field
    q = field.primes_above_p[prime_index]
    if chi.conductor.exponents[prime_index] != 0:
        raise EvaluationError("the prime must avoid the conductor")
    if check_eigen and not _is_classical_eigen(phi, eigenvalues):
        raise EvaluationError("identity requires a Hecke eigensymbol")
    lhs = ev_phi(phi, chi, group_fine, normalization=1)
    rhs_sum = ev_phi(phi, chi, group_coarse, normalization=1)
    lam = _to_ctx(eigenvalues[q.name], chi.ctx)
    phi_p = chi.ideal_value(q.uniformizer_coords, prime_index)
    rhs = (phi_p * lam - chi.ctx.one()) * rhs_sum
    return lhs, rhs


def _is_classical_eigen(phi: ModularSymbol, eigenvalues: dict) -> bool:
    space = phi.space
    field = space.field
    lam = eigenvalues[field.primes_above_p[0].name]
    img = phi.hecke(field.p)
    diff = img - phi.map_values(lambda v: v.scale(lam))
    return all(v.is_zero() for v in diff.values)
