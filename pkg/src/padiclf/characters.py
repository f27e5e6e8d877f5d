"""Hecke characters of conductor dividing p^infinity, p-adically realized.

A character is constructed from data: a conductor, an infinity type, and
finite-order values on unit generators of the residue ring at the conductor.
All values live in a declared p-adic coefficient context from the start;
no complex-embedding arithmetic appears anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .fields import Interval, NumberField, SemilocalElement
from .padics import PadicContext, PadicElement, embed_qp
from .rayclass import Modulus, ResidueRing


class CharacterDataError(ValueError):
    pass


# ---------------------------------------------------------------------------
# infinity types
# ---------------------------------------------------------------------------

def conjugate_type(field: NumberField, r: dict) -> dict:
    out = {}
    for e in field.embeddings:
        if e.kind == "real":
            out[e.name] = r[e.name]
        elif e.kind == "complex":
            partner = next(
                x.name for x in field.embeddings if x.conjugate_of == e.name
            )
            out[e.name] = r[partner]
        else:
            out[e.name] = r[e.conjugate_of]
    return out


def is_parallel(field: NumberField, r: dict) -> bool:
    vals = [r[e.name] for e in field.embeddings]
    return all(v == vals[0] for v in vals)


def bracket_value(field: NumberField, r: dict) -> Fraction:
    """The scalar b with r + conj(r) = 2 b (1, ..., 1)."""
    cr = conjugate_type(field, r)
    total = {e.name: r[e.name] + cr[e.name] for e in field.embeddings}
    vals = list(total.values())
    if any(v != vals[0] for v in vals):
        raise CharacterDataError("r + conj(r) is not parallel")
    return Fraction(vals[0], 2)


def _interval_pow(iv: Interval, n: int) -> Interval:
    out = Interval(Fraction(1), Fraction(1))
    for _ in range(n):
        out = out * iv
    return out


def _abs_product_not_one(field: NumberField, unit, r: dict) -> bool:
    """Certify prod_sigma |sigma(u)|^{r_sigma} != 1 by interval refinement.

    Works with squared absolute values; for a single complex pair the
    squared modulus is |N(u)| / prod of real embeddings, so everything
    reduces to exact rational intervals.  Returns True when certified.
    """
    reals = [e for e in field.embeddings if e.kind == "real"]
    complexes = [e for e in field.embeddings if e.kind == "complex"]
    if len(complexes) > 1:
        raise CharacterDataError("modulus certificates support one complex pair")
    norm_abs = abs(Fraction(field.norm(unit)))
    for depth in (0, 32, 128, 512, 2048):
        num = Interval(Fraction(1), Fraction(1))
        den = Interval(Fraction(1), Fraction(1))
        bad = False
        real_ivs = {}
        for e in reals:
            iv = field.real_embedding_interval(unit, e.name, depth)
            if iv.contains_zero():
                bad = True
                break
            real_ivs[e.name] = _abs_interval(iv)
        if bad:
            continue
        for e in reals:
            sq = real_ivs[e.name] * real_ivs[e.name]
            ex = r[e.name]
            if ex >= 0:
                num = num * _interval_pow(sq, ex)
            else:
                den = den * _interval_pow(sq, -ex)
        if complexes:
            e = complexes[0]
            partner = next(x.name for x in field.embeddings if x.conjugate_of == e.name)
            ex = r[e.name] + r[partner]
            real_prod = Interval(Fraction(1), Fraction(1))
            for lab, iv in real_ivs.items():
                real_prod = real_prod * iv
            n_iv = Interval(norm_abs, norm_abs)
            if ex >= 0:
                num = num * _interval_pow(n_iv, ex)
                den = den * _interval_pow(real_prod, ex)
            else:
                den = den * _interval_pow(n_iv, -ex)
                num = num * _interval_pow(real_prod, -ex)
        if num.lo > den.hi or num.hi < den.lo:
            return True
    return False


def _abs_interval(iv: Interval) -> Interval:
    if iv.lo >= 0:
        return iv
    if iv.hi <= 0:
        return Interval(-iv.hi, -iv.lo)
    return Interval(Fraction(0), max(-iv.lo, iv.hi))


def is_admissible_infinity_type(field: NumberField, r: dict, bound: int | None = None) -> bool:
    """Whether some power of every unit is killed by the type exponents.

    Parallel types are admissible (norm powers); fields without real
    embeddings accept everything (finite unit group).  Otherwise each
    candidate is rejected through an exact certificate: either the
    archimedean modulus of a unit power differs from 1 (interval
    certified), or the rotation part never becomes rational.
    """
    r1 = field.signature[0]
    if is_parallel(field, r):
        return True
    if r1 == 0:
        return True
    units = list(field.fundamental_units)
    if not units:
        return is_parallel(field, r)
    torsion_order = field.torsion_unit["order"] if field.torsion_unit else 2
    bound = bound if bound is not None else 2 * torsion_order * 12
    reals = [e for e in field.embeddings if e.kind == "real"]
    complexes = [e for e in field.embeddings if e.kind == "complex"]
    for eps in units:
        if field.signature == (len(reals), 0):
            # totally real: nonparallel exponents meet the modulus certificate
            if _abs_product_not_one(field, eps, r):
                return False
            raise CharacterDataError(
                "cannot certify admissibility: unexpected multiplicative relation"
            )
        # mixed signature (rank-one shapes): split modulus and rotation parts
        c0 = complexes[0].name
        c0bar = next(x.name for x in field.embeddings if x.conjugate_of == c0)
        s = 2 * sum(r[e.name] for e in reals) - len(reals) * (r[c0] + r[c0bar])
        if s != 0:
            if _abs_product_not_one(field, eps, r):
                return False
            raise CharacterDataError(
                "cannot certify admissibility: modulus certificate failed"
            )
        m = r[c0] - r[c0bar]
        if m == 0:
            continue  # this unit cannot obstruct; parallel was excluded above
        # rotation part: eps^{n m} must land in Q for some n <= bound
        for n in range(1, bound + 1):
            power = field.power(eps, abs(n * m))
            if all(c == 0 for c in power[1:]):
                return True
        return False
    # every unit is killed by some bounded power
    return True


# ---------------------------------------------------------------------------
# the additive character on ideles supported at primes above p
# ---------------------------------------------------------------------------

def unramified_traces(upoly):
    """Traces of y^j on Z[y]/(u) for j < deg u, via Newton's identities."""
    f = len(upoly) - 1
    # power sums of the roots of the monic polynomial u
    ps = [f]
    for k in range(1, f):
        s = -k * upoly[f - k]
        for i in range(1, k):
            s -= upoly[f - i] * ps[k - i]
        ps.append(s)
    return ps


def local_trace_mod(field: NumberField, prime, coeff_vec, modulus: int) -> int:
    """Tr_{F_v/Q_p} of an integral local element given by its y-coefficients."""
    traces = unramified_traces(prime.unramified_poly)
    return sum(c * t for c, t in zip(coeff_vec, traces)) % modulus


def additive_character_exponent(field: NumberField, prime, local_unit, n: int) -> int:
    """Exponent m with e_F(local_unit * pi^{-n} at this prime) = zeta_{p^n}^m.

    local_unit is an integral PadicElement at the prime; the component of
    the idele is local_unit * p^{-n} after the unit part of the declared
    uniformizer has been folded into local_unit by the caller.
    """
    pk = field.p ** n
    vec = tuple(c % pk for c in local_unit.integral_coeffs()[0])
    tr = local_trace_mod(field, prime, vec, pk)
    return (-tr) % pk


# ---------------------------------------------------------------------------
# Hecke characters
# ---------------------------------------------------------------------------

class HeckeCharacter:
    """Finite-order residue data plus an infinity type, valued in a context.

    gen_values: list of (residue_element, value) pairs whose first entries
    generate the unit group of O_F/f.  The well-definedness constraint on
    the narrow ray class tower -- triviality on totally positive units --
    is enforced at construction.
    """

    def __init__(self, field: NumberField, conductor: Modulus, infinity_type: dict,
                 gen_values, ctx: PadicContext, name: str = ""):
        self.field = field
        self.conductor = conductor
        self.infinity_type = dict(infinity_type)
        self.ctx = ctx
        self.name = name or "char"
        self.ring = ResidueRing(field, conductor)
        self._table = self._span_table(gen_values)
        self._check_unit_compatibility()
        self._check_primitivity()

    # -- construction ---------------------------------------------------------

    def _span_table(self, gen_values):
        ring = self.ring
        one = ring.one() if not self.conductor.is_trivial() else ()
        table = {one: self.ctx.one()}
        if self.conductor.is_trivial():
            return table
        frontier = [one]
        gens = [(tuple(g), v) for g, v in gen_values]
        while frontier:
            x = frontier.pop()
            for g, val in gens:
                y = ring.mul(x, g)
                newval = table[x] * val
                if y in table:
                    if not (table[y] - newval).is_zero_at_precision():
                        raise CharacterDataError(
                            "generator values are inconsistent on the unit group"
                        )
                else:
                    table[y] = newval
                    frontier.append(y)
        if len(table) != ring.unit_count():
            raise CharacterDataError(
                f"generators span {len(table)} of {ring.unit_count()} units"
            )
        return table

    def _check_unit_compatibility(self):
        for u in self.field.totally_positive_unit_generators:
            val = self.avatar_at_global(u)
            if not val.eq_at_precision(1):
                raise CharacterDataError(
                    "character is not trivial on the totally positive units"
                )

    def _check_primitivity(self):
        """Declared conductor must be minimal: psi nontrivial below each prime."""
        if self.conductor.is_trivial():
            return
        for idx, n in enumerate(self.conductor.exponents):
            if n == 0:
                continue
            coarser = Modulus(tuple(
                m - 1 if i == idx else m for i, m in enumerate(self.conductor.exponents)
            ))
            coarse_ring = ResidueRing(self.field, coarser)
            nontrivial = False
            for w, val in self._table.items():
                if _residue_projection(self.field, self.ring, coarse_ring, w) == (
                    coarse_ring.one() if coarse_ring.active else ()
                ):
                    if not val.eq_at_precision(1):
                        nontrivial = True
                        break
            if not nontrivial:
                raise CharacterDataError(
                    f"conductor is not minimal at prime index {idx}"
                )

    # -- values -----------------------------------------------------------------

    def value_on_residue(self, x) -> PadicElement:
        if self.conductor.is_trivial():
            return self.ctx.one()
        return self._table[tuple(x)]

    def weight_image(self, z: SemilocalElement) -> PadicElement:
        """w_p^r(z) embedded into the coefficient context."""
        img = self.field.weight_character_image(z, self.infinity_type)
        return embed_qp(img, self.ctx)

    def avatar_at_unit_vector(self, z: SemilocalElement) -> PadicElement:
        """phi_{p-fin} at the class with p-chart z (a semilocal unit)."""
        if not z.is_unit():
            raise CharacterDataError("avatar needs a unit chart vector")
        red = _reduce_semilocal(self.field, self.ring, z)
        return self.value_on_residue(red) * self.weight_image(z)

    def avatar_at_global(self, coords) -> PadicElement:
        return self.avatar_at_unit_vector(self.field.embed_global(coords))

    def coset_constant(self, group, label) -> PadicElement:
        """Finite-order part of the character on a ray class.

        The avatar restricted to the coset of the class is this constant
        times the intrinsic monomial x^r, so evaluators that integrate the
        full monomial over the coset pair with exactly this factor.
        """
        if not self.conductor.divides(group.modulus):
            raise CharacterDataError("conductor must divide the evaluation modulus")
        rep = group.representatives[label]
        if self.conductor.is_trivial():
            return self.ctx.one()
        red = self.ring.reduce_global(rep)
        return self.value_on_residue(red)

    def ideal_value(self, generator_coords, prime_index: int | None = None) -> PadicElement:
        """phi at a prime ideal given by a totally positive generator.

        prime_index identifies a prime above p (required when the ideal lies
        above p; it must then be coprime to the conductor).
        """
        field = self.field
        if not field.is_totally_positive(generator_coords):
            raise CharacterDataError("ideal value needs a totally positive generator")
        g = field.embed_global(generator_coords)
        if prime_index is None:
            z = g.inverse()
            return self.avatar_at_unit_vector(z)
        if self.conductor.exponents[prime_index] != 0:
            return self.ctx.zero()
        comps = []
        for i, (q, comp) in enumerate(zip(field.primes_above_p, g.inverse().components)):
            if i == prime_index:
                local = field.local_data(q, comp.prec)
                comps.append(comp * local.uniformizer_image)
            else:
                comps.append(comp)
        z = SemilocalElement(field, comps)
        pi_vec = field.uniformizer_power(
            tuple(1 if i == prime_index else 0 for i in range(len(field.primes_above_p)))
        )
        return self.avatar_at_unit_vector(z) * self.weight_image(pi_vec).inverse()

    def avatar_at_uniformizer(self, generator_coords, prime_index: int) -> PadicElement:
        """phi_{p-fin}(pi_p) = phi(p) * w^r(pi_p image)."""
        pi_vec = self.field.uniformizer_power(
            tuple(1 if i == prime_index else 0 for i in range(len(self.field.primes_above_p)))
        )
        return self.ideal_value(generator_coords, prime_index) * self.weight_image(pi_vec)

    def eps_value(self) -> PadicElement:
        """epsilon_phi at the all-minus sign vector, via a global unit lift.

        Only the full sign flip is realized (degree-one fields use -1); this
        is the only epsilon value the q = 1 pipeline consumes.
        """
        field = self.field
        minus_one = tuple(-1 if i == 0 else 0 for i in range(field.degree))
        return self.avatar_at_global_signed(minus_one)

    def avatar_at_global_signed(self, coords) -> PadicElement:
        """Avatar at the sign-class of a global unit (any signs)."""
        return self.avatar_at_unit_vector(self.field.embed_global(coords))


def _reduce_semilocal(field: NumberField, ring: ResidueRing, z: SemilocalElement):
    parts = []
    by_name = {q.name: comp for q, comp in zip(field.primes_above_p, z.components)}
    for q, n, pk, _ in ring._basis_images:
        comp = by_name[q.name]
        parts.append(tuple(c % pk for c in comp.integral_coeffs()[0]))
    return tuple(parts)


def _residue_projection(field, fine_ring: ResidueRing, coarse_ring: ResidueRing, x):
    if not coarse_ring.active:
        return ()
    xs = {q.name: part for (q, n, pk, _), part in zip(fine_ring._basis_images, x)}
    parts = []
    for q, n, pk, _ in coarse_ring._basis_images:
        parts.append(tuple(c % (field.p ** n) for c in xs[q.name]))
    return tuple(parts)


# ---------------------------------------------------------------------------
# Gauss sums
# ---------------------------------------------------------------------------

@dataclass
class DifferentChoice:
    """A finite idele representing the different: global generator + unit twist.

    The idele has component generator * lift(unit_twist) at primes dividing
    the conductor and generator elsewhere; unit_twist = None means no twist.
    """

    generator_coords: tuple
    unit_twist: tuple | None = None


def _phi_at_different_inverse(chi: HeckeCharacter, d: DifferentChoice) -> PadicElement:
    field = chi.field
    g = d.generator_coords
    signs = field.real_embedding_signs(g) if field.signature[0] else {}
    value = chi.weight_image(field.embed_global(g))
    if any(s < 0 for s in signs.values()):
        if field.degree != 1:
            raise CharacterDataError(
                "sign corrections for the different need a degree-one field "
                "or a totally positive generator"
            )
        # phi_infty(g) = eps_phi(sign g) * w^r(g)
        value = value * chi.eps_value()
    if d.unit_twist is not None:
        value = value * chi.value_on_residue(d.unit_twist).inverse()
    return value


def gauss_sum(chi: HeckeCharacter, d: DifferentChoice | None = None,
              zeta_twist=None) -> PadicElement:
    """tau(chi): the conductor-level character sum against e_F.

    zeta_twist (a global integral element) computes the twisted sum instead;
    the untwisted sum is the zeta_twist = 1 case.
    """
    field = chi.field
    ctx = chi.ctx
    cond = chi.conductor
    if d is None:
        d = DifferentChoice(field.different_generator)
    if cond.is_trivial():
        return _phi_at_different_inverse(chi, d)
    n_max = max(cond.exponents)
    zeta = _zeta_of_level(ctx, field.p, n_max)
    ring = chi.ring
    # per-prime fixed factors: (g_D * u)^{-1} * (unit part of pi_v)^{-n_v}
    fixed = []
    for (q, n, pk, _), amb in zip(ring._basis_images, _twist_parts(ring, d)):
        local = field.local_data(q, n + 4)
        g_img = _eval_local(field, q, d.generator_coords, n + 4)
        w_unit = local.uniformizer_image * local.ctx.from_int(field.p).inverse()
        factor = (g_img * amb).inverse() * w_unit ** (-n)
        fixed.append((q, n, factor))
    twist_img = None
    if zeta_twist is not None:
        twist_img = [
            _eval_local(field, q, zeta_twist, n + 4) for (q, n, _) in fixed
        ]
    total = ctx.zero()
    zpows = {}
    for b, psi_val in chi._table.items():
        term_exp_total = 0
        for j, ((q, n, factor), b_part) in enumerate(zip(fixed, b)):
            local = field.local_data(q, n + 4)
            b_img = local.ctx.from_vector([list(b_part)], n + 4)
            y = b_img * factor
            if twist_img is not None:
                y = y * twist_img[j]
            m = additive_character_exponent(field, q, y, n)
            term_exp_total += m * field.p ** (n_max - n)
        expo = term_exp_total % field.p ** n_max
        if expo not in zpows:
            zpows[expo] = zeta ** expo
        total = total + psi_val * zpows[expo]
    return _phi_at_different_inverse(chi, d) * total


def _twist_parts(ring: ResidueRing, d: DifferentChoice):
    if d.unit_twist is None:
        for q, n, pk, _ in ring._basis_images:
            yield ring.field.local_data(q, n + 4).ctx.one()
    else:
        for (q, n, pk, _), part in zip(ring._basis_images, d.unit_twist):
            yield ring.field.local_data(q, n + 4).ctx.from_vector([list(part)], n + 4)


def _eval_local(field: NumberField, prime, coords, prec: int) -> PadicElement:
    local = field.local_data(prime, prec)
    out = local.ctx.zero(prec)
    for c, img in zip(coords, local.basis_images):
        if c:
            out = out + img * c
    return out


def _zeta_of_level(ctx: PadicContext, p: int, n: int) -> PadicElement:
    from .padics import zeta_ppower

    return zeta_ppower(ctx, p, n)


def twisted_gauss_sum(chi: HeckeCharacter, zeta_coords,
                      d: DifferentChoice | None = None) -> PadicElement:
    return gauss_sum(chi, d=d, zeta_twist=zeta_coords)
