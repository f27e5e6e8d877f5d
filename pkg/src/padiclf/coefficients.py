"""Weights, polynomial duals, and truncated moment distributions.

Coefficients come in two flavours sharing one transition-matrix engine:

* PolyDualValues -- finite duals of the degree-k polynomial modules, with
  values either exact Fractions or p-adic elements;
* MomentDistribution -- truncated distributions stored as integer moments
  with a per-degree precision profile (degree t kept mod p^{N - t} on the
  unramified coordinate lines used by the q = 1 backends).

Matrices act per coordinate line; multi-coordinate moments are tensors of
the one-dimensional transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .padics import PadicContext, PadicElement, int_valuation


class CoefficientError(ValueError):
    pass


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Weight:
    """k (nonnegative, conjugation-symmetric) and v with k + 2v parallel."""

    k: tuple
    v: tuple
    labels: tuple

    @classmethod
    def from_field(cls, field, k: dict, v: dict) -> "Weight":
        labels = tuple(e.name for e in field.embeddings)
        kk = tuple(k[l] for l in labels)
        vv = tuple(v[l] for l in labels)
        if any(x < 0 for x in kk):
            raise CoefficientError("weight k must be nonnegative")
        # conjugation symmetry of k
        for e in field.embeddings:
            if e.kind == "complex_conj":
                i = labels.index(e.name)
                j = labels.index(e.conjugate_of)
                if kk[i] != kk[j]:
                    raise CoefficientError("k must be conjugation symmetric")
        tot = [a + 2 * b for a, b in zip(kk, vv)]
        if any(t != tot[0] for t in tot):
            raise CoefficientError("k + 2v must be parallel")
        return cls(kk, vv, labels)

    def at(self, label: str):
        i = self.labels.index(label)
        return self.k[i], self.v[i]

    def min_k_at_prime(self, field, prime) -> int:
        return min(self.k[self.labels.index(l)] for l in prime.embedding_labels)

    def v_sum_at_prime(self, field, prime) -> int:
        return sum(self.v[self.labels.index(l)] for l in prime.embedding_labels)

    def small_slope_bound(self, field, prime) -> Fraction:
        return Fraction(
            self.min_k_at_prime(field, prime) + self.v_sum_at_prime(field, prime) + 1,
            prime.e,
        )


def is_small_slope(field, weight: Weight, eigenvalues: dict) -> bool:
    """Every U_p eigenvalue slope strictly below (k0 + v + 1)/e."""
    for q in field.primes_above_p:
        lam = eigenvalues[q.name]
        if isinstance(lam, PadicElement):
            h = lam.valuation()
        else:
            h = Fraction(int_valuation(int(lam), field.p))
        if h is None:
            return False
        if not h < weight.small_slope_bound(field, q):
            return False
    return True


# ---------------------------------------------------------------------------
# matrices in the p-triangular monoid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sigma0Matrix:
    """Integer 2x2 matrices per coordinate line: c = 0 mod p, a a unit."""

    p: int
    coords: tuple  # tuple of (a, b, c, d) int 4-tuples

    def __post_init__(self):
        for a, b, c, d in self.coords:
            if c % self.p != 0:
                raise CoefficientError("lower-left entry must vanish mod p")
            if a % self.p == 0:
                raise CoefficientError("upper-left entry must be a unit")
            if a * d - b * c == 0:
                raise CoefficientError("matrix must be invertible")

    @classmethod
    def scalar_line(cls, p, a, b, c, d, ncoords=1):
        return cls(p, tuple((a, b, c, d) for _ in range(ncoords)))

    def compose(self, other: "Sigma0Matrix") -> "Sigma0Matrix":
        out = []
        for (a1, b1, c1, d1), (a2, b2, c2, d2) in zip(self.coords, other.coords):
            out.append((
                a1 * a2 + b1 * c2,
                a1 * b2 + b1 * d2,
                c1 * a2 + d1 * c2,
                c1 * b2 + d1 * d2,
            ))
        return Sigma0Matrix(self.p, tuple(out))


# ---------------------------------------------------------------------------
# transition matrices (one coordinate line)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _moment_transition(abcd, k, v, M, p, K):
    """T[m][j] = coefficient of z^j in det^v (b+dz)^m (a+cz)^(k-m), mod p^K.

    The expansion converges because c = 0 mod p; truncation at degree M
    drops terms of valuation at least M (audited by the caller's profile).
    """
    a, b, c, d = abcd
    pk = p ** K
    det = (a * d - b * c) % pk
    if v >= 0:
        detv = pow(det, v, pk)
    else:
        vd = int_valuation(det, p)
        if vd:
            raise CoefficientError(
                "negative weight twist with non-unit determinant is unsupported"
            )
        detv = pow(pow(det, -1, pk), -v, pk)
    # powers of (a + cz) as truncated series
    inv_a = pow(a, -1, pk)
    neg = [(inv_a if j == 0 else 0) for j in range(M)]
    if c % pk:
        q = (-c * inv_a) % pk
        acc = inv_a
        for j in range(1, M):
            acc = acc * q % pk
            neg[j] = acc
    pos_pows = {}  # exponent -> series of (a+cz)^exponent
    neg_pows = {0: [1] + [0] * (M - 1)}

    def series_mul(x, y):
        out = [0] * M
        for i, xi in enumerate(x):
            if xi:
                for j in range(M - i):
                    if y[j]:
                        out[i + j] = (out[i + j] + xi * y[j]) % pk
        return out

    def ac_power(exp):
        if exp >= 0:
            if exp not in pos_pows:
                series = [1] + [0] * (M - 1)
                base = [a % pk, c % pk] + [0] * (M - 2)
                e = exp
                while e:
                    if e & 1:
                        series = series_mul(series, base)
                    e >>= 1
                    if e:
                        base = series_mul(base, base)
                pos_pows[exp] = series
            return pos_pows[exp]
        if exp not in neg_pows:
            series = [1] + [0] * (M - 1)
            e = -exp
            base = list(neg)
            while e:
                if e & 1:
                    series = series_mul(series, base)
                e >>= 1
                if e:
                    base = series_mul(base, base)
            neg_pows[exp] = series
        return neg_pows[exp]

    rows = []
    for m in range(M):
        # (b + d z)^m as a polynomial
        bd = [0] * M
        coeff = 1
        for j in range(0, min(m, M - 1) + 1):
            bd[j] = coeff * pow(b, m - j, pk) * pow(d, j, pk) % pk if j <= m else 0
            coeff = coeff * (m - j) // (j + 1)
        series = series_mul(bd, ac_power(k - m))
        rows.append(tuple(x * detv % pk for x in series))
    return tuple(rows)


@lru_cache(maxsize=4096)
def _dual_transition(abcd, k, v):
    """c[j][m] over Q: gamma . X^(k-j) Y^j = sum_m c[j][m] X^(k-m) Y^m.

    Entries may be Fractions when the matrix has rational entries.
    """
    a, b, c, d = abcd
    det = a * d - b * c
    detv = Fraction(det) ** v
    rows = []
    for j in range(k + 1):
        # (bY + dX)^(k-j) (aY + cX)^j ; collect X^(k-m) Y^m
        poly = {0: detv}  # key: power of Y accumulated so far
        out = [Fraction(0)] * (k + 1)
        # expand the two binomials directly
        for s in range(k - j + 1):
            c1 = _binom(k - j, s) * Fraction(d) ** (k - j - s) * Fraction(b) ** s
            for t in range(j + 1):
                c2 = _binom(j, t) * Fraction(c) ** (j - t) * Fraction(a) ** t
                ypow = s + t
                out[ypow] += detv * c1 * c2
        rows.append(tuple(out))
    return tuple(rows)


def _binom(n, k):
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


# ---------------------------------------------------------------------------
# polynomial duals
# ---------------------------------------------------------------------------

class PolyDualValues:
    """Values on the monomials prod X_i^{k_i - j_i} Y_i^{j_i}, 0 <= j <= k.

    Entries are Fractions (exact mode) or PadicElements sharing a context.
    """

    __slots__ = ("coord_weights", "values", "ctx")

    def __init__(self, coord_weights, values, ctx=None):
        self.coord_weights = tuple(coord_weights)  # (k_i, v_i) per line
        self.values = dict(values)
        self.ctx = ctx
        expected = set(self.index_tuples())
        if set(self.values) != expected:
            raise CoefficientError("dual values must cover all multidegrees")

    def index_tuples(self):
        ranges = [range(k + 1) for k, _ in self.coord_weights]
        return product(*ranges)

    @classmethod
    def zero(cls, coord_weights, ctx=None):
        zero = Fraction(0) if ctx is None else ctx.zero()
        vals = {}
        ranges = [range(k + 1) for k, _ in coord_weights]
        for idx in product(*ranges):
            vals[idx] = zero
        return cls(coord_weights, vals, ctx)

    def map_values(self, fn, ctx=None):
        return PolyDualValues(
            self.coord_weights, {k: fn(v) for k, v in self.values.items()},
            ctx if ctx is not None else self.ctx,
        )

    def __add__(self, other):
        return PolyDualValues(
            self.coord_weights,
            {k: self.values[k] + other.values[k] for k in self.values},
            self.ctx or other.ctx,
        )

    def __sub__(self, other):
        return PolyDualValues(
            self.coord_weights,
            {k: self.values[k] - other.values[k] for k in self.values},
            self.ctx or other.ctx,
        )

    def scale(self, s):
        return PolyDualValues(
            self.coord_weights, {k: _smul(s, v, self.ctx) for k, v in self.values.items()},
            self.ctx,
        )

    def __neg__(self):
        return self.scale(-1)

    def act(self, matrix: "Sigma0Matrix | tuple"):
        """Right action (P|gamma)(f) = P(gamma . f); gamma per coordinate."""
        coords = matrix.coords if isinstance(matrix, Sigma0Matrix) else matrix
        transitions = [
            _dual_transition(tuple(co), k, v)
            for co, (k, v) in zip(coords, self.coord_weights)
        ]
        out = {}
        for jidx in self.index_tuples():
            acc = None
            for midx in self.index_tuples():
                coeff = Fraction(1)
                for t, j_i, m_i in zip(transitions, jidx, midx):
                    coeff *= t[j_i][m_i]
                    if coeff == 0:
                        break
                if coeff == 0:
                    continue
                term = _smul(coeff, self.values[midx], self.ctx)
                acc = term if acc is None else acc + term
            out[jidx] = acc if acc is not None else _zero_like(self)
        return PolyDualValues(self.coord_weights, out, self.ctx)

    def is_zero(self, check=None) -> bool:
        for v in self.values.values():
            if isinstance(v, Fraction) or isinstance(v, int):
                if v != 0:
                    return False
            else:
                if not v.is_zero_at_precision():
                    return False
        return True

    def __repr__(self):
        return f"PolyDual({self.values})"


def _zero_like(dual: PolyDualValues):
    return Fraction(0) if dual.ctx is None else dual.ctx.zero()


def _smul(scalar, value, ctx):
    if isinstance(scalar, PadicElement):
        if isinstance(value, (Fraction, int)):
            return scalar * scalar.ctx.from_fraction(Fraction(value))
        return value * scalar
    if isinstance(value, (Fraction, int)):
        return Fraction(scalar) * value
    s = Fraction(scalar)
    if s.denominator == 1:
        return value * int(s)
    return value * ctx.from_fraction(s, value.prec + 2 * ctx.e)


# ---------------------------------------------------------------------------
# moment distributions
# ---------------------------------------------------------------------------

class MomentDistribution:
    """Truncated distribution: integer moments with a precision profile.

    Moments are indexed by multidegrees of total degree < M over the split
    coordinate lines; the moment of total degree t is carried modulo
    p^{profile(t)} with profile(t) = max(N - t, 0) plus the global working
    pad.  Actions recompute honest precisions and then cap at the profile.
    """

    __slots__ = ("p", "N", "M", "coord_weights", "moments", "precs")

    def __init__(self, p, N, M, coord_weights, moments, precs=None):
        self.p = p
        self.N = N
        self.M = M
        self.coord_weights = tuple(coord_weights)
        if precs is None:
            precs = {idx: self.profile(sum(idx)) for idx in moments}
        self.precs = dict(precs)
        self.moments = {
            idx: (m % (p ** self.precs[idx]) if self.precs[idx] > 0 else 0)
            for idx, m in moments.items()
        }
        expected = set(self.index_tuples(len(self.coord_weights), M))
        if set(self.moments) != expected:
            raise CoefficientError("moment vector must cover all multidegrees")

    @staticmethod
    def index_tuples(ncoords, M):
        def rec(n, budget):
            if n == 0:
                yield ()
                return
            for first in range(budget + 1):
                for rest in rec(n - 1, budget - first):
                    yield (first,) + rest
        return rec(ncoords, M - 1)

    def profile(self, t: int) -> int:
        return max(self.N - t, 0)

    @classmethod
    def zero(cls, p, N, M, coord_weights):
        ncoords = len(coord_weights)
        moments = {idx: 0 for idx in cls.index_tuples(ncoords, M)}
        return cls(p, N, M, coord_weights, moments)

    def copy_with(self, moments, precs):
        return MomentDistribution(self.p, self.N, self.M, self.coord_weights,
                                  moments, precs)

    def __add__(self, other):
        moments = {}
        precs = {}
        for idx in self.moments:
            precs[idx] = min(self.precs[idx], other.precs[idx])
            moments[idx] = self.moments[idx] + other.moments[idx]
        return self.copy_with(moments, precs)

    def __sub__(self, other):
        moments = {}
        precs = {}
        for idx in self.moments:
            precs[idx] = min(self.precs[idx], other.precs[idx])
            moments[idx] = self.moments[idx] - other.moments[idx]
        return self.copy_with(moments, precs)

    def __neg__(self):
        return self.copy_with({k: -v for k, v in self.moments.items()}, self.precs)

    def scale_int(self, s: int):
        vs = int_valuation(s, self.p)
        if vs is None:
            return self.zero(self.p, self.N, self.M, self.coord_weights)
        moments = {k: v * s for k, v in self.moments.items()}
        precs = {k: self.precs[k] + vs for k in self.precs}
        return self.copy_with(moments, precs)

    def scale_unit_inverse(self, s: int):
        """Multiply by s^{-1} for a p-adic unit integer s."""
        if s % self.p == 0:
            raise CoefficientError("inverse scaling needs a unit")
        moments = {}
        for k, v in self.moments.items():
            pk = self.p ** self.precs[k]
            moments[k] = v * pow(s, -1, pk) % pk if self.precs[k] > 0 else 0
        return self.copy_with(moments, self.precs)

    def divide_exact(self, s: int):
        """Divide by an integer with p-part; precision drops accordingly."""
        vs = int_valuation(s, self.p)
        unit = s // self.p ** vs
        moments = {}
        precs = {}
        for k, v in self.moments.items():
            prec = self.precs[k] - vs
            if prec <= 0:
                precs[k] = 0
                moments[k] = 0
                continue
            pv = self.p ** vs
            if v % pv:
                raise CoefficientError("moment not divisible; iteration diverged")
            moments[k] = (v // pv) * pow(unit, -1, self.p ** prec)
            precs[k] = prec
        return self.copy_with(moments, precs)

    def act(self, matrix: "Sigma0Matrix | tuple", audit: bool = False):
        coords = matrix.coords if isinstance(matrix, Sigma0Matrix) else matrix
        K = max(self.precs.values()) + 1
        transitions = [
            _moment_transition(tuple(co), k, v, self.M, self.p, K)
            for co, (k, v) in zip(coords, self.coord_weights)
        ]
        ncoords = len(self.coord_weights)
        moments = dict(self.moments)
        precs = dict(self.precs)
        for axis in range(ncoords):
            moments, precs = self._apply_axis(moments, precs, transitions[axis], axis)
        out_m = {}
        out_p = {}
        for idx in moments:
            cap = self.profile(sum(idx))
            if audit and precs[idx] < cap:
                raise CoefficientError(
                    f"action broke the precision profile at {idx}: "
                    f"{precs[idx]} < {cap}"
                )
            out_p[idx] = min(precs[idx], cap)
            out_m[idx] = moments[idx]
        return self.copy_with(out_m, out_p)

    def _apply_axis(self, moments, precs, T, axis):
        p = self.p
        new_m = {}
        new_p = {}
        for idx in moments:
            others = idx[:axis] + idx[axis + 1 :]
            m_i = idx[axis]
            acc = 0
            prec_out = None
            row = T[m_i]
            for j in range(self.M - sum(others)):
                src = idx[:axis] + (j,) + idx[axis + 1 :]
                t = row[j]
                if t == 0:
                    continue
                vt = int_valuation(t, p)
                cand = (vt if vt is not None else 10 ** 9) + precs[src]
                prec_out = cand if prec_out is None else min(prec_out, cand)
                acc += t * moments[src]
            # truncation tail: degrees >= M contribute at valuation >= M - m_i?
            # the series tail of (a+cz)^(k-m) has valuation >= M in z-degree,
            # each carrying c-powers of valuation >= degree - m; conservatively
            # cap by the profile in act().
            if prec_out is None:
                prec_out = self.profile(0) + self.M
            new_p[idx] = prec_out
            new_m[idx] = acc
        return new_m, new_p

    # -- conversions -----------------------------------------------------------

    def moment(self, idx) -> int:
        return self.moments[tuple(idx)]

    def moment_element(self, idx, ctx: PadicContext) -> PadicElement:
        idx = tuple(idx)
        return ctx.from_int(self.moments[idx], self.precs[idx] * ctx.e)

    def specialize(self, ctx: PadicContext) -> PolyDualValues:
        """rho: dual value at X^{k-j} Y^j is the moment of z^{k-j}."""
        vals = {}
        for jidx in product(*[range(k + 1) for k, _ in self.coord_weights]):
            midx = tuple(k - j for (k, _), j in zip(self.coord_weights, jidx))
            vals[jidx] = self.moment_element(midx, ctx)
        return PolyDualValues(self.coord_weights, vals, ctx)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.moments.values())

    def filtration_depth(self) -> int:
        """Smallest claimed precision over the stored moments."""
        return min(self.precs.values())

    def max_residual_valuation(self) -> int | None:
        """min over moments of v_p(moment); None if identically zero."""
        best = None
        for idx, v in self.moments.items():
            if v == 0:
                continue
            val = int_valuation(v, self.p)
            best = val if best is None else min(best, val)
        return best

    def __repr__(self):
        return f"Moments({self.moments})"


def star_twist_request(weight: Weight, coord_labels, scalar, exponent: dict):
    """Monomial request for the star twist of a coset character function.

    Input data (constant, exponent r, modulus) describes psi = c * z^r on a
    coset; the star twist pairs it with the moment of z^{k+v-r}.  Returns
    (exponent tuple, scalar): request the moment at k + v - r per line.
    """
    idx = []
    for lab in coord_labels:
        k, v = weight.at(lab)
        r = exponent[lab]
        e = k + v - r
        if e < 0:
            raise CoefficientError("non-critical exponent: r exceeds k + v")
        idx.append(e)
    return tuple(idx), scalar


def act_on_polynomial(matrix_coords, coord_weights, poly: dict) -> dict:
    """Left weight action on polynomials, indexed like the dual: the input
    maps multidegrees j to the coefficient of prod X^(k-j) Y^j, and the
    output is det^v * f(bY + dX, aY + cX) in the same indexing.
    """
    transitions = [
        _dual_transition(tuple(co), k, v)
        for co, (k, v) in zip(matrix_coords, coord_weights)
    ]
    ranges = [range(k + 1) for k, _ in coord_weights]
    out = {idx: Fraction(0) for idx in product(*ranges)}
    for jidx, coeff in poly.items():
        if coeff == 0:
            continue
        # gamma . X^(k-j) Y^j = sum_m c[j][m] X^(k-m) Y^m
        for midx in product(*ranges):
            factor = Fraction(1)
            for t, j_i, m_i in zip(transitions, jidx, midx):
                factor *= t[j_i][m_i]
                if factor == 0:
                    break
            if factor:
                out[midx] += Fraction(coeff) * factor
    return out
