"""Exact fixed-precision arithmetic in Q_p and its finite extensions.

A context describes a two-step tower: an unramified layer Q_p[y]/(u(y))
followed by an Eisenstein layer O_U[x]/(g(x)).  Elements are coefficient
matrices over Z with an absolute precision counted in powers of the
uniformizer; every operation propagates precision pessimistically, so no
result ever claims digits its inputs do not justify.

Valuations returned by public APIs are normalized so v(p) = 1 (Fractions
for ramified contexts); internal bookkeeping uses integer powers of the
uniformizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class PrecisionError(ArithmeticError):
    """Requested operation needs digits beyond the stated precision."""


class ZeroAtPrecision(ZeroDivisionError):
    """Operand is indistinguishable from zero at its precision."""


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def int_valuation(n: int, p: int) -> int | None:
    """p-adic valuation of a plain integer, None for 0."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# arithmetic in the unramified layer: Z[y]/(u(y), p^K) as int tuples
# ---------------------------------------------------------------------------

def _ff_trim(x, p):
    x = [c % p for c in x]
    while x and x[-1] == 0:
        x.pop()
    return x


def _ff_poly_inv(a, modulus, p):
    """Inverse of the polynomial a modulo an irreducible modulus over F_p."""

    def polydiv(num, den):
        num = num[:]
        q = [0] * max(len(num) - len(den) + 1, 0)
        inv_lead = pow(den[-1], -1, p)
        for sh in range(len(num) - len(den), -1, -1):
            c = num[sh + len(den) - 1] * inv_lead % p
            q[sh] = c
            if c:
                for i, dc in enumerate(den):
                    num[sh + i] = (num[sh + i] - c * dc) % p
        return q, _ff_trim(num, p)

    r0, r1 = _ff_trim(modulus, p), _ff_trim(a, p)
    if not r1:
        raise ZeroAtPrecision("residue is not invertible")
    t0, t1 = [], [1]
    while r1:
        q, r = polydiv(r0, r1)
        qt = [0] * (len(q) + len(t1) - 1) if (q and t1) else []
        for i, qc in enumerate(q):
            if qc:
                for j, tc in enumerate(t1):
                    qt[i + j] = (qt[i + j] + qc * tc) % p
        t = [
            ((t0[i] if i < len(t0) else 0) - (qt[i] if i < len(qt) else 0)) % p
            for i in range(max(len(t0), len(qt), 1))
        ]
        r0, r1 = r1, r
        t0, t1 = t1, _ff_trim(t, p)
    if len(r0) != 1:
        raise ZeroAtPrecision("residue is not invertible")
    inv_c = pow(r0[0], -1, p)
    return [c * inv_c % p for c in t0]


def _u_mul(a, b, upoly, p, pk):
    f = len(upoly) - 1
    if f == 1:
        return ((a[0] * b[0]) % pk,)
    prod = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] += ai * bj
    for d in range(2 * f - 2, f - 1, -1):
        c = prod[d]
        if c:
            prod[d] = 0
            for i in range(f):
                prod[d - f + i] -= c * upoly[i]
    return tuple(x % pk for x in prod[:f])


def _u_inv(a, upoly, p, kk):
    """Inverse of a unit in Z[y]/(u, p^kk) by residue inversion + Newton."""
    p_k = p ** kk
    res = [c % p for c in a]
    if not any(res):
        raise ZeroAtPrecision("cannot invert: zero residue")
    inv_res = _ff_poly_inv(res, list(upoly), p)
    f = len(upoly) - 1
    z = tuple((inv_res[i] if i < len(inv_res) else 0) for i in range(f))
    prec = 1
    while prec < kk:
        prec = min(2 * prec, kk)
        pk = p ** prec
        az = _u_mul(a, z, upoly, p, pk)
        two_minus = tuple(((2 if i == 0 else 0) - c) % pk for i, c in enumerate(az))
        z = _u_mul(z, two_minus, upoly, p, pk)
    return tuple(c % p_k for c in z)


# ---------------------------------------------------------------------------
# contexts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PadicContext:
    """Tower Q_p -> unramified (upoly) -> Eisenstein (epoly), precision N.

    upoly: monic over Z, irreducible mod p, low-to-high coefficients.
    epoly: monic over O_U (each coefficient an f-tuple of ints), Eisenstein:
           all lower coefficients divisible by p, constant term of valuation
           exactly one.  N is the working absolute precision in uniformizer
           powers.
    """

    p: int
    upoly: tuple  # length f+1, ints
    epoly: tuple  # length e+1, entries are f-tuples of ints
    N: int
    name: str = ""

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("prime must be >= 2")
        if self.N < 1:
            raise ValueError("precision must be >= 1")
        if self.upoly[-1] != 1:
            raise ValueError("unramified polynomial must be monic")
        f = self.f
        lead = tuple(1 if i == 0 else 0 for i in range(f))
        if any(len(coeff) != f for coeff in self.epoly):
            raise ValueError("Eisenstein coefficients must live in the unramified layer")
        if self.epoly[-1] != lead:
            raise ValueError("Eisenstein polynomial must be monic")
        for coeff in self.epoly[:-1]:
            if any(c % self.p for c in coeff):
                raise ValueError("lower Eisenstein coefficients must be divisible by p")
        psq = self.p * self.p
        if not any(c % psq for c in self.epoly[0]):
            raise ValueError("Eisenstein constant term must have valuation exactly one")
        # residue-level irreducibility of upoly is trusted to the caller;
        # shipped contexts use y (f=1) or small verified polynomials.

    @property
    def f(self) -> int:
        return len(self.upoly) - 1

    @property
    def e(self) -> int:
        return len(self.epoly) - 1

    @property
    def degree(self) -> int:
        return self.e * self.f

    @property
    def residue_size(self) -> int:
        return self.p ** self.f

    def coeff_modulus_exponent(self, prec: int, i: int) -> int:
        """Digits kept for the x^i coefficient of an element known mod pi^prec."""
        return max(ceil_div(prec - i, self.e), 0)

    # -- element constructors ------------------------------------------

    def zero(self, prec: int | None = None):
        prec = self.N if prec is None else prec
        f = self.f
        coeffs = tuple(tuple(0 for _ in range(f)) for _ in range(self.e))
        return PadicElement(self, coeffs, prec)

    def one(self, prec: int | None = None):
        return self.from_int(1, prec)

    def from_int(self, n: int, prec: int | None = None):
        prec = self.N if prec is None else prec
        f = self.f
        coeffs = [[0] * f for _ in range(self.e)]
        coeffs[0][0] = n
        return PadicElement(self, tuple(tuple(r) for r in coeffs), prec)

    def from_vector(self, vec, prec: int | None = None):
        """Element from an e x f integer coefficient matrix."""
        prec = self.N if prec is None else prec
        if len(vec) != self.e or any(len(r) != self.f for r in vec):
            raise ValueError("coefficient matrix has the wrong shape")
        return PadicElement(self, tuple(tuple(r) for r in vec), prec)

    def from_fraction(self, q: Fraction, prec: int | None = None):
        prec = self.N if prec is None else prec
        q = Fraction(q)
        num, den = q.numerator, q.denominator
        vden = int_valuation(den, self.p) or 0
        den //= self.p ** vden
        rel = prec + vden * self.e
        inv_den = pow(den, -1, self.p ** (ceil_div(rel, self.e) + 1))
        elt = self.from_int(num * inv_den, rel)
        return elt.shift_uniformizer(-vden * self.e)

    def uniformizer(self, prec: int | None = None):
        prec = self.N if prec is None else prec
        if self.e == 1:
            return self.from_int(self.p, prec)
        f = self.f
        coeffs = [[0] * f for _ in range(self.e)]
        coeffs[1][0] = 1
        return PadicElement(self, tuple(tuple(r) for r in coeffs), prec)

    def teichmuller(self, residue: int, prec: int | None = None):
        """The (q-1)-th root of unity congruent to an integer residue."""
        prec = self.N if prec is None else prec
        if residue % self.p == 0:
            raise ValueError("residue must be coprime to p")
        kk = ceil_div(prec, self.e)
        pk = self.p ** kk
        z = residue % pk
        q = self.residue_size
        for _ in range(kk + 1):
            z = pow(z, q, pk)
        return self.from_int(z, prec)

    def teichmuller_vector(self, residue_vec, prec: int | None = None):
        """Teichmuller lift of a residue-field element given as an f-vector."""
        prec = self.N if prec is None else prec
        kk = ceil_div(prec, self.e)
        pk = self.p ** kk
        z = tuple(c % pk for c in residue_vec)
        if not any(c % self.p for c in z):
            raise ValueError("residue must be a unit")
        q = self.residue_size
        for _ in range(kk + 1):
            z = _u_pow(z, q, self.upoly, self.p, pk)
        f = self.f
        coeffs = [[0] * f for _ in range(self.e)]
        coeffs[0] = list(z)
        return self.from_vector(coeffs, prec)

    # Eisenstein helper: p * x^{-1} as an exact ring element
    def _p_over_pi(self):
        """Returns w with w * x = p exactly (e > 1 contexts)."""
        g0 = self.epoly[0]
        kk = ceil_div(self.N + 2 * self.e, self.e) + 2
        pk = self.p ** kk
        u0 = tuple((-c // self.p) % pk for c in g0)  # g0 = -p*u0 mod nothing: x^e = -sum g_i x^i
        u0_inv = _u_inv(u0, self.upoly, self.p, kk)
        # w = u0^{-1} * (x^{e-1} + g_{e-1} x^{e-2} + ... + g_1)
        coeffs = [[0] * self.f for _ in range(self.e)]
        for i in range(1, self.e):
            coeffs[i - 1] = list(_u_mul(self.epoly[i], u0_inv, self.upoly, self.p, pk))
        top = [c % pk for c in u0_inv]
        coeffs[self.e - 1] = [(coeffs[self.e - 1][j] + top[j]) % pk for j in range(self.f)]
        return tuple(tuple(r) for r in coeffs)


def _u_pow(base, exp, upoly, p, pk):
    result = tuple(1 if i == 0 else 0 for i in range(len(upoly) - 1))
    b = base
    while exp:
        if exp & 1:
            result = _u_mul(result, b, upoly, p, pk)
        b = _u_mul(b, b, upoly, p, pk)
        exp >>= 1
    return result


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

class PadicElement:
    """Immutable element of a PadicContext with its own absolute precision.

    Value = (ring part given by the coefficient matrix) * pi^shift, so
    negative valuations are representable; prec is the absolute precision,
    i.e. the element is known up to O(pi^prec).
    """

    __slots__ = ("ctx", "coeffs", "prec", "shift")

    def __init__(self, ctx: PadicContext, coeffs, prec: int, shift: int = 0):
        self.ctx = ctx
        self.prec = prec
        self.shift = shift
        self.coeffs = _reduce(ctx, coeffs, prec - shift)

    # -- structure -------------------------------------------------------

    def is_zero_at_precision(self) -> bool:
        return all(c == 0 for row in self.coeffs for c in row)

    def _ring_valuation(self) -> int | None:
        best = None
        p, e = self.ctx.p, self.ctx.e
        for i, row in enumerate(self.coeffs):
            for c in row:
                v = int_valuation(c, p)
                if v is not None:
                    cand = e * v + i
                    if best is None or cand < best:
                        best = cand
        return best

    def valuation_pi(self) -> int | None:
        """Valuation in uniformizer powers; None if zero at precision."""
        v = self._ring_valuation()
        return None if v is None else v + self.shift

    def valuation(self) -> Fraction | None:
        """Valuation normalized so v(p) = 1; None for zero-at-precision."""
        v = self.valuation_pi()
        return None if v is None else Fraction(v, self.ctx.e)

    def is_unit(self) -> bool:
        return self.valuation_pi() == 0

    def with_precision(self, prec: int) -> "PadicElement":
        if prec > self.prec:
            raise PrecisionError("cannot invent digits beyond stated precision")
        return PadicElement(self.ctx, self.coeffs, prec, self.shift)

    # -- ring operations ---------------------------------------------------

    def _check(self, other):
        a, b = self.ctx, other.ctx
        if a is not b and (a.p, a.upoly, a.epoly) != (b.p, b.upoly, b.epoly):
            raise ValueError("context mismatch")

    def _coeffs_at_shift(self, target_shift: int):
        """Coefficient matrix of the same value written with a lower shift."""
        delta = self.shift - target_shift
        if delta < 0:
            raise ValueError("can only rewrite with a lower shift")
        if delta == 0:
            return self.coeffs
        ctx = self.ctx
        e = ctx.e
        if e == 1:
            mult = ctx.p ** delta
            return tuple(tuple(c * mult for c in row) for row in self.coeffs)
        kk = ceil_div(self.prec - target_shift, e) + 2
        pk = ctx.p ** kk
        xvec = [[0] * ctx.f for _ in range(e)]
        xvec[1][0] = 1
        xvec = tuple(tuple(r) for r in xvec)
        cur = self.coeffs
        for _ in range(delta):
            cur = _x_mul(ctx, cur, xvec, pk)
        return cur

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ctx.from_int(other, self.prec)
        self._check(other)
        prec = min(self.prec, other.prec)
        shift = min(self.shift, other.shift)
        ca = self._coeffs_at_shift(shift)
        cb = other._coeffs_at_shift(shift)
        coeffs = tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(ca, cb)
        )
        return PadicElement(self.ctx, coeffs, prec, shift)

    __radd__ = __add__

    def __neg__(self):
        return PadicElement(
            self.ctx,
            tuple(tuple(-c for c in row) for row in self.coeffs),
            self.prec,
            self.shift,
        )

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ctx.from_int(other, self.prec)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            v_int = int_valuation(other, self.ctx.p)
            slack = self.ctx.e * ((v_int or 0) + 1)
            other = self.ctx.from_int(other, self.prec + slack)
        self._check(other)
        ctx = self.ctx
        va = self.valuation_pi()
        vb = other.valuation_pi()
        va = self.prec if va is None else va
        vb = other.prec if vb is None else vb
        prec = min(va + other.prec, vb + self.prec)
        shift = self.shift + other.shift
        if prec - shift <= 0:
            return PadicElement(ctx, ctx.zero(1).coeffs, prec, shift)
        kk = ceil_div(prec - shift, ctx.e) + 2
        pk = ctx.p ** kk
        coeffs = _x_mul(ctx, self.coeffs, other.coeffs, pk)
        return PadicElement(ctx, coeffs, prec, shift)

    __rmul__ = __mul__

    def _normalized(self):
        """Rewrite so the ring part is a unit (or zero)."""
        rv = self._ring_valuation()
        if rv is None or rv == 0:
            return self
        coeffs = _ring_shift_down(self.ctx, self.coeffs, rv, self.prec - self.shift)
        return PadicElement(self.ctx, coeffs, self.prec, self.shift + rv)

    def inverse(self):
        v = self.valuation_pi()
        if v is None:
            raise ZeroAtPrecision("division by zero-at-precision element")
        norm = self._normalized()
        # norm = unit * pi^v with a unit ring part
        unit = PadicElement(self.ctx, norm.coeffs, norm.prec - norm.shift, 0)
        inv_unit = _invert_unit(unit)
        return PadicElement(self.ctx, inv_unit.coeffs, self.prec - 2 * v, -v)

    def __truediv__(self, other):
        if isinstance(other, int):
            v_int = int_valuation(other, self.ctx.p)
            slack = self.ctx.e * ((v_int or 0) + 1)
            other = self.ctx.from_int(other, self.prec + slack)
        self._check(other)
        return self * other.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return self.ctx.one(self.prec)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift_uniformizer(self, m: int) -> "PadicElement":
        """Multiply by pi^m (any sign; exact)."""
        if m == 0:
            return self
        return PadicElement(self.ctx, self.coeffs, self.prec + m, self.shift + m)

    def unit_part(self) -> "PadicElement":
        v = self.valuation_pi()
        if v is None:
            raise ZeroAtPrecision("zero-at-precision element has no unit part")
        return self.shift_uniformizer(-v)

    def integral_coeffs(self):
        """Coefficient matrix of the value written at shift zero.

        Requires the element to be integral (valuation >= 0).
        """
        if self.shift == 0:
            return self.coeffs
        if self.shift > 0:
            return self._coeffs_at_shift(0)
        v = self._ring_valuation()
        if v is None:
            return _reduce(self.ctx, self.coeffs, self.prec)
        if v + self.shift < 0:
            raise PrecisionError("element is not integral")
        return _ring_shift_down(
            self.ctx, self.coeffs, -self.shift, self.prec - self.shift
        )

    # -- comparisons / misc --------------------------------------------

    def eq_at_precision(self, other, prec: int | None = None) -> bool:
        if isinstance(other, int):
            other = self.ctx.from_int(other, self.prec)
        self._check(other)
        diff = self - other
        if prec is None:
            return diff.is_zero_at_precision()
        return diff.with_precision(min(prec, diff.prec)).is_zero_at_precision()

    def __eq__(self, other):
        if not isinstance(other, (PadicElement, int)):
            return NotImplemented
        if isinstance(other, int):
            other = self.ctx.from_int(other, self.prec)
        a, b = self.ctx, other.ctx
        if (a.p, a.upoly, a.epoly) != (b.p, b.upoly, b.epoly):
            return False
        x, y = self._normalized(), other._normalized()
        return x.prec == y.prec and x.shift == y.shift and x.coeffs == y.coeffs

    def __hash__(self):
        x = self._normalized()
        return hash((x.ctx.p, x.ctx.upoly, x.ctx.epoly, x.coeffs, x.prec, x.shift))

    def __repr__(self):
        v = self.valuation_pi()
        if v is None:
            return f"O(pi^{self.prec})"
        if self.ctx.degree == 1 and self.shift == 0:
            return f"{self.coeffs[0][0]} + O({self.ctx.p}^{self.prec})"
        return f"padic(v={v}, prec={self.prec})"

    def lift_int(self) -> int:
        """Integer representative (degree-1 contexts, nonnegative shift)."""
        if self.ctx.degree != 1:
            raise ValueError("integer lift needs a degree-1 context")
        if self.shift < 0:
            raise ValueError("element has a denominator; use lift_fraction")
        return self.coeffs[0][0] * self.ctx.p ** self.shift

    def lift_fraction(self) -> Fraction:
        if self.ctx.degree != 1:
            raise ValueError("fraction lift needs a degree-1 context")
        return Fraction(self.coeffs[0][0]) * Fraction(self.ctx.p) ** self.shift


def _ring_shift_down(ctx: PadicContext, coeffs, m: int, rel_prec: int):
    """Divide a ring-part coefficient matrix by pi^m exactly."""
    if m == 0:
        return coeffs
    if ctx.e == 1:
        pm = ctx.p ** m
        if any(c % pm for row in coeffs for c in row):
            raise PrecisionError("ring part not divisible by the requested power")
        return tuple(tuple(c // pm for c in row) for row in coeffs)
    w = ctx._p_over_pi()
    kk = ceil_div(rel_prec, ctx.e) + 2 + m
    pk = ctx.p ** kk
    cur = coeffs
    for _ in range(m):
        cur = _x_mul(ctx, cur, w, pk)
    pm = ctx.p ** m
    if any(c % pm for row in cur for c in row):
        raise PrecisionError("ring part not divisible by the requested power")
    return tuple(tuple(c // pm for c in row) for row in cur)


def _reduce(ctx: PadicContext, coeffs, prec: int):
    out = []
    for i, row in enumerate(coeffs):
        m = ctx.coeff_modulus_exponent(prec, i)
        if m <= 0:
            out.append(tuple(0 for _ in row))
        else:
            pm = ctx.p ** m
            out.append(tuple(c % pm for c in row))
    return tuple(out)


def _x_mul(ctx: PadicContext, a, b, pk):
    """Multiply two coefficient matrices modulo (epoly, upoly, pk)."""
    e = ctx.e
    if e == 1:
        return (_u_mul(a[0], b[0], ctx.upoly, ctx.p, pk),)
    zero = tuple(0 for _ in range(ctx.f))
    prod = [zero] * (2 * e - 1)
    for i in range(e):
        if any(a[i]):
            for j in range(e):
                if any(b[j]):
                    term = _u_mul(a[i], b[j], ctx.upoly, ctx.p, pk)
                    prod[i + j] = tuple(
                        (x + y) % pk for x, y in zip(prod[i + j], term)
                    )
    for d in range(2 * e - 2, e - 1, -1):
        c = prod[d]
        if any(c):
            prod[d] = zero
            for i in range(e):
                term = _u_mul(c, ctx.epoly[i], ctx.upoly, ctx.p, pk)
                prod[d - e + i] = tuple(
                    (x - y) % pk for x, y in zip(prod[d - e + i], term)
                )
    return tuple(prod[:e])


def _invert_unit(unit: PadicElement) -> PadicElement:
    ctx = unit.ctx
    prec = unit.prec
    if prec <= 0:
        raise PrecisionError("no digits available for inversion")
    kk = ceil_div(prec, ctx.e) + 2
    pk = ctx.p ** kk
    if ctx.degree == 1:
        a = unit.coeffs[0][0]
        return PadicElement(ctx, ((pow(a, -1, pk),),), prec)
    # residue inverse: reduce x -> 0, invert in F_q, then Newton in the ring
    res = unit.coeffs[0]
    inv0 = _u_inv(tuple(c % ctx.p for c in res), ctx.upoly, ctx.p, 1)
    z = [[0] * ctx.f for _ in range(ctx.e)]
    z[0] = list(inv0)
    z = tuple(tuple(r) for r in z)
    cur_prec = 1
    while cur_prec < prec:
        cur_prec = min(2 * cur_prec, prec)
        az = _x_mul(ctx, unit.coeffs, z, pk)
        two_minus = tuple(
            tuple(((2 if (i == 0 and j == 0) else 0) - c) % pk for j, c in enumerate(row))
            for i, row in enumerate(az)
        )
        z = _x_mul(ctx, z, two_minus, pk)
    return PadicElement(ctx, z, prec)


# ---------------------------------------------------------------------------
# ready-made contexts
# ---------------------------------------------------------------------------

def qp_context(p: int, N: int, name: str | None = None) -> PadicContext:
    return PadicContext(
        p=p, upoly=(0, 1), epoly=((-p,), (1,)), N=N, name=name or f"Q{p}_N{N}"
    )


def unramified_context(p: int, upoly, N: int, name: str | None = None) -> PadicContext:
    up = tuple(upoly)
    return PadicContext(
        p=p, upoly=up, epoly=(tuple(-p if i == 0 else 0 for i in range(len(up) - 1)),
                              tuple(1 if i == 0 else 0 for i in range(len(up) - 1))),
        N=N, name=name or f"Q{p}_f{len(up) - 1}_N{N}",
    )


def cyclotomic_context(p: int, n: int, N: int, name: str | None = None) -> PadicContext:
    """Q_p(zeta_{p^n}): Eisenstein polynomial of (1+x)^{p^n}-cyclotomic type.

    The uniformizer is zeta - 1; zeta itself is 1 + x.
    """
    if n < 1:
        return qp_context(p, N, name)
    # Phi_{p^n}(1 + x) = sum_{j} (1+x)^{j p^{n-1}} over j < p
    e = (p - 1) * p ** (n - 1)
    coeffs = [0] * (e + 1)
    step = p ** (n - 1)
    for j in range(p):
        # add (1+x)^(j*step)
        m = j * step
        c = 1
        for i in range(0, m + 1):
            coeffs[i] += c
            c = c * (m - i) // (i + 1)
    epoly = tuple((coeffs[i],) for i in range(e + 1))
    return PadicContext(p=p, upoly=(0, 1), epoly=epoly, N=N,
                        name=name or f"Q{p}_zeta{p}^{n}_N{N}")


def zeta_ppower(ctx: PadicContext, p: int, n: int) -> PadicElement:
    """The canonical p^n-th root of unity in a cyclotomic tower context.

    The context's distinguished root is 1 + x at its own level L; lower
    levels are its p-power powers.
    """
    if n == 0:
        return ctx.one()
    if ctx.p != p:
        raise ValueError("context has the wrong residue characteristic")
    level = 1
    while (p - 1) * p ** (level - 1) < ctx.e:
        level += 1
    if (p - 1) * p ** (level - 1) != ctx.e or level < n:
        raise ValueError("context does not realize the requested root of unity")
    return (ctx.one() + ctx.uniformizer()) ** (p ** (level - n))


def embed_qp(base_elt: PadicElement, ctx: PadicContext) -> PadicElement:
    """Ring embedding of a Q_p element into a larger context over the same p.

    The shift counts powers of p, not of the target uniformizer, so it is
    realized by honest multiplication (p is a unit times pi^e only).
    """
    if base_elt.ctx.degree != 1:
        raise ValueError("embedding implemented for Q_p base elements")
    if base_elt.ctx.p != ctx.p:
        raise ValueError("residue characteristics differ")
    shift = base_elt.shift
    rel = (base_elt.prec - shift) * ctx.e
    elt = ctx.from_int(base_elt.coeffs[0][0], rel)
    if shift:
        p_elt = ctx.from_int(ctx.p, rel + (abs(shift) + 1) * ctx.e)
        elt = elt * (p_elt ** shift)
    target_prec = base_elt.prec * ctx.e
    return elt.with_precision(min(elt.prec, target_prec))


# ---------------------------------------------------------------------------
# polynomials, Newton polygons and slope splitting
# ---------------------------------------------------------------------------

class PadicPolynomial:
    """Polynomial with PadicElement coefficients over a shared context."""

    def __init__(self, coeffs, trim: bool = True):
        if not coeffs:
            raise ValueError("empty coefficient list")
        self.ctx = coeffs[0].ctx
        cs = list(coeffs)
        if trim:
            while len(cs) > 1 and cs[-1].is_zero_at_precision():
                cs.pop()
        self.coeffs = cs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __mul__(self, other):
        out = [None] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                t = a * b
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        return PadicPolynomial(out, trim=False)

    def __add__(self, other):
        big, small = (self, other) if self.degree >= other.degree else (other, self)
        out = list(big.coeffs)
        for i, c in enumerate(small.coeffs):
            out[i] = out[i] + c
        return PadicPolynomial(out, trim=False)

    def __sub__(self, other):
        return self + PadicPolynomial([-c for c in other.coeffs], trim=False)

    def scale(self, s: PadicElement):
        return PadicPolynomial([c * s for c in self.coeffs], trim=False)

    def evaluate(self, x: PadicElement) -> PadicElement:
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def newton_polygon(self):
        """Root valuations of the polynomial (v(p) = 1 normalization).

        Returns [(valuation, multiplicity)] ordered from largest valuation
        to smallest, i.e. following the lower hull left to right.  Raises
        PrecisionError if an unknown coefficient could cut below the hull.
        """
        pts = []
        unknown = []
        for i, c in enumerate(self.coeffs):
            v = c.valuation_pi()
            if v is None:
                unknown.append((i, c.prec))
            else:
                pts.append((i, Fraction(v, self.ctx.e)))
        if not pts:
            raise ZeroAtPrecision("all coefficients vanish at stated precision")
        if pts[-1][0] != self.degree:
            raise PrecisionError("leading coefficient is zero at stated precision")
        hull = _lower_hull(pts)
        for i, bound in unknown:
            if i < hull[0][0] or i > hull[-1][0]:
                raise PrecisionError("polygon support unknown at precision")
            if Fraction(bound, self.ctx.e) < _hull_value(hull, i):
                raise PrecisionError(
                    f"coefficient {i} known only mod pi^{bound}; polygon ambiguous"
                )
        out = []
        for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
            slope = (v2 - v1) / (i2 - i1)
            out.append((-slope, i2 - i1))
        return out

    def reciprocal_root_valuations(self):
        """Valuations of the reversed-polynomial roots (slope-side view)."""
        return [(-v, m) for v, m in self.newton_polygon()]


def _lower_hull(pts):
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _hull_value(hull, x):
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + (y2 - y1) * Fraction(x - x1, x2 - x1)
    return hull[-1][1]


def slope_split(poly: PadicPolynomial, h: Fraction):
    """Factor Q = P_le * P_gt by the slope bound h (inclusive on P_le).

    Slopes here are valuations of the reversed-polynomial roots; Q(0) must
    be a unit.  Gauge: P_le(0) = Q(0) and P_gt(0) = 1.
    """
    ctx = poly.ctx
    h = Fraction(h)
    if not poly.coeffs[0].is_unit():
        raise ValueError("constant term must be a unit for slope splitting")
    slopes = poly.reciprocal_root_valuations()  # ascending along the hull
    d = sum(m for s, m in slopes if s <= h)
    n = poly.degree
    one = PadicPolynomial([ctx.one()])
    if d == 0:
        return one, poly
    if d == n:
        return poly, one
    # Newton iteration on coefficient vectors with A0 = Q(0), B0 = 1 fixed.
    a_d = poly.coeffs[d]
    if a_d.is_zero_at_precision():
        raise PrecisionError("break coefficient vanishes at precision")
    A = PadicPolynomial(list(poly.coeffs[: d + 1]), trim=False)
    inv_ad = a_d.inverse()
    B = PadicPolynomial([c * inv_ad for c in poly.coeffs[d:]], trim=False)
    for _ in range(80):
        R = poly - A * B
        if all(c.is_zero_at_precision() for c in R.coeffs):
            break
        delta = _solve_factor_correction(A, B, R, d, n)
        if delta is None:
            raise PrecisionError("precision insufficient to separate slope factors")
        dA, dB = delta
        A = A + dA
        B = B + dB
    else:
        raise PrecisionError("slope factorization did not converge")
    _verify_split(poly, A, B, h)
    return A, B


def _solve_factor_correction(A, B, R, d, n):
    """Solve A*dB + B*dA = R for corrections with zero constant terms."""
    ctx = A.ctx
    rows = []
    rhs = []
    for m in range(1, n + 1):
        row = []
        for j in range(1, d + 1):  # dA_j coefficient multiplies B_{m-j}
            row.append(B.coeffs[m - j] if 0 <= m - j <= B.degree else ctx.zero())
        for j in range(1, n - d + 1):  # dB_j multiplies A_{m-j}
            row.append(A.coeffs[m - j] if 0 <= m - j <= A.degree else ctx.zero())
        rows.append(row)
        rhs.append(R.coeffs[m] if m <= R.degree else ctx.zero())
    sol = padic_solve(rows, rhs)
    if sol is None:
        return None
    dA = PadicPolynomial([ctx.zero()] + sol[:d], trim=False)
    dB = PadicPolynomial([ctx.zero()] + sol[d:], trim=False)
    return dA, dB


def _verify_split(poly, A, B, h):
    R = poly - A * B
    for c in R.coeffs:
        if not c.is_zero_at_precision():
            raise PrecisionError("slope factors do not multiply back at precision")
    for s, _ in A.reciprocal_root_valuations():
        if s > h:
            raise PrecisionError("low factor carries a slope above the bound")
    if B.degree > 0:
        for s, _ in B.reciprocal_root_valuations():
            if s <= h:
                raise PrecisionError("high factor carries a slope below the bound")


# ---------------------------------------------------------------------------
# dense linear algebra over a context (desk scale)
# ---------------------------------------------------------------------------

def padic_solve(rows, rhs):
    """Solve a square-ish linear system over PadicElements; None if stuck.

    Gaussian elimination choosing minimal-valuation pivots.  Intended for
    small well-conditioned systems (slope splitting, kernel extraction).
    """
    m = len(rows)
    if m == 0:
        return []
    n = len(rows[0])
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for col in range(n):
        best, best_v = None, None
        for i in range(r, m):
            v = aug[i][col].valuation_pi()
            if v is not None and (best_v is None or v < best_v):
                best, best_v = i, v
        if best is None:
            continue
        aug[r], aug[best] = aug[best], aug[r]
        inv = aug[r][col].inverse()
        aug[r] = [c * inv for c in aug[r]]
        for i in range(m):
            if i != r:
                factor = aug[i][col]
                if not factor.is_zero_at_precision():
                    aug[i] = [a - factor * b for a, b in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
        if r == m:
            break
    if len(piv_cols) < n:
        return None
    sol = [None] * n
    for i, col in enumerate(piv_cols):
        sol[col] = aug[i][n]
    return sol


def padic_kernel(rows, ncols):
    """Kernel basis of a matrix over PadicElements (row action on columns)."""
    ctx = None
    for row in rows:
        for c in row:
            ctx = c.ctx
            break
        if ctx:
            break
    if ctx is None:
        raise ValueError("empty matrix")
    m = len(rows)
    aug = [list(r) for r in rows]
    piv_of_col = {}
    r = 0
    for col in range(ncols):
        best, best_v = None, None
        for i in range(r, m):
            v = aug[i][col].valuation_pi()
            if v is not None and (best_v is None or v < best_v):
                best, best_v = i, v
        if best is None:
            continue
        aug[r], aug[best] = aug[best], aug[r]
        inv = aug[r][col].inverse()
        aug[r] = [c * inv for c in aug[r]]
        for i in range(m):
            if i != r and not aug[i][col].is_zero_at_precision():
                factor = aug[i][col]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[r])]
        piv_of_col[col] = r
        r += 1
        if r == m:
            break
    basis = []
    free_cols = [c for c in range(ncols) if c not in piv_of_col]
    for fc in free_cols:
        vec = [ctx.zero() for _ in range(ncols)]
        vec[fc] = ctx.one()
        for col, prow in piv_of_col.items():
            vec[col] = -aug[prow][fc]
        basis.append(vec)
    return basis
