"""Modular symbol spaces in the divisor model for q = 1 backends.

The rational backend solves the standard two/three-term path relations on
the projective line mod the level; an imaginary quadratic backend loads a
supplied presentation file with the same interface.  Symbols are maps from
generating degree-zero divisors to coefficients (polynomial duals or moment
distributions) satisfying the group relations; Hecke and involution actions
reduce arbitrary paths to generators through continued fractions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .coefficients import (
    CoefficientError,
    MomentDistribution,
    PolyDualValues,
    Sigma0Matrix,
    Weight,
)
from .linalg import charpoly_fractions, frac_kernel, frac_matvec
from .padics import PadicContext, PadicElement, PadicPolynomial, slope_split

INF = "inf"  # cusp at infinity


class SymbolSpaceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# 2x2 integer matrices and cusps
# ---------------------------------------------------------------------------

def mat_mul(m1, m2):
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    return (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
            c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)


def mat_det(m):
    a, b, c, d = m
    return a * d - b * c


def mat_inv_sl2(m):
    a, b, c, d = m
    det = a * d - b * c
    if det == 1:
        return (d, -b, -c, a)
    if det == -1:
        return (-d, b, c, -a)
    raise SymbolSpaceError("exact inverse needs determinant +-1")


def act_cusp(m, cusp):
    a, b, c, d = m
    if cusp == INF:
        if c == 0:
            return INF
        return Fraction(a, c)
    x = Fraction(cusp)
    num = a * x + b
    den = c * x + d
    if den == 0:
        return INF
    return num / den


IDENT = (1, 0, 0, 1)
MAT_S = (0, -1, 1, 0)
MAT_U = (0, -1, 1, -1)  # order three: U^3 = 1


def unimodular_chain(cusp):
    """SL2 matrices g_i with sum of {g_i 0} - {g_i inf} = {cusp} - {inf}."""
    if cusp == INF:
        return []
    x = Fraction(cusp)
    # continued fraction convergents of x
    a, b = x.numerator, x.denominator
    cf = []
    while b:
        q, r = divmod(a, b)
        cf.append(q)
        a, b = b, r
    p_prev, q_prev = 1, 0
    p_cur, q_cur = cf[0], 1
    pairs = [(p_cur, q_cur)]
    for t in cf[1:]:
        p_cur, p_prev = t * p_cur + p_prev, p_cur
        q_cur, q_prev = t * q_cur + q_prev, q_cur
        pairs.append((p_cur, q_cur))
    chain = []
    prev = (1, 0)  # p_{-1}/q_{-1} = inf
    for pi, qi in pairs:
        det = pi * prev[1] - prev[0] * qi
        if det == 1:
            g = (pi, prev[0], qi, prev[1])
        else:
            g = (-pi, prev[0], -qi, prev[1])
        # D_g = {g 0} - {g inf} = {prev} - {cur}; we want {cur} - {prev}
        chain.append((g, -1))
        prev = (pi, qi)
    return chain


def divisor_paths(r, s):
    """Signed unimodular matrices representing the divisor {r} - {s}."""
    out = list(unimodular_chain(r))
    out.extend((g, -sign) for g, sign in unimodular_chain(s))
    return out


# ---------------------------------------------------------------------------
# the projective line mod N and orbit data
# ---------------------------------------------------------------------------

class ProjectiveLine:
    def __init__(self, N: int):
        self.N = N
        self.reps = []
        self.index = {}
        seen = set()
        units = [u for u in range(1, N) if _gcd(u, N) == 1]
        for c in range(N):
            for d in range(N):
                if _gcd(_gcd(c, d), N) != 1:
                    continue
                key = min((u * c % N, u * d % N) for u in units)
                if key in seen:
                    continue
                seen.add(key)
                self.index[key] = len(self.reps)
                self.reps.append(key)
        self._norm_cache = {}

    def normalize(self, c, d):
        key = (c % self.N, d % self.N)
        if key in self._norm_cache:
            return self._norm_cache[key]
        N = self.N
        best = None
        for u in range(1, N):
            if _gcd(u, N) != 1:
                continue
            cand = (u * key[0] % N, u * key[1] % N)
            if best is None or cand < best:
                best = cand
        idx = self.index[best]
        self._norm_cache[key] = idx
        return idx

    def __len__(self):
        return len(self.reps)


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def lift_to_sl2(c, d, N):
    """SL2(Z) matrix with bottom row congruent to (c, d) mod N."""
    c0, d0 = c % N, d % N
    if c0 == 0 and d0 == 0:
        raise SymbolSpaceError("not a projective point")
    # adjust to coprime bottom row
    for t in range(N + 1):
        cc = c0 + t * N
        if cc == 0:
            continue
        g = _gcd(cc, d0)
        if g == 1:
            c1, d1 = cc, d0
            break
        for s in range(N + 1):
            dd = d0 + s * N
            if _gcd(cc, dd) == 1:
                c1, d1 = cc, dd
                break
        else:
            continue
        break
    else:
        raise SymbolSpaceError("no coprime lift found")
    # solve a d1 - b c1 = 1
    a, b = _bezout(d1, c1)
    return (a, -b, c1, d1)


def _bezout(x, y):
    """(a, b) with a x + b y = gcd(x, y)."""
    r0, r1 = x, y
    s0, s1 = 1, 0
    t0, t1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0 < 0:
        s0, t0 = -s0, -t0
    return s0, t0


@dataclass
class OrbitEntry:
    gen: int          # generator index
    sign: int         # +-1
    gamma: tuple      # element of Gamma_0(N) with path = sign * gamma . gen-path


@dataclass
class RelationRow:
    """sum over terms of sign * (x_{gen} | matrix) = 0."""

    terms: list  # (gen_index, matrix, sign)


class SymbolSpace:
    """Divisor-model symbol space for Gamma_0(level) over Q (q = 1)."""

    def __init__(self, field, level: int, weight: Weight, require_p_divides=True):
        if field.degree != 1:
            raise SymbolSpaceError(
                "the computed backend is rational; load a presentation file "
                "for imaginary quadratic fields"
            )
        self.field = field
        self.level = level
        self.weight = weight
        self.p = field.p
        if require_p_divides and level % field.p != 0:
            raise SymbolSpaceError("level must be divisible by p")
        k = weight.k[0]
        if k % 2 != 0:
            raise SymbolSpaceError("odd weights give the zero space over Q")
        self.p1 = ProjectiveLine(level)
        self._build_orbits()
        self._build_relations()
        self._gamma_cache = {}

    # -- presentation -----------------------------------------------------------

    def _build_orbits(self):
        p1 = self.p1
        n = len(p1)
        self.lifts = [lift_to_sl2(c, d, self.level) for (c, d) in p1.reps]
        orbit = [None] * n
        generators = []
        two_term_rows = []
        for i in range(n):
            if orbit[i] is not None:
                continue
            gen_idx = len(generators)
            generators.append(i)
            orbit[i] = OrbitEntry(gen_idx, 1, IDENT)
            c, d = p1.reps[i]
            j = p1.normalize(d, -c)  # class of g S
            g_i = self.lifts[i]
            if j == i:
                # elliptic two-term constraint: x + x|gamma^{-1} = 0
                gS = mat_mul(g_i, MAT_S)
                gamma = mat_mul(gS, mat_inv_sl2(g_i))
                self._assert_level(gamma)
                two_term_rows.append(
                    RelationRow([(gen_idx, IDENT, 1),
                                 (gen_idx, mat_inv_sl2(gamma), 1)])
                )
            else:
                g_j = self.lifts[j]
                gamma = mat_mul(g_j, mat_inv_sl2(mat_mul(g_i, MAT_S)))
                self._assert_level(gamma)
                orbit[j] = OrbitEntry(gen_idx, -1, gamma)
        self.generators = generators
        self.orbit = orbit
        self._two_term_rows = two_term_rows

    def _assert_level(self, gamma):
        if gamma[2] % self.level != 0:
            raise SymbolSpaceError("coset reduction left the level group")
        if mat_det(gamma) != 1:
            raise SymbolSpaceError("coset reduction is not unimodular")

    def _reduce_class(self, g):
        """Path D_g as sign * (generator value | gamma^{-1})."""
        i = self.p1.normalize(g[2], g[3])
        entry = self.orbit[i]
        base = self.lifts[self.generators[entry.gen]]
        if entry.sign == 1:
            ref = mat_mul(entry.gamma, base)
        else:
            ref = mat_mul(entry.gamma, mat_mul(base, MAT_S))
        gamma = mat_mul(g, mat_inv_sl2(ref))
        self._assert_level(gamma)
        total_gamma = mat_mul(gamma, entry.gamma)
        # D_g = sign * total_gamma . D_base => value = sign * x|total_gamma^{-1}
        return entry.gen, entry.sign, mat_inv_sl2(total_gamma)

    def _build_relations(self):
        rows = list(self._two_term_rows)
        done = set()
        for i in range(len(self.p1)):
            c, d = self.p1.reps[i]
            orbit3 = []
            cur = (c, d)
            for _ in range(3):
                orbit3.append(self.p1.normalize(*cur))
                cur = (cur[1], (-cur[0] - cur[1]) % self.level)  # right mult by U
            key = frozenset(orbit3) if len(set(orbit3)) == 3 else (i,)
            if key in done:
                continue
            done.add(key)
            g = self.lifts[i]
            terms = []
            for t in range(3):
                gU = g
                for _ in range(t):
                    gU = mat_mul(gU, MAT_U)
                gen, sign, mat = self._reduce_class(gU)
                terms.append((gen, mat, sign))
            rows.append(RelationRow(terms))
        self.relations = rows

    # -- symbols ------------------------------------------------------------

    def ngens(self) -> int:
        return len(self.generators)

    def coord_weights(self):
        return tuple((k, v) for k, v in zip(self.weight.k, self.weight.v))

    def zero_classical(self, ctx=None):
        vals = [PolyDualValues.zero(self.coord_weights(), ctx) for _ in self.generators]
        return ModularSymbol(self, vals, kind="classical")

    def sigma0(self, mat) -> Sigma0Matrix:
        return Sigma0Matrix(self.p, (tuple(mat),))

    # evaluation --------------------------------------------------------------

    def evaluate(self, symbol: "ModularSymbol", paths, post=None):
        """Value on a signed path list, optionally right-acted by post."""
        acc = None
        for g, sign in paths:
            gen, s, mat = self._reduce_class(g)
            total = mat if post is None else mat_mul(mat, post)
            term = symbol.apply_matrix(symbol.values[gen], total)
            if sign * s < 0:
                term = -term
            acc = term if acc is None else acc + term
        if acc is None:
            return symbol.zero_value()
        return acc

    def evaluate_divisor(self, symbol, r, s, post=None):
        return self.evaluate(symbol, divisor_paths(r, s), post=post)

    # relation machinery ---------------------------------------------------------

    def relation_residual(self, symbol: "ModularSymbol"):
        """Max failure of the relation rows (None if all vanish)."""
        worst = None
        for row in self.relations:
            acc = None
            for gen, mat, sign in row.terms:
                term = symbol.apply_matrix(symbol.values[gen], mat)
                if sign < 0:
                    term = -term
                acc = term if acc is None else acc + term
            if acc is None:
                continue
            if not _value_is_zero(acc):
                worst = acc if worst is None else worst
        return worst

    def check_relations(self, symbol: "ModularSymbol") -> bool:
        return self.relation_residual(symbol) is None


def _value_is_zero(value):
    if isinstance(value, PolyDualValues):
        return value.is_zero()
    if isinstance(value, MomentDistribution):
        return value.is_zero()
    raise SymbolSpaceError("unknown coefficient value")


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------

class ModularSymbol:
    """Generator values plus the space that interprets them."""

    def __init__(self, space: SymbolSpace, values, kind: str):
        self.space = space
        self.values = list(values)
        self.kind = kind  # "classical" or "moments"

    def zero_value(self):
        v0 = self.values[0]
        if isinstance(v0, PolyDualValues):
            return PolyDualValues.zero(v0.coord_weights, v0.ctx)
        return MomentDistribution.zero(v0.p, v0.N, v0.M, v0.coord_weights)

    def apply_matrix(self, value, mat):
        if isinstance(value, PolyDualValues):
            return value.act((tuple(mat),))
        return value.act(Sigma0Matrix(self.space.p, (tuple(mat),)))

    def map_values(self, fn):
        return ModularSymbol(self.space, [fn(v) for v in self.values], self.kind)

    def __add__(self, other):
        return ModularSymbol(
            self.space, [a + b for a, b in zip(self.values, other.values)], self.kind
        )

    def __sub__(self, other):
        return ModularSymbol(
            self.space, [a - b for a, b in zip(self.values, other.values)], self.kind
        )

    def __neg__(self):
        return self.map_values(lambda v: -v)

    # Hecke ---------------------------------------------------------------

    def hecke(self, ell: int) -> "ModularSymbol":
        """T_ell (or U_ell when ell divides the level)."""
        space = self.space
        cosets = [(1, a, 0, ell) for a in range(ell)]
        if space.level % ell != 0:
            cosets.append((ell, 0, 0, 1))
        new_values = []
        for gen_idx in range(space.ngens()):
            g = space.lifts[space.generators[gen_idx]]
            base_paths = [(g, 1)]
            acc = None
            for delta in cosets:
                r = act_cusp(delta, act_cusp(g, Fraction(0)))
                s = act_cusp(delta, act_cusp(g, INF))
                term = space.evaluate_divisor(self, r, s, post=delta)
                acc = term if acc is None else acc + term
            new_values.append(acc)
        return ModularSymbol(space, new_values, self.kind)

    def weyl(self) -> "ModularSymbol":
        """Action of the archimedean involution z -> -conj(z)."""
        space = self.space
        iota = (-1, 0, 0, 1)
        new_values = []
        for gen_idx in range(space.ngens()):
            g = space.lifts[space.generators[gen_idx]]
            gg = mat_mul(iota, mat_mul(g, iota))  # det = 1
            gen, s, mat = space._reduce_class(gg)
            total = mat_mul(mat, iota)
            term = self.apply_matrix(self.values[gen], total)
            if s < 0:
                term = -term
            new_values.append(term)
        return ModularSymbol(space, new_values, self.kind)

    def weyl_projection(self, sign: int) -> "ModularSymbol":
        """(phi + sign * phi|iota) / 2 (exact halves required)."""
        flipped = self.weyl()
        total = self + flipped if sign > 0 else self - flipped
        return total.map_values(_halve)

    def scale(self, s):
        return self.map_values(lambda v: _scale_value(v, s))


def _halve(value):
    if isinstance(value, PolyDualValues):
        return value.scale(Fraction(1, 2))
    return value.scale_unit_inverse(2)


def _scale_value(value, s):
    if isinstance(value, PolyDualValues):
        return value.scale(s)
    if isinstance(s, int):
        return value.scale_int(s)
    raise SymbolSpaceError("moment symbols scale by integers")


# ---------------------------------------------------------------------------
# solving the classical space over Q
# ---------------------------------------------------------------------------

def _dual_dim(weight: Weight) -> int:
    out = 1
    for k in weight.k:
        out *= k + 1
    return out


def classical_basis(space: SymbolSpace):
    """Kernel basis of the relation rows over Q; list of ModularSymbols."""
    k = space.weight.k[0]
    dim_v = k + 1
    ngens = space.ngens()
    ncols = ngens * dim_v
    rows = []
    for rel in space.relations:
        block = [[Fraction(0)] * ncols for _ in range(dim_v)]
        for gen, mat, sign in rel.terms:
            from .coefficients import _dual_transition

            T = _dual_transition(tuple(mat), k, space.weight.v[0])
            for j in range(dim_v):
                for m in range(dim_v):
                    block[j][gen * dim_v + m] += sign * T[j][m]
        rows.extend(block)
    kernel = frac_kernel(rows, ncols)
    out = []
    for vec in kernel:
        values = []
        for g in range(ngens):
            vals = {(j,): vec[g * dim_v + j] for j in range(dim_v)}
            values.append(PolyDualValues(((k, space.weight.v[0]),), vals))
        out.append(ModularSymbol(space, values, "classical"))
    return out


def symbol_coordinates(space: SymbolSpace, basis, symbol: ModularSymbol):
    """Coordinates of a classical symbol in a given basis (exact)."""
    k = space.weight.k[0]
    dim_v = k + 1
    ncols = space.ngens() * dim_v
    cols = []
    for b in basis:
        col = []
        for g in range(space.ngens()):
            for j in range(dim_v):
                col.append(b.values[g].values[(j,)])
        cols.append(col)
    target = []
    for g in range(space.ngens()):
        for j in range(dim_v):
            target.append(symbol.values[g].values[(j,)])
    from .linalg import frac_solve

    rows = [[cols[c][r] for c in range(len(basis))] for r in range(ncols)]
    return frac_solve(rows, target)


def hecke_matrix(space: SymbolSpace, basis, ell: int):
    """Matrix of T_ell / U_ell on a classical basis (columns = images)."""
    mat = []
    for b in basis:
        img = b.hecke(ell)
        coords = symbol_coordinates(space, basis, img)
        if coords is None:
            raise SymbolSpaceError("Hecke image left the solved space")
        mat.append(coords)
    # transpose: mat[i][j] = coefficient of basis_i in T(basis_j)
    n = len(basis)
    return [[mat[j][i] for j in range(n)] for i in range(n)]


def weyl_matrix(space: SymbolSpace, basis):
    mat = []
    for b in basis:
        img = b.weyl()
        coords = symbol_coordinates(space, basis, img)
        if coords is None:
            raise SymbolSpaceError("involution image left the solved space")
        mat.append(coords)
    n = len(basis)
    return [[mat[j][i] for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# slope machinery on the classical space
# ---------------------------------------------------------------------------

def slope_le_subspace(space, basis, ell, bound: Fraction, ctx: PadicContext):
    """Basis of the slope <= bound part of U_ell on the classical space."""
    U = hecke_matrix(space, basis, ell)
    cs = charpoly_fractions(U)  # det(X I - U), low to high
    n = len(basis)
    # C(X) = det(1 - U X) = X^n charpoly(1/X) reversed: coefficients cs reversed
    rev = list(reversed(cs))
    coeffs = [ctx.from_fraction(c) for c in rev]
    poly = PadicPolynomial(coeffs)
    if not poly.coeffs[0].is_unit():
        # drop zero eigenvalues into the high-slope part: factor X^r out of charpoly
        raise SymbolSpaceError("U is singular at this precision; not supported here")
    lo, hi = slope_split(poly, Fraction(bound))
    d = lo.degree
    if d == 0:
        return []
    # M_le = ker(lo*(U)) with lo*(X) = X^d lo(1/X): roots are the eigenvalues
    star = list(reversed(lo.coeffs))
    mat = _poly_of_matrix(star, U, ctx)
    from .padics import padic_kernel

    kern = padic_kernel(mat, n)
    if len(kern) != d:
        raise SymbolSpaceError(
            f"slope subspace dimension {len(kern)} disagrees with polygon {d}"
        )
    return kern


def _poly_of_matrix(coeffs, U, ctx: PadicContext):
    n = len(U)
    Uc = [[ctx.from_fraction(Fraction(x)) for x in row] for row in U]
    acc = [[ctx.zero() for _ in range(n)] for _ in range(n)]
    for c in reversed(coeffs):
        # acc = acc * U + c I
        nxt = [[ctx.zero() for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                s = None
                for t in range(n):
                    term = acc[i][t] * Uc[t][j]
                    s = term if s is None else s + term
                nxt[i][j] = s
        for i in range(n):
            nxt[i][i] = nxt[i][i] + c
        acc = nxt
    return acc


# ---------------------------------------------------------------------------
# dimension oracle for weight (0, 0)
# ---------------------------------------------------------------------------

def dimension_oracle_weight0(level: int) -> int:
    """dim H^1_c for trivial coefficients: 2 genus + cusps - 1.

    Genus from the index/elliptic/cusp counts of the level group; an
    independent check on the solved relation kernel.
    """
    N = level
    mu = N
    for q in _prime_factors(N):
        mu = mu // q * (q + 1)
    nu2 = 0 if N % 4 == 0 else _count_sqrt(-1, N)
    nu3 = 0 if N % 9 == 0 else _count_sqrt_poly(N)
    cusps = sum(_euler_phi(_gcd(d, N // d)) for d in _divisors(N))
    genus = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    if genus.denominator != 1:
        raise SymbolSpaceError("genus formula did not produce an integer")
    return 2 * int(genus) + cusps - 1


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _divisors(n):
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def _euler_phi(n):
    out = n
    for q in _prime_factors(n):
        out = out // q * (q - 1)
    return out


def _count_sqrt(a, N):
    return sum(1 for x in range(N) if (x * x - a) % N == 0)


def _count_sqrt_poly(N):
    return sum(1 for x in range(N) if (x * x + x + 1) % N == 0)


# ---------------------------------------------------------------------------
# presentation files (imaginary quadratic backend interface)
# ---------------------------------------------------------------------------

def load_presentation(space_path: str | Path, field, weight: Weight):
    """Symbol space from a presentation file: generators plus relation rows.

    Schema: {"schema_version": 1, "q": 1, "level_norm": int,
             "generators": [{"path": [[a,b],[c,d]]}...],
             "relations": [[ [gen, [[a,b],[c,d]], sign], ...] ...]}
    """
    with open(space_path) as fh:
        data = json.load(fh)
    if data.get("schema_version") != 1:
        raise SymbolSpaceError("unsupported presentation schema")
    if data.get("q") != 1:
        raise SymbolSpaceError("presentation backend requires q = 1")
    space = SymbolSpace.__new__(SymbolSpace)
    space.field = field
    space.level = data["level_norm"]
    space.weight = weight
    space.p = field.p
    space.p1 = None
    space.lifts = [tuple(g["path"][0] + g["path"][1]) for g in data["generators"]]
    space.generators = list(range(len(space.lifts)))
    space.orbit = [OrbitEntry(i, 1, IDENT) for i in range(len(space.lifts))]
    space.relations = [
        RelationRow([(t[0], tuple(t[1][0] + t[1][1]), t[2]) for t in rel])
        for rel in data["relations"]
    ]
    space._gamma_cache = {}
    expected_rank = data.get("relation_rank")
    if expected_rank is not None:
        k = weight.k[0]
        rows = []
        dim_v = k + 1
        ncols = len(space.generators) * dim_v
        from .coefficients import _dual_transition

        for rel in space.relations:
            block = [[Fraction(0)] * ncols for _ in range(dim_v)]
            for gen, mat, sign in rel.terms:
                T = _dual_transition(tuple(mat), k, weight.v[0])
                for j in range(dim_v):
                    for m in range(dim_v):
                        block[j][gen * dim_v + m] += sign * T[j][m]
            rows.extend(block)
        from .linalg import frac_rref

        _, pivots = frac_rref(rows)
        if len(pivots) != expected_rank:
            raise SymbolSpaceError(
                f"relation rank {len(pivots)} differs from declared {expected_rank}"
            )
    return space


# ---------------------------------------------------------------------------
# eigensymbols: joint kernels, stabilization, fixtures
# ---------------------------------------------------------------------------

def joint_eigenspace(space: SymbolSpace, basis, constraints, weyl_sign=None):
    """Rational coordinates of the joint eigenspace for (T_ell - ev) pairs."""
    rows = []
    n = len(basis)
    for ell, ev in constraints:
        T = hecke_matrix(space, basis, ell)
        for i in range(n):
            rows.append([T[i][j] - (Fraction(ev) if i == j else Fraction(0))
                         for j in range(n)])
    if weyl_sign is not None:
        W = weyl_matrix(space, basis)
        for i in range(n):
            rows.append([W[i][j] - (Fraction(weyl_sign) if i == j else Fraction(0))
                         for j in range(n)])
    return frac_kernel(rows, n)


def combine_basis(space: SymbolSpace, basis, coords) -> ModularSymbol:
    out = None
    for c, b in zip(coords, basis):
        if c == 0:
            continue
        term = b.map_values(lambda v: v.scale(c))
        out = term if out is None else out + term
    if out is None:
        return space.zero_classical()
    return out


def clear_denominators(symbol: ModularSymbol) -> ModularSymbol:
    """Scale a rational symbol to coprime integer values."""
    nums = []
    dens = []
    for v in symbol.values:
        for x in v.values.values():
            x = Fraction(x)
            if x != 0:
                nums.append(abs(x.numerator))
                dens.append(x.denominator)
    if not nums:
        return symbol
    L = 1
    for d in dens:
        L = L * d // _gcd(L, d)
    G = 0
    for n, d in zip(nums, dens):
        G = _gcd(G, n * (L // d))
    scale = Fraction(L, G if G else 1)
    return symbol.map_values(lambda v: v.scale(scale))


def unit_root_of_stabilization(ctx: PadicContext, a_p: int, k: int) -> PadicElement:
    """Unit root of X^2 - a_p X + p^{k+1} (requires a_p to be a p-adic unit)."""
    p = ctx.p
    if a_p % p == 0:
        raise SymbolSpaceError("no unit root: the eigenvalue is supercuspidal-slope")
    c = p ** (k + 1)
    x = ctx.from_int(a_p % p)
    for _ in range(ctx.N.bit_length() + 2):
        fx = x * x - x * a_p + c
        dfx = x * 2 - a_p
        x = x - fx * dfx.inverse()
    if not (x * x - x * a_p + c).is_zero_at_precision():
        raise SymbolSpaceError("Hensel iteration for the unit root failed")
    return x


def inclusion_to_level(phi: ModularSymbol, target: SymbolSpace) -> ModularSymbol:
    """View a lower-level classical symbol as a symbol at a multiple level."""
    src = phi.space
    if target.level % src.level != 0:
        raise SymbolSpaceError("target level must be a multiple of the source")
    values = []
    for gen_idx in range(target.ngens()):
        g = target.lifts[target.generators[gen_idx]]
        values.append(src.evaluate(phi, [(g, 1)]))
    return ModularSymbol(target, values, "classical")


def p_scaling_to_level(phi: ModularSymbol, target: SymbolSpace, p: int) -> ModularSymbol:
    """The [p, 0; 0, 1]-twisted inclusion used by p-stabilization."""
    src = phi.space
    eta = (p, 0, 0, 1)
    values = []
    for gen_idx in range(target.ngens()):
        g = target.lifts[target.generators[gen_idx]]
        r = act_cusp(eta, act_cusp(g, Fraction(0)))
        s = act_cusp(eta, act_cusp(g, INF))
        values.append(src.evaluate_divisor(phi, r, s, post=eta))
    return ModularSymbol(target, values, "classical")


def p_stabilize(phi: ModularSymbol, target: SymbolSpace, alpha: PadicElement,
                ctx: PadicContext) -> ModularSymbol:
    """alpha-stabilization: alpha * phi|_target - phi|[p,0;0,1]."""
    p = target.p
    incl = inclusion_to_level(phi, target)
    twist = p_scaling_to_level(phi, target, p)

    def to_ctx(dual: PolyDualValues) -> PolyDualValues:
        return dual.map_values(
            lambda x: ctx.from_fraction(Fraction(x)), ctx
        )

    incl_c = incl.map_values(to_ctx)
    twist_c = twist.map_values(to_ctx)
    stab = incl_c.map_values(lambda v: v.scale(alpha)) - twist_c
    return stab
