"""Declarative number-field backend.

Field data is input, not computed: each shipped JSON file fixes the degree,
signature, integral-basis multiplication table, unit generators, narrow
class data and the primes above p with their local reduction data.  The
loader validates the declared invariants and refuses inconsistent files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .padics import (
    PadicContext,
    PadicElement,
    qp_context,
    unramified_context,
)


class FieldDataError(ValueError):
    """Field description file violates a declared invariant."""


# ---------------------------------------------------------------------------
# exact interval arithmetic for real-embedding signs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __add__(self, other):
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __mul__(self, other):
        cands = [self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi]
        return Interval(min(cands), max(cands))

    def scale(self, c: Fraction):
        a, b = self.lo * c, self.hi * c
        return Interval(min(a, b), max(a, b))

    def sign(self):
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return None

    def contains_zero(self):
        return self.lo <= 0 <= self.hi


def _poly_eval_fraction(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def refine_root_interval(minpoly, iv: Interval, steps: int) -> Interval:
    """Bisection refinement of an isolating interval of a real root."""
    lo, hi = iv.lo, iv.hi
    flo = _poly_eval_fraction(minpoly, lo)
    if flo == 0:
        return Interval(lo, lo)
    for _ in range(steps):
        mid = (lo + hi) / 2
        fmid = _poly_eval_fraction(minpoly, mid)
        if fmid == 0:
            return Interval(mid, mid)
        if (flo < 0) != (fmid < 0):
            hi = mid
        else:
            lo, flo = mid, fmid
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# declared data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingLabel:
    name: str
    kind: str  # "real" | "complex" | "complex_conj"
    conjugate_of: str | None = None


@dataclass(frozen=True)
class PrimeAboveP:
    name: str
    e: int
    f: int
    uniformizer_coords: tuple
    unramified_poly: tuple
    generator_residue: tuple
    embedding_labels: tuple


@dataclass
class LocalPrimeData:
    """Loaded local data for one prime: context plus basis images."""

    prime: PrimeAboveP
    ctx: PadicContext
    generator_image: PadicElement
    basis_images: list
    uniformizer_image: PadicElement


class SemilocalElement:
    """Element of the product of the completions at the primes above p."""

    __slots__ = ("field", "components")

    def __init__(self, field, components):
        self.field = field
        self.components = tuple(components)

    def __mul__(self, other):
        return SemilocalElement(
            self.field, [a * b for a, b in zip(self.components, other.components)]
        )

    def __add__(self, other):
        return SemilocalElement(
            self.field, [a + b for a, b in zip(self.components, other.components)]
        )

    def inverse(self):
        return SemilocalElement(self.field, [c.inverse() for c in self.components])

    def is_integral(self):
        return all(
            c.is_zero_at_precision() or c.valuation_pi() >= 0 for c in self.components
        )

    def is_unit(self):
        return all(c.is_unit() for c in self.components)

    def __repr__(self):
        return f"Semilocal({', '.join(repr(c) for c in self.components)})"


class NumberField:
    """Number field with declared arithmetic data and primes above p."""

    def __init__(self, data: dict):
        self.raw = data
        if data.get("schema_version") != 1:
            raise FieldDataError("unsupported field file schema version")
        self.name = data["name"]
        self.p = data["p"]
        self.degree = data["degree"]
        self.signature = tuple(data["signature"])
        self.embeddings = [
            EmbeddingLabel(e["label"], e["kind"], e.get("conjugate_of"))
            for e in data["embeddings"]
        ]
        self.generator_minpoly = tuple(data["generator_minpoly"])
        self.mult_table = tuple(
            tuple(tuple(cell) for cell in row) for row in data["mult_table"]
        )
        self.discriminant = data["discriminant"]
        self.different_generator = tuple(data["different_generator"])
        self.torsion_unit = data.get("torsion_unit")
        self.fundamental_units = [tuple(u) for u in data.get("fundamental_units", [])]
        self.totally_positive_unit_generators = [
            tuple(u) for u in data.get("totally_positive_unit_generators", [])
        ]
        self.narrow_class_number = data["narrow_class_number"]
        self.real_intervals = {
            label: Interval(Fraction(lo), Fraction(hi))
            for label, (lo, hi) in data.get("generator_real_intervals", {}).items()
        }
        self.primes_above_p = [
            PrimeAboveP(
                name=q["name"],
                e=q["e"],
                f=q["f"],
                uniformizer_coords=tuple(q["uniformizer_coords"]),
                unramified_poly=tuple(q["unramified_poly"]),
                generator_residue=tuple(q["generator_residue"]),
                embedding_labels=tuple(q["embedding_labels"]),
            )
            for q in data["primes_above_p"]
        ]
        self._local_cache = {}
        self._validate()

    # -- declared invariants -----------------------------------------------

    def _validate(self):
        r1, r2 = self.signature
        if r1 + 2 * r2 != self.degree:
            raise FieldDataError("signature does not match the degree")
        if len(self.embeddings) != self.degree:
            raise FieldDataError("embedding label count must equal the degree")
        kinds = [e.kind for e in self.embeddings]
        if kinds.count("real") != r1 or kinds.count("complex") != r2:
            raise FieldDataError("embedding kinds disagree with the signature")
        for e in self.embeddings:
            if e.kind == "complex_conj":
                partner = self._embedding(e.conjugate_of)
                if partner.kind != "complex":
                    raise FieldDataError("conjugate label must point at a complex embedding")
        d = self.degree
        if len(self.mult_table) != d or any(
            len(row) != d or any(len(cell) != d for cell in row)
            for row in self.mult_table
        ):
            raise FieldDataError("multiplication table must be a d x d x d tensor")
        # basis element 0 must act as the identity
        for j in range(d):
            expected = tuple(1 if t == j else 0 for t in range(d))
            if self.mult_table[0][j] != expected:
                raise FieldDataError("first basis element must be 1")
        total = sum(q.e * q.f for q in self.primes_above_p)
        if total != d:
            raise FieldDataError("sum of e*f over primes above p must equal the degree")
        seen = []
        for q in self.primes_above_p:
            if len(q.embedding_labels) != q.e * q.f:
                raise FieldDataError("embedding fiber size must be e*f")
            seen.extend(q.embedding_labels)
        if sorted(seen) != sorted(e.name for e in self.embeddings):
            raise FieldDataError("embedding fibers must partition the embeddings")
        for label in (e.name for e in self.embeddings if e.kind == "real"):
            if label not in self.real_intervals:
                raise FieldDataError(f"missing isolating interval for real embedding {label}")
        for u in self.totally_positive_unit_generators:
            if not self.is_totally_positive(u):
                raise FieldDataError("declared totally positive unit is not totally positive")
            if abs(self.norm(u)) != 1:
                raise FieldDataError("declared unit has nontrivial norm")
        for q in self.primes_above_p:
            local = self.local_data(q, 20)
            if local.uniformizer_image.valuation_pi() != 1:
                raise FieldDataError(
                    f"declared uniformizer at {q.name} does not have valuation one"
                )

    def _embedding(self, name: str) -> EmbeddingLabel:
        for e in self.embeddings:
            if e.name == name:
                return e
        raise FieldDataError(f"unknown embedding label {name}")

    # -- exact field arithmetic in the integral basis ----------------------

    def mul(self, x, y):
        d = self.degree
        out = [0] * d
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    if yj:
                        cell = self.mult_table[i][j]
                        for t in range(d):
                            out[t] += xi * yj * cell[t]
        return tuple(out)

    def add(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def power(self, x, n: int):
        result = tuple(1 if i == 0 else 0 for i in range(self.degree))
        base = tuple(x)
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def mult_matrix(self, x):
        d = self.degree
        cols = []
        for j in range(d):
            basis_j = tuple(1 if t == j else 0 for t in range(d))
            cols.append(self.mul(x, basis_j))
        return [[cols[j][i] for j in range(d)] for i in range(d)]

    def norm(self, x) -> Fraction:
        mat = [[Fraction(c) for c in row] for row in self.mult_matrix(x)]
        n = len(mat)
        det = Fraction(1)
        for col in range(n):
            piv = next((i for i in range(col, n) if mat[i][col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                mat[col], mat[piv] = mat[piv], mat[col]
                det = -det
            det *= mat[col][col]
            inv = 1 / mat[col][col]
            for i in range(col + 1, n):
                if mat[i][col]:
                    f = mat[i][col] * inv
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[col])]
        return det

    def trace(self, x) -> Fraction:
        mat = self.mult_matrix(x)
        return Fraction(sum(mat[i][i] for i in range(self.degree)))

    # -- archimedean data ----------------------------------------------------

    def real_embedding_interval(self, x, label: str, depth: int = 0) -> Interval:
        base = self.real_intervals[label]
        if depth:
            base = refine_root_interval(list(self.generator_minpoly), base, depth)
        acc = Interval(Fraction(0), Fraction(0))
        power = Interval(Fraction(1), Fraction(1))
        for c in x:
            acc = acc + power.scale(Fraction(c))
            power = power * base
        return acc

    def is_totally_positive(self, x) -> bool:
        """Every real embedding positive; exact via interval refinement."""
        if all(c == 0 for c in x):
            raise ValueError("zero element has no signs")
        for e in self.embeddings:
            if e.kind != "real":
                continue
            depth = 0
            while True:
                iv = self.real_embedding_interval(x, e.name, depth)
                s = iv.sign()
                if s is not None:
                    if s < 0:
                        return False
                    break
                depth += 16
                if depth > 4096:
                    raise ArithmeticError(
                        "sign refinement did not terminate (element too close to zero?)"
                    )
        return True

    def real_embedding_signs(self, x):
        signs = {}
        for e in self.embeddings:
            if e.kind != "real":
                continue
            depth = 0
            while True:
                s = self.real_embedding_interval(x, e.name, depth).sign()
                if s is not None:
                    signs[e.name] = s
                    break
                depth += 16
                if depth > 4096:
                    raise ArithmeticError("sign refinement did not terminate")
        return signs

    # -- local data ---------------------------------------------------------

    def local_data(self, prime: PrimeAboveP, N: int) -> LocalPrimeData:
        key = (prime.name, N)
        if key in self._local_cache:
            return self._local_cache[key]
        p = self.p
        if prime.e != 1:
            raise FieldDataError("shipped backends declare unramified primes above p")
        if prime.f == 1:
            ctx = qp_context(p, N, name=f"{self.name}@{prime.name}_N{N}")
        else:
            ctx = unramified_context(
                p, prime.unramified_poly, N, name=f"{self.name}@{prime.name}_N{N}"
            )
        gen = _hensel_root(ctx, self.generator_minpoly, prime.generator_residue)
        basis_images = [ctx.one()]
        d = self.degree
        # basis is the power basis of the generator; validate against the table
        for i in range(1, d):
            basis_images.append(basis_images[-1] * gen)
        unif = _eval_coords(ctx, basis_images, prime.uniformizer_coords)
        data = LocalPrimeData(prime, ctx, gen, basis_images, unif)
        self._local_cache[key] = data
        return data

    def embed_global(self, x, N: int = 20) -> SemilocalElement:
        """Ring homomorphism O_F -> prod of completions above p."""
        comps = []
        for q in self.primes_above_p:
            local = self.local_data(q, N)
            comps.append(_eval_coords(local.ctx, local.basis_images, x))
        return SemilocalElement(self, comps)

    def uniformizer_power(self, exponents, N: int = 20) -> SemilocalElement:
        """Componentwise product of uniformizer powers for a modulus."""
        comps = []
        for q, n in zip(self.primes_above_p, exponents):
            local = self.local_data(q, N)
            comps.append(local.uniformizer_image ** n if n else local.ctx.one())
        return SemilocalElement(self, comps)

    def prime_of_embedding(self, label: str) -> PrimeAboveP:
        for q in self.primes_above_p:
            if label in q.embedding_labels:
                return q
        raise FieldDataError(f"no prime assigned to embedding {label}")

    def embedding_coordinate(self, z: SemilocalElement, label: str) -> PadicElement:
        """The sigma-coordinate of a semilocal element (split lines only)."""
        for q, comp in zip(self.primes_above_p, z.components):
            if label in q.embedding_labels:
                if q.e * q.f != 1:
                    raise FieldDataError(
                        "per-embedding coordinates need split primes (f = e = 1)"
                    )
                return comp
        raise FieldDataError(f"unknown embedding {label}")

    def weight_character_image(self, z: SemilocalElement, r: dict) -> PadicElement:
        """prod over embeddings of sigma(z)^{r_sigma}, in the first local context."""
        out = None
        for label, exp in r.items():
            if exp == 0:
                continue
            coord = self.embedding_coordinate(z, label)
            term = coord ** exp
            out = term if out is None else out * term
        if out is None:
            ctx = self.local_data(self.primes_above_p[0], 20).ctx
            return ctx.one()
        return out

    # -- modulus helpers -----------------------------------------------------

    def modulus_norm(self, exponents) -> int:
        n = 1
        for q, m in zip(self.primes_above_p, exponents):
            n *= (self.p ** q.f) ** m
        return n

    def residue_ring_exponent(self, exponents) -> int:
        """Smallest m with p^m O contained in the modulus (unramified data)."""
        return max((m for m in exponents), default=0)


def _eval_coords(ctx, basis_images, coords):
    out = ctx.zero(basis_images[0].prec)
    for c, img in zip(coords, basis_images):
        if c:
            out = out + img * c
    return out


def _hensel_root(ctx: PadicContext, minpoly, residue_vec) -> PadicElement:
    """Root of an integer polynomial from a simple residue seed."""
    z = ctx.from_vector([list(residue_vec)]) if ctx.e == 1 else None
    if z is None:
        raise FieldDataError("Hensel seeds need an unramified context")
    deriv = [i * c for i, c in enumerate(minpoly)][1:]

    def ev(poly, x):
        acc = ctx.zero(x.prec)
        for c in reversed(poly):
            acc = acc * x + ctx.from_int(c, x.prec)
        return acc

    fz = ev(minpoly, z)
    dfz = ev(deriv, z)
    if fz.is_unit() or not dfz.is_unit():
        raise FieldDataError("declared residue is not a simple root")
    for _ in range(ctx.N.bit_length() + 2):
        z = z - ev(minpoly, z) * ev(deriv, z).inverse()
        if ev(minpoly, z).is_zero_at_precision():
            break
    if not ev(minpoly, z).is_zero_at_precision():
        raise FieldDataError("Hensel iteration failed to converge")
    return z


def load_field(path: str | Path) -> NumberField:
    with open(path) as fh:
        data = json.load(fh)
    return NumberField(data)


def builtin_field_path(stem: str) -> Path:
    return Path(__file__).parent / "data" / "fields" / f"{stem}.json"


def load_builtin_field(stem: str) -> NumberField:
    return load_field(builtin_field_path(stem))
