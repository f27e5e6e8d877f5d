"""Narrow ray class groups for moduli dividing p^infinity.

Classes are cosets of the unit image inside (O_F/f)^x, glued to the narrow
class group via the declared ideal representatives (all shipped fields have
narrow class number one, so the prime-to-p part is trivial and the tables
below carry it only as a label).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .fields import NumberField
from .padics import _u_mul, _ff_poly_inv


class ModulusError(ValueError):
    pass


@dataclass(frozen=True)
class Modulus:
    """Exponent vector over the primes above p (f | p^infinity)."""

    exponents: tuple

    def __post_init__(self):
        if any(n < 0 for n in self.exponents):
            raise ModulusError("modulus exponents must be nonnegative")

    def is_trivial(self):
        return all(n == 0 for n in self.exponents)

    def divides(self, other: "Modulus") -> bool:
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def bump(self, index: int) -> "Modulus":
        exps = list(self.exponents)
        exps[index] += 1
        return Modulus(tuple(exps))

    def norm(self, field: NumberField) -> int:
        n = 1
        for q, m in zip(field.primes_above_p, self.exponents):
            n *= (field.p ** q.f) ** m
        return n


class ResidueRing:
    """(O_F / f) for f | p^infinity, as a product of local truncations."""

    def __init__(self, field: NumberField, modulus: Modulus):
        self.field = field
        self.modulus = modulus
        self.active = [
            (i, q, n)
            for i, (q, n) in enumerate(zip(field.primes_above_p, modulus.exponents))
            if n > 0
        ]
        self._basis_images = []
        for _, q, n in self.active:
            local = field.local_data(q, max(n + 2, 8))
            pk = field.p ** n
            imgs = [tuple(c % pk for c in img.coeffs[0]) for img in local.basis_images]
            self._basis_images.append((q, n, pk, imgs))

    def reduce_global(self, coords):
        parts = []
        for q, n, pk, imgs in self._basis_images:
            f = q.f
            acc = tuple(0 for _ in range(f))
            for c, img in zip(coords, imgs):
                if c:
                    acc = tuple((a + c * b) % pk for a, b in zip(acc, img))
            parts.append(acc)
        return tuple(parts)

    def one(self):
        return tuple(
            tuple(1 if i == 0 else 0 for i in range(q.f))
            for q, n, pk, imgs in self._basis_images
        )

    def mul(self, x, y):
        out = []
        for (q, n, pk, _), a, b in zip(self._basis_images, x, y):
            out.append(_u_mul(a, b, q.unramified_poly, self.field.p, pk))
        return tuple(out)

    def inv(self, x):
        out = []
        for (q, n, pk, _), a in zip(self._basis_images, x):
            res = [c % self.field.p for c in a]
            inv_res = _ff_poly_inv(res, list(q.unramified_poly), self.field.p)
            z = tuple((inv_res[i] if i < len(inv_res) else 0) for i in range(q.f))
            # Newton lift to mod p^n
            cur = 1
            while cur < n:
                cur = min(2 * cur, n)
                pc = self.field.p ** cur
                az = _u_mul(a, z, q.unramified_poly, self.field.p, pc)
                two_minus = tuple(
                    ((2 if i == 0 else 0) - c) % pc for i, c in enumerate(az)
                )
                z = _u_mul(z, two_minus, q.unramified_poly, self.field.p, pc)
            out.append(tuple(c % pk for c in z))
        return tuple(out)

    def is_unit(self, x):
        p = self.field.p
        return all(any(c % p for c in part) for part in x)

    def units(self):
        """All units of the residue ring (desk scale)."""
        local_units = []
        for q, n, pk, _ in self._basis_images:
            ranges = [range(pk)] * q.f
            local_units.append(
                [t for t in product(*ranges) if any(c % self.field.p for c in t)]
            )
        return [tuple(combo) for combo in product(*local_units)]

    def unit_count(self) -> int:
        count = 1
        p = self.field.p
        for q, n, pk, _ in self._basis_images:
            qsize = p ** q.f
            count *= (qsize - 1) * qsize ** (n - 1)
        return count


@dataclass
class CongruenceUnits:
    """Generators of the totally positive units congruent to 1 mod f."""

    field: NumberField
    modulus: Modulus
    generators: list  # global coordinate vectors
    orders_used: list


def congruence_unit_group(field: NumberField, modulus: Modulus) -> CongruenceUnits:
    """E(f): powers of the declared totally positive generators fixing 1 mod f."""
    ring = ResidueRing(field, modulus)
    gens = []
    orders = []
    for u in field.totally_positive_unit_generators:
        if modulus.is_trivial():
            gens.append(tuple(u))
            orders.append(1)
            continue
        img = ring.reduce_global(u)
        if not ring.is_unit(img):
            raise ModulusError("declared unit is not a unit at the modulus")
        acc = img
        order = 1
        one = ring.one()
        while acc != one:
            acc = ring.mul(acc, img)
            order += 1
            if order > 10 ** 6:
                raise ModulusError("unit order search exploded")
        gens.append(tuple(field.power(u, order)))
        orders.append(order)
    return CongruenceUnits(field, modulus, gens, orders)


class RayClassGroup:
    """Cl_F^+(f) with a duplicate-free representative table."""

    def __init__(self, field: NumberField, modulus: Modulus, rep_shifts=None):
        if field.narrow_class_number != 1:
            raise ModulusError("shipped backends declare narrow class number one")
        self.field = field
        self.modulus = modulus
        self.ring = ResidueRing(field, modulus)
        if modulus.is_trivial():
            self._unit_image = {()}
            self.class_labels = [()]
            self._class_of_unit = {(): ()}
        else:
            self._build_classes()
        self.representatives = self._build_representatives(rep_shifts)
        self.structure = self._cyclic_structure()

    # -- classes -------------------------------------------------------------

    def _build_classes(self):
        ring = self.ring
        gen_images = [
            ring.reduce_global(u) for u in self.field.totally_positive_unit_generators
        ]
        image = {ring.one()}
        frontier = [ring.one()]
        while frontier:
            x = frontier.pop()
            for g in gen_images:
                y = ring.mul(x, g)
                if y not in image:
                    image.add(y)
                    frontier.append(y)
        self._unit_image = image
        units = ring.units()
        seen = {}
        labels = []
        for u in units:
            if u in seen:
                continue
            orbit = sorted(ring.mul(u, v) for v in image)
            label = orbit[0]
            for x in orbit:
                seen[x] = label
            labels.append(label)
        labels.sort()
        self.class_labels = labels
        self._class_of_unit = seen

    def order(self) -> int:
        return len(self.class_labels)

    def expected_order(self) -> int:
        """Order by the exact sequence: h * #(O/f)^x / #Im(units)."""
        if self.modulus.is_trivial():
            return self.field.narrow_class_number
        return (
            self.field.narrow_class_number
            * self.ring.unit_count()
            // len(self._unit_image)
        )

    def class_of_unit_element(self, x):
        if self.modulus.is_trivial():
            return ()
        if not self.ring.is_unit(x):
            raise ModulusError("element is not a unit at the modulus")
        return self._class_of_unit[tuple(x)]

    def class_of_global(self, coords):
        if self.modulus.is_trivial():
            return ()
        return self.class_of_unit_element(self.ring.reduce_global(coords))

    # -- representatives -----------------------------------------------------

    def _build_representatives(self, rep_shifts):
        """Totally positive global lifts, coprime to p, one per class.

        rep_shifts lets tests request a different (still valid) table.
        """
        reps = {}
        shifts = rep_shifts or {}
        for label in self.class_labels:
            reps[label] = self._lift_class(label, shifts.get(label, 0))
        return reps

    def _lift_class(self, label, shift: int):
        field = self.field
        if self.modulus.is_trivial():
            base = tuple(1 if i == 0 else 0 for i in range(field.degree))
            return base
        # search small totally positive integral elements with the right class
        target = label
        count = -1
        for cand in _global_candidates(field, self.modulus):
            red = self.ring.reduce_global(cand)
            if not self.ring.is_unit(red):
                continue
            if self._class_of_unit[red] != target:
                continue
            if not field.is_totally_positive(cand):
                continue
            count += 1
            if count == shift:
                return tuple(cand)
        raise ModulusError("no representative found in the search box")

    def representative(self, label):
        return self.representatives[label]

    # -- structure ------------------------------------------------------------

    def _cyclic_structure(self):
        if self.modulus.is_trivial():
            return []
        # the quotient group: classes with induced multiplication
        labels = list(self.class_labels)
        index = {lab: i for i, lab in enumerate(labels)}
        mul = {}
        for a in labels:
            for b in labels:
                mul[(a, b)] = self._class_of_unit[self.ring.mul(a, b)]
        identity = self._class_of_unit[self.ring.one()]

        def element_order(x):
            n, acc = 1, x
            while acc != identity:
                acc = mul[(acc, x)]
                n += 1
            return n

        structure = []
        remaining = set(labels)
        generated = {identity}
        while generated != set(labels):
            best, best_ord = None, 0
            for x in remaining:
                o = element_order(x)
                if o > best_ord:
                    best, best_ord = x, o
            structure.append((best, best_ord))
            # close under the new generator
            new = set(generated)
            for g in list(generated):
                acc = g
                for _ in range(best_ord - 1):
                    acc = mul[(acc, best)]
                    new.add(acc)
            generated = new
            remaining -= generated
        return structure

    # -- projections ------------------------------------------------------------

    def project_class(self, finer: "RayClassGroup", label):
        """Image in self of a class of the finer group."""
        if not self.modulus.divides(finer.modulus):
            raise ModulusError("projection needs a divisible modulus pair")
        if self.modulus.is_trivial():
            return ()
        rep = finer.representatives[label]
        return self.class_of_global(rep)

    def factor_representative_change(self, label, other_rep):
        """Express another representative as (gamma, u, positivity) data.

        Returns (gamma, u_image) with a'_y = gamma * a_y * u: gamma in F^x is
        the exact global ratio, u its unit part at the modulus (1 mod f).
        """
        mine = self.representatives[label]
        field = self.field
        # gamma := other / mine computed p-adically componentwise
        a = field.embed_global(mine)
        b = field.embed_global(other_rep)
        u = b * a.inverse()
        if not self.modulus.is_trivial():
            red_a = self.ring.reduce_global(mine)
            red_b = self.ring.reduce_global(other_rep)
            diff = self.ring.mul(red_b, self.ring.inv(red_a))
            if self._class_of_unit.get(diff) != self._class_of_unit[self.ring.one()]:
                raise ModulusError("representatives do not lie in the same class")
        return {"ratio_semilocal": u, "same_class": True}


def _global_candidates(field: NumberField, modulus: Modulus):
    """Small integral elements, ordered by box size (desk-scale search)."""
    d = field.degree
    bound = field.p ** (max(modulus.exponents) if modulus.exponents else 1)
    limit = bound * 4 + 8
    if d == 1:
        for a in range(1, limit):
            yield (a,)
        return
    for radius in range(1, limit):
        for combo in product(range(-radius, radius + 1), repeat=d):
            if max(abs(c) for c in combo) != radius and radius > 1:
                continue
            if all(c == 0 for c in combo):
                continue
            yield combo


def build_ray_class_group(field: NumberField, modulus: Modulus, rep_shifts=None):
    group = RayClassGroup(field, modulus, rep_shifts=rep_shifts)
    if group.order() != group.expected_order():
        raise ModulusError(
            f"class count {group.order()} disagrees with the exact sequence "
            f"formula {group.expected_order()}"
        )
    return group


def compatible_representatives(group: RayClassGroup, prime_index: int):
    """Representatives {a_y u_r} for Cl^+(f p) built over those of Cl^+(f).

    Requires every prime above p to divide f.  Returns the finer group with
    its table replaced by lifts of a_y * u_r, plus the chosen u_r lifts.
    """
    field = group.field
    if any(n == 0 for n in group.modulus.exponents):
        raise ModulusError("compatibility tower needs all primes above p in f")
    finer_modulus = group.modulus.bump(prime_index)
    finer = RayClassGroup(field, finer_modulus)
    ring_fp = finer.ring
    # kernel window: units congruent to 1 mod f
    coarse_ring = group.ring
    window = []
    for w in ring_fp.units():
        wf = _project_residue(field, ring_fp, coarse_ring, w)
        if wf == coarse_ring.one():
            window.append(w)
    # pick u_r covering each fiber class over the identity exactly once
    chosen = []
    covered = set()
    for w in sorted(window):
        cls = finer.class_of_unit_element(w)
        if cls in covered:
            continue
        covered.add(cls)
        chosen.append(w)
    # global lifts of the u_r (congruent to 1 mod f)
    u_lifts = []
    for w in chosen:
        for cand in _global_candidates(field, finer_modulus):
            red = ring_fp.reduce_global(cand)
            if red == w and field.is_totally_positive(cand):
                u_lifts.append(tuple(cand))
                break
        else:
            raise ModulusError("no lift found for a compatibility unit")
    # assemble the finer table: class of a_y * u_r -> global lift
    table = {}
    for label in group.class_labels:
        a_y = group.representatives[label]
        for u in u_lifts:
            prod_coords = field.mul(a_y, u)
            cls = finer.class_of_global(prod_coords)
            if cls in table:
                raise ModulusError("duplicate class in compatibility table")
            table[cls] = tuple(prod_coords)
    if set(table) != set(finer.class_labels):
        raise ModulusError("compatibility table does not cover the finer group")
    finer.representatives = table
    return finer, u_lifts


def _project_residue(field, fine_ring: ResidueRing, coarse_ring: ResidueRing, x):
    """Reduce a fine residue element to the coarse modulus."""
    parts = []
    fine_active = {q.name: (q, n, pk) for (q, n, pk, _) in fine_ring._basis_images}
    xs = dict(zip([q.name for q, _, _, _ in fine_ring._basis_images], x))
    for q, n, pk, _ in coarse_ring._basis_images:
        val = xs[q.name]
        parts.append(tuple(c % (field.p ** n) for c in val))
    return tuple(parts)
