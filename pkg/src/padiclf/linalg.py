"""Small exact linear algebra helpers: Fractions and integers mod p^K.

Everything here is desk scale (dimensions in the low hundreds); the point
is exactness, not asymptotics.
"""

from __future__ import annotations

from fractions import Fraction

from .padics import int_valuation


# -- rational matrices -------------------------------------------------------

def frac_rref(rows):
    """Reduced row echelon form over Fraction; returns (rref, pivot_cols)."""
    mat = [[Fraction(x) for x in row] for row in rows]
    m = len(mat)
    n = len(mat[0]) if m else 0
    pivots = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if mat[i][col] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][col]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(m):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    return mat, pivots


def frac_kernel(rows, ncols):
    """Basis of the right kernel of a Fraction matrix."""
    if not rows:
        return [[Fraction(1 if i == j else 0) for i in range(ncols)] for j in range(ncols)]
    rref, pivots = frac_rref(rows)
    basis = []
    pivot_set = set(pivots)
    for fc in range(ncols):
        if fc in pivot_set:
            continue
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for prow, pcol in enumerate(pivots):
            vec[pcol] = -rref[prow][fc]
        basis.append(vec)
    return basis


def frac_solve(rows, rhs):
    """Solve A x = b over Fractions; None if inconsistent/underdetermined."""
    n = len(rows[0])
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    rref, pivots = frac_rref(aug)
    sol = [Fraction(0)] * n
    for prow, pcol in enumerate(pivots):
        if pcol == n:
            return None  # 0 = 1 row
        sol[pcol] = rref[prow][n]
    # verify (underdetermined systems return one solution only if consistent)
    for row, b in zip(rows, rhs):
        if sum(Fraction(a) * s for a, s in zip(row, sol)) != Fraction(b):
            return None
    return sol


def frac_matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def frac_matvec(A, v):
    return [sum(a * b for a, b in zip(row, v)) for row in A]


def charpoly_fractions(A):
    """det(X I - A) by the Faddeev-LeVerrier recurrence; exact Fractions.

    Returns coefficients low-to-high, length n+1, leading coefficient 1.
    """
    n = len(A)
    if n == 0:
        return [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    cs = [Fraction(0)] * (n + 1)
    cs[n] = Fraction(1)
    for k in range(1, n + 1):
        for i in range(n):
            M[i][i] += cs[n - k + 1]
        M = frac_matmul(A, M)
        trace = sum(M[i][i] for i in range(n))
        cs[n - k] = -trace / k
    return cs


# -- integer matrices mod p^K ------------------------------------------------

def solve_mod_prime_power(rows, rhs, p, K):
    """Solve A x = b mod p^K; returns (solution, achieved_K) or None.

    Reduced row echelon with unit pivots; rows left over after the sweep
    have all entries divisible by p and are peeled (divided by p) and
    solved recursively one level down.  The achieved precision is read off
    the final residual of the original system.
    """
    pk = p ** K
    n = len(rows[0]) if rows else 0
    aug = [[x % pk for x in row] + [b % pk] for row, b in zip(rows, rhs)]
    sol = _solve_rref_rec(aug, n, p, K)
    achieved = K
    for row, b in zip(rows, rhs):
        resid = (sum(a * x for a, x in zip(row, sol)) - b) % pk
        if resid:
            achieved = min(achieved, int_valuation(resid, p))
    if achieved <= 0:
        return None
    return sol, achieved


def _solve_rref_rec(aug, n, p, K, depth=0):
    """One unit-pivot RREF sweep plus a peeled recursion on the leftovers."""
    pk = p ** K
    m = len(aug)
    pivots = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if aug[i][col] % p != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = pow(aug[r][col], -1, pk)
        aug[r] = [x * inv % pk for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(a - f * b) % pk for a, b in zip(aug[i], aug[r])]
        pivots.append((r, col))
        r += 1
        if r == m:
            break
    pivot_cols = {col for _, col in pivots}
    free_cols = [c for c in range(n) if c not in pivot_cols]
    sol = [0] * n
    if r < m and free_cols and K > 1 and depth < K:
        # leftover rows: all entries divisible by p (no unit pivot remained)
        sub = []
        for i in range(r, m):
            row = [aug[i][c] for c in free_cols] + [aug[i][n]]
            if all(x % pk == 0 for x in row):
                continue
            sub.append([(x % pk) // p if x % p == 0 else None for x in row])
        sub = [row for row in sub if None not in row]
        if sub:
            sub_sol = _solve_rref_rec(sub, len(free_cols), p, K - 1, depth + 1)
            for c, v in zip(free_cols, sub_sol):
                sol[c] = v
    for prow, pcol in pivots:
        s = aug[prow][n] - sum(
            aug[prow][c] * sol[c] for c in free_cols if aug[prow][c]
        )
        sol[pcol] = s % pk
    return sol


def kernel_mod_prime_power(rows, ncols, p, K):
    """Kernel vectors of A mod p^K with unit-pivot elimination."""
    pk = p ** K
    m = len(rows)
    aug = [[x % pk for x in row] for row in rows]
    piv_of_col = {}
    r = 0
    for col in range(ncols):
        best, best_v = None, None
        for i in range(r, m):
            v = int_valuation(aug[i][col], p)
            if v is not None and (best_v is None or v < best_v):
                best, best_v = i, v
                if v == 0:
                    break
        if best is None or best_v != 0:
            continue  # only unit pivots give exact eliminations mod p^K
        aug[r], aug[best] = aug[best], aug[r]
        inv = pow(aug[r][col], -1, pk)
        aug[r] = [x * inv % pk for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(a - f * b) % pk for a, b in zip(aug[i], aug[r])]
        piv_of_col[col] = r
        r += 1
        if r == m:
            break
    basis = []
    for fc in range(ncols):
        if fc in piv_of_col:
            continue
        vec = [0] * ncols
        vec[fc] = 1
        for col, prow in piv_of_col.items():
            vec[col] = (-aug[prow][fc]) % pk
        basis.append(vec)
    return basis
