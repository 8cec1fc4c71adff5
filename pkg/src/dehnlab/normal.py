"""Normal form ω₀(g): block decomposition by the minimal parabolic subgroup.

For g with minimal parabolic U(T_1, ..., T_r) we write g = V · M · d where
M is block diagonal with blocks m_i, d is a sign matrix and V is block
unipotent.  V is emitted in the row-sweep order of its cross entries and
each block m_i by Euclidean column reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import D, S, BlockPartition, IntegerMatrix, Word, minimal_parabolic
from .moves import unitriangular_letters


@dataclass(frozen=True)
class NormalFormDecomposition:
    partition: BlockPartition
    diagonal: tuple        # signs left after reducing each block
    blocks: tuple          # m_i as IntegerMatrix on each block
    offdiag: dict          # (i, j) -> rows of V_ij
    unipotent: IntegerMatrix
    block_diagonal: IntegerMatrix

    def reassemble(self) -> IntegerMatrix:
        return self.unipotent @ self.block_diagonal


def _block_reduce(rows, idx):
    """Column operations bringing the block rows[idx][idx] to a sign matrix.

    Works in place on the full matrix `rows`; returns the letters applied
    on the right (as (a, b, x) triples, 1-based) and the final signs.
    """
    ops = []

    def col_add(b, a, x):
        # col b += x * col a, i.e. right multiplication by e_ab(x)
        if x == 0:
            return
        for r in rows:
            r[b] += x * r[a]
        ops.append((a + 1, b + 1, x))

    n = len(idx)
    for k in range(n):
        r = idx[k]
        cols = idx[k:]
        while True:
            nz = [c for c in cols if rows[r][c] != 0]
            if len(nz) == 1:
                break
            piv = min(nz, key=lambda c: (abs(rows[r][c]), c))
            for c in nz:
                if c != piv:
                    q = _round_div(rows[r][c], rows[r][piv])
                    col_add(c, piv, -q)
        c = nz[0]
        if c != idx[k]:
            # move the pivot into the diagonal position with two column moves
            target = idx[k]
            col_add(target, c, 1)
            col_add(c, target, -1)
        if abs(rows[r][idx[k]]) != 1:
            raise ValueError("block is not unimodular")
    # clear below the diagonal, last column first
    for k in range(n - 2, -1, -1):
        c = idx[k]
        for m in range(k + 1, n):
            r = idx[m]
            if rows[r][c]:
                col_add(c, r, -rows[r][c] * rows[r][r])
    signs = [rows[i][i] for i in idx]
    return ops, signs


def _round_div(a, b):
    q, rem = divmod(a, b)
    if 2 * abs(rem) > abs(b):
        q += 1
    return q


def block_word(m: IntegerMatrix, idx, p: int) -> tuple:
    """Shortcut letters and sign vector with (letters) · D(signs) = m restricted
    to idx; m must be block diagonal on idx with unit determinant."""
    rows = [list(r) for r in m.rows]
    ops, signs = _block_reduce(rows, [i - 1 for i in idx])
    # m · ops = diag(signs)  =>  m = (d ops^-1 d^-1) d
    full = [1] * p
    for i, s in zip(idx, signs):
        full[i - 1] = s
    letters = []
    for a, b, x in reversed(ops):
        letters.append(S(a, b, -x * full[a - 1] * full[b - 1]))
    return tuple(letters), tuple(full)


def normal_form(g: IntegerMatrix):
    """(decomposition, ω₀(g)) with evaluate(ω₀(g)) = g exactly."""
    p = g.p
    part = minimal_parabolic(g)
    M = [[0] * p for _ in range(p)]
    for b in part.blocks:
        for i in b:
            for j in b:
                M[i - 1][j - 1] = g.rows[i - 1][j - 1]
    Mm = IntegerMatrix(M, check=False)
    V = g @ Mm.inverse()
    word_v = unitriangular_letters(V)
    word_m = []
    signs = [1] * p
    blocks = []
    for b in part.blocks:
        blocks.append(IntegerMatrix([[g.rows[i - 1][j - 1] for j in b] for i in b], check=False))
        if len(b) == 1:
            signs[b[0] - 1] = g.rows[b[0] - 1][b[0] - 1]
            continue
        letters, full = block_word(Mm, list(b), p)
        word_m.extend(letters)
        for i in b:
            signs[i - 1] = full[i - 1]
    # letters of later blocks were conjugated by their own signs only; all
    # block words commute with the other blocks' signs, so one D suffices
    word = list(word_v) + word_m
    if any(s == -1 for s in signs):
        word.append(D(tuple(signs)))
    offdiag = {}
    for x, bi in enumerate(part.blocks):
        for y, bj in enumerate(part.blocks):
            if x < y:
                offdiag[(x, y)] = tuple(tuple(V.rows[i - 1][j - 1] for j in bj) for i in bi)
    dec = NormalFormDecomposition(part, tuple(signs), tuple(blocks), offdiag, V, Mm)
    return dec, Word(word, p)


def omega(g: IntegerMatrix) -> Word:
    return normal_form(g)[1]


def omega_triangle(a: IntegerMatrix, b: IntegerMatrix) -> Word:
    """ω(a) ω(a^-1 b) ω(b^-1): the boundary word of a triangle labelled I, a, b."""
    return omega(a) + omega(a.inverse() @ b) + omega(b.inverse())


def normal_form_bound_ratio(g: IntegerMatrix) -> float:
    from .shortcuts import shortcut_length
    from .core import norm2
    return shortcut_length(omega(g)) / (1 + math.log2(norm2(g)))


def omega_constant(p: int) -> float:
    """Shipped C_ω: block reduction costs grow with the number of block entries."""
    return 6.0 * p * p
