"""Exact arithmetic for SL(p;Z): matrices, letters, words and block structure.

Indices in the public API are 1-based.  Matrices act on row vectors from the
right, so a block-upper-triangular matrix preserves the flag spanned by the
trailing coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence


class WordFormatError(ValueError):
    pass


class IntegerMatrix:
    """Exact p x p integer matrix of determinant 1."""

    __slots__ = ("rows", "p")

    def __init__(self, rows: Iterable[Iterable[int]], check: bool = True):
        self.rows = tuple(tuple(int(v) for v in r) for r in rows)
        self.p = len(self.rows)
        if any(len(r) != self.p for r in self.rows):
            raise ValueError("matrix must be square")
        if check and determinant(self.rows) != 1:
            raise ValueError("determinant is not 1")

    @classmethod
    def identity(cls, p: int) -> "IntegerMatrix":
        return cls(_identity_rows(p), check=False)

    @classmethod
    def elementary(cls, p: int, i: int, j: int, x: int = 1) -> "IntegerMatrix":
        rows = [list(r) for r in _identity_rows(p)]
        rows[i - 1][j - 1] = x
        return cls(rows, check=False)

    @classmethod
    def diagonal(cls, signs: Sequence[int]) -> "IntegerMatrix":
        p = len(signs)
        return cls([[signs[i] if i == j else 0 for j in range(p)] for i in range(p)])

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        return IntegerMatrix(_matmul(self.rows, other.rows), check=False)

    def __eq__(self, other):
        return isinstance(other, IntegerMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"IntegerMatrix({[list(r) for r in self.rows]})"

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(zip(*self.rows), check=False)

    def inverse(self) -> "IntegerMatrix":
        return IntegerMatrix(_inverse_unimodular(self.rows), check=False)

    def is_identity(self) -> bool:
        return self.rows == _identity_rows(self.p)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def _identity_rows(p: int):
    return tuple(tuple(1 if i == j else 0 for j in range(p)) for i in range(p))


def _matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c)) for c in bt] for r in a]


def determinant(rows) -> int:
    """Bareiss fraction-free elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def _inverse_unimodular(rows):
    """Fraction-free Gauss-Jordan on [A | I]; every division is exact and
    the diagonal ends up holding det A."""
    n = len(rows)
    m = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    prev = 1
    for k in range(n):
        if m[k][k] == 0:
            r = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if r is None:
                raise ValueError("matrix is not unimodular")
            m[k], m[r] = m[r], m[k]
        mk = m[k]
        pk = mk[k]
        for i in range(n):
            if i != k:
                f = m[i][k]
                m[i] = [(pk * a - f * b) // prev for a, b in zip(m[i], mk)]
        prev = pk
    out = []
    for i in range(n):
        d = m[i][i]
        if d not in (1, -1):
            raise ValueError("matrix is not unimodular")
        out.append([v * d for v in m[i][n:]])
    return out


@dataclass(frozen=True)
class Letter:
    """One letter of Σ or Σ̂.

    kind 'E' is the elementary generator e_ij, 'S' the shortcut letter
    ŝ_ij(x) and 'D' a diagonal sign matrix.  ``sign`` is the exponent ±1.
    """

    kind: str
    i: int = 0
    j: int = 0
    x: int = 1
    signs: tuple = ()
    sign: int = 1

    def __post_init__(self):
        if self.kind in ("E", "S"):
            if self.i == self.j:
                raise ValueError("letter indices must differ")
            if self.kind == "S" and self.x == 0:
                raise ValueError("shortcut coefficient must be nonzero")
            if self.kind == "E" and self.x != 1:
                raise ValueError("elementary letters carry coefficient 1")
        elif self.kind == "D":
            if any(s not in (1, -1) for s in self.signs) or math.prod(self.signs) != 1:
                raise ValueError("diagonal letter needs ±1 entries with product 1")
            if self.sign != 1:
                object.__setattr__(self, "sign", 1)
        else:
            raise ValueError(f"unknown letter kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be ±1")

    def inverse(self) -> "Letter":
        if self.kind == "D":
            return self
        return Letter(self.kind, self.i, self.j, self.x, (), -self.sign)

    @property
    def coefficient(self) -> int:
        """Signed off-diagonal entry of the letter's matrix (E and S only)."""
        return self.sign * self.x

    def matrix(self, p: int) -> IntegerMatrix:
        if self.kind == "D":
            return IntegerMatrix.diagonal(self.signs)
        return IntegerMatrix.elementary(p, self.i, self.j, self.coefficient)

    def __str__(self):
        return format_letter(self)


def E(i: int, j: int, sign: int = 1) -> Letter:
    return Letter("E", i, j, 1, (), sign)


def S(a: int, b: int, x: int) -> Letter:
    """Shortcut letter for e_ab(x), stored with positive exponent."""
    return Letter("S", a, b, x, (), 1)


def D(signs: Sequence[int]) -> Letter:
    return Letter("D", 0, 0, 1, tuple(signs), 1)


def diagonal_set(p: int) -> list[tuple]:
    """All 2^(p-1) sign vectors with product 1, in a fixed order."""
    return [s for s in product((1, -1), repeat=p) if math.prod(s) == 1]


class Word:
    """Immutable word over Σ or Σ̂ in SL(p;Z)."""

    __slots__ = ("letters", "p")

    def __init__(self, letters: Iterable[Letter] = (), p: int = 3):
        self.letters = tuple(letters)
        self.p = p
        for l in self.letters:
            if l.kind == "D":
                if len(l.signs) != p:
                    raise ValueError("diagonal letter has wrong dimension")
            elif not (1 <= l.i <= p and 1 <= l.j <= p):
                raise ValueError(f"letter {l} out of range for p={p}")

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return Word(self.letters[k], self.p)
        return self.letters[k]

    def __add__(self, other: "Word") -> "Word":
        if other.p != self.p:
            raise ValueError("dimension mismatch")
        return Word(self.letters + other.letters, self.p)

    def __eq__(self, other):
        return isinstance(other, Word) and self.p == other.p and self.letters == other.letters

    def __hash__(self):
        return hash((self.p, self.letters))

    def __repr__(self):
        return f"Word({format_word(self)!r}, p={self.p})"

    def inverse(self) -> "Word":
        return Word((l.inverse() for l in reversed(self.letters)), self.p)

    @property
    def is_hat(self) -> bool:
        return any(l.kind == "S" for l in self.letters)

    def free_reduce(self) -> "Word":
        out: list[Letter] = []
        for l in self.letters:
            if out and cancels(out[-1], l):
                out.pop()
            else:
                out.append(l)
        return Word(out, self.p)


def cancels(a: Letter, b: Letter) -> bool:
    """True when ab is a free cancellation pair."""
    if a.kind != b.kind:
        return False
    if a.kind == "D":
        return a.signs == b.signs
    return a.i == b.i and a.j == b.j and a.x == b.x and a.sign == -b.sign


def word(letters: Iterable[Letter], p: int) -> Word:
    return Word(letters, p)


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u v u^-1 v^-1."""
    return u + v + u.inverse() + v.inverse()


def apply_letter_right(m: list[list[int]], l: Letter) -> None:
    """In place m <- m · letter (column operation)."""
    if l.kind == "D":
        for c, s in enumerate(l.signs):
            if s == -1:
                for r in m:
                    r[c] = -r[c]
        return
    i, j, x = l.i - 1, l.j - 1, l.coefficient
    for r in m:
        if r[i]:
            r[j] += x * r[i]


def evaluate(w: Word) -> IntegerMatrix:
    m = [list(r) for r in _identity_rows(w.p)]
    for l in w.letters:
        apply_letter_right(m, l)
    return IntegerMatrix(m, check=False)


def norm2(g: IntegerMatrix) -> float:
    return math.sqrt(sum(v * v for r in g.rows for v in r))


def norm_inf(g: IntegerMatrix) -> int:
    return max(abs(v) for r in g.rows for v in r)


class BlockPartition:
    """Ordered contiguous partition of {1..p}."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[Iterable[int]]):
        self.blocks = tuple(tuple(b) for b in blocks)
        start = 1
        for b in self.blocks:
            if not b or list(b) != list(range(start, start + len(b))):
                raise ValueError("blocks must be contiguous, increasing and cover 1..p")
            start += len(b)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "BlockPartition":
        out, start = [], 1
        for s in sizes:
            out.append(range(start, start + s))
            start += s
        return cls(out)

    @classmethod
    def from_cuts(cls, p: int, cuts: Iterable[int]) -> "BlockPartition":
        edges = [0] + sorted(cuts) + [p]
        return cls.from_sizes([b - a for a, b in zip(edges, edges[1:])])

    @property
    def p(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    @property
    def cuts(self) -> tuple:
        """Cut positions k meaning a break between index k and k+1."""
        return tuple(b[-1] for b in self.blocks[:-1])

    def block_of(self, i: int) -> int:
        for n, b in enumerate(self.blocks):
            if i in b:
                return n
        raise IndexError(i)

    def __eq__(self, other):
        return isinstance(other, BlockPartition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return "BlockPartition(" + ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks) + ")"


def cut_allowed(g: IntegerMatrix, k: int) -> bool:
    """g preserves the flag at cut k: rows k+1..p vanish on columns 1..k."""
    return all(g.rows[r][c] == 0 for r in range(k, g.p) for c in range(k))


def minimal_parabolic(g: IntegerMatrix) -> BlockPartition:
    return BlockPartition.from_cuts(g.p, [k for k in range(1, g.p) if cut_allowed(g, k)])


def in_block_group(g: IntegerMatrix, part: BlockPartition) -> bool:
    if part.p != g.p:
        raise ValueError("partition dimension mismatch")
    return all(cut_allowed(g, k) for k in part.cuts)


def in_parabolic(g: IntegerMatrix, j: int) -> bool:
    """Membership in U(j, p-j)."""
    return cut_allowed(g, j)


# text format -----------------------------------------------------------

def format_letter(l: Letter) -> str:
    if l.kind == "D":
        return "D " + ",".join("+1" if s == 1 else "-1" for s in l.signs)
    if l.kind == "E":
        return f"{'E' if l.sign == 1 else 'E-'} {l.i} {l.j}"
    return f"{'S' if l.sign == 1 else 'S-'} {l.i} {l.j} {l.x}"


def format_word(w: Word) -> str:
    return " ".join(format_letter(l) for l in w.letters)


def parse_word(text: str, p: int) -> Word:
    toks = text.split()
    out, k = [], 0
    while k < len(toks):
        t = toks[k]
        try:
            if t in ("E", "E-"):
                i, j = int(toks[k + 1]), int(toks[k + 2])
                out.append(E(i, j, 1 if t == "E" else -1))
                k += 3
            elif t in ("S", "S-"):
                a, b, x = int(toks[k + 1]), int(toks[k + 2]), int(toks[k + 3])
                out.append(Letter("S", a, b, x, (), 1 if t == "S" else -1))
                k += 4
            elif t == "D":
                out.append(D(tuple(int(s) for s in toks[k + 1].split(","))))
                k += 2
            else:
                raise WordFormatError(f"unknown token {t!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, WordFormatError):
                raise
            raise WordFormatError(f"bad letter at token {k}: {exc}") from exc
    try:
        return Word(out, p)
    except ValueError as exc:
        raise WordFormatError(str(exc)) from exc
