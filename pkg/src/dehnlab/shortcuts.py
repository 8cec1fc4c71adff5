"""Logarithmic-length words for e_ab(x), the expansion map λ and ℓ̂.

The word for e_ab(x) lives in the 3x3 block {a, d, b} where d is the smallest
index outside {a, b}.  Writing u(v) = e_ab(v_a) e_db(v_d) for v in Z^2 and
M = e_ad e_da (the hyperbolic matrix [[2,1],[1,1]] on coordinates (a, d)),
conjugation acts linearly: M u(v) M^-1 = u(Mv).  M stretches the direction
α(v) = φ v_a + v_d by φ² and shrinks β(v) = v_a − φ v_d by the same factor.

To reach u((x, 0)) we push the target by M^m until β is bounded, then peel
off small digits c_j so that s = Σ M^j c_j, which gives

    u(s) = u(c_0) M u(c_1) M ... M u(c_N) M^-N

and u(x, 0) = M^-m u(s) M^m.  Both m and N are O(log |x|).
"""

from __future__ import annotations

import math
from functools import lru_cache
from math import isqrt

from .core import E, Letter, Word

DIGIT_BOUND = 2
BETA_BOUND = 2.0
PHI = (1 + math.sqrt(5)) / 2
C_SC = 8.0

_MAX_STEPS = 100_000


def helper_index(a: int, b: int, p: int) -> int:
    return next(d for d in range(1, p + 1) if d not in (a, b))


def _phi_scaled(bits: int) -> int:
    """floor-ish φ·2^bits, accurate to one unit."""
    return ((1 << bits) + isqrt(5 << (2 * bits))) // 2


def _beta(v) -> float:
    bits = max(abs(v[0]), abs(v[1]), 1).bit_length() + 64
    num = v[0] * (1 << bits) - v[1] * _phi_scaled(bits)
    return num / (1 << bits)


def _digit_table(K):
    groups = {}
    for ca in range(-K, K + 1):
        for cd in range(-K, K + 1):
            groups.setdefault(abs(ca) + abs(cd), []).append((ca - PHI * cd, ca, cd))
    return [groups[k] for k in sorted(groups)]


_TABLE = _digit_table(DIGIT_BOUND)


def _digits(s, K=DIGIT_BOUND, B=BETA_BOUND):
    """Digits c_0..c_N with s = Σ M^j c_j, each |c|_inf <= K."""
    table = _TABLE if K == DIGIT_BOUND else _digit_table(K)
    tol = B / PHI ** 2
    out = []
    v = s
    bits = max(abs(s[0]), abs(s[1]), 1).bit_length() + 64
    scale = 1 << bits
    ph = _phi_scaled(bits)
    for _ in range(_MAX_STEPS):
        if abs(v[0]) <= K and abs(v[1]) <= K:
            out.append(v)
            return out
        beta = (v[0] * scale - v[1] * ph) / scale
        best = None
        for group in table:
            for bc, ca, cd in group:
                diff = abs(beta - bc)
                if diff <= tol and (best is None or diff < best[0]):
                    best = (diff, ca, cd)
            if best is not None:
                break
        if best is None:
            raise RuntimeError("digit expansion left the stable band")
        c = (best[1], best[2])
        out.append(c)
        w0, w1 = v[0] - c[0], v[1] - c[1]
        v = (w0 - w1, 2 * w1 - w0)  # M^-1 w
    raise RuntimeError("digit expansion did not terminate")


def _hyperbolic_word(a: int, b: int, d: int, x: int) -> list[Letter]:
    s, m = (x, 0), 0
    while abs(_beta(s)) > BETA_BOUND:
        s = (2 * s[0] + s[1], s[0] + s[1])
        m += 1
    digits = _digits(s)
    n = len(digits) - 1
    M = [E(a, d), E(d, a)]
    Minv = [E(d, a, -1), E(a, d, -1)]
    ab = (E(a, b, -1), None, E(a, b))
    db = (E(d, b, -1), None, E(d, b))

    def u(c):
        ca, cd = c
        return [ab[(ca > 0) - (ca < 0) + 1]] * abs(ca) + [db[(cd > 0) - (cd < 0) + 1]] * abs(cd)

    letters = Minv * m
    for k, c in enumerate(digits):
        if k:
            letters += M
        letters += u(c)
    net = m - n
    letters += (M if net > 0 else Minv) * abs(net)
    return letters


@lru_cache(maxsize=65536)
def _shortcut_letters(a: int, b: int, x: int, p: int, helper: int = 0) -> tuple:
    power = (E(a, b, 1 if x > 0 else -1),)
    if abs(x) <= 8:
        return power * abs(x)
    d = helper or helper_index(a, b, p)
    hyp = Word(_hyperbolic_word(a, b, d, x), p).free_reduce().letters
    return power * abs(x) if abs(x) <= len(hyp) else hyp


def block_helper(a: int, b: int, block) -> int:
    """Smallest index of the block outside {a, b}; 0 when there is none."""
    return next((d for d in sorted(block) if d not in (a, b)), 0)


def expand_in_block(l: Letter, block, p: int) -> tuple:
    """λ restricted to a block: the shortcut word uses a helper index inside
    the block, so the expansion stays in SL(block).  Blocks of size 2 have
    no helper and get the power word."""
    if l.kind != "S":
        return (l,)
    d = block_helper(l.i, l.j, block)
    if d:
        body = _shortcut_letters(l.i, l.j, l.x, p, d)
    else:
        body = _sl2_letters(l.i, l.j, l.x)
    if l.sign == 1:
        return body
    return tuple(c.inverse() for c in reversed(body))


def build_shortcut(a: int, b: int, x: int, p: int) -> Word:
    """Word over Σ evaluating to e_ab(x) with length O(log |x|)."""
    if p < 3:
        raise ValueError("logarithmic shortcuts need p >= 3")
    if a == b or not (1 <= a <= p and 1 <= b <= p):
        raise ValueError("bad index pair")
    if x == 0:
        raise ValueError("coefficient must be nonzero")
    return Word(_shortcut_letters(a, b, int(x), p), p)


def length_bound(x: int, c_sc: float = C_SC) -> float:
    return c_sc * (1 + math.floor(math.log2(abs(x))))


def expand_letter(l: Letter, p: int) -> tuple:
    if l.kind != "S":
        return (l,)
    body = _shortcut_letters(l.i, l.j, l.x, p) if p >= 3 else _sl2_letters(l.i, l.j, l.x)
    if l.sign == 1:
        return body
    return tuple(c.inverse() for c in reversed(body))


def _sl2_letters(a, b, x):
    # no logarithmic words exist in SL(2;Z); fall back to the power
    return tuple([E(a, b, 1 if x > 0 else -1)] * abs(x))


def lambda_expand(w: Word) -> Word:
    out = []
    for l in w.letters:
        out.extend(expand_letter(l, w.p))
    return Word(out, w.p)


@lru_cache(maxsize=65536)
def _letter_length(kind: str, i: int, j: int, x: int, p: int) -> int:
    if kind != "S":
        return 1
    if p < 3:
        return abs(x)
    return len(_shortcut_letters(i, j, x, p))


def letter_length(l: Letter, p: int) -> int:
    return _letter_length(l.kind, l.i, l.j, l.x, p)


def shortcut_length(w: Word) -> int:
    """ℓ̂(w): the length of λ(w)."""
    return sum(letter_length(l, w.p) for l in w.letters)
