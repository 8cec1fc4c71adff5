"""Fillers built from macro moves: triangular words, disjoint commutators,
parabolic splitting and words inside a single 2x2 block."""

from __future__ import annotations

import math

from .core import D, E, BlockPartition, Letter, Word, evaluate, format_word
from .moves import (DEFAULT_MODEL, CostModel, FillingCertificate, Session, _swap_inverse,
                    _swap_word, logbar, weight)


class NotTriangular(ValueError):
    pass


class NotIdentity(ValueError):
    pass


class NotInParabolic(ValueError):
    pass


class BlockTooLarge(ValueError):
    pass


class BlocksNotDisjoint(ValueError):
    pass


class NotRank2(ValueError):
    pass


# triangular words -------------------------------------------------------

def _key(l: Letter):
    return (-l.i, l.j)


def insert_triangular(sess: Session, lo: int, hi: int) -> int:
    """Merge the letter at index hi into the sorted normal form on [lo, hi).

    The normal form lists rows from p-1 down to 1 and columns increasing
    inside a row, with at most one letter per position.  Returns the new
    end of the normal form.
    """
    L = sess.letters
    pos = hi
    end = hi + 1
    while pos > lo:
        K, M = L[pos - 1], L[pos]
        kk, km = _key(K), _key(M)
        if kk < km:
            break
        if kk == km:
            out = sess.apply("Add", pos - 1, pos + 1, "merge")
            end -= 2 - len(out)
            return end
        if K.i == M.i or K.j != M.i:
            sess.apply("Commute", pos - 1, pos + 1, "swap")
            pos -= 1
            continue
        # K = s_ra(y), M = s_ab(t): K M -> M s_rb(yt) K
        sess.apply("Multiply", pos - 1, pos + 1, "pass")
        end += 1
        c = pos  # the new letter s_rb(yt)
        while c + 1 < end:
            nk, ck = _key(L[c + 1]), _key(L[c])
            if nk < ck:
                sess.apply("Commute", c, c + 2, "swap")
                c += 1
            elif nk == ck:
                out = sess.apply("Add", c, c + 2, "merge")
                end -= 2 - len(out)
                break
            else:
                break
        pos -= 1
    return end


def _check_triangular(w: Word):
    for l in w.letters:
        if l.kind == "D" or not l.i < l.j:
            raise NotTriangular(f"letter {l} is not strictly upper triangular")


def fill_triangular(w: Word, model: CostModel = DEFAULT_MODEL) -> FillingCertificate:
    """Reduce an upper-triangular identity word to ε by the row sweep."""
    _check_triangular(w)
    if not evaluate(w).is_identity():
        raise NotIdentity("word does not evaluate to the identity")
    sess = Session(w, model)
    end = 0
    for _ in range(len(w)):
        end = insert_triangular(sess, 0, end)
    if sess.letters:
        raise RuntimeError("triangular sweep left letters behind")
    n = len(w)
    h = max(1.0, max((logbar(l.coefficient) for l in w.letters), default=1.0))
    return sess.certificate(n=n, h=h, bound=model.C_NP * n ** 3 * h ** 2)


def triangular_bound(w: Word, model: CostModel = DEFAULT_MODEL) -> float:
    n = len(w)
    h = max(1.0, max((logbar(l.coefficient) for l in w.letters), default=1.0))
    return model.C_NP * n ** 3 * h ** 2


# commuting words with disjoint supports --------------------------------

def _segments(letters, scale):
    out, cur, acc = [], [], 0.0
    for l in letters:
        cur.append(l)
        acc += weight(l)
        if acc >= scale:
            out.append(cur)
            cur, acc = [], 0.0
    if cur:
        out.append(cur)
    return out


def _cancel_middle(sess: Session, mid: int, count: int) -> None:
    for k in range(count):
        sess.apply("FreeInsertDelete", mid - 1 - k, mid + 1 - k, "delete")


def commute_disjoint(w_s: Word, w_t: Word, model: CostModel = DEFAULT_MODEL) -> FillingCertificate:
    """Fill [w_s, w_t] for words supported on disjoint index sets."""
    p = w_s.p
    if any(l.kind == "D" for l in w_s.letters + w_t.letters):
        raise BlocksNotDisjoint("diagonal letters have full support")
    sup_s = {k for l in w_s for k in (l.i, l.j)}
    sup_t = {k for l in w_t for k in (l.i, l.j)}
    if sup_s & sup_t:
        raise BlocksNotDisjoint(f"supports {sorted(sup_s)} and {sorted(sup_t)} overlap")
    if len(sup_s) > p - 2 or len(sup_t) > p - 2:
        raise BlockTooLarge("a support has more than p-2 indices")
    w = w_s + w_t + w_s.inverse() + w_t.inverse()
    sess = Session(w, model)
    a, b = len(w_s), len(w_t)
    if a and b:
        scale = max(weight(l) for l in w_s.letters + w_t.letters)
        segs_s = [len(s) for s in _segments(w_s.letters, scale)]
        segs_t = [len(s) for s in _segments(w_t.letters, scale)]
        done = 0  # letters of w_t already moved to the front
        for tl in segs_t:
            pos = done + a  # start of this w_t segment
            for sl in reversed(segs_s):
                sess.apply("Commute", pos - sl, pos + tl, "segments", (sl,))
                pos -= sl
            done += tl
    # now w_t w_s w_s^-1 w_t^-1
    _cancel_middle(sess, b + a, a)
    _cancel_middle(sess, b, b)
    return sess.certificate(lhat_s=_lhat(w_s), lhat_t=_lhat(w_t))


def _lhat(w: Word) -> int:
    from .shortcuts import shortcut_length
    return shortcut_length(w)


# parabolic splitting ----------------------------------------------------

def _block_index(part: BlockPartition):
    where = {}
    for n, b in enumerate(part.blocks):
        for i in b:
            where[i] = n
    return where


def _classify(l: Letter, where) -> int | None:
    """Block number for a block-internal letter, None for a cross letter."""
    bi, bj = where[l.i], where[l.j]
    if bi > bj:
        raise NotInParabolic(f"letter {l} lies below the block diagonal")
    return bi if bi == bj else None


def gather_diagonals(sess: Session, start: int = 0) -> bool:
    """Move all diagonal letters of sess[start:] to index start, merged.

    Returns True when a (nontrivial) diagonal letter remains at start.
    """
    have = False
    k = start
    while k < len(sess.letters):
        if sess.letters[k].kind != "D":
            k += 1
            continue
        before = len(sess.letters)
        front = start + 1 if have else start
        q = k
        while q > front:
            sess.apply("DiagConj", q - 1, q + 1, "pass_left")
            q -= 1
        if have:
            out = sess.apply("DiagConj", start, start + 2, "merge")
            have = bool(out)
        elif all(v == 1 for v in sess.letters[start].signs):
            sess.apply("DiagConj", start, start + 1, "drop")
        else:
            have = True
        # letters before k only moved right by the pass; merges and drops shrink
        k += 1 - (before - len(sess.letters))
    return have


def parabolic_split(w: Word, part: BlockPartition, model: CostModel = DEFAULT_MODEL):
    """Rewrite w into p_1(w) ... p_k(w) (block projections) plus the
    residual cross-block normal form, which is empty when w = I.

    Returns (projections, certificate).
    """
    p = w.p
    if part.p != p:
        raise ValueError("partition dimension mismatch")
    if any(len(b) > p - 2 for b in part.blocks):
        raise BlockTooLarge(f"{part} has a block larger than p-2")
    where = _block_index(part)
    for l in w.letters:
        if l.kind != "D":
            _classify(l, where)
    k = len(part.blocks)
    sess = Session(w, model)
    has_d = gather_diagonals(sess)
    base = 1 if has_d else 0
    plen = [0] * k
    nlen = 0
    L = sess.letters
    while True:
        c = base + sum(plen) + nlen
        if c >= len(L):
            break
        blk = _classify(L[c], where)
        if blk is None:
            nlen = insert_triangular(sess, base + sum(plen), c) - (base + sum(plen))
            continue
        m = 1
        while c + m < len(L) and L[c + m].kind != "D" and _classify(L[c + m], where) == blk:
            m += 1
        nstart = base + sum(plen)
        if nlen:
            lo, hi = part.blocks[blk][0], part.blocks[blk][-1]
            before = len(L)
            sess.apply("Conjugate", nstart, c + m, "pull_left", (nlen, lo, hi))
            nlen += len(L) - before
        # the run now sits at nstart; move it left past later blocks
        pos = nstart
        for j in range(k - 1, blk, -1):
            if plen[j]:
                sess.apply("Commute", pos - plen[j], pos + m, "segments", (plen[j],))
                pos -= plen[j]
        plen[blk] += m
    # split the diagonal prefix into per-block factors and route them
    if has_d:
        signs = L[0].signs
        parts = []
        for n, b in enumerate(part.blocks):
            sub = [signs[i - 1] for i in b]
            if math.prod(sub) != 1:
                raise NotInParabolic("diagonal part has a block of determinant -1")
            if any(v == -1 for v in sub):
                parts.append((n, tuple(signs[i - 1] if i in b else 1 for i in range(1, p + 1))))
        sess.apply("DiagConj", 0, 1, "split", tuple(",".join(map(str, s)) for _, s in parts))
        # move d_i (rightmost first) across the earlier blocks to the front of P_i
        for r in range(len(parts) - 1, -1, -1):
            pos = r
            for _ in range(sum(plen[:parts[r][0]])):
                sess.apply("DiagConj", pos, pos + 2, "pass")
                pos += 1
    with_d = {n for n, _ in parts} if has_d else set()
    letters = sess.letters
    projections = []
    idx = 0
    for n in range(k):
        size = plen[n] + (1 if n in with_d else 0)
        projections.append(Word(letters[idx: idx + size], p))
        idx += size
    cert = sess.certificate(residual=format_word(Word(letters[idx:], p)))
    return projections, cert


# words inside one 2x2 block ---------------------------------------------

class _Rank2:
    """Stack reduction of an identity word in the block {i, j}.

    Lower letters are rewritten as s u s^-1 with s = s_ij, so the processed
    prefix becomes an alternating product of upper letters u(x) and copies
    of s, followed by one accumulated sign matrix.  Reductions: merge u's,
    s s -> sign matrix, and s u(±1) s -> u s u via the order-3 relation.
    A reduced alternating word with all inner |x| >= 2 is never ±I, so an
    identity word reduces to ε.
    """

    def __init__(self, w: Word, i: int, j: int, model: CostModel):
        self.sess = Session(w, model)
        self.p = w.p
        self.i, self.j = i, j
        self.stack: list[str] = []  # 'U' or 's'
        self.dacc = False
        self.dij = D(tuple(-1 if t in (i, j) else 1 for t in range(1, w.p + 1)))
        self.s = _swap_word(i, j)
        self.sinv = _swap_inverse(i, j)

    @staticmethod
    def _len(tok):
        return 1 if tok == "U" else 3

    def _start(self, t):
        return sum(self._len(x) for x in self.stack[:t])

    def _top(self):
        return self._start(len(self.stack))

    def _relator(self, start, stop, v):
        text = format_word(Word(v, self.p))
        self.sess.apply("Relator", start, stop, "apply", (text,))

    def _send_diag(self, at):
        """Move the sign letter at index `at` right to the accumulator."""
        end = self._top() + (1 if self.dacc else 0)
        # `at` is inside the stack region; the stack has already been updated
        # so that everything from `at`+1 up to the accumulator is stack letters
        q = at
        stop = self._top() + 1
        while q + 1 < stop:
            self.sess.apply("DiagConj", q, q + 2, "pass")
            q += 1
        if self.dacc:
            out = self.sess.apply("DiagConj", q, q + 2, "merge")
            self.dacc = bool(out)
        else:
            self.dacc = True
        del end

    def push(self, n):
        q = self._top()
        if self.dacc:
            for k in range(n):
                self.sess.apply("DiagConj", q + k, q + k + 2, "pass")
        L = self.sess.letters
        if n == 3:
            if tuple(L[q:q + 3]) == self.sinv:
                self._relator(q, q + 3, self.s + (self.dij,))
                self.stack.append("s")
                # the new sign letter sits right after the token
                if self.dacc:
                    out = self.sess.apply("DiagConj", q + 3, q + 5, "merge")
                    self.dacc = bool(out)
                else:
                    self.dacc = True
            elif tuple(L[q:q + 3]) == self.s:
                self.stack.append("s")
            else:
                raise RuntimeError("unexpected token")
        else:
            self.stack.append("U")
        self.normalize()

    def _coef(self, t):
        return self.sess.letters[self._start(t)].coefficient

    def normalize(self):
        L = self.sess.letters
        while True:
            st = self.stack
            lo = max(0, len(st) - 6)
            acted = False
            for t in range(lo, len(st) - 1):
                a, b = st[t], st[t + 1]
                o = self._start(t)
                if a == "U" and b == "U":
                    out = self.sess.apply("Add", o, o + 2, "merge")
                    st[t:t + 2] = ["U"] if out else []
                    acted = True
                    break
                if a == "s" and b == "s":
                    self._relator(o, o + 6, (self.dij,))
                    st[t:t + 2] = []
                    self._send_diag(o)
                    acted = True
                    break
                if a == "s" and b == "U" and t + 2 < len(st) and st[t + 2] == "s":
                    c = L[o + 3].coefficient
                    if abs(c) != 1:
                        continue
                    if L[o + 3].kind == "S":
                        self.sess.apply("ShortEquiv", o + 3, o + 4, "to_elem")
                    u, ui = E(self.i, self.j), E(self.i, self.j, -1)
                    if c == 1:
                        # s u s -> u^-1 s^-1 u^-1 -> u^-1 s D u^-1
                        self._relator(o, o + 7, (ui,) + self.sinv + (ui,))
                        self._relator(o + 1, o + 4, self.s + (self.dij,))
                        st[t:t + 3] = ["U", "s", "U"]
                        self._send_diag(o + 4)
                    else:
                        self._relator(o, o + 7, (u,) + self.s + (u,))
                        st[t:t + 3] = ["U", "s", "U"]
                    acted = True
                    break
            if not acted:
                return

    def run(self):
        L = self.sess.letters
        while True:
            q = self._top() + (1 if self.dacc else 0)
            if q >= len(L):
                break
            l = L[q]
            if l.kind == "D":
                if self.dacc:
                    out = self.sess.apply("DiagConj", q - 1, q + 1, "merge")
                    self.dacc = bool(out)
                elif all(v == 1 for v in l.signs):
                    self.sess.apply("DiagConj", q, q + 1, "drop")
                else:
                    self.dacc = True
                continue
            if (l.i, l.j) == (self.j, self.i):
                self.sess.apply("SwapConj", q, q + 1, "unconj", (self.i, self.j))
                self.push(3)
                self.push(1)
                self.push(3)
            else:
                self.push(1)
        if self.stack or self.dacc:
            raise NotIdentity("rank-2 reduction did not reach the empty word")
        return self.sess


def fill_rank2(w: Word, model: CostModel = DEFAULT_MODEL) -> FillingCertificate:
    """Fill an identity word whose letters all lie in one 2x2 block."""
    idx = set()
    for l in w.letters:
        if l.kind != "D":
            idx.update((l.i, l.j))
    if len(idx) > 2:
        raise NotRank2(f"letters use indices {sorted(idx)}")
    for l in w.letters:
        if l.kind == "D":
            neg = {t + 1 for t, v in enumerate(l.signs) if v == -1}
            if neg and (len(idx) < 2 and len(neg) != 2 or idx and not neg <= idx):
                raise NotRank2("diagonal letter outside the block")
    if not evaluate(w).is_identity():
        raise NotIdentity("word does not evaluate to the identity")
    if not idx:
        sess = Session(w, model)
        if gather_diagonals(sess):
            raise NotIdentity("diagonal letters do not cancel")
        return sess.certificate()
    i, j = sorted(idx)
    sess = _Rank2(w, i, j, model).run()
    from .shortcuts import shortcut_length
    lh = shortcut_length(w)
    return sess.certificate(lhat=lh, bound=model.C_Rank2 * lh ** 2)
