"""Exhaustive filling of short words by primitive relator applications.

A state is a freely reduced word.  One step replaces a subword u by v
where u v^-1 is a cyclic rotation of a relator or its inverse, then
freely reduces.  Best-first search on (relator count, length) returns an
explicit move sequence, so the count is a true upper bound on the area.
"""

from __future__ import annotations

import heapq
import itertools
from functools import lru_cache

from .core import Word, cancels, evaluate, format_word
from .moves import DEFAULT_MODEL, CostModel, FillingCertificate, Session, presentation_relators


class DepthExceeded(RuntimeError):
    """Search gave up; this is not a proof that no filling exists."""


@lru_cache(maxsize=None)
def _substitutions(p: int) -> dict:
    """u -> list of v with u v^-1 a rotation of a relator^±1, |u| >= 1."""
    table: dict = {}
    for r in presentation_relators(p):
        for word in (r, tuple(l.inverse() for l in reversed(r))):
            n = len(word)
            for k in range(n):
                rot = word[k:] + word[:k]
                for cut in range(1, n + 1):
                    u = rot[:cut]
                    v = tuple(l.inverse() for l in reversed(rot[cut:]))
                    table.setdefault(u, set()).add(v)
    return {u: sorted(vs, key=len) for u, vs in table.items()}


def _reduce(letters):
    """Free reduction with the deleted sites, in application order."""
    out, steps = [], []
    for l in letters:
        if out and cancels(out[-1], l):
            out.pop()
            steps.append(len(out))
        else:
            out.append(l)
    return tuple(out), steps


LENGTH_WEIGHT = 0.5


def steinberg_oracle_fill(w: Word, max_depth: int = 12, node_budget: int = 200_000,
                          max_length: int | None = None, length_weight: float = LENGTH_WEIGHT):
    """(relator count, move list) reducing w to ε with primitive moves.

    Moves are (kind, start, stop, form, params) tuples ready for a Session.
    Raises DepthExceeded when no filling is found within the budgets.
    """
    if not evaluate(w).is_identity():
        raise ValueError("word does not evaluate to the identity")
    p = w.p
    subs = _substitutions(p)
    umax = max(len(u) for u in subs)
    cap = max_length if max_length is not None else len(w) + 8
    start, steps0 = _reduce(w.letters)
    moves0 = tuple(("FreeInsertDelete", s, s + 2, "delete", ()) for s in steps0)
    if not start:
        return 0, list(moves0)
    tick = itertools.count()
    heap = [(length_weight * len(start), 0, next(tick), start)]
    parent = {start: (None, moves0, 0)}
    expanded = 0
    while heap:
        _, cnt, _, cur = heapq.heappop(heap)
        if parent[cur][2] < cnt:
            continue
        expanded += 1
        if expanded > node_budget:
            break
        if cnt >= max_depth:
            continue
        n = len(cur)
        for s in range(n):
            for k in range(1, min(umax, n - s) + 1):
                for v in subs.get(cur[s:s + k], ()):
                    nxt = cur[:s] + v + cur[s + k:]
                    if len(nxt) > cap:
                        continue
                    red, dels = _reduce(nxt)
                    old = parent.get(red)
                    if old is not None and old[2] <= cnt + 1:
                        continue
                    parent[red] = (cur, (s, k, v, dels), cnt + 1)
                    if not red:
                        return cnt + 1, _unwind(parent, red, moves0, p)
                    heapq.heappush(heap, (cnt + 1 + length_weight * len(red), cnt + 1, next(tick), red))
    raise DepthExceeded(f"no filling within depth {max_depth} and {node_budget} nodes")


def _unwind(parent, node, moves0, p):
    chain = []
    while True:
        prev, step, _ = parent[node]
        if prev is None:
            break
        chain.append(step)
        node = prev
    out = list(moves0)
    for s, k, v, dels in reversed(chain):
        out.append(("Relator", s, s + k, "apply", (format_word(Word(v, p)),)))
        out.extend(("FreeInsertDelete", d, d + 2, "delete", ()) for d in dels)
    return out


def oracle_certificate(w: Word, model: CostModel = DEFAULT_MODEL, **kw) -> FillingCertificate:
    """The oracle filling packaged as a replayable certificate."""
    count, moves = steinberg_oracle_fill(w, **kw)
    sess = Session(w, model)
    for kind, a, b, form, params in moves:
        sess.apply(kind, a, b, form, params)
    return sess.certificate(relators=count)
