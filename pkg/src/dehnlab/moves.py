"""Macro moves over Σ̂ words, their model costs, and filling certificates.

Every move rewrites a contiguous site of the current word.  The replacement
is recomputed from the site and a small parameter tuple, so a certificate
can be replayed and checked without trusting the code that produced it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .core import (D, E, S, IntegerMatrix, Letter, Word, cancels, diagonal_set, evaluate,
                   format_word, parse_word)
from .shortcuts import letter_length

KINDS = ("Add", "Multiply", "Commute", "SwapConj", "DiagConj", "ShortEquiv",
         "FreeInsertDelete", "Conjugate", "Relator", "BoundedRelation", "Fallback")

UNCERTIFIED = ("Fallback",)


class PatternMismatch(ValueError):
    pass


class IndexClash(ValueError):
    pass


@dataclass(frozen=True)
class CostModel:
    C_Add: float = 1.0
    C_Mul: float = 1.0
    C_Com: float = 1.0
    C_Swap: float = 1.0
    C_Diag: float = 1.0
    C_Equiv: float = 1.0
    C_Conj: float = 1.0
    C_Rel: float = 1.0
    C_Small: float = 1.0
    C_Fallback: float = 1.0
    # envelopes asserted by the fillers
    C_NP: float = 64.0
    C_Para: float = 64.0
    C_Rank2: float = 64.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"{k} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **kw) -> "CostModel":
        d = asdict(self)
        d.update(kw)
        return CostModel(**d)


DEFAULT_MODEL = CostModel()


def logbar(t) -> float:
    t = abs(t)
    return 1.0 if t <= 2 else max(1.0, math.log2(t))


def weight(l: Letter) -> float:
    return 1.0 if l.kind == "D" else logbar(l.x)


def word_weight(letters) -> float:
    return sum(weight(l) for l in letters)


@dataclass(frozen=True)
class MacroMove:
    kind: str
    start: int
    stop: int
    form: str
    params: tuple = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "site": [self.start, self.stop], "form": self.form,
                "params": list(self.params)}

    @classmethod
    def from_dict(cls, d) -> "MacroMove":
        return cls(d["kind"], d["site"][0], d["site"][1], d["form"], tuple(d["params"]))


# letter helpers ---------------------------------------------------------

def _unit(l: Letter):
    """(i, j, signed coefficient) of an E or S letter."""
    if l.kind == "D":
        raise PatternMismatch("diagonal letter where a unipotent letter was expected")
    return l.i, l.j, l.coefficient


def _hat(i, j, c) -> tuple:
    return () if c == 0 else (S(i, j, c),)


def _swap_word(i, j):
    """s_ij = e_ji^-1 e_ij e_ji^-1."""
    return (E(j, i, -1), E(i, j), E(j, i, -1))


def _swap_inverse(i, j):
    return (E(j, i), E(i, j, -1), E(j, i))


def _sigma(k, i, j):
    return j if k == i else i if k == j else k


def _tau(k, l, i):
    return -1 if (k == i or l == i) else 1


def _conj_by_diag(b: Letter, l: Letter) -> Letter:
    if l.kind == "D":
        return l
    s = b.signs[l.i - 1] * b.signs[l.j - 1]
    if s == 1:
        return l
    if l.kind == "E":
        return E(l.i, l.j, -l.sign)
    return Letter("S", l.i, l.j, -l.x, (), l.sign)


def _mat(letters, p) -> IntegerMatrix:
    return evaluate(Word(letters, p))


def _pass_letter(A: Letter, B: Letter, p: int):
    """C with A B = B C A, or None when C is not a single elementary matrix."""
    a, b, x = _unit(A)
    c, d, y = _unit(B)
    if b == c and a != d:
        return (a, d, x * y)
    if a == d and b != c:
        return (c, b, -x * y)
    return None


def _support(letters) -> set:
    out = set()
    for l in letters:
        if l.kind == "D":
            raise IndexClash("segment contains a diagonal letter")
        out.update((l.i, l.j))
    return out


def unitriangular_letters(m: IntegerMatrix) -> tuple:
    """Row-sweep normal form of an upper unitriangular matrix.

    Rows are emitted from p-1 down to 1, columns increasing within a row;
    the product of the letters is exactly m.
    """
    p = m.p
    out = []
    for a in range(p - 1, 0, -1):
        for b in range(a + 1, p + 1):
            v = m.rows[a - 1][b - 1]
            if v:
                out.append(S(a, b, v))
    return tuple(out)


def is_unitriangular(m: IntegerMatrix) -> bool:
    p = m.p
    return all(m.rows[r][c] == (1 if r == c else 0) for r in range(p) for c in range(r + 1))


# relators ---------------------------------------------------------------

RELATOR_MAX = 24


def presentation_relators(p: int) -> list[tuple]:
    """Finite relator list: Steinberg relations, the order-4 relation,
    diagonal relations and fixed identities inside each 2x2 block."""
    rel = []
    idx = range(1, p + 1)
    pairs = [(i, j) for i in idx for j in idx if i != j]
    for (i, j) in pairs:
        for (k, l) in pairs:
            if i != l and j != k and (i, j) < (k, l):
                rel.append((E(i, j), E(k, l), E(i, j, -1), E(k, l, -1)))
            if j == k and i != l:
                rel.append((E(i, j), E(j, l), E(i, j, -1), E(j, l, -1), E(i, l, -1)))
        rel.append((E(i, j), E(j, i, -1), E(i, j)) * 4)
        # s_ij = e_ji^-1 e_ij e_ji^-1 squares to the sign matrix on {i, j}
        s, u, ui = _swap_word(i, j), (E(i, j),), (E(i, j, -1),)
        dij = tuple(-1 if t in (i, j) else 1 for t in idx)
        rel.append(s * 2 + (D(dij),))
        rel.append((s + u) * 3)
        rel.append(s + ui + s + ui + _swap_inverse(i, j) + ui)
        if i < j:
            # braid form: e_ij e_ji^-1 e_ij = s_ij
            rel.append((E(i, j), E(j, i, -1), E(i, j)) + _swap_inverse(i, j))
    diags = [d for d in diagonal_set(p) if any(v == -1 for v in d)]
    for b in diags:
        for (i, j) in pairs:
            s = b[i - 1] * b[j - 1]
            rel.append((D(b), E(i, j), D(b), E(i, j, -s)))
        for c in diags:
            prod = tuple(u * v for u, v in zip(b, c))
            if any(v == -1 for v in prod):
                rel.append((D(b), D(c), D(prod)))
    return rel


_REL_CACHE: dict = {}


def _relator_keys(p: int) -> set:
    if p not in _REL_CACHE:
        keys = set()
        for r in presentation_relators(p):
            for word in (r, tuple(l.inverse() for l in reversed(r))):
                n = len(word)
                for k in range(n):
                    keys.add(word[k:] + word[:k])
        _REL_CACHE[p] = keys
    return _REL_CACHE[p]


def is_relator_instance(u: Sequence[Letter], v: Sequence[Letter], p: int) -> bool:
    """u -> v is one relator application: u v^-1 is a cyclic rotation of a
    relator or its inverse."""
    cyc = tuple(u) + tuple(l.inverse() for l in reversed(v))
    if not cyc or len(cyc) > RELATOR_MAX:
        return False
    if any(l.kind == "S" for l in cyc):
        return False
    return cyc in _relator_keys(p)


# the rewrite rules ------------------------------------------------------

BOUNDED_LENGTH = 4096


def rewrite(kind: str, form: str, site: tuple, params: tuple, p: int,
            model: CostModel = DEFAULT_MODEL):
    """Return (replacement letters, cost) for one move, or raise."""
    n = len(site)
    if kind == "FreeInsertDelete":
        if form == "delete":
            if n != 2 or not cancels(site[0], site[1]):
                raise PatternMismatch("delete needs a cancelling pair")
            return (), 0.0
        if form == "insert":
            if n != 0:
                raise PatternMismatch("insert acts on an empty site")
            u = parse_word(params[0], p).letters
            return u + tuple(l.inverse() for l in reversed(u)), 0.0
        raise PatternMismatch(form)

    if kind == "Add":
        if form == "merge":
            if n != 2:
                raise PatternMismatch("merge needs two letters")
            i, j, x = _unit(site[0])
            k, l, y = _unit(site[1])
            if (i, j) != (k, l):
                raise PatternMismatch("merge needs equal index pairs")
            return _hat(i, j, x + y), model.C_Add * (logbar(x) + logbar(y)) ** 2
        if form == "split":
            if n != 1:
                raise PatternMismatch("split needs one letter")
            i, j, z = _unit(site[0])
            x = int(params[0])
            if x == 0 or x == z:
                raise PatternMismatch("split parts must be nonzero")
            return (S(i, j, x), S(i, j, z - x)), model.C_Add * (logbar(x) + logbar(z - x)) ** 2
        raise PatternMismatch(form)

    if kind == "Multiply":
        if form == "commutator":
            if n != 4:
                raise PatternMismatch("commutator needs four letters")
            (i, j, x), (j2, k, y), (i3, j3, x3), (j4, k4, y4) = map(_unit, site)
            if not (j == j2 and (i3, j3) == (i, j) and (j4, k4) == (j2, k) and x3 == -x and y4 == -y):
                raise PatternMismatch("not a commutator [e_ij(x), e_jk(y)]")
            if len({i, j, k}) != 3:
                raise IndexClash("commutator indices must be distinct")
            return (S(i, k, x * y),), model.C_Mul * (logbar(x) + logbar(y)) ** 2
        if form == "pass":
            if n != 2:
                raise PatternMismatch("pass needs two letters")
            c = _pass_letter(site[0], site[1], p)
            if c is None:
                raise IndexClash("letters do not pass with one correction term")
            x, y = site[0].coefficient, site[1].coefficient
            return (site[1], S(*c), site[0]), model.C_Mul * (logbar(x) + logbar(y)) ** 2
        if form == "unpass":
            if n != 3:
                raise PatternMismatch("unpass needs three letters")
            B, C, A = site
            c = _pass_letter(A, B, p)
            if c is None or _unit(C) != c:
                raise PatternMismatch("middle letter is not the pass correction")
            return (A, B), model.C_Mul * (logbar(A.coefficient) + logbar(B.coefficient)) ** 2
        raise PatternMismatch(form)

    if kind == "Commute":
        if form == "swap":
            if n != 2:
                raise PatternMismatch("swap needs two letters")
            i, j, x = _unit(site[0])
            k, l, y = _unit(site[1])
            if i == l or j == k:
                raise IndexClash("e_ij and e_kl commute only when i != l and j != k")
            return (site[1], site[0]), model.C_Com * (logbar(x) + logbar(y)) ** 2
        if form == "segments":
            cut = int(params[0])
            u, v = site[:cut], site[cut:]
            if not u or not v:
                raise PatternMismatch("segments must be nonempty")
            su, sv = _support(u), _support(v)
            if su & sv:
                raise IndexClash("segment supports overlap")
            if len(su) > p - 2 or len(sv) > p - 2:
                raise IndexClash("segment support larger than p-2")
            return v + u, model.C_Com * (word_weight(u) + word_weight(v)) ** 2
        raise PatternMismatch(form)

    if kind == "SwapConj":
        if form == "conj":
            if n != 7:
                raise PatternMismatch("conj needs s_ij, one letter, s_ij^-1")
            i, j = site[0].j, site[0].i
            if site[:3] != _swap_word(i, j) or site[4:] != _swap_inverse(i, j):
                raise PatternMismatch("site is not s_ij x s_ij^-1")
            k, l, x = _unit(site[3])
            return (S(_sigma(k, i, j), _sigma(l, i, j), _tau(k, l, i) * x),), \
                model.C_Swap * (logbar(x) + 1) ** 2
        if form == "unconj":
            if n != 1:
                raise PatternMismatch("unconj needs one letter")
            i, j = int(params[0]), int(params[1])
            k2, l2, x2 = _unit(site[0])
            k, l = _sigma(k2, i, j), _sigma(l2, i, j)
            x = _tau(k, l, i) * x2
            return _swap_word(i, j) + (S(k, l, x),) + _swap_inverse(i, j), \
                model.C_Swap * (logbar(x) + 1) ** 2
        raise PatternMismatch(form)

    if kind == "DiagConj":
        if form == "conj":
            if n != 3 or site[0].kind != "D" or site[2] != site[0] or site[1].kind == "D":
                raise PatternMismatch("conj needs b x b")
            out = _conj_by_diag(site[0], site[1])
            return (S(out.i, out.j, out.coefficient),), model.C_Diag * (weight(out) + 1) ** 2
        if form == "pass":
            if n != 2 or site[0].kind != "D" or site[1].kind == "D":
                raise PatternMismatch("pass needs b x")
            return (_conj_by_diag(site[0], site[1]), site[0]), model.C_Diag * (weight(site[1]) + 1) ** 2
        if form == "pass_left":
            if n != 2 or site[1].kind != "D" or site[0].kind == "D":
                raise PatternMismatch("pass_left needs x b")
            return (site[1], _conj_by_diag(site[1], site[0])), model.C_Diag * (weight(site[0]) + 1) ** 2
        if form == "merge":
            if n != 2 or site[0].kind != "D" or site[1].kind != "D":
                raise PatternMismatch("merge needs two diagonal letters")
            prod = tuple(a * b for a, b in zip(site[0].signs, site[1].signs))
            out = () if all(v == 1 for v in prod) else (D(prod),)
            return out, model.C_Diag * 4.0
        if form == "split":
            if n != 1 or site[0].kind != "D":
                raise PatternMismatch("split needs one diagonal letter")
            parts = tuple(D(tuple(int(v) for v in s.split(","))) for s in params)
            prod = [1] * p
            for q in parts:
                prod = [a * b for a, b in zip(prod, q.signs)]
            if tuple(prod) != site[0].signs:
                raise PatternMismatch("split parts do not multiply to the letter")
            return parts, model.C_Diag * 4.0 * max(1, len(parts) - 1)
        if form == "drop":
            if n != 1 or site[0].kind != "D" or any(v != 1 for v in site[0].signs):
                raise PatternMismatch("drop needs the identity diagonal letter")
            return (), 0.0
        raise PatternMismatch(form)

    if kind == "ShortEquiv":
        if n != 1 or site[0].kind == "D":
            raise PatternMismatch("ShortEquiv acts on one unipotent letter")
        l = site[0]
        i, j, c = _unit(l)
        cost = model.C_Equiv * (logbar(c) + 1) ** 2
        if form == "to_hat":
            if l.kind != "E":
                raise PatternMismatch("to_hat needs an elementary letter")
            return (S(i, j, c),), cost
        if form == "to_elem":
            if l.kind != "S" or abs(c) != 1:
                raise PatternMismatch("to_elem needs a coefficient ±1 shortcut")
            return (E(i, j, c),), cost
        if form == "expand":
            # shortcut word with the helper index given in params
            from .shortcuts import expand_in_block
            block = tuple(int(v) for v in str(params[0]).split(",")) if params else tuple(range(1, p + 1))
            if l.kind != "S" or not set((l.i, l.j)) <= set(block):
                raise PatternMismatch("expand needs a shortcut letter inside the block")
            return expand_in_block(l, block, p), cost
        if form == "flip":
            if l.kind != "S":
                raise PatternMismatch("flip needs a shortcut letter")
            return (Letter("S", i, j, -l.x, (), -l.sign),), cost
        raise PatternMismatch(form)

    if kind == "Conjugate":
        cut = int(params[0])
        left, right = site[:cut], site[cut:]
        if form == "pull_left":
            nword, u = left, right
        elif form == "pull_right":
            u, nword = left, right
        else:
            raise PatternMismatch(form)
        if not u:
            raise PatternMismatch("empty conjugating word")
        su = sorted(_support(u))
        if su != list(range(su[0], su[-1] + 1)):
            raise PatternMismatch("conjugating word must live in a contiguous block")
        block = set(su)
        for l in nword:
            i, j, _ = _unit(l)
            if not i < j or (i in block and j in block):
                raise PatternMismatch("conjugated word must be cross-block upper triangular")
        mu = _mat(u, p)
        mn = _mat(nword, p)
        if form == "pull_left":
            target = mu.inverse() @ mn @ mu
        else:
            target = mu @ mn @ mu.inverse()
        if not is_unitriangular(target):
            raise PatternMismatch("conjugate is not unitriangular")
        new = unitriangular_letters(target)
        for l in new:
            if l.i in block and l.j in block:
                raise PatternMismatch("conjugate leaves the cross part")
        cost = model.C_Conj * (word_weight(u) + word_weight(nword) + word_weight(new)) ** 2
        return (u + new if form == "pull_left" else new + u), cost

    if kind == "Relator":
        v = parse_word(params[0], p).letters if params and params[0] else ()
        if not is_relator_instance(site, v, p):
            raise PatternMismatch("not a relator application")
        return v, model.C_Rel

    if kind in ("BoundedRelation", "Fallback"):
        v = parse_word(params[0], p).letters if params and params[0] else ()
        if _mat(site, p) != _mat(v, p):
            raise PatternMismatch("replacement evaluates differently")
        lh = sum(letter_length(l, p) for l in site) + sum(letter_length(l, p) for l in v)
        if kind == "BoundedRelation":
            if lh > BOUNDED_LENGTH:
                raise PatternMismatch("bounded relation is too long")
            return v, model.C_Small * lh ** 2
        return v, model.C_Fallback * lh ** 2

    raise PatternMismatch(f"unknown move kind {kind!r}")


def apply_move(w: Word, m: MacroMove, model: CostModel = DEFAULT_MODEL):
    if not (0 <= m.start <= m.stop <= len(w)):
        raise PatternMismatch("site out of range")
    rep, cost = rewrite(m.kind, m.form, w.letters[m.start:m.stop], m.params, w.p, model)
    return Word(w.letters[:m.start] + tuple(rep) + w.letters[m.stop:], w.p), cost


# certificates -----------------------------------------------------------

@dataclass
class FillingCertificate:
    initial: Word
    moves: list
    final: Word
    costs: list
    model: CostModel = DEFAULT_MODEL
    breakdown: dict = field(default_factory=dict)

    @property
    def total_cost(self) -> float:
        return float(sum(self.costs))

    @property
    def certified(self) -> bool:
        return not any(m.kind in UNCERTIFIED for m in self.moves)

    def to_json(self) -> str:
        return json.dumps({
            "p": self.initial.p,
            "initial": format_word(self.initial),
            "final": format_word(self.final),
            "moves": [dict(m.to_dict(), cost=c) for m, c in zip(self.moves, self.costs)],
            "total_cost": self.total_cost,
            "certified": self.certified,
            "model": self.model.to_dict(),
            "breakdown": self.breakdown,
        })

    @classmethod
    def from_json(cls, text: str) -> "FillingCertificate":
        d = json.loads(text)
        p = d["p"]
        moves = [MacroMove.from_dict(m) for m in d["moves"]]
        return cls(parse_word(d["initial"], p), moves, parse_word(d["final"], p),
                   [m["cost"] for m in d["moves"]], CostModel(**d["model"]),
                   d.get("breakdown", {}))


MOVE_CAP = 1_000_000


class Session:
    """Mutable rewriting workspace that records every move it applies."""

    def __init__(self, w: Word, model: CostModel = DEFAULT_MODEL):
        self.initial = w
        self.p = w.p
        self.letters = list(w.letters)
        self.model = model
        self.moves: list[MacroMove] = []
        self.costs: list[float] = []

    def apply(self, kind, start, stop, form, params=()) -> tuple:
        if len(self.moves) >= MOVE_CAP:
            raise RuntimeError("move cap exceeded")
        params = tuple(params)
        rep, cost = rewrite(kind, form, tuple(self.letters[start:stop]), params, self.p, self.model)
        self.letters[start:stop] = rep
        self.moves.append(MacroMove(kind, start, stop, form, params))
        self.costs.append(cost)
        return rep

    def word(self) -> Word:
        return Word(self.letters, self.p)

    def certificate(self, **breakdown) -> FillingCertificate:
        return FillingCertificate(self.initial, list(self.moves), self.word(),
                                  list(self.costs), self.model, dict(breakdown))

    def absorb(self, cert: FillingCertificate, offset: int, replay: bool = True) -> None:
        """Append a certificate produced for the subword starting at offset.

        With replay=False the moves are shifted and spliced without being
        re-run; the caller relies on a final verify_certificate instead.
        """
        if replay:
            for m in cert.moves:
                self.apply(m.kind, m.start + offset, m.stop + offset, m.form, m.params)
            return
        n = len(cert.initial.letters)
        if tuple(self.letters[offset:offset + n]) != cert.initial.letters:
            raise PatternMismatch("certificate does not start at this subword")
        if len(self.moves) + len(cert.moves) > MOVE_CAP:
            raise RuntimeError("move cap exceeded")
        self.letters[offset:offset + n] = cert.final.letters
        self.moves.extend(MacroMove(m.kind, m.start + offset, m.stop + offset, m.form, m.params)
                          for m in cert.moves)
        self.costs.extend(cert.costs)


def diagnose_certificate(c: FillingCertificate, full_replay: bool = True):
    """Replay a certificate; return (ok, message)."""
    p = c.initial.p
    letters = list(c.initial.letters)
    current = evaluate(c.initial) if full_replay else None
    total = 0.0
    if len(c.moves) != len(c.costs):
        return False, "move and cost lists differ in length"
    for n, (m, claimed) in enumerate(zip(c.moves, c.costs)):
        if not (0 <= m.start <= m.stop <= len(letters)):
            return False, f"move {n}: site out of range"
        site = tuple(letters[m.start:m.stop])
        try:
            rep, cost = rewrite(m.kind, m.form, site, m.params, p, c.model)
        except (PatternMismatch, IndexClash, ValueError) as exc:
            return False, f"move {n} ({m.kind}/{m.form}) rejected: {exc}"
        if _mat(site, p) != _mat(rep, p):
            return False, f"move {n} ({m.kind}) changes the evaluation"
        if not math.isclose(cost, claimed, rel_tol=1e-12, abs_tol=1e-12):
            return False, f"move {n}: claimed cost {claimed} but rule gives {cost}"
        letters[m.start:m.stop] = rep
        total += cost
    if tuple(letters) != c.final.letters:
        return False, "replay does not end at the recorded final word"
    if full_replay and evaluate(Word(letters, p)) != current:
        return False, "final evaluation differs from the initial one"
    return True, "ok"


def verify_certificate(c: FillingCertificate, full_replay: bool = True) -> bool:
    return diagnose_certificate(c, full_replay)[0]
