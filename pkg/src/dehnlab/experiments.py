"""Experiment suites shared by the command line driver and the acceptance tests.

Every suite takes an ExperimentManifest and returns a SuiteResult holding
named pass/fail checks, one data row per instance, a summary and optional
SVG renders.  Instances draw from per-instance generators seeded by
(manifest seed, suite, index), so reruns are identical and independent of
the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .core import (D, E, S, IntegerMatrix, Word, cancels, diagonal_set, evaluate,
                   format_word, in_parabolic, norm2)
from .mesh import adaptive_mesh, audit_mesh, cone_field, constant_field, mesh_svg, random_field
from .moves import (DEFAULT_MODEL, CostModel, IndexClash, MacroMove, PatternMismatch,
                    _pass_letter, _swap_inverse, _swap_word, apply_move,
                    presentation_relators, unitriangular_letters, verify_certificate)
from .normal import omega, omega_triangle
from .rewrite import commute_disjoint, fill_triangular
from .shortcuts import C_SC, build_shortcut, lambda_expand, length_bound, shortcut_length
from .symspace import (C_PHI, EPS_S, c_v, dist_E, flag_subspace, flag_window, iwasawa, in_siegel,
                       parabolic_witness, short_vector_space, siegel_point, siegel_reduce,
                       witness_constant)


class DegenerateSeries(ValueError):
    """A growth fit needs at least four points with positive values."""


@dataclass
class GrowthFit:
    sizes: list
    costs: list
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return asdict(self)


def fit_growth(sizes, costs) -> GrowthFit:
    """Least-squares line through (log size, log cost)."""
    xs = [float(v) for v in sizes]
    ys = [float(v) for v in costs]
    if len(xs) != len(ys) or len(xs) < 4:
        raise DegenerateSeries("need at least four (size, cost) pairs")
    if min(xs) <= 0 or min(ys) <= 0:
        raise DegenerateSeries("sizes and costs must be positive")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) == 0:
        raise DegenerateSeries("sizes are all equal")
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - ly) ** 2)))
    return GrowthFit(xs, ys, float(slope), float(intercept), resid)


# manifest, results, config ----------------------------------------------------

@dataclass
class ExperimentManifest:
    suite: str
    p: int | None = None
    sizes: tuple | None = None
    seed: int = 0
    model: CostModel = DEFAULT_MODEL
    out: str | None = None
    jobs: int = 1
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "p": self.p,
                "sizes": list(self.sizes) if self.sizes is not None else None,
                "seed": self.seed, "jobs": self.jobs, "out": self.out,
                "options": dict(self.options), "model": self.model.to_dict()}

    def rng(self, k: int, tag: str = "") -> random.Random:
        return random.Random(f"{self.seed}/{self.suite}/{tag}/{k}")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


@dataclass
class SuiteResult:
    suite: str
    checks: list
    rows: list
    summary: dict
    manifest: ExperimentManifest
    svgs: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def report(self) -> dict:
        return {"suite": self.suite, "ok": self.ok,
                "checks": [asdict(c) for c in self.checks],
                "summary": self.summary, "config": self.manifest.to_dict()}

    def csv_text(self) -> str:
        keys = []
        for r in self.rows:
            keys.extend(k for k in r if k not in keys)
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        wr.writeheader()
        for r in self.rows:
            wr.writerow(r)
        return buf.getvalue()


def _value(text: str):
    text = text.strip()
    if "," in text:
        return [_value(t) for t in text.split(",") if t.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_config(path) -> dict:
    """Plain key=value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = _value(v)
    return out


def _pmap(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _sizes(man: ExperimentManifest, default) -> list:
    """The size grid, with missing trailing entries taken from the default."""
    given = list(man.sizes or [])
    return given + list(default)[len(given):]


# random data -----------------------------------------------------------------

def _coef(rng: random.Random, bits: int = 16) -> int:
    return rng.choice((1, -1)) * rng.randint(1, 2 ** rng.randint(0, bits))


def _unip(rng, p, i=None, j=None, x=None, bits=16):
    if i is None:
        i, j = rng.sample(range(1, p + 1), 2)
    x = _coef(rng, bits) if x is None else x
    if abs(x) == 1 and rng.random() < 0.5:
        return E(i, j, x)
    return S(i, j, x)


def _diag(rng, p):
    return D(rng.choice(diagonal_set(p)))


def _letter(rng, p, bits=16):
    return _diag(rng, p) if rng.random() < 0.15 else _unip(rng, p, bits=bits)


def _word(rng, p, lo, hi, bits=16) -> tuple:
    return tuple(_letter(rng, p, bits) for _ in range(rng.randint(lo, hi)))


def _sigma_word(rng, p, n, idx=None) -> list:
    idx = list(idx or range(1, p + 1))
    out = []
    while len(out) < n:
        i, j = rng.sample(idx, 2)
        l = E(i, j, rng.choice((1, -1)))
        if out and cancels(out[-1], l):
            continue
        out.append(l)
    return out


def _signs(d) -> str:
    return ",".join(str(v) for v in d.signs)


def random_move(rng: random.Random, p: int):
    """(site letters, kind, form, params) for a move that matches its site."""
    kind = rng.choice(["FreeInsertDelete", "Add", "Multiply", "Commute", "SwapConj",
                       "DiagConj", "ShortEquiv", "Conjugate", "Relator",
                       "BoundedRelation", "Fallback"])
    if kind == "FreeInsertDelete":
        if rng.random() < 0.5:
            return (), kind, "insert", (format_word(Word(_word(rng, p, 1, 4), p)),)
        l = _letter(rng, p)
        return (l, l.inverse()), kind, "delete", ()
    if kind == "Add":
        i, j = rng.sample(range(1, p + 1), 2)
        if rng.random() < 0.5:
            x, y = _coef(rng), _coef(rng)
            if x + y == 0:
                y += 1 if y > 0 else -1
            return (_unip(rng, p, i, j, x), _unip(rng, p, i, j, y)), kind, "merge", ()
        z = _coef(rng)
        x = _coef(rng)
        if x == z:
            x += 1
        return (S(i, j, z),), kind, "split", (x,)
    if kind == "Multiply":
        form = rng.choice(["commutator", "pass", "unpass"])
        if form == "commutator":
            i, j, k = rng.sample(range(1, p + 1), 3)
            x, y = _coef(rng, 8), _coef(rng, 8)
            site = (_unip(rng, p, i, j, x), _unip(rng, p, j, k, y),
                    _unip(rng, p, i, j, -x), _unip(rng, p, j, k, -y))
            return site, kind, form, ()
        while True:
            a, b = _unip(rng, p, bits=8), _unip(rng, p, bits=8)
            c = _pass_letter(a, b, p)
            if c is not None:
                break
        if form == "pass":
            return (a, b), kind, form, ()
        return (b, S(*c), a), kind, form, ()
    if kind == "Commute":
        if p >= 4 and rng.random() < 0.5:
            idx = list(range(1, p + 1))
            rng.shuffle(idx)
            k = rng.randint(2, p - 2)
            left, right = idx[:k], idx[k:][:p - 2]
            if len(right) < 2:
                left, right = idx[:2], idx[2:4]
            u = _sigma_word(rng, p, rng.randint(1, 3), left)
            v = _sigma_word(rng, p, rng.randint(1, 3), right)
            return tuple(u + v), kind, "segments", (len(u),)
        while True:
            a, b = _unip(rng, p), _unip(rng, p)
            if a.i != b.j and a.j != b.i:
                return (a, b), kind, "swap", ()
    if kind == "SwapConj":
        i, j = rng.sample(range(1, p + 1), 2)
        l = _unip(rng, p)
        if rng.random() < 0.5:
            return _swap_word(i, j) + (l,) + _swap_inverse(i, j), kind, "conj", ()
        return (l,), kind, "unconj", (i, j)
    if kind == "DiagConj":
        form = rng.choice(["conj", "pass", "pass_left", "merge", "split", "drop"])
        b, x = _diag(rng, p), _unip(rng, p)
        if form == "conj":
            return (b, x, b), kind, form, ()
        if form == "pass":
            return (b, x), kind, form, ()
        if form == "pass_left":
            return (x, b), kind, form, ()
        if form == "merge":
            return (b, _diag(rng, p)), kind, form, ()
        if form == "split":
            c = _diag(rng, p)
            rest = D(tuple(u * v for u, v in zip(b.signs, c.signs)))
            return (b,), kind, form, (_signs(c), _signs(rest))
        return (D((1,) * p),), kind, form, ()
    if kind == "ShortEquiv":
        form = rng.choice(["to_hat", "to_elem", "flip", "expand"])
        i, j = rng.sample(range(1, p + 1), 2)
        if form == "to_hat":
            return (E(i, j, rng.choice((1, -1))),), kind, form, ()
        if form == "to_elem":
            return (S(i, j, rng.choice((1, -1))),), kind, form, ()
        if form == "flip":
            return (S(i, j, _coef(rng)),), kind, form, ()
        others = [k for k in range(1, p + 1) if k not in (i, j)]
        block = sorted([i, j] + rng.sample(others, rng.randint(0, len(others))))
        bits = 16 if len(block) > 2 else 6
        return (S(i, j, _coef(rng, bits)),), kind, form, (",".join(map(str, block)),)
    if kind == "Conjugate":
        a = rng.randint(1, p - 1)
        b = rng.randint(a + 1, min(p, a + p - 2))
        blk = list(range(a, b + 1))
        u = _sigma_word(rng, p, rng.randint(1, 3), blk)
        cross = [(i, j) for i in range(1, p + 1) for j in range(i + 1, p + 1)
                 if not (i in blk and j in blk)]
        nw = [_unip(rng, p, *rng.choice(cross), bits=8) for _ in range(rng.randint(1, 3))]
        if rng.random() < 0.5:
            return tuple(nw + u), kind, "pull_left", (len(nw),)
        return tuple(u + nw), kind, "pull_right", (len(u),)
    if kind == "Relator":
        from .oracle import _substitutions
        table = _substitutions(p)
        keys = list(table)
        u = keys[rng.randrange(len(keys))]
        v = table[u][rng.randrange(len(table[u]))]
        return u, kind, "apply", (format_word(Word(v, p)),)
    site = _word(rng, p, 1, 5, bits=8)
    v = omega(evaluate(Word(site, p))).letters
    return site, kind, "replace", (format_word(Word(v, p)),)


def _exact_chunk(args):
    seed, k0, k1, p_fixed, expand = args
    fails, counts, rejected, letters = [], {}, 0, 0
    for k in range(k0, k1):
        rng = random.Random(f"{seed}/exactness/{'l' if expand else 'm'}/{k}")
        p = p_fixed or rng.choice((3, 4, 5))
        if expand:
            w = Word(tuple(_unip(rng, p, bits=40) if rng.random() < 0.7 else _letter(rng, p, 4)
                           for _ in range(rng.randint(1, 3))), p)
            e = lambda_expand(w)
            letters += len(e)
            if evaluate(e) != evaluate(w):
                fails.append(format_word(w))
            counts["lambda"] = counts.get("lambda", 0) + 1
            continue
        while True:
            site, kind, form, params = random_move(rng, p)
            pre, post = _word(rng, p, 0, 3, 8), _word(rng, p, 0, 3, 8)
            w = Word(pre + tuple(site) + post, p)
            m = MacroMove(kind, len(pre), len(pre) + len(site), form, tuple(params))
            try:
                w2, _ = apply_move(w, m)
                break
            except (PatternMismatch, IndexClash):
                rejected += 1
        key = f"{kind}/{form}"
        counts[key] = counts.get(key, 0) + 1
        if evaluate(w2) != evaluate(w):
            fails.append(f"{key}: {format_word(w)}")
    return fails, counts, rejected, letters


def suite_exactness(man: ExperimentManifest) -> SuiteResult:
    n_moves, n_lambda = _sizes(man, [100_000, 100_000])[:2]
    chunk = 5000
    checks, rows, summary = [], [], {}
    for tag, n, expand in (("macro moves", n_moves, False), ("lambda expansions", n_lambda, True)):
        tasks = [(man.seed, k, min(n, k + chunk), man.p, expand) for k in range(0, n, chunk)]
        fails, counts, rejected, letters = [], {}, 0, 0
        for f, c, r, l in _pmap(_exact_chunk, tasks, man.jobs):
            fails += f
            rejected += r
            letters += l
            for k, v in c.items():
                counts[k] = counts.get(k, 0) + v
        for k in sorted(counts):
            rows.append({"family": tag, "kind": k, "count": counts[k]})
        summary[tag] = {"applied": n, "failures": len(fails), "rejected_draws": rejected,
                        "expanded_letters": letters, "first_failures": fails[:5]}
        checks.append(Check(f"{tag} preserve evaluation", not fails,
                            f"{n - len(fails)}/{n} exact, {len(counts)} move forms"))
    return SuiteResult("exactness", checks, rows, summary, man)


# shortcuts -------------------------------------------------------------------

def suite_shortcuts(man: ExperimentManifest) -> SuiteResult:
    p = man.p or 3
    kmax, n_random, bits = _sizes(man, [40, 1000, 64])[:3]
    rng = man.rng(0)
    xs = [s * 2 ** k for k in range(kmax + 1) for s in (1, -1)]
    xs += [rng.choice((1, -1)) * rng.randint(1, 2 ** bits) for _ in range(n_random)]
    rows, bad_len, bad_eval, worst = [], [], [], 0.0
    for x in xs:
        w = build_shortcut(1, 3, x, p)
        bound = length_bound(x)
        ok_eval = evaluate(w) == IntegerMatrix.elementary(p, 1, 3, x)
        ratio = len(w) / (1 + math.floor(math.log2(abs(x))))
        worst = max(worst, ratio)
        rows.append({"x": x, "length": len(w), "bound": bound, "ratio": round(ratio, 6)})
        if len(w) > bound:
            bad_len.append(x)
        if not ok_eval:
            bad_eval.append(x)
    checks = [Check("shortcut length within C_sc(1+floor(log2|x|))", not bad_len,
                    f"{len(xs) - len(bad_len)}/{len(xs)}, worst ratio {worst:.3f} vs C_sc = {C_SC}"),
              Check("shortcut evaluation exact", not bad_eval, f"{len(xs) - len(bad_eval)}/{len(xs)}")]
    summary = {"p": p, "count": len(xs), "worst_ratio": worst, "C_sc": C_SC,
               "too_long": bad_len[:5], "wrong": bad_eval[:5]}
    return SuiteResult("shortcuts", checks, rows, summary, man)


# mesh ------------------------------------------------------------------------

MESH_BOUNDS = {"perimeter_sum": 1152, "triangles": 32, "incidence": 128}


def _mesh_case(args):
    t, name, seed, k = args
    if name == "random":
        h = random_field(t, random.Random(f"{seed}/mesh/{k}"))
        h.check(t, 200)
    elif name == "unit":
        h = constant_field(1)
    elif name == "side":
        h = constant_field(t)
    else:
        h = cone_field(t)
    m = adaptive_mesh(t, h)
    r = audit_mesh(m, h, t)
    return {"field": f"{name}" if name != "random" else f"random-{k}", "t": t,
            "lattice": r.lattice, "edge_sandwich": r.edge_sandwich, "incidence": r.incidence,
            "perimeter": r.perimeter, "triangle_count": r.triangle_count,
            "cover_area": r.cover_area, "euler": r.euler, "triangles": r.n_triangles,
            "max_incidence": r.max_incidence, "max_sides": r.max_sides,
            "perimeter_sum_over_t2": round(r.perimeter_sum / t / t, 6), "ok": r.ok}


def suite_mesh(man: ExperimentManifest) -> SuiteResult:
    t, n_random = _sizes(man, [256, 100])[:2]
    cases = [(t, name, man.seed, 0) for name in ("unit", "side", "cone")]
    cases += [(t, "random", man.seed, k) for k in range(n_random)]
    rows = _pmap(_mesh_case, cases, man.jobs)
    checks = []
    for key, label in (("lattice", "lattice vertices"), ("edge_sandwich", "edge sandwich"),
                       ("perimeter", "sum of squared perimeters <= 1152 t^2"),
                       ("triangle_count", "triangles <= 32 t^2"),
                       ("incidence", "vertex incidence <= 128"),
                       ("cover_area", "cover tiles the square"), ("euler", "Euler characteristic 1")):
        bad = [r["field"] for r in rows if not r[key]]
        checks.append(Check(label, not bad, f"{len(rows) - len(bad)}/{len(rows)} fields"
                            + (f", failing {bad[:3]}" if bad else "")))
    summary = {"t": t, "fields": len(rows),
               "max_incidence": max(r["max_incidence"] for r in rows),
               "max_perimeter_sum_over_t2": max(r["perimeter_sum_over_t2"] for r in rows),
               "max_triangles_over_t2": max(r["triangles"] / t / t for r in rows)}
    svgs = {}
    if man.options.get("render", True):
        svgs["mesh_cone.svg"] = mesh_svg(adaptive_mesh(min(t, 64), cone_field(min(t, 64))))
    return SuiteResult("mesh", checks, rows, summary, man, svgs)


# symmetric space ---------------------------------------------------------------

def random_gamma(rng, p, steps) -> IntegerMatrix:
    g = IntegerMatrix.identity(p)
    for _ in range(steps):
        a, b = rng.sample(range(1, p + 1), 2)
        g = g @ IntegerMatrix.elementary(p, a, b, rng.randint(-3, 3))
    return g


def _random_n(rng, p):
    n = np.eye(p)
    for i in range(p):
        for j in range(i + 1, p):
            n[i, j] = rng.uniform(-0.5, 0.5)
    return n


def _centered(v) -> np.ndarray:
    v = np.array(v, dtype=float)
    return v - v.mean()


def random_phi(rng, p, radius) -> np.ndarray:
    """Profile of norm about `radius` anywhere in the Siegel set: consecutive
    drops are at least 0.95·log ε_S, so some points are not yet reduced."""
    v = np.sort([rng.gauss(0, 1) for _ in range(p)])[::-1]
    v = _centered(v)
    nv = np.linalg.norm(v)
    v = v * (radius / nv) if nv > 0 else v
    steps = -np.diff(v)
    steps += [rng.uniform(0.95 * math.log(EPS_S), 0) if rng.random() < 0.5 else 0.0
              for _ in range(p - 1)]
    return _centered(np.concatenate([[0.0], -np.cumsum(steps)]))


def gauss_reduce(x) -> tuple:
    """Lagrange-Gauss reduction of a 2-dimensional exact row basis.

    Independent of the LLL code: works on Fraction Gram entries only.
    Returns (γ, reduced rows) with rows = γ^-1 x, the last row shortest and
    the first row size reduced against it, det γ = 1.
    """
    r1, r2 = [list(r) for r in x.exact]
    T = [[1, 0], [0, 1]]            # rows of T express (first, last) in the input rows

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1]

    first, last = r1, r2
    while True:
        mu = dot(first, last) / dot(last, last)
        q = math.floor(mu + Fraction(1, 2))
        if q:
            first = [a - q * b for a, b in zip(first, last)]
            T[0] = [a - q * b for a, b in zip(T[0], T[1])]
        if dot(first, first) < dot(last, last):
            first, last = last, first
            T = [T[1], T[0]]
        else:
            break
    if T[0][0] * T[1][1] - T[0][1] * T[1][0] == -1:
        first = [-a for a in first]
        T[0] = [-a for a in T[0]]
    gamma = IntegerMatrix(T).inverse()
    return gamma, (tuple(first), tuple(last))


def _gram(rows):
    return tuple(tuple(sum(a * b for a, b in zip(u, v)) for v in rows) for u in rows)


def _reduction_case(args):
    seed, k, p_fixed = args
    rng = random.Random(f"{seed}/reduction/{k}")
    p = p_fixed or rng.choice((3, 4, 5))
    radius = rng.uniform(0, 40)
    ph = random_phi(rng, p, radius)
    x = siegel_point(random_gamma(rng, p, rng.randint(0, 20)), _random_n(rng, p), np.exp(ph))
    red = siegel_reduce(x)
    y = x.translate(red.gamma.inverse())
    member = in_siegel(iwasawa(y), red.eps_s, 1e-6)
    dev = float(np.max(np.abs(red.phi - ph)))
    return {"p": p, "phi_norm": round(radius, 6), "deviation": round(dev, 9),
            "member": member, "ok": member and dev <= C_PHI}


def _gauss_case(args):
    seed, k = args
    rng = random.Random(f"{seed}/reduction-p2/{k}")
    radius = rng.uniform(0, 40)
    ph = random_phi(rng, 2, radius)
    x = siegel_point(random_gamma(rng, 2, rng.randint(0, 30)), _random_n(rng, 2), np.exp(ph))
    red = siegel_reduce(x)
    g_or, rows_or = gauss_reduce(x)
    same = red.gamma == g_or or red.gamma == g_or @ IntegerMatrix.diagonal([-1, -1])
    ours = x.translate(red.gamma.inverse()).exact
    return {"p": 2, "phi_norm": round(radius, 6), "same_coset": same,
            "same_gram": _gram(ours) == _gram(rows_or), "ok": same and _gram(ours) == _gram(rows_or)}


def suite_reduction(man: ExperimentManifest) -> SuiteResult:
    n, n2 = _sizes(man, [1000, 1000])[:2]
    rows = _pmap(_reduction_case, [(man.seed, k, man.p) for k in range(n)], man.jobs)
    rows2 = _pmap(_gauss_case, [(man.seed, k) for k in range(n2)], man.jobs)
    bad = [r for r in rows if not r["ok"]]
    bad2 = [r for r in rows2 if not r["ok"]]
    worst = max((r["deviation"] for r in rows), default=0.0)
    checks = [Check("round trip recovers Siegel membership and phi", not bad,
                    f"{n - len(bad)}/{n}, worst |phi - log a| = {worst:.3g} vs c'' = {C_PHI}"),
              Check("p=2 agrees with Gauss reduction", not bad2, f"{n2 - len(bad2)}/{n2} same coset")]
    summary = {"points": n, "p2_points": n2, "worst_deviation": worst, "c_phi": C_PHI,
               "nonmembers": sum(not r["member"] for r in rows)}
    return SuiteResult("reduction", checks, rows + rows2, summary, man)


# flag window and parabolic witness -----------------------------------------------

FLAG_PAIRS = ((3, 1), (3, 2), (4, 2), (4, 3), (5, 3), (5, 4))


def cusp_point(rng, p, k, gap):
    """Siegel point whose profile has the jump `gap` after position k.

    The profile is non-increasing, so the constructed basis is already
    LLL reduced and the reduction keeps the jump where it was put.
    """
    steps = [rng.uniform(0.0, 0.5) if i >= k else rng.uniform(0.0, 3.0) for i in range(p - 1)]
    steps[k - 1] = gap
    ph = _centered(np.concatenate([[0.0], -np.cumsum(steps)]))
    g = random_gamma(rng, p, rng.randint(0, 15))
    n = _random_n(rng, p)
    return siegel_point(g, n, np.exp(ph)), g, n, ph


def _flag_case(args):
    seed, k0 = args
    rng = random.Random(f"{seed}/flag-window/{k0}")
    p, k = FLAG_PAIRS[rng.randrange(len(FLAG_PAIRS))]
    cv = c_v(p)
    x, *_ = cusp_point(rng, p, k, 2 * cv + rng.uniform(0.1, 1.0))
    red = siegel_reduce(x)
    lo, hi = flag_window(red, k)
    if not lo < hi:
        return {"p": p, "k": k, "window": "empty", "ok": False}
    r = math.exp(rng.uniform(math.log(lo), math.log(hi)))
    V = short_vector_space(x, r)
    want = flag_subspace(red.gamma, k)
    return {"p": p, "k": k, "r_low": lo, "r": r, "r_high": hi, "rank": len(V), "ok": V == want}


def suite_flag_window(man: ExperimentManifest) -> SuiteResult:
    n = _sizes(man, [500])[0]
    rows = _pmap(_flag_case, [(man.seed, k) for k in range(n)], man.jobs)
    bad = [r for r in rows if not r["ok"]]
    checks = [Check("short vector space equals the flag subspace", not bad, f"{n - len(bad)}/{n} points")]
    summary = {"points": n, "pairs": [list(pk) for pk in FLAG_PAIRS], "exceptions": len(bad)}
    return SuiteResult("flag-window", checks, rows, summary, man)


def _witness_case(args):
    seed, k0 = args
    rng = random.Random(f"{seed}/witness/{k0}")
    while True:
        p = rng.choice((3, 4, 5))
        j = rng.randint(1, p - 1)
        c = witness_constant(p)
        step = rng.uniform(0.05, 2.0)
        x, g, n, ph = cusp_point(rng, p, j, 2 * (c + step) + rng.uniform(0.5, 4.0))
        n2 = n + np.triu(np.array([[rng.uniform(-1, 1) for _ in range(p)] for _ in range(p)]), 1)
        ph2 = ph + _centered([rng.uniform(-step, step) for _ in range(p)]) / math.sqrt(p)
        y = siegel_point(g, n2, np.exp(ph2))
        d = dist_E(x, y)
        rx = siegel_reduce(x)
        gap = (rx.phi[j - 1] - rx.phi[j]) / 2 - c
        if d < gap:
            break
    ry = siegel_reduce(y)
    try:
        got = parabolic_witness(x, y, rx.gamma, ry.gamma)
        ok = got is not None and in_parabolic(rx.gamma.inverse() @ ry.gamma, got)
    except AssertionError:
        got, ok = None, False
    return {"p": p, "j_built": j, "j_returned": got, "distance": d, "gap": gap,
            "labels_differ": rx.gamma != ry.gamma, "ok": ok}


def suite_witness(man: ExperimentManifest) -> SuiteResult:
    n = _sizes(man, [500])[0]
    rows = _pmap(_witness_case, [(man.seed, k) for k in range(n)], man.jobs)
    bad = [r for r in rows if not r["ok"]]
    checks = [Check("parabolic witness passes the block test", not bad, f"{n - len(bad)}/{n} pairs")]
    summary = {"pairs": n, "exceptions": len(bad),
               "distinct_labels": sum(r["labels_differ"] for r in rows)}
    return SuiteResult("witness", checks, rows, summary, man)


# cost families -------------------------------------------------------------------

def triangular_word(rng, p, n, h) -> Word:
    """Upper triangular identity word of at most n letters, coefficients <= 2^h."""
    k = max(1, n - p * (p - 1) // 2)
    u = []
    for _ in range(k):
        i, j = sorted(rng.sample(range(1, p + 1), 2))
        u.append(_unip(rng, p, i, j, bits=h))
    v = Word(unitriangular_letters(evaluate(Word(u, p))), p).inverse()
    return Word(u, p) + v


def _triangular_rows(man):
    sizes = _sizes(man, [4, 8, 16, 24, 32, 40])
    rows = []
    for p in ((man.p,) if man.p else (3, 4, 5)):
        for n in sizes:
            for h in (1, 4, 8, 16, 32):
                rng = man.rng(n * 100 + h, f"tri{p}")
                w = triangular_word(rng, p, n, h)
                c = fill_triangular(w, man.model)
                nn, hh = c.breakdown["n"], c.breakdown["h"]
                rows.append({"family": "triangular", "p": p, "n": nn, "h": round(hh, 6),
                             "cost": c.total_cost, "bound": c.breakdown["bound"],
                             "ratio": c.total_cost / (nn ** 3 * hh ** 2),
                             "verified": verify_certificate(c)})
    return rows


def commuting_word(L: int) -> tuple:
    return Word([S(1, 3, 2 ** L)], 5), Word([S(2, 4, 2 ** L)], 5)


def _commuting_rows(man, Ls):
    rows = []
    for L in Ls:
        a, b = commuting_word(L)
        c = commute_disjoint(a, b, man.model)
        rows.append({"family": "commuting", "p": 5, "L": L,
                     "lhat": shortcut_length(a + b + a.inverse() + b.inverse()),
                     "cost": c.total_cost, "verified": verify_certificate(c)})
    return rows


def _random_block(rng, n, L) -> IntegerMatrix:
    g = IntegerMatrix.identity(n)
    if n == 1:
        return g
    while True:
        a, b = rng.sample(range(1, n + 1), 2)
        h = g @ IntegerMatrix.elementary(n, a, b, rng.choice([-3, -2, -1, 1, 2, 3]))
        if max(abs(v) for r in h.rows for v in r) > 2 ** L:
            return g
        g = h


def random_u23(rng, L) -> IntegerMatrix:
    """Random element of U(2,3) with entries bounded by 2^L."""
    A, B = _random_block(rng, 2, L), _random_block(rng, 3, L)
    rows = [[0] * 5 for _ in range(5)]
    for i in range(2):
        for j in range(2):
            rows[i][j] = A.rows[i][j]
    for i in range(3):
        for j in range(3):
            rows[2 + i][2 + j] = B.rows[i][j]
    for i in range(2):
        for j in range(2, 5):
            rows[i][j] = rng.randint(-2 ** L, 2 ** L)
    g = IntegerMatrix(rows)
    if rng.random() < 0.5:
        g = g @ IntegerMatrix.diagonal([-1, -1, 1, 1, 1])
    return g


def _omega_case(args):
    seed, L, model = args
    from .templates import fill_parabolic_word
    rng = random.Random(f"{seed}/omega-triangle/{L}")
    w = omega_triangle(random_u23(rng, L), random_u23(rng, L))
    c = fill_parabolic_word(w, 2, model)
    lh = shortcut_length(w)
    return {"family": "omega-triangle", "p": 5, "L": L, "lhat": lh, "cost": c.total_cost,
            "ratio": c.total_cost / lh ** 2, "certified": c.certified,
            "verified": verify_certificate(c),
            "small_faces": c.breakdown.get("Small_faces", 0),
            "parabolic_faces": c.breakdown.get("Parabolic_faces", 0),
            "fallback_faces": c.breakdown.get("Fallback_faces", 0)}


COMMUTING_WINDOW = (1.7, 2.3)
OMEGA_SLOPE_MAX = 2.3


def suite_costs(man: ExperimentManifest, parts: str = "abc") -> SuiteResult:
    rows, checks, summary = [], [], {}
    if "a" in parts:
        tri = _triangular_rows(man)
        rows += tri
        over = [r for r in tri if r["cost"] > man.model.C_NP * r["n"] ** 3 * r["h"] ** 2]
        worst = max(r["ratio"] for r in tri)
        checks.append(Check("triangular cost <= C_NP n^3 h^2", not over and all(r["verified"] for r in tri),
                            f"{len(tri) - len(over)}/{len(tri)}, worst cost/(n^3 h^2) = {worst:.3g}"
                            f" vs C_NP = {man.model.C_NP}"))
        summary["triangular"] = {"instances": len(tri), "worst_ratio": worst}
    if "b" in parts:
        Ls = list(man.options.get("commuting_L", range(4, 21)))
        com = _commuting_rows(man, Ls)
        rows += com
        fit = fit_growth([r["lhat"] for r in com], [r["cost"] for r in com])
        lo, hi = COMMUTING_WINDOW
        checks.append(Check("commuting family slope in [1.7, 2.3]",
                            lo <= fit.slope <= hi and all(r["verified"] for r in com),
                            f"slope {fit.slope:.3f} (residual {fit.residual:.3f}) over L = {Ls[0]}..{Ls[-1]}"))
        summary["commuting"] = fit.to_dict()
    if "c" in parts:
        Ls = list(man.options.get("omega_L", range(4, 17)))
        om = _pmap(_omega_case, [(man.seed, L, man.model) for L in Ls], man.jobs)
        rows += om
        fit = fit_growth([r["lhat"] for r in om], [r["cost"] for r in om])
        env = [r for r in om if r["cost"] > man.model.C_Para * r["lhat"] ** 2]
        good = all(r["certified"] and r["verified"] for r in om)
        worst = max(r["ratio"] for r in om)
        checks.append(Check("omega-triangle certified cost <= C_Para lhat^2", good and not env,
                            f"{len(om) - len(env)}/{len(om)} within, worst cost/lhat^2 = {worst:.3g}"
                            f" vs C_Para = {man.model.C_Para}"))
        checks.append(Check("omega-triangle fitted slope <= 2.3", fit.slope <= OMEGA_SLOPE_MAX,
                            f"slope {fit.slope:.3f} (residual {fit.residual:.3f}) over L = {Ls[0]}..{Ls[-1]}"))
        summary["omega_triangle"] = dict(fit.to_dict(), worst_ratio=worst)
    return SuiteResult("costs", checks, rows, summary, man)


# oracle floor --------------------------------------------------------------------

def sl3_alphabet() -> list:
    p = 3
    return ([E(i, j, s) for i in range(1, p + 1) for j in range(1, p + 1) if i != j for s in (1, -1)]
            + [D(d) for d in diagonal_set(p) if -1 in d])


def short_identity_words(max_length: int = 6) -> list:
    """Cyclically reduced identity words over Σ in SL(3;Z) up to length
    max_length, one per class under rotation and inversion, sorted."""
    p = 3
    alpha = sl3_alphabet()
    key = {l: format_word(Word([l], p)) for l in alpha}

    def words(n):
        if n == 0:
            yield ()
            return
        for w in words(n - 1):
            for l in alpha:
                if not (w and cancels(w[-1], l)):
                    yield w + (l,)

    half = max_length // 2 + max_length % 2
    by_len = {n: {} for n in range(half + 1)}
    for n in range(half + 1):
        for w in words(n):
            by_len[n].setdefault(evaluate(Word(w, p)), []).append(w)

    def canon(w):
        inv = tuple(l.inverse() for l in reversed(w))
        return min(tuple(key[l] for l in x[k:] + x[:k]) for x in (w, inv) for k in range(len(x)))

    found = {}
    for n in range(2, max_length + 1):
        a, b = n // 2, n - n // 2
        for g, us in by_len[a].items():
            for v in by_len[b].get(g, ()):
                vi = tuple(l.inverse() for l in reversed(v))
                for u in us:
                    w = u + vi
                    if any(cancels(w[k], w[k + 1]) for k in range(n - 1)) or cancels(w[-1], w[0]):
                        continue
                    found.setdefault(canon(w), w)
    return [Word(found[k], p) for k in sorted(found, key=lambda c: (len(c), c))]


ORACLE_DEPTH = 12
ORACLE_NODES = 200_000


def _oracle_case(text):
    from .oracle import DepthExceeded, oracle_certificate
    from .templates import fill_word
    w = parse_sl3(text)
    try:
        oc = oracle_certificate(w, max_depth=ORACLE_DEPTH, node_budget=ORACLE_NODES)
        filled, relators, oracle_ok = True, oc.breakdown["relators"], verify_certificate(oc)
    except DepthExceeded:
        filled, relators, oracle_ok = False, None, False
    ec = fill_word(w)
    return {"word": text, "length": len(w), "oracle_filled": filled, "relators": relators,
            "oracle_replays": oracle_ok, "engine_cost": ec.total_cost,
            "engine_replays": verify_certificate(ec)}


def parse_sl3(text):
    from .core import parse_word
    return parse_word(text, 3)


def suite_oracle(man: ExperimentManifest) -> SuiteResult:
    max_len = _sizes(man, [6])[0]
    ws = [format_word(w) for w in short_identity_words(max_len)]
    rows = _pmap(_oracle_case, ws, man.jobs)
    unfilled = [r["word"] for r in rows if not (r["oracle_filled"] and r["oracle_replays"])]
    bad_engine = [r["word"] for r in rows if not r["engine_replays"]]
    checks = [Check("oracle fills every short identity word", not unfilled,
                    f"{len(rows) - len(unfilled)}/{len(rows)} within depth {ORACLE_DEPTH}"),
              Check("engine certificates replay", not bad_engine, f"{len(rows) - len(bad_engine)}/{len(rows)}")]
    summary = {"words": len(rows), "max_length": max_len,
               "max_relators": max((r["relators"] or 0) for r in rows),
               "unfilled": unfilled[:5], "engine_failures": bad_engine[:5]}
    return SuiteResult("oracle", checks, rows, summary, man)


# end to end ------------------------------------------------------------------------

def null_homotopic_word(rng, p: int, max_length: int) -> Word:
    """Freely reduced product of conjugated relators and commutators of
    words on disjoint index sets (p >= 4 only), at most max_length letters."""
    rels = presentation_relators(p)
    out: list = []

    def push(letters):
        for l in letters:
            if out and cancels(out[-1], l):
                out.pop()
            else:
                out.append(l)

    target = rng.randint(max_length // 4, max_length)
    while True:
        if p < 4 or rng.random() < 0.5:
            r = rels[rng.randrange(len(rels))]
            r = r if rng.random() < 0.5 else tuple(l.inverse() for l in reversed(r))
            z = _sigma_word(rng, p, rng.randint(0, 6))
            piece = z + list(r) + [l.inverse() for l in reversed(z)]
        else:
            idx = list(range(1, p + 1))
            rng.shuffle(idx)
            k = rng.randint(2, p - 2)
            u = _sigma_word(rng, p, rng.randint(1, 5), idx[:k])
            v = _sigma_word(rng, p, rng.randint(1, 5), idx[k:])
            piece = u + v + [l.inverse() for l in reversed(u)] + [l.inverse() for l in reversed(v)]
        if len(out) + len(piece) > max_length:
            if out:
                break
            continue
        push(piece)
        if len(out) >= target:
            break
    return Word(out, p)


def _e2e_case(args):
    from .templates import ClassificationFailed, build_template, fill_template
    seed, k, p, max_length, model = args
    rng = random.Random(f"{seed}/end-to-end/{k}")
    w = null_homotopic_word(rng, p, max_length)
    row = {"index": k, "length": len(w), "lhat": shortcut_length(w)}
    try:
        tpl = build_template(w)
        c = fill_template(tpl, model)
    except ClassificationFailed as exc:
        row.update(classification_failed=1, verified=False, detail=str(exc))
        return row
    counts = tpl.class_counts()
    row.update(classification_failed=0, verified=verify_certificate(c), certified=c.certified,
               cost=c.total_cost, t=tpl.t, faces=len(tpl.faces),
               small=counts.get("Small", 0),
               parabolic=sum(v for k2, v in counts.items() if k2.startswith("Parabolic")),
               fallback=counts.get("Fallback", 0),
               fallback_fraction=c.breakdown.get("fallback_fraction", 0.0))
    return row


def suite_end_to_end(man: ExperimentManifest) -> SuiteResult:
    n, max_length = _sizes(man, [50, 200])[:2]
    p = man.p or 5
    rows = _pmap(_e2e_case, [(man.seed, k, p, max_length, man.model) for k in range(n)], man.jobs)
    failed = sum(r["classification_failed"] for r in rows)
    unverified = [r["index"] for r in rows if not r["verified"]]
    faces = {k: sum(r.get(k, 0) for r in rows) for k in ("small", "parabolic", "fallback")}
    total = sum(faces.values())
    frac = faces["fallback"] / total if total else 0.0
    checks = [Check("every certificate verifies", not unverified, f"{n - len(unverified)}/{n} words"),
              Check("no face fails classification", failed == 0, f"ClassificationFailed = {failed}")]
    summary = {"words": n, "p": p, "max_length": max_length, "faces": faces,
               "fallback_fraction": frac, "classification_failed": failed,
               "max_lhat": max(r["lhat"] for r in rows)}
    svgs = {}
    if man.options.get("render", True) and rows:
        from .templates import build_template
        w = null_homotopic_word(random.Random(f"{man.seed}/end-to-end/0"), p, max_length)
        svgs["template_0.svg"] = build_template(w).svg()
    return SuiteResult("end-to-end", checks, rows, summary, man, svgs)


def cusp_loop_word(L: int = 16, p: int = 5) -> Word:
    """λ(ŝ13(2^L)) e12 λ(ŝ13(-2^L)) e12^-1: a loop that runs far into the cusp.

    Parabolic faces need a cut with both sides of size <= p-2, so the loop
    only shows them for p >= 4.
    """
    up = lambda_expand(Word([S(1, 3, 2 ** L)], p))
    down = lambda_expand(Word([S(1, 3, -2 ** L)], p))
    return up + Word([E(1, 2)], p) + down + Word([E(1, 2, -1)], p)


def suite_cusp_loop(man: ExperimentManifest) -> SuiteResult:
    from .templates import build_template, fill_template
    L = _sizes(man, [16])[0]
    w = cusp_loop_word(L, man.p or 5)
    tpl = build_template(w)
    c = fill_template(tpl, man.model)
    counts = tpl.class_counts()
    para = sum(v for k, v in counts.items() if k.startswith("Parabolic"))
    checks = [Check("cusp loop has parabolic faces", para > 0, f"{counts}"),
              Check("cusp loop certificate verifies", verify_certificate(c), f"cost {c.total_cost:.6g}")]
    rows = [{"L": L, "length": len(w), "t": tpl.t, "faces": len(tpl.faces), "parabolic": para,
             "cost": c.total_cost}]
    return SuiteResult("cusp-loop", checks, rows, {"classes": counts}, man,
                       {"cusp_loop.svg": tpl.svg(), "cusp_loop.json": tpl.to_json()})


SUITES = {
    "exactness": suite_exactness,
    "shortcuts": suite_shortcuts,
    "mesh": suite_mesh,
    "reduction": suite_reduction,
    "flag-window": suite_flag_window,
    "witness": suite_witness,
    "costs": suite_costs,
    "triangular": lambda m: suite_costs(m, "a"),
    "filling-scaling": lambda m: suite_costs(m, "b"),
    "omega-triangle": lambda m: suite_costs(m, "c"),
    "oracle": suite_oracle,
    "end-to-end": suite_end_to_end,
    "cusp-loop": suite_cusp_loop,
}


def run_suite(man: ExperimentManifest) -> SuiteResult:
    """Run one suite and, when man.out is set, write report.json, data.csv and renders."""
    import os
    if man.suite not in SUITES:
        raise KeyError(f"unknown suite {man.suite!r}; choose from {sorted(SUITES)}")
    res = SUITES[man.suite](man)
    if man.out:
        os.makedirs(man.out, exist_ok=True)
        with open(os.path.join(man.out, "report.json"), "w") as fh:
            json.dump(res.report(), fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        with open(os.path.join(man.out, "data.csv"), "w") as fh:
            fh.write(res.csv_text())
        for name, text in res.svgs.items():
            with open(os.path.join(man.out, name), "w") as fh:
                fh.write(text)
    return res


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")
