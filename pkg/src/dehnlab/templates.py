"""Templates for identity words and the recursive template filler.

A template is a triangulated disc whose bottom side spells the word and
whose other sides are labelled I.  Interior vertices carry group elements
obtained by reducing points of a geodesic cone over the word's path in the
symmetric space.  Every edge carries the word ω(g_a^-1 g_b) (bottom edges
carry the literal chunk of the input), so each face is an identity word.

Faces are classified as
  Small         the face word is short enough for one bounded relation,
  Parabolic(j)  all relative labels lie in U(j, q-j) (exact test) and the
                blocks stay of size <= p-2, so the face splits into block
                projections that are filled recursively,
  Fallback      parabolic only for a cut that leaves a block of size p-1;
                filled by one uncertified move.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (BlockPartition, IntegerMatrix, Letter, Word, evaluate, format_word,
                   in_parabolic, norm2)
from .mesh import SizingField, adaptive_mesh
from .moves import BOUNDED_LENGTH, DEFAULT_MODEL, CostModel, FillingCertificate, Session
from .normal import omega
from .rewrite import NotIdentity, NotRank2, fill_rank2, gather_diagonals, parabolic_split
from .shortcuts import letter_length, shortcut_length
from .symspace import dist_E, geodesic, geodesic_path, point_of, siegel_reduce

SMALL_BOUND = BOUNDED_LENGTH     # ℓ̂ of a face word filled by one bounded relation
SCALE = 8                        # letters of the word per unit of the bottom side
MAX_SIDE = 256                   # largest disc side; longer words get longer chunks
C_PRIME = 0.0                    # c′ in r₀ = (‖φ‖ + slack)/(2q²) − c′
R0_SLACK = 0.0
SMALL_TARGET = 64                # longer faces take the parabolic route when it exists
CUSP_GAP = 1.0                   # half φ-gap above which a parabolic cut is preferred
ORACLE_LENGTH = 12               # p = 3 small faces up to this length go to the oracle


class ClassificationFailed(RuntimeError):
    """A face is neither small nor parabolic."""


# block helpers ------------------------------------------------------------

def _sub(g: IntegerMatrix, block) -> IntegerMatrix:
    return IntegerMatrix([[g.rows[i - 1][j - 1] for j in block] for i in block], check=False)


def _embed(h: IntegerMatrix, block, p: int) -> IntegerMatrix:
    rows = [[int(i == j) for j in range(p)] for i in range(p)]
    for a, i in enumerate(block):
        for b, j in enumerate(block):
            rows[i - 1][j - 1] = h.rows[a][b]
    return IntegerMatrix(rows, check=False)


def _partition(p: int, block, j: int) -> BlockPartition:
    """Singletons outside the block, the block split after its j-th index."""
    lo, hi = block[0], block[-1]
    blocks = [(i,) for i in range(1, lo)]
    blocks += [tuple(block[:j]), tuple(block[j:])]
    blocks += [(i,) for i in range(hi + 1, p + 1)]
    return BlockPartition(blocks)


def _letter_in_cut(l: Letter, block, j: int) -> bool:
    if l.kind == "D":
        return True
    pos = {i: k for k, i in enumerate(block)}
    if l.i not in pos or l.j not in pos:
        return False
    return not (pos[l.i] >= j and pos[l.j] < j)


def _proxy(g: IntegerMatrix) -> float:
    """Label distance max(1, log₂‖g‖₂)."""
    return max(1.0, math.log2(norm2(g)))


# the template type ----------------------------------------------------------

@dataclass
class Template:
    p: int
    block: tuple
    t: int
    scale: int                 # letters of the word per unit of the bottom side
    word: Word                 # the Σ word spelled by the bottom side
    vertices: list             # lattice points (x, y)
    labels: list               # IntegerMatrix per vertex
    faces: list                # vertex index tuples
    classes: list = field(default_factory=list)
    bottom: list = field(default_factory=list)     # bottom vertices, left to right
    edge_words: dict = field(default_factory=dict)  # (lo, hi) -> letters read lo -> hi
    phis: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def edge_word(self, a: int, b: int) -> tuple:
        if a < b:
            return self.edge_words[(a, b)]
        return tuple(l.inverse() for l in reversed(self.edge_words[(b, a)]))

    def boundary_word(self) -> Word:
        out = []
        for a, b in zip(self.bottom, self.bottom[1:]):
            out.extend(self.edge_word(a, b))
        return Word(out, self.p)

    def class_counts(self) -> dict:
        out: dict = {}
        for c in self.classes:
            key = "Parabolic" if c.startswith("Parabolic") else c
            out[key] = out.get(key, 0) + 1
        return out

    def to_dict(self) -> dict:
        return {
            "p": self.p, "block": list(self.block), "t": self.t, "scale": self.scale,
            "word": format_word(self.word),
            "vertices": [list(v) for v in self.vertices],
            "labels": [g.tolist() for g in self.labels],
            "faces": [list(f) for f in self.faces],
            "classes": list(self.classes),
            "edges": [[a, b, format_word(Word(w, self.p))] for (a, b), w in sorted(self.edge_words.items())],
            "stats": self.stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def svg(self, size: int = 512) -> str:
        """Faces coloured by class: Small grey, Parabolic blue, Fallback red."""
        colours = {"Small": "#dddddd", "Fallback": "#e06060", "Unclassified": "#ffffff"}
        xs = [v[0] for v in self.vertices] or [0]
        ys = [v[1] for v in self.vertices] or [0]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
        sc = (size - 20) / span
        x0, y0 = min(xs), min(ys)

        def pt(k):
            x, y = self.vertices[k]
            return f"{10 + (x - x0) * sc:.2f},{size - 10 - (y - y0) * sc:.2f}"

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
        for f, c in zip(self.faces, self.classes or ["Unclassified"] * len(self.faces)):
            fill = "#6080e0" if c.startswith("Parabolic") else colours.get(c, "#ffffff")
            pts = " ".join(pt(k) for k in f)
            out.append(f'<polygon points="{pts}" fill="{fill}" stroke="black" '
                       f'stroke-width="0.4" class="{c}"/>')
        out.append("</svg>")
        return "\n".join(out)


def empty_template(p: int, block=None) -> Template:
    block = tuple(block or range(1, p + 1))
    return Template(p, block, 0, 1, Word((), p), [], [], [], [], [], {}, [], {"faces": 0})


# dyadic template ------------------------------------------------------------

def dyadic_template(w: Word) -> Template:
    """Balanced binary template: boundary vertices w(i) on a circle, chords
    between w(i·2^j) and w((i+1)·2^j) labelled by ω, 2^k − 2 triangles and
    one bigon.  The word is padded with empty letters to length 2^k."""
    p = w.p
    if not evaluate(w).is_identity():
        raise ValueError("word does not evaluate to the identity")
    n = len(w)
    if n == 0:
        return empty_template(p)
    k = max(1, math.ceil(math.log2(n)))
    N = 1 << k
    letters = list(w.letters) + [None] * (N - n)
    labels = [IntegerMatrix.identity(p)]
    for l in letters[:-1]:
        labels.append(labels[-1] if l is None else labels[-1] @ l.matrix(p))
    verts = [(round(math.cos(2 * math.pi * i / N), 6), round(math.sin(2 * math.pi * i / N), 6))
             for i in range(N)]
    faces = []
    edge_words = {}
    for i, l in enumerate(letters):
        a, b = i, (i + 1) % N
        word = () if l is None else (l,)
        if a < b:
            edge_words[(a, b)] = word
        else:
            edge_words[(b, a)] = tuple(x.inverse() for x in reversed(word))
    for j in range(1, k):
        step = 1 << j
        for i in range(0, N, step):
            a, c, b = i, i + step // 2, (i + step) % N
            faces.append((a, c, b))
            lo, hi = min(a, b), max(a, b)
            if (lo, hi) not in edge_words:
                edge_words[(lo, hi)] = omega(labels[lo].inverse() @ labels[hi]).letters
    # the bigon between 0 and N/2 closes the disc
    faces.append((0, N // 2))
    if (0, N // 2) not in edge_words:
        edge_words[(0, N // 2)] = omega(labels[N // 2]).letters
    tpl = Template(p, tuple(range(1, p + 1)), N, 1, w, verts, labels, faces,
                   ["Unclassified"] * len(faces), list(range(N)) + [0], edge_words)
    tpl.stats = {"faces": len(faces), "triangles": len(faces) - 1, "bigons": 1}
    return tpl


# cone filling ---------------------------------------------------------------

class ConeFilling:
    """f(x, y) = γ_{α′(x), α′(0)}(min(1, y/h)) for the sampled curve α′
    through the points [w(m·x)], x = 0..t.  f is [I] on the left, top and
    right sides.  The height h defaults to t; a smaller h lets the cone
    close over the part of the side actually spanned by the word."""

    def __init__(self, prefixes: list, t: int, height: int | None = None):
        if len(prefixes) != t + 1:
            raise ValueError("need one prefix per integer point of the bottom side")
        self.t = t
        self.height = t if height is None else max(1, min(t, height))
        pts: dict = {}
        self.alpha = [pts.setdefault(g, point_of(g)) for g in prefixes]
        self.apex = pts[IntegerMatrix.identity(prefixes[0].p)]
        self._cache: dict = {}
        self._paths: dict = {}

    def alpha_at(self, x: float):
        k = math.floor(x)
        if k == x or k >= self.t:
            return self.alpha[min(int(k), self.t)]
        return geodesic(self.alpha[k], self.alpha[k + 1], x - k)

    def __call__(self, x: float, y: float):
        key = (x, y)
        v = self._cache.get(key)
        if v is None:
            if y >= self.height or x <= 0 or x >= self.t or self.alpha_at(x) is self.apex:
                v = self.apex
            elif y <= 0:
                v = self.alpha_at(x)
            else:
                path = self._paths.get(x)
                if path is None:
                    path = self._paths[x] = geodesic_path(self.alpha_at(x), self.apex)
                v = path(y / self.height)
            self._cache[key] = v
        return v

    def lipschitz_ratio(self, samples: list) -> float:
        """max d_E(f(u), f(v)) / |u − v| over sampled pairs."""
        best = 0.0
        for u, v in samples:
            d = math.hypot(u[0] - v[0], u[1] - v[1])
            if d > 0:
                best = max(best, dist_E(self(*u), self(*v)) / d)
        return best


def cone_filling(prefixes: list, t: int) -> ConeFilling:
    return ConeFilling(prefixes, t)


def c_sigma(p: int) -> float:
    """Largest displacement d_E([I], [s]) over the letters s of Σ."""
    return dist_E(point_of(IntegerMatrix.identity(p)),
                  point_of(IntegerMatrix.elementary(p, 1, 2, 1)))


# construction -----------------------------------------------------------------

def _check_sigma_word(w: Word, block):
    bs = set(block)
    for l in w.letters:
        if l.kind == "S":
            raise ValueError("template words are over Σ; expand shortcut letters first")
        if l.kind == "E" and not {l.i, l.j} <= bs:
            raise ValueError(f"letter {l} leaves the block {block}")
        if l.kind == "D" and any(s == -1 for i, s in enumerate(l.signs, 1) if i not in bs):
            raise ValueError(f"letter {l} leaves the block {block}")


def _pow2_at_least(n: int) -> int:
    t = 1
    while t < n:
        t *= 2
    return t


def build_template(w: Word, block=None, scale: int = SCALE, max_side: int = MAX_SIDE,
                   classify: bool = True) -> Template:
    """Adaptive geodesic-cone template for an identity word over Σ in SL(block)."""
    p = w.p
    block = tuple(block or range(1, p + 1))
    q = len(block)
    _check_sigma_word(w, block)
    if not evaluate(w).is_identity():
        raise ValueError("word does not evaluate to the identity")
    n = len(w)
    if n == 0:
        return empty_template(p, block)
    # chunks of exactly `scale` letters; the bottom side is padded with I
    t = min(max_side, max(2, _pow2_at_least(math.ceil(n / scale))))
    m = max(scale, math.ceil(n / t))
    chunks = [w.letters[m * x: m * (x + 1)] for x in range(t)]
    prefixes = [IntegerMatrix.identity(p)]
    for ch in chunks:
        g = prefixes[-1]
        for l in ch:
            g = g @ l.matrix(p)
        prefixes.append(g)
    # the cone closes at the height of the word's own span; beyond that box
    # f is constant and the sizing grows linearly
    width = math.ceil(n / m)
    cone = ConeFilling([_sub(g, block) for g in prefixes], t, width)
    reds: dict = {}

    def red(x, y):
        pt = cone(x, y)
        r = reds.get(id(pt))
        if r is None:
            r = reds[id(pt)] = siegel_reduce(pt)
        return r

    lip = 2 * c_sigma(q) * m

    def r_field(x, y):
        r0 = (float(np.linalg.norm(red(x, y).phi)) + R0_SLACK) / (2 * q * q) - C_PRIME
        far = max(0.0, x - width, y - width) / 2
        return max(1.0, r0 / (2 * lip), 1.0 + far)

    mesh = adaptive_mesh(t, SizingField(r_field, name="cone-sizing"))
    labels, phis = [], []
    ident = IntegerMatrix.identity(p)
    for x, y in mesh.vertices:
        if y == 0:
            labels.append(prefixes[x])
        elif x == 0 or x == t or y == t:
            labels.append(ident)
        else:
            labels.append(_embed(red(x, y).gamma, block, p))
        phis.append(red(x, y).phi)
    inverses = [g.inverse() for g in labels]
    bottom = sorted((k for k, v in enumerate(mesh.vertices) if v[1] == 0),
                    key=lambda k: mesh.vertices[k][0])
    edge_words, omegas = {}, {}
    for a, b in mesh.edges():
        (xa, ya), (xb, yb) = mesh.vertices[a], mesh.vertices[b]
        if ya == 0 and yb == 0:
            lo, hi = sorted((xa, xb))
            letters = w.letters[m * lo: m * hi]
            edge_words[(a, b)] = letters if xa < xb else tuple(l.inverse() for l in reversed(letters))
        else:
            h = inverses[a] @ labels[b]
            wd = omegas.get(h)
            if wd is None:
                wd = omegas[h] = omega(h).letters
            edge_words[(a, b)] = wd
    tpl = Template(p, block, t, m, w, list(mesh.vertices), labels, list(mesh.triangles),
                   [], bottom, edge_words, phis)
    tpl.stats = _stats(tpl, inverses)
    tpl.stats["triangles"] = len(mesh.triangles)
    if classify:
        tpl.classes = [classify_face(tpl, f) for f in tpl.faces]
        tpl.stats["classes"] = tpl.class_counts()
    return tpl


def _stats(tpl: Template, inverses=None) -> dict:
    inverses = inverses or [g.inverse() for g in tpl.labels]
    proxy: dict = {}
    psum = 0.0
    for f in tpl.faces:
        per = 0.0
        for a, b in zip(f, f[1:] + f[:1]):
            e = (min(a, b), max(a, b))
            if e not in proxy:
                proxy[e] = _proxy(inverses[e[0]] @ tpl.labels[e[1]])
            per += proxy[e]
        psum += per * per
    n = max(1, len(tpl.word))
    return {"faces": len(tpl.faces), "perimeter_sum": psum, "word_length": n,
            "perimeter_ratio": psum / (n * n)}


def face_word(tpl: Template, f) -> tuple:
    out = []
    for a, b in zip(f, f[1:] + f[:1]):
        out.extend(tpl.edge_word(a, b))
    return tuple(out)


def classify_face(tpl: Template, f) -> str:
    """Small, Parabolic(j) or Fallback; raises ClassificationFailed."""
    p, block = tpl.p, tpl.block
    q = len(block)
    g0 = tpl.labels[f[0]]
    rel = [_sub(g0.inverse() @ tpl.labels[k], block) for k in f[1:]]
    words = [tpl.edge_word(a, b) for a, b in zip(f, f[1:] + f[:1])]
    cuts = [j for j in range(1, q)
            if all(in_parabolic(h, j) for h in rel)
            and all(_letter_in_cut(l, block, j) for wd in words for l in wd)]
    allowed = [j for j in cuts if max(j, q - j) <= p - 2]
    lh = sum(letter_length(l, p) for wd in words for l in wd)
    ph = tpl.phis[f[0]]
    c = CUSP_GAP
    gaps = {j: (ph[j - 1] - ph[j]) / 2 - c for j in range(1, q)}
    cusp = [j for j in allowed if gaps[j] > 0 or lh > SMALL_TARGET]
    if cusp:
        return f"Parabolic({max(cusp, key=lambda j: gaps[j])})"
    if lh <= SMALL_BOUND:
        return "Small"
    if allowed:
        return f"Parabolic({max(allowed, key=lambda j: gaps[j])})"
    if cuts:
        return "Fallback"
    raise ClassificationFailed(f"face {f} has ℓ̂ = {lh} and no parabolic cut")


# filling ------------------------------------------------------------------------

def _inv(letters) -> tuple:
    return tuple(l.inverse() for l in reversed(letters))


class _Filler:
    def __init__(self, model: CostModel, scale: int, max_side: int):
        self.model = model
        self.scale = scale
        self.max_side = max_side
        self.memo: dict = {}
        self.stats = {"Small": [0, 0.0], "Parabolic": [0, 0.0], "Fallback": [0, 0.0]}
        self.templates = 0
        self.failed = 0

    # identity words in a block -------------------------------------------

    def identity_word(self, w: Word, block) -> FillingCertificate:
        if not w.letters:
            return Session(w, self.model).certificate()
        idx = {i for l in w.letters if l.kind != "D" for i in (l.i, l.j)}
        if not idx or len(block) == 1:
            sess = Session(w, self.model)
            if gather_diagonals(sess):
                raise NotIdentity("diagonal letters do not cancel")
            return sess.certificate()
        if len(idx) <= 2:
            try:
                return fill_rank2(w, self.model)
            except NotRank2:
                pass
        return self.block_word(w, block)

    def block_word(self, w: Word, block) -> FillingCertificate:
        """Expand shortcut letters inside the block, build a template, fill it."""
        sess = Session(w, self.model)
        key = ",".join(map(str, block))
        for k in range(len(w) - 1, -1, -1):
            if sess.letters[k].kind == "S":
                sess.apply("ShortEquiv", k, k + 1, "expand", (key,))
        tpl = build_template(sess.word(), block, self.scale, self.max_side)
        self.templates += 1
        sess.absorb(self.template(tpl), 0, replay=False)
        return sess.certificate()

    # one template ---------------------------------------------------------

    def template(self, tpl: Template) -> FillingCertificate:
        sess = Session(tpl.boundary_word(), self.model)
        if not tpl.faces:
            return sess.certificate()
        edge_faces: dict = {}
        for n, f in enumerate(tpl.faces):
            for a, b in zip(f, f[1:] + f[:1]):
                edge_faces.setdefault((min(a, b), max(a, b)), []).append(n)
        path = list(tpl.bottom)
        lens = [len(tpl.edge_word(a, b)) for a, b in zip(path, path[1:])]
        onpath = set(path)
        swept = [False] * len(tpl.faces)
        left = len(tpl.faces)
        hint = 0
        while left:
            step = self._next_face(tpl, path, onpath, edge_faces, swept, hint)
            if step is None:
                raise RuntimeError("shelling got stuck")
            k, n, case = step
            f = tpl.faces[n]
            off = sum(lens[:k])
            if case == "A":
                a, b = path[k], path[k + 1]
                c = next(v for v in f if v not in (a, b))
                u = tpl.edge_word(a, b)
                v1, v2 = tpl.edge_word(a, c), tpl.edge_word(c, b)
                self._face(sess, off, u, v1 + v2, tpl, n)
                path[k + 1:k + 1] = [c]
                onpath.add(c)
                lens[k:k + 1] = [len(v1), len(v2)]
            else:
                a, c, b = path[k], path[k + 1], path[k + 2]
                u = tpl.edge_word(a, c) + tpl.edge_word(c, b)
                v = tpl.edge_word(a, b)
                self._face(sess, off, u, v, tpl, n)
                onpath.discard(path.pop(k + 1))
                lens[k:k + 2] = [len(v)]
            swept[n] = True
            left -= 1
            hint = k
        if sess.letters:
            raise RuntimeError("template filling left a nonempty word")
        return sess.certificate()

    @staticmethod
    def _next_face(tpl, path, onpath, edge_faces, swept, hint=0):
        # scan from just before the last swept face; faces there are usually ready
        n_edges = len(path) - 1
        start = max(0, min(hint - 1, n_edges - 1))
        for k in list(range(start, n_edges)) + list(range(start)):
            a, b = path[k], path[k + 1]
            for n in edge_faces.get((min(a, b), max(a, b)), ()):
                if swept[n]:
                    continue
                f = tpl.faces[n]
                c = next(v for v in f if v not in (a, b))
                if c not in onpath:
                    return k, n, "A"
                if k + 2 < len(path) and path[k + 2] == c:
                    return k, n, "B"
        return None

    def _face(self, sess: Session, off: int, u: tuple, v: tuple, tpl: Template, n: int):
        cls = tpl.classes[n]
        before = len(sess.costs)
        if u != v:
            if cls == "Small":
                self._small(sess, off, u, v)
            elif cls == "Fallback":
                sess.apply("Fallback", off, off + len(u), "replace", (format_word(Word(v, sess.p)),))
            else:
                j = int(cls[len("Parabolic("):-1])
                cert = self.parabolic(Word(u + _inv(v), sess.p), tpl.block, j)
                if v:
                    sess.apply("FreeInsertDelete", off + len(u), off + len(u), "insert",
                               (format_word(Word(_inv(v), sess.p)),))
                sess.absorb(cert, off, replay=False)
        key = "Parabolic" if cls.startswith("Parabolic") else cls
        self.stats[key][0] += 1
        self.stats[key][1] += sum(sess.costs[before:])

    def _small(self, sess: Session, off: int, u: tuple, v: tuple):
        p = sess.p
        if p == 3 and len(u) + len(v) <= ORACLE_LENGTH and all(l.kind != "S" for l in u + v):
            cert = self.memo.get((u, v))
            if cert is None:
                from .oracle import DepthExceeded, oracle_certificate
                try:
                    cert = oracle_certificate(Word(u + _inv(v), p), self.model)
                except DepthExceeded:
                    cert = False
                self.memo[(u, v)] = cert
            if cert:
                if v:
                    sess.apply("FreeInsertDelete", off + len(u), off + len(u), "insert",
                               (format_word(Word(_inv(v), p)),))
                sess.absorb(cert, off, replay=False)
                return
        sess.apply("BoundedRelation", off, off + len(u), "replace", (format_word(Word(v, p)),))

    # parabolic faces -------------------------------------------------------

    def parabolic(self, X: Word, block, j: int) -> FillingCertificate:
        part = _partition(X.p, block, j)
        projections, cert = parabolic_split(X, part, self.model)
        sess = Session(X, self.model)
        sess.absorb(cert, 0, replay=False)
        for proj, blk in zip(projections, part.blocks):
            if proj.letters:
                sess.absorb(self.identity_word(proj, blk), 0, replay=False)
        if sess.letters:
            raise RuntimeError("parabolic face left a residual word")
        return sess.certificate()


def fill_template(tpl: Template, model: CostModel = DEFAULT_MODEL,
                  scale: int = SCALE, max_side: int = MAX_SIDE) -> FillingCertificate:
    """Certificate reducing the template's boundary word to ε, face by face."""
    filler = _Filler(model, scale, max_side)
    cert = filler.template(tpl)
    cert.breakdown = _breakdown(filler, tpl)
    return cert


def _breakdown(filler: _Filler, tpl: Template | None) -> dict:
    out = {f"{k}_faces": v[0] for k, v in filler.stats.items()}
    out.update({f"{k}_cost": v[1] for k, v in filler.stats.items()})
    total = sum(v[0] for v in filler.stats.values())
    out["fallback_fraction"] = filler.stats["Fallback"][0] / total if total else 0.0
    out["sub_templates"] = filler.templates
    if tpl is not None:
        out["top_faces"] = len(tpl.faces)
    return out


def fill_word(w: Word, model: CostModel = DEFAULT_MODEL, scale: int = SCALE,
              max_side: int = MAX_SIDE) -> FillingCertificate:
    """Fill an identity word over Σ̂ in SL(p): expand, template, fill."""
    filler = _Filler(model, scale, max_side)
    cert = filler.block_word(w, tuple(range(1, w.p + 1)))
    cert.breakdown = _breakdown(filler, None)
    cert.breakdown["lhat"] = shortcut_length(w)
    return cert


def fill_parabolic_word(w: Word, j: int, model: CostModel = DEFAULT_MODEL,
                        scale: int = SCALE, max_side: int = MAX_SIDE) -> FillingCertificate:
    """Fill an identity word in U(j, p−j) by splitting and recursing."""
    filler = _Filler(model, scale, max_side)
    cert = filler.parabolic(w, tuple(range(1, w.p + 1)), j)
    cert.breakdown = _breakdown(filler, None)
    cert.breakdown["lhat"] = shortcut_length(w)
    return cert
