"""Geometry of E = SL(p;R)/SO(p).

A point is stored by a basis matrix g (rows span the lattice Z^p g) and
its Gram matrix g g^T.  Right multiplication by SO(p) does not change the
point.  Γ = SL(p;Z) acts on the left.  Deep in the cusp the Gram matrix
in double precision cannot resolve the short directions, so reduction
works on the basis, converted exactly to integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import IntegerMatrix, determinant

EPS_S = 0.45
LLL_DELTA = Fraction(999, 1000)
ENUM_BUDGET = 10_000_000
C_PHI = 1.0          # c_φ = c″, calibrated on constructed points
C_WITNESS_SLACK = 0.0


class Singular(ValueError):
    pass


class NotPositiveDefinite(ValueError):
    pass


class ReductionFailed(RuntimeError):
    pass


class EnumerationBudgetExceeded(RuntimeError):
    pass


def c_v(p: int, eps_s: float = EPS_S) -> float:
    """c_V = log(√p · ε_S^-p)."""
    return math.log(math.sqrt(p)) - p * math.log(eps_s)


def witness_constant(p: int, eps_s: float = EPS_S) -> float:
    """c = c_φ + c_V used in the parabolic neighbourhood test."""
    return C_PHI + c_v(p, eps_s) + C_WITNESS_SLACK


@dataclass(frozen=True, eq=False)
class SymmetricPoint:
    basis: np.ndarray
    exact: tuple | None = None   # optional rows of Fractions, same point

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    @property
    def gram(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def translate(self, gamma: IntegerMatrix) -> "SymmetricPoint":
        """γ·x."""
        basis = np.array(gamma.rows, dtype=float) @ self.basis
        if self.exact is None:
            return SymmetricPoint(basis)
        ex = tuple(tuple(sum(r[k] * self.exact[k][j] for k in range(self.p)) for j in range(self.p))
                   for r in gamma.rows)
        return SymmetricPoint(_float_rows(ex), ex)

    def to_dict(self) -> dict:
        return {"basis": self.basis.tolist(), "gram": self.gram.tolist()}


def _float_rows(ex) -> np.ndarray:
    return np.array([[float(v) for v in r] for r in ex])


def point_of(g, tol: float = 1e-6) -> SymmetricPoint:
    if isinstance(g, IntegerMatrix):
        ex = tuple(tuple(Fraction(v) for v in r) for r in g.rows)
        return SymmetricPoint(_float_rows(ex), ex)
    m = np.array(g, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise Singular("need a square matrix")
    det = np.linalg.det(m)
    if not abs(det - 1) <= tol * max(1.0, abs(det)):
        raise Singular(f"determinant {det} is not 1")
    return SymmetricPoint(m)


def point_of_gram(gram) -> SymmetricPoint:
    gm = np.array(gram, dtype=float)
    try:
        c = np.linalg.cholesky(gm)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(str(e)) from None
    return SymmetricPoint(c)


def _relative(x: SymmetricPoint, y: SymmetricPoint):
    if x.p != y.p:
        raise ValueError("points live in different dimensions")
    h = np.linalg.solve(x.basis, y.basis)
    try:
        u, s, _ = np.linalg.svd(h)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(str(e)) from None
    if np.any(s <= 0):
        raise NotPositiveDefinite("degenerate basis")
    return u, s


def dist_E(x: SymmetricPoint, y: SymmetricPoint) -> float:
    """½ ‖log spectrum of gram_x^-1 gram_y‖₂ = ‖log σ(g_x^-1 g_y)‖₂."""
    _, s = _relative(x, y)
    return float(np.linalg.norm(np.log(s)))


HP_THRESHOLD = 2 ** 12   # relative entries above this switch geodesics to high precision


def _frac_inverse(rows):
    n = len(rows)
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [v * inv for v in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [v - f * w for v, w in zip(a[r], a[c])]
    return [r[n:] for r in a]


def _geodesic_hp(x: SymmetricPoint, y: SymmetricPoint, top: float):
    """Geodesic through an mpmath SVD of the exact relative matrix; points
    keep an exact dyadic basis so that reduction stays reliable."""
    import mpmath
    n = x.p
    h = [[sum(a * b for a, b in zip(r, col)) for col in zip(*y.exact)] for r in _frac_inverse(x.exact)]
    prec = 64 + 4 * (int(math.log2(top)) + 1)
    with mpmath.workprec(prec):
        H = mpmath.matrix([[mpmath.mpf(v.numerator) / v.denominator for v in r] for r in h])
        U, S, _ = mpmath.svd_r(H)
        X = mpmath.matrix([[mpmath.mpf(v.numerator) / v.denominator for v in r] for r in x.exact])
        XU = X * U

    def at(t: float) -> SymmetricPoint:
        with mpmath.workprec(prec):
            B = XU * mpmath.diag([S[k] ** mpmath.mpf(t) for k in range(n)])
            ex = tuple(tuple(_mpf_fraction(B[i, j]) for j in range(n)) for i in range(n))
        return SymmetricPoint(_float_rows(ex), ex)

    return at


def _mpf_fraction(v) -> Fraction:
    man, exp = v.man_exp
    man = abs(int(man)) * (-1 if v < 0 else 1)
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def geodesic_path(x: SymmetricPoint, y: SymmetricPoint):
    """t -> geodesic(x, y, t), sharing one decomposition across all t."""
    if x.exact is not None and y.exact is not None:
        top = max(max(abs(v) for v in r) for r in x.exact + y.exact)
        if top > HP_THRESHOLD:
            return _geodesic_hp(x, y, float(top))
    u, s = _relative(x, y)
    xu = x.basis @ u
    return lambda t: SymmetricPoint(xu @ np.diag(s ** t))


def geodesic(x: SymmetricPoint, y: SymmetricPoint, t: float) -> SymmetricPoint:
    """Constant-speed geodesic: with g_x^-1 g_y = U Σ V^T the curve is [g_x U Σ^t]."""
    return geodesic_path(x, y)(t)


@dataclass(frozen=True, eq=False)
class IwasawaTriple:
    n: np.ndarray
    a: np.ndarray


def iwasawa(g) -> IwasawaTriple:
    """g = n a k by orthogonalizing the rows from the last one upward."""
    m = np.array(g.basis if isinstance(g, SymmetricPoint) else g, dtype=float)
    if abs(np.linalg.det(m)) < 1e-300:
        raise Singular("singular matrix")
    p = m.shape[0]
    n = np.eye(p)
    a = np.zeros(p)
    ks = [None] * p
    for j in range(p - 1, -1, -1):
        v = m[j].copy()
        for i in range(j + 1, p):
            c = v @ ks[i]
            n[j, i] = c / a[i]
            v = v - c * ks[i]
        a[j] = np.linalg.norm(v)
        if a[j] == 0:
            raise Singular("dependent rows")
        ks[j] = v / a[j]
    return IwasawaTriple(n, a)


# exact lattice reduction ---------------------------------------------------

def _exact_rows(x: SymmetricPoint):
    """The basis as an integer matrix times 2^-e (or over a common
    denominator), exactly; the float basis is itself a dyadic matrix."""
    if x.exact is not None:
        fr = [list(r) for r in x.exact]
    else:
        fr = [[Fraction(float(v)) for v in row] for row in x.basis]
    den = 1
    for row in fr:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    return [[int(v * den) for v in row] for row in fr], den


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def lll_integral(basis, delta: Fraction = LLL_DELTA):
    """Integral LLL with size reduction.

    Returns (reduced basis, unimodular transform H with H·basis = reduced,
    d, lam) where d[i] = Π_{j<=i} |b*_j|² and lam[i][j] = d[j] μ_ij.
    """
    b = [list(r) for r in basis]
    n = len(b)
    H = [[int(i == j) for j in range(n)] for i in range(n)]
    d = [0] * (n + 1)   # d[0] = 1, d[i] for i = 1..n
    lam = [[0] * n for _ in range(n)]
    d[0] = 1
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise Singular("zero basis vector")
    num, den = delta.numerator, delta.denominator

    def redi(k, l):
        # indices are 0-based vectors, d is 1-based
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            H[k] = [x - q * y for x, y in zip(H[k], H[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swapi(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        H[k], H[k - 1] = H[k - 1], H[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k + 1]
        d[k] = B

    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                raise Singular("dependent basis vectors")
        redi(k, k - 1)
        lm = lam[k][k - 1]
        if den * (d[k + 1] * d[k - 1] + lm * lm) < num * d[k] * d[k]:
            swapi(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                redi(k, l)
            k += 1
    return b, H, d, lam


@dataclass(frozen=True, eq=False)
class SiegelReduction:
    gamma: IntegerMatrix
    triple: IwasawaTriple
    phi: np.ndarray
    eps_s: float

    def to_dict(self) -> dict:
        return {"gamma": self.gamma.tolist(), "n": self.triple.n.tolist(),
                "a": self.triple.a.tolist(), "phi": self.phi.tolist(), "eps_S": self.eps_s}


def _log_ratio(num: int, den: int) -> float:
    return math.log(num) - math.log(den)


def siegel_reduce(x: SymmetricPoint, eps_s: float = EPS_S, tol: float = 1e-9,
                  delta: Fraction | None = None) -> SiegelReduction:
    """γ = ρ(x) with x ∈ γ S, by LLL on the reversed row basis.

    In dimension 2 the default δ is 1, which is Lagrange-Gauss reduction
    and lands in the classical fundamental domain.
    """
    p = x.p
    if delta is None:
        delta = Fraction(1) if p == 2 else LLL_DELTA
    ints, den = _exact_rows(x)
    rev = ints[::-1]
    _, H, d, lam = lll_integral(rev, delta)
    # H acts on reversed rows: reduced_rev = H rev; reduced = J H J · ints
    T = [row[::-1] for row in H[::-1]]
    # canonical signs: first nonzero entry of each row positive, last row fixes det
    sg = []
    for r in T:
        lead = next(v for v in r if v != 0)
        sg.append(1 if lead > 0 else -1)
        r[:] = [sg[-1] * v for v in r]
    det = determinant(T)
    if det == -1:
        T[p - 1] = [-v for v in T[p - 1]]
        sg[p - 1] = -sg[p - 1]
    elif det != 1:
        raise ReductionFailed("transform is not unimodular")
    gamma = IntegerMatrix(T).inverse()
    # Iwasawa data from the exact Gram-Schmidt of the reversed basis:
    # reversed index m <-> original index p-1-m
    logs = [0.5 * _log_ratio(d[m + 1], d[m]) - math.log(den) for m in range(p)]
    phi = np.array(logs[::-1])
    phi = phi - phi.mean()
    a = np.exp(phi)
    n = np.eye(p)
    for m in range(p):
        for l in range(m):
            n[p - 1 - m, p - 1 - l] = float(Fraction(lam[m][l], d[l + 1]))
    # row sign flips conjugate n by the sign matrix
    n = n * np.outer(sg, sg)
    triple = IwasawaTriple(n, a)
    red = SiegelReduction(gamma, triple, phi, eps_s)
    if not in_siegel(triple, eps_s, tol):
        raise ReductionFailed("reduced point is outside the Siegel set")
    return red


def in_siegel(triple: IwasawaTriple, eps_s: float = EPS_S, tol: float = 1e-9) -> bool:
    n, a = triple.n, triple.a
    p = len(a)
    for i in range(p):
        for j in range(i + 1, p):
            if abs(n[i, j]) > 0.5 + tol:
                return False
    for i in range(p - 1):
        if a[i] < eps_s * a[i + 1] * (1 - tol):
            return False
    return True


def rho(x: SymmetricPoint) -> IntegerMatrix:
    return siegel_reduce(x).gamma


def phi(x: SymmetricPoint) -> np.ndarray:
    return siegel_reduce(x).phi


def siegel_point(gamma: IntegerMatrix, n, a) -> SymmetricPoint:
    """The point [γ n a], kept exact so that deep cusp points stay resolvable."""
    p = gamma.p
    na = [[Fraction(float(n[i][j])) * Fraction(float(a[j])) for j in range(p)] for i in range(p)]
    ex = tuple(tuple(sum(gamma.rows[i][k] * na[k][j] for k in range(p)) for j in range(p))
               for i in range(p))
    return SymmetricPoint(_float_rows(ex), ex)


# short vectors -------------------------------------------------------------

def _hnf_rows(vectors, p):
    """Row basis (Hermite-style echelon form) of the subgroup generated."""
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    col = 0
    while rows and col < p:
        rows = [r for r in rows if any(r)]
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r[:] = [x - q * y for x, y in zip(r, piv)]
            nz = [r for r in nz if r[col] != 0]
        piv = nz[0]
        if piv[col] < 0:
            piv[:] = [-x for x in piv]
        basis.append(piv)
        rows = [r for r in rows if r is not piv]
        col += 1
    # reduce entries above pivots
    for k, b in enumerate(basis):
        c = next(i for i, v in enumerate(b) if v)
        for u in basis[:k]:
            q = u[c] // b[c]
            u[:] = [x - q * y for x, y in zip(u, b)]
    return [tuple(b) for b in basis]


def short_vectors(x: SymmetricPoint, r: float, budget: int = ENUM_BUDGET, red: SiegelReduction | None = None):
    """All nonzero v ∈ Z^p with ‖v g‖ <= r, by sphere enumeration in reduced coordinates."""
    red = red or siegel_reduce(x)
    n, a = red.triple.n, red.triple.a
    p = len(a)
    out = []
    nodes = [0]
    w = [0] * p

    def rec(j, rem):
        # coordinate j of w n a depends on w_0..w_j
        nodes[0] += 1
        if nodes[0] > budget:
            raise EnumerationBudgetExceeded(f"more than {budget} enumeration nodes")
        if j == p:
            if any(w):
                out.append(tuple(w))
            return
        c = sum(w[i] * n[i, j] for i in range(j))
        rad = math.sqrt(max(rem, 0.0)) / a[j]
        lo, hi = math.ceil(-c - rad - 1e-12), math.floor(-c + rad + 1e-12)
        for v in range(lo, hi + 1):
            comp = (c + v) * a[j]
            left = rem - comp * comp
            if left < -1e-9 * r * r:
                continue
            w[j] = v
            rec(j + 1, left)
        w[j] = 0

    rec(0, r * r)
    gi = red.gamma.inverse().rows
    vecs = []
    for wv in out:
        vecs.append(tuple(sum(wv[i] * gi[i][j] for i in range(p)) for j in range(p)))
    return vecs, out


def short_vector_space(x: SymmetricPoint, r: float, budget: int = ENUM_BUDGET):
    """Basis of V(x, r), the subgroup generated by lattice vectors of length <= r."""
    if r <= 0:
        raise ValueError("radius must be positive")
    vecs, _ = short_vectors(x, r, budget)
    return _hnf_rows(vecs, x.p)


def flag_subspace(gamma: IntegerMatrix, k: int):
    """Z_k γ^-1 as an echelon basis."""
    gi = gamma.inverse().rows
    return _hnf_rows([gi[i] for i in range(k, gamma.p)], gamma.p)


def flag_window(red: SiegelReduction, k: int, eps_s: float = EPS_S):
    """(r_low, r_high) with V(x, r) = Z_k γ^-1 for r strictly inside; k is 1-based."""
    a = red.triple.a
    cv = c_v(len(a), eps_s)
    return math.exp(cv) * a[k], math.exp(-cv) * a[k - 1]


def parabolic_witness(x: SymmetricPoint, y: SymmetricPoint, gx: IntegerMatrix | None = None,
                      gy: IntegerMatrix | None = None, c: float | None = None):
    """A cut j with d(x, y) < (φ_j − φ_{j+1})/2 − c, after checking the block
    test γx^-1 γy ∈ U(j, p−j) exactly; None when no gap is wide enough."""
    from .core import in_parabolic
    rx = siegel_reduce(x)
    gx = gx or rx.gamma
    gy = gy or siegel_reduce(y).gamma
    p = x.p
    c = witness_constant(p) if c is None else c
    d = dist_E(x, y)
    ph = rx.phi
    best = None
    for j in range(1, p):
        gap = (ph[j - 1] - ph[j]) / 2 - c
        if d < gap and (best is None or gap > best[0]):
            best = (gap, j)
    if best is None:
        return None
    j = best[1]
    if not in_parabolic(gx.inverse() @ gy, j):
        raise AssertionError(f"block test failed for cut {j}")
    return j
