"""The moment semigroup of the free unitary Brownian motion.

The k-th moment ``m_k(t)`` of the semigroup element at time t satisfies the
closed hierarchy

    m_k' = -(k/2) m_k - (k/2) * sum_{j=1}^{k-1} m_j m_{k-j}

with ``m_k(0) = 1``.  Substituting ``m_k = exp(-k t/2) p_k`` removes the
linear term and ``p_k`` becomes a polynomial with rational coefficients,
integrated exactly here.  Low orders: ``p_1 = 1``, ``p_2 = 1 - t``,
``p_3 = 1 - 3t + 3t^2/2``.

``state_at(t)`` wraps the moments as a tracial state on words over the
exponents +-1 (the element is unitary, so a word's moment depends only on
its net power), which is the marginal attached to a face of area t by the
holonomy field.  ``check_levy_axioms`` verifies the semigroup property
under the free product, the identity at t=0, norm bounds, continuity and
positivity; the reference state entering the stationarity statement is
read as the ambient expectation of the target probability space.
"""

from __future__ import annotations

from fractions import Fraction
from math import exp

import numpy as np

from .freeprob import State, product_state

__all__ = [
    "KMAX",
    "fubm_polynomial",
    "fubm_moments",
    "fubm_moment",
    "MomentVector",
    "Semigroup",
    "FREE_UNITARY_N1",
    "state_at",
    "LevyAxiomReport",
    "check_levy_axioms",
]

KMAX = 20

_POLYS = [(Fraction(1),), (Fraction(1),)]  # p_0 = p_1 = 1


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return out


def _extend_polys(kmax):
    while len(_POLYS) <= kmax:
        k = len(_POLYS)
        deriv = [Fraction(0)]
        for j in range(1, k):
            prod = _poly_mul(_POLYS[j], _POLYS[k - j])
            if len(prod) > len(deriv):
                deriv += [Fraction(0)] * (len(prod) - len(deriv))
            for i, c in enumerate(prod):
                deriv[i] += c
        half_k = Fraction(k, 2)
        poly = [Fraction(1)] + [-half_k * c / (i + 1) for i, c in enumerate(deriv)]
        while len(poly) > 1 and poly[-1] == 0:
            poly.pop()
        _POLYS.append(tuple(poly))


def fubm_polynomial(k):
    """Coefficients (constant first) of ``p_k``, exact rationals."""
    if k < 0 or k > KMAX:
        raise ValueError(f"moment order must be between 0 and {KMAX}, got {k}")
    _extend_polys(k)
    return _POLYS[k]


def fubm_moment(t, k):
    """``m_k(t)`` as a float: exact polynomial value times ``exp(-k t/2)``."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if k < 0:
        k = -k
    poly = fubm_polynomial(k)
    tq = Fraction(t)
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * tq + c
    return float(acc) * exp(-k * float(t) / 2)


class MomentVector:
    """Moments ``m_0 .. m_kmax`` of one semigroup element at a fixed time."""

    def __init__(self, t, values):
        self.t = t
        self.values = list(values)

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __repr__(self):
        return f"MomentVector(t={self.t}, kmax={len(self.values) - 1})"


def fubm_moments(t, kmax):
    """The vector ``(m_0(t), ..., m_kmax(t))``."""
    if kmax < 1 or kmax > KMAX:
        raise ValueError(f"kmax must be between 1 and {KMAX}, got {kmax}")
    return MomentVector(t, [1.0] + [fubm_moment(t, k) for k in range(1, kmax + 1)])


class Semigroup:
    """A marginal semigroup: the exact n=1 kind, or an MC-backed block kind.

    Only ``free_unitary_n1`` admits exact evaluation; the other kinds carry
    the matrix size N, dimension n and (for the rectangular kind) the ratio
    vector r, and defer all values to the sampler.
    """

    KINDS = ("free_unitary_n1", "classical_mc", "block_mc", "rectangular_mc")

    def __init__(self, kind="free_unitary_n1", n=1, r=None, N=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown semigroup kind {kind!r}")
        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        if kind == "free_unitary_n1" and n != 1:
            raise ValueError("the exact kind is one-dimensional")
        if kind == "rectangular_mc":
            if r is None or abs(sum(r) - 1.0) > 1e-12:
                raise ValueError(f"rectangular kind needs ratios summing to 1, got {r}")
        self.kind = kind
        self.n = n
        self.r = None if r is None else tuple(r)
        self.N = N

    @property
    def exact(self):
        return self.kind == "free_unitary_n1"

    def __repr__(self):
        extra = "".join(
            f", {k}={v!r}" for k, v in (("n", self.n), ("r", self.r), ("N", self.N))
            if v not in (None, 1)
        )
        return f"Semigroup({self.kind!r}{extra})"


FREE_UNITARY_N1 = Semigroup("free_unitary_n1")


def state_at(sg, t):
    """The semigroup element at time t as a state on words over exponents +-1.

    For the exact kind a word's value depends only on its net power.  For
    MC-backed kinds the returned state refuses exact evaluation; the
    ``estimator`` attribute carries what the sampler needs.
    """
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    if not isinstance(sg, Semigroup):
        raise TypeError(f"expected a Semigroup, got {type(sg).__name__}")
    if not sg.exact:
        def refuse(word):
            raise RuntimeError("exact evaluation unavailable, use mc")

        st = State(refuse, name=f"{sg.kind}(t={t})", tracial=True)
        st.estimator = {"kind": sg.kind, "n": sg.n, "r": sg.r, "N": sg.N, "time": t}
        return st

    cache = {}

    def mom(word):
        net = abs(sum(word))
        if net > KMAX:
            raise ValueError(f"word net power {net} exceeds supported order {KMAX}")
        if net not in cache:
            cache[net] = fubm_moment(t, net)
        return cache[net]

    return State(mom, name=f"fubm(t={t})", tracial=True)


class LevyAxiomReport:
    """Outcome of the semigroup/state checks, one named entry per axiom."""

    def __init__(self):
        self.results = {}
        self.note = (
            "stationarity reference state read as the ambient expectation "
            "of the target probability space"
        )

    def record(self, name, ok, detail=""):
        self.results[name] = (bool(ok), detail)

    @property
    def ok(self):
        return all(v for v, _ in self.results.values())

    def lines(self):
        out = []
        for name, (ok, detail) in self.results.items():
            line = f"{name}: {'PASS' if ok else 'FAIL'}"
            if detail:
                line += f" ({detail})"
            out.append(line)
        return out


def check_levy_axioms(sg=None, kmax=6, times=(0.25, 0.5, 1.0, 2.0), tol=1e-9):
    """Verify the defining properties of the moment semigroup.

    Checks: identity at t=0; the free-convolution semigroup law (moments of
    a product of two freely independent elements at times s and t match the
    element at s+t); unit norm bounds; positivity of the Toeplitz moment
    matrix; continuity at 0 with the exact derivative ``-k^2/2``.
    Stationarity needs no separate check: the state depends on the time
    increment alone by construction.
    """
    if sg is None:
        sg = FREE_UNITARY_N1
    if not sg.exact:
        raise ValueError("axiom checks need the exact kind; MC-backed kinds have no exact values")
    report = LevyAxiomReport()

    ok = all(fubm_moment(0, k) == 1.0 for k in range(1, kmax + 1))
    report.record("identity_at_zero", ok)

    worst = 0.0
    for s in times:
        for t in times:
            ps = product_state([state_at(sg, s), state_at(sg, t)], "free")
            for k in range(1, kmax + 1):
                word = ((0, 1), (1, 1)) * k
                got = ps.moment(word)
                want = fubm_moment(s + t, k)
                worst = max(worst, abs(got - want))
    report.record("free_convolution_semigroup", worst <= tol, f"max deviation {worst:.2e}")

    bound = max(
        abs(fubm_moment(t, k)) for t in list(times) + [5.0, 10.0] for k in range(1, kmax + 1)
    )
    report.record("moments_bounded_by_one", bound <= 1 + 1e-12, f"max |m_k| {bound:.6f}")

    psd_ok = True
    worst_eig = np.inf
    size = min(kmax, 4)
    for t in times:
        m = [fubm_moment(t, k) for k in range(0, 2 * size + 1)]
        toep = np.array([[m[abs(a - b)] for b in range(size + 1)] for a in range(size + 1)])
        eig = np.linalg.eigvalsh(toep).min()
        worst_eig = min(worst_eig, eig)
        if eig < -1e-10:
            psd_ok = False
    report.record("toeplitz_positivity", psd_ok, f"min eigenvalue {worst_eig:.2e}")

    cont_ok = True
    for k in range(1, kmax + 1):
        for h in (1e-4, 1e-5):
            drift = (fubm_moment(h, k) - 1.0) / h
            if abs(drift + k * k / 2) > 50 * h * k**4 + 1e-8:
                cont_ok = False
    report.record("continuity_at_zero", cont_ok)

    return report
