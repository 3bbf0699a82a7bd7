"""Norms, energy budgets and the a priori bound monitors.

Quadratic quantities use Parseval.  Quartic and sextic integrands are
evaluated on a grid refined by ``OVERSAMPLE``; for dealiased fields this
makes the uniform-grid rule exact, so ``l4_*``, ``l6_u`` and the
dissipation terms carry only rounding error.  ``l3_u`` is not a polynomial
integrand and is only accurate to quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, field, fields

import numpy as np

from . import spectral as sp
from .fields import elsasser

OVERSAMPLE = 2


@dataclass(frozen=True)
class NormRecord:
    """One sample of the monitored norms of (u_H, b_H).

    ``l2_*``, ``l2_dz_*``, ``h1_*`` and ``h2_*`` are squared L2 norms of the
    field, its z-derivative, its gradient and its Laplacian.  ``l4_*`` are
    fourth powers of L4 norms, ``l3_u`` and ``l6_u`` plain norms, and
    ``diss_*`` the integrals of |A|^2 |grad A|^2.
    """

    time: float = 0.0
    l2_u: float = 0.0
    l2_b: float = 0.0
    l4_A: float = 0.0
    l4_Astar: float = 0.0
    l2_dz_u: float = 0.0
    l2_dz_b: float = 0.0
    h1_u: float = 0.0
    h1_b: float = 0.0
    h2_u: float = 0.0
    h2_b: float = 0.0
    l3_u: float = 0.0
    l6_u: float = 0.0
    diss_A: float = 0.0
    diss_Astar: float = 0.0

    def as_tuple(self):
        return astuple(self)

    @property
    def energy(self):
        return self.l2_u + self.l2_b

    @property
    def enstrophy(self):
        return self.h1_u + self.h1_b


RECORD_FIELDS = tuple(f.name for f in fields(NormRecord))


# -- Parseval helpers -----------------------------------------------------------


def _weighted(grid, c, symbol):
    return grid.volume * float(np.sum(np.abs(c) ** 2 * symbol * grid.hweights))


def l2_norm2(grid, c):
    return sp.norm2(grid, c)


def grad_norm2(grid, c):
    """||grad f||_2^2 summed over the components of ``c``."""
    return _weighted(grid, c, grid.dkx**2 + grid.dky**2 + grid.dkz**2)


def dz_norm2(grid, c):
    return _weighted(grid, c, grid.dkz**2)


def lap_norm2(grid, c):
    return _weighted(grid, c, grid.k2**2)


def h1_norm2(grid, c):
    """Full H1 norm squared, ||f||^2 + ||grad f||^2."""
    return l2_norm2(grid, c) + grad_norm2(grid, c)


def _grad_samples(grid, c):
    """Physical gradients on the oversampled grid, shape (ncomp, 3, ...)."""
    g = sp.gradient(grid, c)
    return sp.oversampled_samples(grid, g, OVERSAMPLE)[0]


def _samples(grid, c):
    return sp.oversampled_samples(grid, c, OVERSAMPLE)


# -- records --------------------------------------------------------------------


def sobolev_norms(state, quartic=True):
    """NormRecord of the horizontal fields of a PEM or SMHD state.

    With ``quartic=False`` the oversampled quantities are skipped and set to
    NaN, which is much cheaper when only the energy budget is needed.
    """
    g = state.grid
    u, b = state.horizontal()
    rec = dict(
        time=state.time,
        l2_u=l2_norm2(g, u),
        l2_b=l2_norm2(g, b),
        l2_dz_u=dz_norm2(g, u),
        l2_dz_b=dz_norm2(g, b),
        h1_u=grad_norm2(g, u),
        h1_b=grad_norm2(g, b),
        h2_u=lap_norm2(g, u),
        h2_b=lap_norm2(g, b),
    )
    if not quartic:
        nan = float("nan")
        rec.update(l4_A=nan, l4_Astar=nan, l3_u=nan, l6_u=nan, diss_A=nan, diss_Astar=nan)
        return NormRecord(**rec)
    U, fine = _samples(g, u)
    B, _ = _samples(g, b)
    GU = _grad_samples(g, u)
    GB = _grad_samples(g, b)
    A, As = elsasser(U, B)
    GA, GAs = elsasser(GU, GB)
    mod_u = np.sqrt(np.sum(U**2, axis=0))
    a2 = np.sum(A**2, axis=0)
    as2 = np.sum(As**2, axis=0)
    rec.update(
        l4_A=sp.integrate(fine, a2**2),
        l4_Astar=sp.integrate(fine, as2**2),
        l3_u=sp.integrate(fine, mod_u**3) ** (1 / 3),
        l6_u=sp.integrate(fine, mod_u**6) ** (1 / 6),
        diss_A=sp.integrate(fine, a2 * np.sum(GA**2, axis=(0, 1))),
        diss_Astar=sp.integrate(fine, as2 * np.sum(GAs**2, axis=(0, 1))),
    )
    return NormRecord(**rec)


def holder_gap(record):
    """||u||_2^(1/2) ||u||_6^(1/2) - ||u||_3; nonnegative up to rounding."""
    return math.sqrt(math.sqrt(record.l2_u) * record.l6_u) - record.l3_u


def weighted_energy(state):
    """Energy of the scaled system: |u_H|^2 + eps^2 |u_3|^2 plus the same for b."""
    g, e2 = state.grid, state.eps**2
    return (
        l2_norm2(g, state.u[:2])
        + e2 * l2_norm2(g, state.u[2])
        + l2_norm2(g, state.b[:2])
        + e2 * l2_norm2(g, state.b[2])
    )


def weighted_dissipation(state):
    """Dissipation rate matching :func:`weighted_energy` (without the factor 2)."""
    g, e2 = state.grid, state.eps**2
    return (
        grad_norm2(g, state.u[:2])
        + e2 * grad_norm2(g, state.u[2])
        + grad_norm2(g, state.b[:2])
        + e2 * grad_norm2(g, state.b[2])
    )


# -- energy budget and decay ----------------------------------------------------


QUADRATURE_RULES = {"trapezoid": 2, "lagrange4": 4, "lagrange6": 6}


def _interval_weights(nodes, a):
    """Weights of the Lagrange interpolant through ``nodes`` integrated over [a, a + 1]."""
    P = np.polynomial.polynomial
    w = []
    for j, sj in enumerate(nodes):
        others = [sk for k, sk in enumerate(nodes) if k != j]
        coef = P.polyfromroots(others) / np.prod([sj - sk for sk in others])
        prim = P.polyint(coef)
        w.append(P.polyval(a + 1, prim) - P.polyval(a, prim))
    return np.array(w)


def cumulative_integral(f, h, rule="trapezoid"):
    """Running integral of uniformly sampled ``f`` with step ``h``.

    ``lagrange4`` and ``lagrange6`` integrate, on every interval, the
    interpolating polynomial through the 4 or 6 nearest samples (shifted
    one-sided near the ends), giving global order 4 or 6.  They fall back
    to the trapezoid when there are too few samples.
    """
    try:
        order = QUADRATURE_RULES[rule]
    except KeyError:
        raise ValueError(f"unknown quadrature rule {rule!r}") from None
    f = np.asarray(f, dtype=float)
    n = f.size
    out = np.zeros_like(f)
    if n < 2:
        return out
    if order == 2 or n < order:
        out[1:] = np.cumsum(0.5 * h * (f[1:] + f[:-1]))
        return out
    half = order // 2
    pieces = np.empty(n - 1)
    cache = {}
    for i in range(n - 1):
        start = min(max(i - half + 1, 0), n - order)
        key = i - start
        if key not in cache:
            cache[key] = _interval_weights(np.arange(order), key)
        pieces[i] = h * cache[key] @ f[start : start + order]
    out[1:] = np.cumsum(pieces)
    return out


def _uniform_step(times):
    t = np.asarray(times, dtype=float)
    steps = np.diff(t)
    h = float(np.mean(steps))
    if not np.allclose(steps, h, rtol=1e-6, atol=1e-12 * max(1.0, abs(t[-1]))):
        raise ValueError("history must be uniformly sampled in time")
    return h


def energy_identity_residual(history, rule="trapezoid"):
    """max_t |E(t) + 2 int_0^t D - E(0)| / E(0) for E = |u|^2 + |b|^2, D = |grad u|^2 + |grad b|^2."""
    if len(history) < 3:
        raise ValueError("energy_identity_residual needs at least three records")
    times = [r.time for r in history]
    h = _uniform_step(times)
    E = np.array([r.energy for r in history])
    D = np.array([r.enstrophy for r in history])
    if E[0] == 0:
        return 0.0 if np.all(E == 0) and np.all(D == 0) else math.inf
    lhs = E + 2 * cumulative_integral(D, h, rule)
    return float(np.max(np.abs(lhs - E[0])) / E[0])


def decay_rate_fit(times, values):
    """Negated least-squares slope of log(value) against time."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 2 or t.size != v.size:
        raise ValueError("need at least two (time, value) pairs")
    if np.any(v <= 0):
        raise ValueError("decay_rate_fit needs positive values")
    slope = np.polyfit(t, np.log(v), 1)[0]
    return -float(slope)


def poincare_rate(grid):
    """Smallest nonzero |k|^2 on the grid (sharp Poincare constant for zero-mean fields)."""
    k2 = grid.k2
    return float(np.min(k2[k2 > 0]))


# -- differential inequalities ----------------------------------------------------


@dataclass(frozen=True)
class InequalityTerms:
    """Both sides (with C = 1) of the four pre-Gronwall differential inequalities.

    Time derivatives are exact: they come from the model tendency rather than
    from differences of recorded norms.

    * ``l4``: d/dt(|A|_4^4 + |A*|_4^4) + 2 (|A grad A|^2 + |A* grad A*|^2)
      against (|A||grad A| + |A|^2|grad A|^2 + same for A*) (|A|_4^4 + |A*|_4^4)
    * ``dz``: 1/2 dX/dt + 1/2 (|grad d_z u|^2 + |grad d_z b|^2) with
      X = |d_z u|^2 + |d_z b|^2, against (|u|_4^8 + |u|_4^4 + |b|_4^4) X
    * ``h1``: dY/dt + 1/2 (|Lap u|^2 + |u_t|^2 + |Lap b|^2 + |b_t|^2) with
      Y = |grad u|^2 + |grad b|^2, against (|u|^2|grad u|^2 + |d_z u|^2|grad d_z u|^2
      + |d_z b|^2|grad d_z b|^2 + |b|^2|grad b|^2) Y
    * ``h2``: dZ/dt + 1/2 (|grad Lap u|^2 + |grad u_t|^2 + same for b) with
      Z = |Lap u|^2 + |Lap b|^2, against (|grad u|^2|Lap u|^2 + |grad b|^2|Lap b|^2) Z
    """

    time: float
    l4_lhs: float
    l4_rhs: float
    dz_lhs: float
    dz_rhs: float
    h1_lhs: float
    h1_rhs: float
    h2_lhs: float
    h2_rhs: float


INEQUALITIES = ("l4", "dz", "h1", "h2")


def _inner_weighted(grid, a, b, symbol):
    return grid.volume * float(np.sum(np.real(a * np.conj(b)) * symbol * grid.hweights))


def inequality_terms(state, tendency=None):
    """Evaluate :class:`InequalityTerms` for a hydrostatic state."""
    from .pem import pem_rhs

    g = state.grid
    if tendency is None:
        tendency = pem_rhs(state)
    u, b = state.u, state.b
    du, db = tendency.du, tendency.db
    grad2 = g.dkx**2 + g.dky**2 + g.dkz**2
    kz2 = g.dkz**2
    lap2 = g.k2**2

    # quadratic pieces by Parseval
    n = {}
    for name, c, dc in (("u", u, du), ("b", b, db)):
        n[f"l2_{name}"] = l2_norm2(g, c)
        n[f"h1_{name}"] = grad_norm2(g, c)
        n[f"dz_{name}"] = dz_norm2(g, c)
        n[f"gdz_{name}"] = _weighted(g, c, grad2 * kz2)
        n[f"lap_{name}"] = lap_norm2(g, c)
        n[f"glap_{name}"] = _weighted(g, c, grad2 * lap2)
        n[f"t_{name}"] = l2_norm2(g, dc)
        n[f"gt_{name}"] = grad_norm2(g, dc)
        n[f"dt_dz_{name}"] = 2 * _inner_weighted(g, c, dc, kz2)
        n[f"dt_h1_{name}"] = 2 * _inner_weighted(g, c, dc, grad2)
        n[f"dt_lap_{name}"] = 2 * _inner_weighted(g, c, dc, lap2)

    # quartic pieces on the oversampled grid
    U, fine = _samples(g, u)
    B, _ = _samples(g, b)
    dU, _ = _samples(g, du)
    dB, _ = _samples(g, db)
    GU = _grad_samples(g, u)
    GB = _grad_samples(g, b)
    A, As = elsasser(U, B)
    dA, dAs = elsasser(dU, dB)
    GA, GAs = elsasser(GU, GB)
    a2, as2 = np.sum(A**2, axis=0), np.sum(As**2, axis=0)
    l4A, l4As = sp.integrate(fine, a2**2), sp.integrate(fine, as2**2)
    dt_l4 = 4 * sp.integrate(fine, a2 * np.sum(A * dA, axis=0)) + 4 * sp.integrate(
        fine, as2 * np.sum(As * dAs, axis=0)
    )
    diss = sp.integrate(fine, a2 * np.sum(GA**2, axis=(0, 1))) + sp.integrate(
        fine, as2 * np.sum(GAs**2, axis=(0, 1))
    )
    l2A, l2As = l2_norm2(g, u + b), l2_norm2(g, u - b)
    h1A, h1As = grad_norm2(g, u + b), grad_norm2(g, u - b)
    l4u = sp.integrate(fine, np.sum(U**2, axis=0) ** 2)
    l4b = sp.integrate(fine, np.sum(B**2, axis=0) ** 2)

    l4_rhs = (
        math.sqrt(l2A * h1A) + l2A * h1A + math.sqrt(l2As * h1As) + l2As * h1As
    ) * (l4A + l4As)

    X = n["dz_u"] + n["dz_b"]
    dz_lhs = 0.5 * (n["dt_dz_u"] + n["dt_dz_b"]) + 0.5 * (n["gdz_u"] + n["gdz_b"])
    dz_rhs = (l4u**2 + l4u + l4b) * X

    Y = n["h1_u"] + n["h1_b"]
    h1_lhs = n["dt_h1_u"] + n["dt_h1_b"] + 0.5 * (n["lap_u"] + n["t_u"] + n["lap_b"] + n["t_b"])
    h1_rhs = (
        n["l2_u"] * n["h1_u"]
        + n["dz_u"] * n["gdz_u"]
        + n["dz_b"] * n["gdz_b"]
        + n["l2_b"] * n["h1_b"]
    ) * Y

    Z = n["lap_u"] + n["lap_b"]
    h2_lhs = n["dt_lap_u"] + n["dt_lap_b"] + 0.5 * (n["glap_u"] + n["gt_u"] + n["glap_b"] + n["gt_b"])
    h2_rhs = (n["h1_u"] * n["lap_u"] + n["h1_b"] * n["lap_b"]) * Z

    return InequalityTerms(
        time=state.time,
        l4_lhs=dt_l4 + 2 * diss,
        l4_rhs=l4_rhs,
        dz_lhs=dz_lhs,
        dz_rhs=dz_rhs,
        h1_lhs=h1_lhs,
        h1_rhs=h1_rhs,
        h2_lhs=h2_lhs,
        h2_rhs=h2_rhs,
    )


def empirical_constant(lhs, rhs):
    """Smallest C >= 0 with lhs <= C rhs at every sample (inf if impossible)."""
    best = 0.0
    for a, b in zip(lhs, rhs):
        if a <= 0:
            continue
        if b <= 0:
            return math.inf
        best = max(best, a / b)
    return best


# -- bound constants ----------------------------------------------------------------


def _exp(x):
    with np.errstate(over="ignore"):
        return float(np.exp(x))


def _mul(a, b):
    # inf * 0 arises only when the prefactor vanishes identically
    return 0.0 if a == 0 or b == 0 else a * b


def r0_bound(l2_A, l2_Astar, l4_A, l4_Astar, C=1.0):
    """exp{C(a + a^2 + s + s^2)} (p + q) for a, s squared L2 and p, q fourth-power L4 norms."""
    a, s = l2_A, l2_Astar
    return _mul(_exp(C * (a + a * a + s + s * s)), l4_A + l4_Astar)


def k0_bound(l2_dz_u, l2_dz_b, l2_u, l2_b, R0, C=1.0):
    return l2_dz_u + l2_dz_b + _mul(C * (l2_u + l2_b), R0 * R0 + R0)


def h0_bound(h1_u, h1_b, l2_u, l2_b, K0, C=1.0):
    return _mul(h1_u + h1_b, _exp(C * (l2_u**2 + l2_b**2 + K0 * K0)))


def second_order_bound(h2_u, h2_b, H0, C=1.0):
    return _mul(_exp(C * H0 * H0), h2_u + h2_b)


def _bound_constants(n0, C):
    R0 = r0_bound(n0["l2_A"], n0["l2_Astar"], n0["l4_A"], n0["l4_Astar"], C)
    K0 = k0_bound(n0["l2_dz_u"], n0["l2_dz_b"], n0["l2_u"], n0["l2_b"], R0, C)
    H0 = h0_bound(n0["h1_u"], n0["h1_b"], n0["l2_u"], n0["l2_b"], K0, C)
    return R0, K0, H0, second_order_bound(n0["h2_u"], n0["h2_b"], H0, C)


@dataclass
class BoundReport:
    """Evaluated bound constants, run suprema and fitted constants.

    ``C_user`` is the value substituted for the unspecified constant C in
    the closed-form bounds.
    """

    R0: float
    K0: float
    H0: float
    second_order: float
    C_user: float
    observed_sup: dict = field(default_factory=dict)
    empirical_C: dict = field(default_factory=dict)
    note: str = "bound constant C is not known; C_user is a user-supplied stand-in"


def bound_monitors(history, initial, C_user=1.0, terms=None):
    """Compare a run against the closed-form a priori bounds.

    ``history`` is a sequence of quartic :class:`NormRecord`; ``terms`` an
    optional sequence of :class:`InequalityTerms` from which the minimal
    constants closing each differential inequality are fitted.
    """
    if len(history) == 0:
        raise ValueError("bound_monitors needs a nonempty history")
    g = initial.grid
    u0, b0 = initial.horizontal()
    rec0 = sobolev_norms(initial)
    n0 = dict(
        l2_A=l2_norm2(g, u0 + b0),
        l2_Astar=l2_norm2(g, u0 - b0),
        l4_A=rec0.l4_A,
        l4_Astar=rec0.l4_Astar,
        l2_dz_u=rec0.l2_dz_u,
        l2_dz_b=rec0.l2_dz_b,
        l2_u=rec0.l2_u,
        l2_b=rec0.l2_b,
        h1_u=rec0.h1_u,
        h1_b=rec0.h1_b,
        h2_u=rec0.h2_u,
        h2_b=rec0.h2_b,
    )
    R0, K0, H0, S0 = _bound_constants(n0, C_user)

    t = np.array([r.time for r in history])
    col = {name: np.array([getattr(r, name) for r in history]) for name in RECORD_FIELDS}
    l4 = col["l4_A"] + col["l4_Astar"]
    diss = col["diss_A"] + col["diss_Astar"]
    dissipated = float(np.trapezoid(diss, t)) if len(t) > 1 else 0.0
    observed = {
        "energy": float(np.max(col["l2_u"] + col["l2_b"])),
        "l4": float(np.max(l4)) + 2 * dissipated,
        "dz": float(np.max(col["l2_dz_u"] + col["l2_dz_b"])),
        "h1": float(np.max(col["h1_u"] + col["h1_b"])),
        "h2": float(np.max(col["h2_u"] + col["h2_b"])),
    }
    fitted = {}
    if terms:
        for name in INEQUALITIES:
            lhs = [getattr(x, f"{name}_lhs") for x in terms]
            rhs = [getattr(x, f"{name}_rhs") for x in terms]
            fitted[name] = empirical_constant(lhs, rhs)
    return BoundReport(R0, K0, H0, S0, float(C_user), observed, fitted)
