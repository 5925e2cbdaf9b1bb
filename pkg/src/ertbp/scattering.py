"""Scattering maps built from the Melnikov harmonics.

The phase s has, away from a degeneracy locus, exactly two nondegenerate
critical points of s -> script-L(alpha, G, s); evaluating at them gives
the two reduced functions L*_{+-}(alpha, G) whose level curves the two
scattering maps follow.  All band arithmetic is scale-separated: the
q >= 1 bands carry e^{-q G^3/3} in their ScaledReal exponents, so the
transversality bracket (a cross term of different bands) is computed
without catastrophic cancellation at any G.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (CriticalPointError, DegenerateAmplitudeError,
                     GradientVanishedError, TableRangeError)
from .scaled import ScaledReal
from .tables import TableStencil, band_eval

__all__ = [
    "AmplitudePhase",
    "amplitude_phase",
    "critical_points",
    "ReducedPoincare",
    "reduced_poincare",
    "scattering_step",
    "transversality",
    "TransversalityData",
    "level_curve_trace",
    "excluded_radius",
]


@dataclass(frozen=True)
class AmplitudePhase:
    """Amplitude-phase data of the q = 1 band at one (alpha, G).

    B e^{-i theta} = 1 - p e^{-i alpha} + p E e^{-i phi}; hatted values
    drop the E-correction.  theta, phi are odd in alpha; B, E even.
    """

    B: float
    theta: float
    B_hat: float
    theta_hat: float
    p: float
    E_mod: float
    phi: float


def amplitude_phase(alpha, G, table):
    """Cosine reduction of the q = 1 band: band = 2 L_{1,-1} B cos(s - alpha - theta)."""
    band = table.band(1)
    anchor = band.get(-1)
    if anchor is None or anchor.is_zero():
        raise DegenerateAmplitudeError(
            "q=1 band has no usable L_{1,-1} anchor")
    z = 0.0j
    zE = 0.0j
    for k, L in band.items():
        rk = L.ratio(anchor)
        ph = complex(math.cos((k + 1) * alpha), math.sin((k + 1) * alpha))
        z += rk * ph
        if k not in (-1, -2):
            zE += rk * ph
    pm2 = band.get(-2)
    p = -pm2.ratio(anchor) if pm2 is not None else 0.0
    B = abs(z)
    theta = -math.atan2(z.imag, z.real) if B > 0.0 else 0.0
    if p != 0.0 and abs(zE) > 0.0:
        zE = zE / p
        E_mod = abs(zE)
        phi = -math.atan2(zE.imag, zE.real)
    else:
        E_mod = 0.0
        phi = 0.0
    B_hat = math.sqrt(max((1.0 - p) ** 2 + 4.0 * p * math.sin(alpha) ** 2, 0.0))
    den = B_hat + 1.0 - p * math.cos(alpha)
    theta_hat = -2.0 * math.atan2(p * math.sin(alpha), den) if den != 0.0 else 0.0
    return AmplitudePhase(B=B, theta=theta, B_hat=B_hat, theta_hat=theta_hat,
                          p=p, E_mod=E_mod, phi=phi)


def excluded_radius(G, e):
    """Size estimate of the neighbourhood of (alpha=0, G=(12e)^-1/2) where
    the phase criticality degenerates; diagnostic only (greatly
    overshoots at moderate G, where the actual B > 0 test is decisive)."""
    return ScaledReal.from_log(1e3, 1.5 * math.log(G) - G ** 3 / 3.0)


def _ds_weighted(table, alpha, G):
    """ds and dss of the full potential, scaled to the q = 1 band size.

    Bands q >= 2 enter with weight e^{-(q-1) G^3/3}; where that
    underflows a double they are genuinely negligible at this scale.
    """
    ref = ScaledReal.exp(-G ** 3 / 3.0)
    qs = [q for q in table.q_values() if q >= 1]
    if 1 not in qs:
        raise TableRangeError("critical points need the q = 1 band")

    def f_and_df(s):
        f = 0.0
        df = 0.0
        for q in qs:
            for k, L in table.band(q).items():
                w = (L / ref).to_float()
                ph = q * s + k * alpha
                f += -2.0 * q * w * math.sin(ph)
                df += -2.0 * q * q * w * math.cos(ph)
        return f, df

    return f_and_df


def critical_points(alpha, G, table, tol=1e-11, max_iter=50):
    """The two nondegenerate critical phases (s_plus, s_minus).

    Newton on d script-L / ds seeded at alpha + theta and alpha + theta
    + pi, with a bracketing fallback; verifies the second derivative is
    nonzero with opposite signs at the two points.  s_minus - s_plus is
    pi up to O(|q>=2 bands| / |q=1 band|).
    """
    ap = amplitude_phase(alpha, G, table)
    if ap.B <= 1e-12 * max(1.0, ap.p):
        raise CriticalPointError(
            f"amplitude B = {ap.B:.2e} degenerate at alpha={alpha}, G={G} "
            "(near the excluded locus)")
    f_df = _ds_weighted(table, alpha, G)
    out = []
    curvature = []
    for seed in (alpha + ap.theta, alpha + ap.theta + math.pi):
        s = seed
        ok = False
        for _ in range(max_iter):
            f, df = f_df(s)
            if df == 0.0:
                break
            step = f / df
            s -= step
            if abs(step) <= tol:
                ok = True
                break
        if not ok or abs(s - seed) > 1.5:
            s = _bracket_root(f_df, seed)
        f, df = f_df(s)
        if abs(f) > 1e-8 or df == 0.0:
            raise CriticalPointError(
                f"no nondegenerate critical phase near seed {seed:.3f} "
                f"(alpha={alpha}, G={G})")
        out.append(s)
        curvature.append(df)
    if curvature[0] * curvature[1] >= 0.0:
        raise CriticalPointError(
            "second derivatives at the two critical phases do not have "
            "opposite signs")
    return out[0], out[1]


def _bracket_root(f_df, seed, half_width=1.2, n=96):
    ss = seed + np.linspace(-half_width, half_width, n)
    vals = [f_df(s)[0] for s in ss]
    for i in range(n - 1):
        if vals[i] == 0.0:
            return float(ss[i])
        if vals[i] * vals[i + 1] < 0.0:
            a, b = float(ss[i]), float(ss[i + 1])
            fa = vals[i]
            for _ in range(200):
                m = 0.5 * (a + b)
                fm = f_df(m)[0]
                if fm == 0.0 or (b - a) < 1e-13:
                    return m
                if (fa < 0.0) == (fm < 0.0):
                    a, fa = m, fm
                else:
                    b = m
            return 0.5 * (a + b)
    raise CriticalPointError(f"no sign change of dL/ds near seed {seed:.3f}")


@dataclass
class PoincareData:
    """Reduced function at one (alpha, G): value and gradient per band."""

    sign: int
    alpha: float
    G: float
    s_star: float
    value_bands: dict
    da_bands: dict
    dG_bands: dict

    def _total(self, bands):
        return sum(v.to_float() for v in bands.values())

    @property
    def value(self):
        return self._total(self.value_bands)

    @property
    def d_alpha(self):
        return self._total(self.da_bands)

    @property
    def d_G(self):
        return self._total(self.dG_bands)


class ReducedPoincare:
    """One of the reduced functions L*_{sign}, backed by a table provider.

    The provider supplies tables at stencil points G0 (1 -/+ h) so that
    d/dG comes from the mantissa-path Lagrange derivative plus the
    analytic -q G^2 factor.  Values are cached per (alpha, G); instances
    are not thread-safe (per-instance cache), matching their use.
    """

    def __init__(self, sign, provider, rel_step=1e-4, trust=0.05):
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        self.sign = sign
        self.provider = provider
        self.rel_step = rel_step
        self.trust = trust
        self._stencil = None
        self._cache = {}

    def stencil_for(self, G):
        st = self._stencil
        if st is None or abs(G - st.G0) > st.trust:
            st = TableStencil(self.provider, G, rel_step=self.rel_step,
                              trust=self.trust)
            self._stencil = st
        return st

    def data(self, alpha, G):
        key = (round(alpha, 13), round(G, 13))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        st = self.stencil_for(G)
        tab = st.table_at(G)
        dtab = st.dG_table_at(G)
        s_plus, s_minus = critical_points(alpha, G, tab)
        s_star = s_plus if self.sign > 0 else s_minus
        value_bands = {}
        da_bands = {}
        dG_bands = {}
        for q in tab.q_values():
            v, a, _ = band_eval(tab, q, alpha, s_star)
            gv, _, _ = band_eval(dtab, q, alpha, s_star)
            value_bands[q] = v
            da_bands[q] = a
            dG_bands[q] = gv
        data = PoincareData(sign=self.sign, alpha=alpha, G=G, s_star=s_star,
                            value_bands=value_bands, da_bands=da_bands,
                            dG_bands=dG_bands)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = data
        return data

    def value(self, alpha, G):
        return self.data(alpha, G).value

    def gradient(self, alpha, G):
        d = self.data(alpha, G)
        return d.d_alpha, d.d_G


def reduced_poincare(sign, alpha, G, provider):
    """(value, (d/dalpha, d/dG)) of L*_{sign} at (alpha, G)."""
    rp = ReducedPoincare(sign, provider)
    d = rp.data(alpha, G)
    return d.value, (d.d_alpha, d.d_G)


def scattering_step(sign, point, mu, provider):
    """One application of the first-order scattering map S_{sign}.

    (alpha, G, s) -> (alpha - mu dL*/dG, G + mu dL*/dalpha, s); exact
    identity at mu = 0.
    """
    alpha, G, s = point
    if mu == 0.0:
        return (alpha, G, s)
    rp = provider if isinstance(provider, ReducedPoincare) \
        else ReducedPoincare(sign, provider)
    da, dG = rp.gradient(alpha, G)
    return (alpha - mu * dG, G + mu * da, s)


@dataclass
class TransversalityData:
    bracket: ScaledReal
    d_value: float
    normalized: ScaledReal
    B: float
    p: float

    @property
    def bracket_float(self):
        return self.bracket.to_float()


def transversality(alpha, G, provider, rp_plus=None, rp_minus=None):
    """Poisson bracket {L*_+, L*_-} and the closed-form d factor.

    The bracket is assembled band-pairwise, so the huge identical
    band-0 x band-0 products cancel exactly and the leading cross term
    (the exponentially small physical signal) survives at any G.
    normalized = |bracket| / sum |cross products| is scale-free.
    """
    rp_plus = rp_plus or ReducedPoincare(+1, provider)
    rp_minus = rp_minus or ReducedPoincare(-1, provider)
    dp = rp_plus.data(alpha, G)
    dm = rp_minus.data(alpha, G)
    qs = sorted(dp.value_bands)
    bracket = ScaledReal()
    norm = ScaledReal()
    for q1 in qs:
        for q2 in qs:
            t1 = dp.da_bands[q1] * dm.dG_bands[q2]
            t2 = dp.dG_bands[q1] * dm.da_bands[q2]
            bracket = bracket + (t1 - t2)
            if q1 != q2:
                norm = norm + abs(t1) + abs(t2)
    if norm.is_zero():
        norm = ScaledReal.from_float(1e-300)
    ap = amplitude_phase(alpha, G, rp_plus.stencil_for(G).table_at(G))
    e = provider.e if hasattr(provider, "e") else rp_plus.provider.e
    B2 = ap.B ** 2
    if B2 == 0.0:
        raise DegenerateAmplitudeError("B = 0: transversality undefined")
    d_value = (1.0
               - 6.25 * (e / G ** 2) * math.cos(alpha)
               - (5.0 / 48.0) * (B2 / G)
               * (1.0 + 0.5 / G ** 3
                  - ((ap.p - math.cos(alpha)) / B2) * (24.0 * e / G)))
    return TransversalityData(bracket=bracket, d_value=d_value,
                              normalized=abs(bracket) / norm,
                              B=ap.B, p=ap.p)


def closed_form_bracket(alpha, G, provider, rp_plus=None):
    """Leading closed form of {L*_+, L*_-} = -2{L_0, L*_1}:
    (-L*_1 / B^2) (3 pi p sin(alpha) / G^4) d, as a ScaledReal."""
    rp_plus = rp_plus or ReducedPoincare(+1, provider)
    tab = rp_plus.stencil_for(G).table_at(G)
    ap = amplitude_phase(alpha, G, tab)
    tv = transversality(alpha, G, provider, rp_plus=rp_plus)
    L1m1 = tab.entry(1, -1)
    L1star = L1m1 * (2.0 * ap.B)
    coef = (-3.0 * math.pi * ap.p * math.sin(alpha)
            / (G ** 4 * ap.B ** 2)) * tv.d_value
    return L1star * coef


@dataclass
class LevelCurve:
    points: np.ndarray
    level: float
    closed: bool
    reason: str


def level_curve_trace(sign, start, arc_length, provider, step=0.02,
                      level_tol=1e-8, bounds=None, max_points=20000):
    """Trace the level curve of L*_{sign} through `start` on the cylinder.

    Predictor: midpoint rule along the unit Hamiltonian direction
    (-dL*/dG, +dL*/dalpha)/|grad| (sign of `arc_length` reverses it).
    Corrector: Newton projection back to the level, keeping relative
    drift below level_tol per step.  Stops on closure, on leaving
    `bounds` = (G_min, G_max), or after |arc_length|.
    """
    rp = provider if isinstance(provider, ReducedPoincare) \
        else ReducedPoincare(sign, provider)
    alpha, G = float(start[0]), float(start[1])
    direction = 1.0 if arc_length >= 0.0 else -1.0
    total = abs(arc_length)

    def grad(a, g):
        d = rp.data(a, g)
        return d.d_alpha, d.d_G, d.value

    da0, dG0, level = grad(alpha, G)
    pts = [(alpha, G)]
    travelled = 0.0
    closed = False
    reason = "length"
    while travelled < total and len(pts) < max_points:
        da, dG, val = grad(alpha, G)
        nrm = math.hypot(da, dG)
        if nrm < 1e-300:
            raise GradientVanishedError(
                f"grad L* vanished at alpha={alpha:.6f}, G={G:.6f}")
        h = min(step, total - travelled)
        tx, ty = -dG / nrm * direction, da / nrm * direction
        # midpoint predictor
        am = alpha + 0.5 * h * tx
        gm = G + 0.5 * h * ty
        try:
            dam, dGm, _ = grad(am, gm)
        except TableRangeError:
            reason = "boundary"
            break
        nm = math.hypot(dam, dGm)
        if nm < 1e-300:
            raise GradientVanishedError(
                f"grad L* vanished at alpha={am:.6f}, G={gm:.6f}")
        alpha_n = alpha + h * (-dGm / nm) * direction
        G_n = G + h * (dam / nm) * direction
        # corrector: project back onto the level set
        for _ in range(8):
            dan, dGn, valn = grad(alpha_n, G_n)
            miss = valn - level
            if abs(miss) <= 0.25 * level_tol * abs(level):
                break
            n2 = dan * dan + dGn * dGn
            alpha_n -= miss * dan / n2
            G_n -= miss * dGn / n2
        if bounds is not None and not (bounds[0] <= G_n <= bounds[1]):
            reason = "boundary"
            break
        travelled += math.hypot(alpha_n - alpha, G_n - G)
        alpha, G = alpha_n, G_n
        pts.append((alpha, G))
        if travelled > 4.0 * step:
            d0 = math.hypot((alpha - pts[0][0]) % (2 * math.pi), G - pts[0][1])
            d0 = min(d0, math.hypot(2 * math.pi - (alpha - pts[0][0]) % (2 * math.pi),
                                    G - pts[0][1]))
            if d0 < 0.6 * step:
                closed = True
                reason = "closed"
                pts.append(pts[0])
                break
    return LevelCurve(points=np.array(pts), level=level, closed=closed,
                      reason=reason)
