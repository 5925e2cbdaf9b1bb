"""Melnikov potential of the parabolic-infinity separatrix.

Two independent evaluation routes are provided:

* melnikov_direct -- quadrature of the defining time integral after the
  cubic substitution t = (G^3/2)(tau + tau^3/3), with the multipole tail
  beyond |tau| = T added in closed form: the integrand is the Legendre
  series (x0^2/2) * sum_{j>=2} (-1)^j P_j(cos psi) (x0^2 r/2)^j, and the
  time-averaged tail of each j-term integrates exactly in psi = arctan tau.

* the Fourier pipeline L_qk = sum_l c * N, where the c come from the
  `kepler` module and the kernel integrals are

      N(q,m,n) = 2^{m+n}/G^{2m+2n-1} C(-1/2,m) C(-1/2,n)
                 * int e^{i q (tau + tau^3/3) G^3/2}
                       (tau-i)^{-2m} (tau+i)^{-2n} dtau.

  For q >= 1 the line of integration is moved to the path where
  Im(tau + tau^3/3) = 0, which passes below the singularity tau = i on a
  small arc of radius epsilon; the overall factor e^{-q G^3/3} is split
  off into a ScaledReal exponent so the large-G regime never underflows.

Harmonic-size bounds and the calibrated four-harmonic leading model live
here as well.  Table construction and reconstruction are in `tables`.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .errors import (AccuracyError, ContourError, DivergentTailWarning,
                     DomainError, RegimeWarning)
from .kepler import CoeffKey, fourier_c
from .scaled import ScaledReal

__all__ = [
    "ContourSpec",
    "AsymptoticTerms",
    "melnikov_direct",
    "melnikov_direct_with_dalpha",
    "N_eval",
    "N_asymptotic",
    "asymptotic_terms",
    "N_error_envelope",
    "L_qk",
    "FourHarmonics",
    "four_harmonics",
    "bound_B",
    "bound_N",
    "bound_Lq_sum",
    "bound_tail_L2",
]


def _binom_half(k):
    """binomial(-1/2, k), exact product form."""
    b = 1.0
    for i in range(k):
        b *= (-0.5 - i) / (i + 1.0)
    return b


def _double_factorial_odd(s):
    """(2s-1)!! with the usual convention (-1)!! = 1."""
    out = 1.0
    for i in range(1, s + 1):
        out *= 2 * i - 1
    return out


# ---------------------------------------------------------------------------
# direct quadrature of the time integral
# ---------------------------------------------------------------------------

# e^{ik psi} coefficients of the Legendre polynomials P_2, P_3
_LEGENDRE_PK = {
    2: {0: 0.25, 2: 0.375, -2: 0.375},
    3: {1: 0.1875, -1: 0.1875, 3: 0.3125, -3: 0.3125},
}


def _kepler_vec(M, e):
    E = M + e * np.sin(M)
    for _ in range(10):
        f = E - e * np.sin(E) - M
        E = E - f / (1.0 - e * np.cos(E))
        if np.max(np.abs(f)) < 1e-14:
            break
    return E


class _DirectGrid:
    """Frozen tau-quadrature for one (G, e, T): nodes, weights, tail data."""

    def __init__(self, G, e, T, phase_per_panel=5.0, panel_nodes=16):
        self.G = G
        self.e = e
        self.T = T
        xg, wg = roots_legendre(panel_nodes)
        edges = [0.0]
        while edges[-1] < T:
            lam = 4.0 * math.pi / (G ** 3 * (1.0 + edges[-1] ** 2))
            width = min(0.5, lam * phase_per_panel / (2.0 * math.pi))
            edges.append(min(edges[-1] + width, T))
        edges = np.array(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        tau_pos = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        w_pos = (half[:, None] * wg[None, :]).ravel()
        self.tau = np.concatenate([-tau_pos[::-1], tau_pos])
        self.w = np.concatenate([w_pos[::-1], w_pos]) * \
            (0.5 * G ** 3) * (1.0 + self.tau ** 2)
        self.t_nodes = 0.5 * G ** 3 * (self.tau + self.tau ** 3 / 3.0)
        one = 1.0 + self.tau ** 2
        self.x2 = 4.0 / (G * G * one)              # x0^2 at the nodes
        self.cos2a = (1.0 - self.tau ** 2) / one   # cos(2 arctan tau)
        self.sin2a = 2.0 * self.tau / one

        # closed-form multipole tail (j = 2, 3), exact in alpha
        psiT = math.atan(T)
        xq, wq = roots_legendre(32)
        psi = 0.5 * (psiT + 0.5 * math.pi) + 0.5 * (0.5 * math.pi - psiT) * xq
        wpsi = 0.5 * (0.5 * math.pi - psiT) * wq
        self.tail_k = []          # list of (k, K_jk complex)
        for j, pk in _LEGENDRE_PK.items():
            Dj = (-1.0) ** j * 2.0 ** j * G ** (1 - 2 * j)
            for k, pjk in pk.items():
                c0 = fourier_c(CoeffKey(0, j, -k), e, tol=1e-13)
                Ijk = complex(np.sum(wpsi * np.cos(psi) ** (2 * j - 2) *
                                     np.exp(2j * k * psi)))
                self.tail_k.append((k, Dj * pjk * c0 * Ijk))

    def primary(self, s):
        M = s + self.t_nodes
        E = _kepler_vec(M, self.e)
        r = 1.0 - self.e * np.cos(E)
        cosf = (np.cos(E) - self.e) / r
        sinf = math.sqrt(1.0 - self.e ** 2) * np.sin(E) / r
        return r, cosf, sinf

    def tail(self, alpha, deriv=False):
        acc = 0.0
        for k, K in self.tail_k:
            ph = complex(math.cos(k * (alpha + math.pi)),
                         math.sin(k * (alpha + math.pi)))
            if deriv:
                acc += 2.0 * (1j * k * ph * K).real
            else:
                acc += 2.0 * (ph * K).real
        return acc

    def value_from_primary(self, alpha, r, cosf, sinf, deriv=False):
        # alpha0 = alpha + pi + 2 arctan tau
        ca = -(math.cos(alpha) * self.cos2a - math.sin(alpha) * self.sin2a)
        sa = -(math.sin(alpha) * self.cos2a + math.cos(alpha) * self.sin2a)
        cpsi = ca * cosf + sa * sinf
        x2 = self.x2
        S = 4.0 + (x2 * r) ** 2 + 4.0 * x2 * r * cpsi
        if deriv:
            spsi = sa * cosf - ca * sinf
            x4r = x2 * x2 * r
            integ = (2.0 * x4r * S ** -1.5 - 0.25 * x4r) * spsi
            return float(np.dot(self.w, integ)) + self.tail(alpha, deriv=True)
        integ = x2 / np.sqrt(S) + 0.25 * x2 * x2 * r * cpsi - 0.5 * x2
        return float(np.dot(self.w, integ)) + self.tail(alpha)

    def value(self, alpha, s, deriv=False):
        r, cosf, sinf = self.primary(s)
        return self.value_from_primary(alpha, r, cosf, sinf, deriv=deriv)


_GRID_CACHE = {}


def _truncation_T(G, e, tol):
    """Choose T so j>=4 multipoles and oscillatory remainders are < tol."""
    # oscillatory remainder ~ 8 (1+e)^2 G^-6 T^-6, j=4 tail ~ 2^5 G^-7 T^-7
    t1 = (8.0 * (1.0 + e) ** 2 / (G ** 6 * tol)) ** (1.0 / 6.0)
    t2 = (32.0 / (G ** 7 * tol)) ** (1.0 / 7.0)
    return min(140.0, max(12.0, t1, t2))


def direct_grid(G, e, tol=1e-9):
    T = _truncation_T(G, e, tol)
    key = (round(G, 12), round(e, 14), round(T, 6))
    grid = _GRID_CACHE.get(key)
    if grid is None:
        grid = _DirectGrid(G, e, T)
        if len(_GRID_CACHE) > 8:
            _GRID_CACHE.clear()
        _GRID_CACHE[key] = grid
    return grid


def melnikov_direct(alpha, G, s, params, tol=1e-9):
    """Melnikov potential by direct quadrature of the time integral.

    `params` supplies the eccentricity; the mass ratio is irrelevant (the
    integrand is the mu -> 0 potential).  Absolute accuracy ~ tol; raises
    AccuracyError if the requested tolerance is below what the truncation
    budget can deliver.
    """
    if G <= 0.0:
        raise DomainError("G must be positive")
    if tol < 1e-12:
        raise AccuracyError("direct quadrature budget bottoms out near 1e-12",
                            achieved=1e-12)
    e = params.e if hasattr(params, "e") else float(params)
    return direct_grid(G, e, tol).value(alpha, s)


def melnikov_direct_with_dalpha(alpha, G, s, params, tol=1e-9):
    """(value, d/dalpha) of the Melnikov potential by direct quadrature."""
    e = params.e if hasattr(params, "e") else float(params)
    grid = direct_grid(G, e, tol)
    r, cosf, sinf = grid.primary(s)
    return (grid.value_from_primary(alpha, r, cosf, sinf),
            grid.value_from_primary(alpha, r, cosf, sinf, deriv=True))


# ---------------------------------------------------------------------------
# kernel integrals N(q, m, n)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContourSpec:
    """Resolution knobs for the complex-path evaluation of N(q,m,n).

    epsilon defaults to G^{-3/2}; the computed value must not depend on
    it (that independence is the standard self-check of the machinery).
    u_max covers `efolds` e-foldings of e^{-q G^3 u / 2}; the neglected
    tail is below double precision for the default 45.
    """

    epsilon: float = None
    efolds: float = 45.0
    arc_nodes: int = 96
    line_nodes: int = 16
    panel_growth: float = 1.6

    def eps_for(self, G):
        return self.epsilon if self.epsilon is not None else G ** -1.5


_DEFAULT_SPEC = ContourSpec()


def _theta_eps(eps):
    """Angle at which |tau - i| = eps meets the hyperbola Im h(tau) = 0."""
    g = lambda th: math.sin(2.0 * th) - (eps / 3.0) * math.cos(3.0 * th)
    return brentq(g, 1e-14, 0.25 * math.pi + 1e-12, xtol=1e-15, rtol=8.9e-16)


def _u_of_w(w):
    # u = (tau - i)^2 - (i/3)(tau - i)^3 with w = tau - i
    return w * w * (1.0 - 1j * w / 3.0)


def _q0_integral(m, n, nodes=None):
    """I(0,m,n) over the real line via tau = tan(psi) (trig-polynomial)."""
    if m + n <= 0:
        raise DomainError("I(0,0,0) diverges")
    if nodes is None:
        nodes = 8 * (m + n) + 48
    x, w = roots_legendre(nodes)
    psi = 0.5 * math.pi * x
    wp = 0.5 * math.pi * w
    vals = np.exp(2j * (n - m) * psi) * np.cos(psi) ** (2 * (m + n - 1))
    return (-1.0) ** (m + n) * complex(np.dot(wp, vals))


def _tau_plus_track(us, w_seed):
    """Follow the right inverse branch of u along ascending u values."""
    out = np.empty(len(us), dtype=complex)
    w = complex(w_seed)
    for idx, u in enumerate(us):
        for it in range(40):
            f = _u_of_w(w) - u
            dp = w * (2.0 - 1j * w)
            if dp == 0.0:
                raise ContourError("branch inversion hit a critical point", u=u)
            step = f / dp
            w = w - step
            if abs(step) <= 1e-15 * max(1.0, abs(w)):
                break
        else:
            raise ContourError("branch inversion did not converge", u=u)
        out[idx] = w
    return out


def N_eval(q, m, n, G, spec=None):
    """Kernel integral N(q,m,n) as a ScaledReal.

    q = 0 integrates on the real line; q >= 1 uses the complex path with
    the arc below tau = i, and returns mantissa * e^{-q G^3/3} packaged
    so that G in the tens or hundreds stays representable.
    """
    if q < 0 or m < 0 or n < 0:
        raise DomainError("indices must be non-negative")
    if G <= 0.0:
        raise DomainError("G must be positive")
    spec = spec or _DEFAULT_SPEC
    lnG = math.log(G)
    log_pref = ((m + n) * math.log(2.0)
                + math.log(abs(_binom_half(m)) * abs(_binom_half(n)))
                - (2 * m + 2 * n - 1) * lnG)
    sign_pref = (-1.0) ** (m + n)  # binom(-1/2,k) has sign (-1)^k

    if q == 0:
        val = _q0_integral(m, n)
        if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
            raise AccuracyError("q=0 kernel integral has spurious imaginary part",
                                estimate=val.real, achieved=abs(val.imag))
        return ScaledReal.from_log(sign_pref * val.real, log_pref)

    if m + n <= 0:
        raise DomainError("q >= 1 requires m + n > 0")

    eps = spec.eps_for(G)
    delta = 0.5 * q * G ** 3
    theta = _theta_eps(eps)
    w0 = eps * complex(math.cos(theta), math.sin(theta))
    u0c = _u_of_w(w0)
    u0 = u0c.real
    if abs(u0c.imag) > 1e-10 * max(u0, 1e-300):
        raise ContourError("arc endpoint is off the hyperbola", u=u0)

    # ---- u-line integral of Im F^+(u) e^{-q delta u} -----------------------
    # panels grow geometrically until the exponential takes over
    u_lim = u0 + spec.efolds / delta
    edges = [u0]
    h = 0.5 * u0
    while edges[-1] < u_lim:
        h = min(h * spec.panel_growth, 2.0 / delta)
        edges.append(min(edges[-1] + h, u_lim))
    xg, wg = roots_legendre(spec.line_nodes)
    us = []
    ws = []
    for a, b in zip(edges[:-1], edges[1:]):
        us.append(0.5 * (a + b) + 0.5 * (b - a) * xg)
        ws.append(0.5 * (b - a) * wg)
    us = np.concatenate(us)
    ws = np.concatenate(ws)
    taus = _tau_plus_track(us, w0)
    # scale F by its size at the arc endpoint to stay inside float range
    s0 = (2 * m + 1) * math.log(abs(w0)) + (2 * n + 1) * math.log(abs(w0 + 2j))
    F = np.exp(-( (2 * m + 1) * np.log(taus) + (2 * n + 1) * np.log(taus + 2j) ) + s0)
    line = float(np.dot(ws, F.imag * np.exp(-delta * (us - u0))))
    line_sr = ScaledReal.from_log(-2.0 * line, -s0 - delta * u0)

    # ---- arc below tau = i (half of it; the other half is its conjugate) --
    xg, wg = roots_legendre(spec.arc_nodes + 16 * (q - 1))
    th0, th1 = math.pi - theta, 1.5 * math.pi
    th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * xg
    wth = 0.5 * (th1 - th0) * wg
    warc = eps * np.exp(1j * th)
    uarc = _u_of_w(warc)
    s1 = (2 * m - 1) * math.log(eps) + 2 * n * math.log(abs(w0 + 2j))
    integ = np.exp(-delta * uarc - 2 * m * np.log(warc)
                   - 2 * n * np.log(warc + 2j) + s1) * 1j * warc
    arc = complex(np.dot(wth, integ))
    arc_sr = ScaledReal.from_log(2.0 * arc.real, -s1)

    mant = line_sr + arc_sr
    return ScaledReal.from_log(sign_pref, log_pref - q * G ** 3 / 3.0) * mant


# ---------------------------------------------------------------------------
# asymptotics of N for q >= 1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticTerms:
    """Expansion data for N(q,m,n): d_{m,n}, the d_j, and T/R error bounds."""

    d_mn: complex
    d_j: tuple
    T_bound: float
    R_bound: float


@lru_cache(maxsize=4096)
def _d_coeffs(m, n, jmax):
    """Taylor coefficients d_j of x^{2m+1} F^+(x^2) around x = 0.

    Cauchy integral over |tau - i| = 1: with x(tau) = w sqrt(1 - i w/3),
    w = tau - i, the function equals (1 - i w/3)^{m+1/2} / (tau+i)^{2n+1},
    analytic on the disc, so a trapezoid rule in the angle is spectral.
    """
    K = 2048
    th = 2.0 * math.pi * np.arange(K) / K
    w = np.exp(1j * th)
    root = np.sqrt(1.0 - 1j * w / 3.0)   # principal branch, Re > 0 on the disc
    x = w * root
    H = root ** (2 * m + 1) / (w + 2j) ** (2 * n + 1)
    xp = (1.0 - 0.5j * w) / root
    base = H * xp * w
    return tuple(complex(np.mean(base * x ** (-j - 1))) for j in range(jmax + 1))


def asymptotic_terms(q, m, n, G):
    """AsymptoticTerms record for N(q,m,n)."""
    if q < 1 or m < 0 or n < 0 or m + n <= 0:
        raise DomainError("asymptotics require q >= 1, m, n >= 0, m+n > 0")
    d_mn = 1j * 2.0 ** (m + n) * _binom_half(n) * _binom_half(m)
    dj = _d_coeffs(m, n, 2 * m)
    return AsymptoticTerms(
        d_mn=d_mn,
        d_j=dj,
        T_bound=45.0 * 2.0 ** (2 * m + 2) * G ** -3.0,
        R_bound=18.0 * float(q) ** (m - 1) * G ** (3 * m - 3),
    )


def N_asymptotic(q, m, n, G):
    """Laplace-method approximation of N(q,m,n) (no T/R error terms).

    Finite sum over s = 0..m of the epsilon-independent contour terms;
    use asymptotic_terms() for the attached T/R bounds and
    N_error_envelope() for the guaranteed deviation from N_eval.
    """
    at = asymptotic_terms(q, m, n, G)
    lnG = math.log(G)
    total = 0.0j
    for s in range(m + 1):
        term = ((-1.0) ** s * math.sqrt(math.pi) * 2.0 ** 1.5
                * q ** (s - 0.5) / _double_factorial_odd(s)
                * at.d_j[2 * m - 2 * s]
                * math.exp(3.0 * (s - m) * lnG))
        total += term
    mant = at.d_mn * total
    if abs(mant.imag) > 1e-10 * max(abs(mant.real), 1e-300):
        raise AccuracyError("asymptotic mantissa has spurious imaginary part",
                            estimate=mant.real, achieved=abs(mant.imag))
    log_factor = (m - 2 * n - 0.5) * lnG - q * G ** 3 / 3.0
    return ScaledReal.from_log(mant.real, log_factor)


def N_error_envelope(q, m, n, G):
    """Bound |N_eval - N_asymptotic| <= |d_mn| (|T|+|R|) e^{-qG^3/3} G^{1-2m-2n}."""
    at = asymptotic_terms(q, m, n, G)
    return ScaledReal.from_log(
        abs(at.d_mn) * (at.T_bound + at.R_bound),
        (1 - 2 * m - 2 * n) * math.log(G) - q * G ** 3 / 3.0)


# ---------------------------------------------------------------------------
# Fourier coefficients of the Melnikov potential
# ---------------------------------------------------------------------------

def _series_plan(q, k):
    """(l_start, c-key maker, N-index maker) for the (q,k) series."""
    if k == 0:
        return 1, (lambda l: (q, 2 * l, 0)), (lambda l: (l, l))
    if k == 1:
        return 2, (lambda l: (q, 2 * l - 1, -1)), (lambda l: (l - 1, l))
    if k == -1:
        return 2, (lambda l: (q, 2 * l - 1, 1)), (lambda l: (l, l - 1))
    if k >= 2:
        return k, (lambda l: (q, 2 * l - k, -k)), (lambda l: (l - k, l))
    kk = -k
    return kk, (lambda l: (q, 2 * l - kk, kk)), (lambda l: (l, l - kk))


def convergence_region(G, e):
    """True iff the harmonic series tails are guaranteed geometric."""
    return G * G > 2.0 * (1.0 + e) and 4.0 * e * G < 1.0


def L_qk(q, k, G, e, l_max=40, spec=None, tol=1e-16, c_tol=1e-13):
    """Harmonic L_{q,k} of the Melnikov potential (complex-exponential
    convention: the script-L equals sum over q,k of L_{q,k} e^{i(q s + k alpha)}).

    Sums c_q^{n,m} N(q,m',n') until the next term falls below tol times
    the partial sum.  Emits DivergentTailWarning outside the guaranteed
    convergence region G^2 > 2(1+e), 4 e G < 1.
    """
    if q < 0:
        raise DomainError("q must be >= 0 (reality gives L_{-q,-k} = L_{q,k})")
    if not convergence_region(G, e):
        warnings.warn(
            f"(G={G}, e={e}) outside the guaranteed convergence region",
            DivergentTailWarning, stacklevel=2)
    l0, ckey, nidx = _series_plan(q, k)
    acc = ScaledReal()
    zeros = 0
    for l in range(l0, l0 + l_max):
        m_, n_ = nidx(l)
        if q == 0 and (m_ == 0 or n_ == 0):
            continue  # N(0,0,k) = N(0,k,0) = 0 identically
        qq, nn, mm = ckey(l)
        c = fourier_c(CoeffKey(qq, nn, mm), e, tol=c_tol)
        term = N_eval(q, m_, n_, G, spec) * c
        acc = acc + term
        if term.is_zero() or (not acc.is_zero()
                              and abs(term) < abs(acc) * tol):
            zeros += 1
            if zeros >= 2:
                break
        else:
            zeros = 0
    return acc


# ---------------------------------------------------------------------------
# four dominant harmonics (leading model, calibrated convention)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FourHarmonics:
    """Leading values of L_{0,0}, L_{0,1}, L_{1,-1}, L_{1,-2}.

    Values follow the complex-exponential convention of L_qk: the cosine
    reconstruction multiplies every (q,k) != (0,0) entry by 2.  Relative
    error envelopes (valid for G >= 32, eG <= 1/8) are attached, as are
    the absolute bounds for the neglected remainder of the q = 0 and
    q = 1 blocks and for everything with q >= 2.
    """

    G: float
    e: float
    L00: ScaledReal
    L01: ScaledReal
    L1m1: ScaledReal
    L1m2: ScaledReal
    env: dict = field(default_factory=dict)
    in_regime: bool = True

    def items(self):
        return [((0, 0), self.L00), ((0, 1), self.L01),
                ((1, -1), self.L1m1), ((1, -2), self.L1m2)]


def four_harmonics(G, e):
    """Leading-order dominant harmonics with their error envelopes.

    Calibrated against the grid-FFT oracle at moderate G: the q = 1
    amplitudes of the classical cosine form are twice these complex
    coefficients, i.e.  L1m1 here is (1/4) sqrt(pi/2G) e^{-G^3/3}.
    """
    if G <= 0.0 or e < 0.0:
        raise DomainError("need G > 0 and e >= 0")
    in_regime = G >= 32.0 and e * G <= 0.125
    if not in_regime:
        warnings.warn(f"(G={G}, e={e}) outside the proven regime "
                      "G >= 32, eG <= 1/8", RegimeWarning, stacklevel=2)
    lnG = math.log(G)
    xg = -G ** 3 / 3.0
    L00 = ScaledReal.from_log(0.5 * math.pi, -3.0 * lnG)
    L01 = ScaledReal.from_log(-15.0 * math.pi * e / 16.0, -5.0 * lnG)
    L1m1 = ScaledReal.from_log(0.25 * math.sqrt(0.5 * math.pi), -0.5 * lnG + xg)
    L1m2 = ScaledReal.from_log(-1.5 * math.sqrt(2.0 * math.pi) * e,
                               1.5 * lnG + xg)
    env = {
        "E00": 2.0 ** 12 / G ** 4 + 4.0 * 49.0 * e * e,
        "E01": 2.0 ** 13 / G ** 4 + e * e,
        "E1m1": 2.0 ** 21 / G + 2.0 * 49.0 * e * e,
        "E1m2": 2.0 ** 17 / G + 49.0 * e / 3.0,
        "EE0": ScaledReal.from_log(2.0 ** 14 * e * e, -7.0 * lnG),
        "EE1": ScaledReal.from_log(
            2.0 ** 19 * (G ** -3.5 + e * e * G ** 2.5 + e * G ** -1.5), xg),
        "L2TAIL": bound_tail_L2(G, e),
    }
    return FourHarmonics(G=G, e=e, L00=L00, L01=L01, L1m1=L1m1, L1m2=L1m2,
                         env=env, in_regime=in_regime)


# ---------------------------------------------------------------------------
# explicit bounds
# ---------------------------------------------------------------------------

def _regime_check(G):
    if G < 32.0:
        warnings.warn(f"bound evaluated at G={G} < 32 (outside its proof)",
                      RegimeWarning, stacklevel=3)


def bound_B(q, k, G, e):
    """Explicit harmonic bound B_{q,k} with |L_{q,k}| <= B_{q,k} (G >= 32)."""
    if q < 0:
        raise DomainError("q must be >= 0")
    _regime_check(G)
    lnG = math.log(G)
    if q == 0:
        l = abs(k)
        return ScaledReal.from_log(2.0 ** (8 + 2 * l) * e ** l,
                                   -(2 * l + 3) * lnG)
    xg = -q * G ** 3 / 3.0
    if k == 0:
        return ScaledReal.from_log(
            2.0 ** (9 + q) * math.exp(2.0 * q) * e ** q,
            -1.5 * lnG + xg)
    if k == 1:
        return ScaledReal.from_log(2.0 ** 7 * math.exp(q) * (1.0 + e) ** 4,
                                   -3.5 * lnG + xg)
    if k == -1:
        return ScaledReal.from_log(
            2.0 ** (9 + q) * math.exp(2.0 * q) * e ** abs(1 - q),
            -0.5 * lnG + xg)
    if k >= 2:
        return ScaledReal.from_log(
            2.0 ** (5 + k) * math.exp(q) * (1.0 + e) ** k,
            -(2 * k + 0.5) * lnG + xg)
    kk = -k
    return ScaledReal.from_log(
        2.0 ** (5 + q + 2 * kk) * math.exp(2.0 * q) * e ** abs(kk - q),
        (kk - 0.5) * lnG + xg)


def bound_N(q, m, n, G):
    """|N(q,m,n)| <= 2^{n+m+3} e^q G^{m-2n-1/2} e^{-qG^3/3} (q >= 1, G > 1)."""
    if q < 1 or m < 0 or n < 0 or m + n <= 0:
        raise DomainError("bound requires q >= 1 and m + n > 0")
    if G <= 1.0:
        raise DomainError("bound requires G > 1")
    return ScaledReal.from_log(
        2.0 ** (n + m + 3) * math.exp(q),
        (m - 2 * n - 0.5) * math.log(G) - q * G ** 3 / 3.0)


def bound_Lq_sum(q, G, e):
    """sum_k |L_{q,k}| <= 2^13 (e^2 2^3 G)^q G^{-1/2} e^{-qG^3/3} (q >= 2)."""
    if q < 2:
        raise DomainError("tail bound stated for q >= 2")
    _regime_check(G)
    return ScaledReal.from_log(
        2.0 ** (13 + 3 * q) * math.exp(2.0 * q),
        (q - 0.5) * math.log(G) - q * G ** 3 / 3.0)


def bound_tail_L2(G, e):
    """|sum_{q>=2} band| <= 2^28 G^{3/2} e^{-2G^3/3} (G >= 32, eG <= 1/8)."""
    return ScaledReal.from_log(2.0 ** 28, 1.5 * math.log(G) - 2.0 * G ** 3 / 3.0)
