"""Two-body motion of the primaries.

Kepler equation, anomaly conversions, the separation r, and the Fourier
coefficients c_q^{n,m} of r^n e^{i m f} with respect to the mean anomaly
t.  The coefficients are computed by quadrature in the eccentric anomaly
E (dt = r dE), using the algebraic identity

    r e^{i f} = a^2 e^{iE} - e + (e^2 / 4 a^2) e^{-iE},
    a = (sqrt(1+e) + sqrt(1-e)) / 2,

which avoids ever evaluating the true anomaly inside the integrand.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, DomainError

__all__ = [
    "Anomalies",
    "CoeffKey",
    "solve_kepler",
    "anomalies",
    "true_from_eccentric",
    "radius",
    "fourier_c",
    "coeff_bound",
]

_KEPLER_TOL = 1e-13


def _check_ecc(e):
    if not (0.0 <= e < 1.0):
        raise DomainError(f"eccentricity must be in [0, 1), got {e}")


@dataclass(frozen=True)
class Anomalies:
    """Mean anomaly t, eccentric anomaly E, true anomaly f, separation r."""

    t: float
    E: float
    f: float
    r: float


@dataclass(frozen=True)
class CoeffKey:
    """Index (q, n, m) of the Fourier coefficient c_q^{n,m}.

    q: Fourier index in the mean anomaly, n: power of r, m: multiple of f.
    The coefficients are real and satisfy c_{-q}^{n,-m} = c_q^{n,m}.
    """

    q: int
    n: int
    m: int

    def conjugate(self):
        return CoeffKey(-self.q, self.n, -self.m)


def solve_kepler(t, e):
    """Solve E - e sin E = t for the eccentric anomaly E.

    Newton iteration seeded with E0 = t + e sin t, with a bisection
    fallback on stagnation.  |E - e sin E - t| <= 1e-13 on return, and
    E - t is 2*pi-periodic and odd in t.
    """
    _check_ecc(e)
    t = float(t)
    # reduce to [-pi, pi] and shift back at the end; E - t is periodic
    k = math.floor((t + math.pi) / (2.0 * math.pi))
    tr = t - 2.0 * math.pi * k
    E = tr + e * math.sin(tr)
    for _ in range(60):
        f = E - e * math.sin(E) - tr
        if abs(f) <= _KEPLER_TOL:
            break
        dE = f / (1.0 - e * math.cos(E))
        # Newton is safe here (derivative >= 1-e > 0); damp huge steps
        if abs(dE) > 1.0:
            dE = math.copysign(1.0, dE)
        E -= dE
    else:
        E = _bisect_kepler(tr, e)
    if abs(E - e * math.sin(E) - tr) > _KEPLER_TOL:
        E = _bisect_kepler(tr, e)
    return E + 2.0 * math.pi * k


def _bisect_kepler(t, e):
    lo, hi = t - e, t + e
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - e * math.sin(mid) < t:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


def true_from_eccentric(E, e):
    """True anomaly from E via the branch-safe half-angle formula."""
    f = 2.0 * math.atan2(math.sqrt(1.0 + e) * math.sin(0.5 * E),
                         math.sqrt(1.0 - e) * math.cos(0.5 * E))
    # keep f on the same winding as E so both grow monotonically with t
    k = round((E - f) / (2.0 * math.pi))
    return f + 2.0 * math.pi * k


def radius(E, e):
    """Separation of the primaries, r = 1 - e cos E."""
    return 1.0 - e * math.cos(E)


def anomalies(t, e):
    """All anomalies at mean anomaly t for eccentricity e."""
    _check_ecc(e)
    E = solve_kepler(t, e)
    return Anomalies(t=float(t), E=E, f=true_from_eccentric(E, e), r=radius(E, e))


def _ref_complex(E, e):
    """r e^{if} evaluated algebraically on an array of E values."""
    a2 = 0.25 * (math.sqrt(1.0 + e) + math.sqrt(1.0 - e)) ** 2
    eiE = np.exp(1j * E)
    return a2 * eiE - e + (e * e / (4.0 * a2)) / eiE


@lru_cache(maxsize=100_000)
def _fourier_c_cached(q, n, m, e, tol):
    nodes = 64
    prev = None
    while nodes <= 16384:
        E = 2.0 * math.pi * np.arange(nodes) / nodes
        ref = _ref_complex(E, e)
        r = 1.0 - e * np.cos(E)
        t = E - e * np.sin(E)
        vals = ref ** m * r ** (n + 1 - m) * np.exp(-1j * q * t)
        est = vals.mean()
        if prev is not None and abs(est - prev) <= 0.25 * tol:
            if abs(est.imag) > tol:
                raise AccuracyError(
                    f"imaginary residue {est.imag:.3e} above tol in c_{q}^{{{n},{m}}}",
                    estimate=est.real, achieved=abs(est.imag))
            return float(est.real)
        prev = est
        nodes *= 2
    raise AccuracyError(
        f"quadrature for c_{q}^{{{n},{m}}} did not converge at tol={tol}",
        estimate=None if prev is None else float(prev.real),
        achieved=None if prev is None else abs(est - prev))


def fourier_c(key, e, tol=1e-12):
    """Fourier coefficient c_q^{n,m} of r^n e^{imf} in the mean anomaly.

    Evaluates (1/2 pi) * integral over E of (r e^{if})^m r^{n+1-m} e^{-iqt}
    by a composite periodic trapezoid rule with node doubling (spectral
    for this analytic periodic integrand).  The imaginary part of the
    estimate must fall below tol; it is asserted and discarded.
    """
    if isinstance(key, tuple):
        key = CoeffKey(*key)
    if tol <= 0:
        raise DomainError("tol must be positive")
    if key.n < 0:
        raise DomainError("power n must be >= 0")
    _check_ecc(e)
    # symmetry c_{-q}^{n,-m} = c_q^{n,m}: fold to q >= 0
    if key.q < 0:
        key = key.conjugate()
    return _fourier_c_cached(key.q, key.n, key.m, float(e), float(tol))


def coeff_bound(key, e):
    """Explicit a-priori bound on |c_q^{n,m}| (valid for n, q >= 0, m <= n+1).

    For m >= 0:  2^{q+n+1} exp(q sqrt(1-e^2)) e^{|m-q|};
    for m <= -1: (1+e)^{n+1}.
    """
    if isinstance(key, tuple):
        key = CoeffKey(*key)
    q, n, m = key.q, key.n, key.m
    if q < 0:
        q, m = -q, -m
    if n < 0 or q < 0 or m > n + 1:
        raise DomainError("bound requires n, q >= 0 and m <= n + 1")
    _check_ecc(e)
    if m >= 0:
        return 2.0 ** (q + n + 1) * math.exp(q * math.sqrt(1.0 - e * e)) \
            * e ** abs(m - q)
    return (1.0 + e) ** (n + 1)
