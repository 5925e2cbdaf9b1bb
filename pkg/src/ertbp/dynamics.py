"""ERTBP vector fields, Hamiltonians and an adaptive integrator.

Coordinates follow the McGehee convention rho = 2/x^2, which brings
spatial infinity to x = 0.  The equations of motion are

    dx/dt    = -(1/4) x^3 y
    dy/dt    =  (1/8) G^2 x^6 - (x^3/4) dU/dx
    dalpha/dt =  (1/4) x^4 G
    dG/dt    =  dU/dalpha
    ds/dt    =  1

with the self-potential U(x, alpha, s) = x^2/2 + mu * DeltaU.  DeltaU is
evaluated in a cancellation-free form so the mu -> 0 limit is exact.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IntegrationError, SingularityError
from .kepler import anomalies

__all__ = [
    "Params",
    "McGeheeExtState",
    "PolarState",
    "delta_potential",
    "vector_field",
    "energies",
    "Event",
    "Trajectory",
    "integrate",
]


@dataclass(frozen=True)
class Params:
    """Physical parameters: mass ratio mu and eccentricity e."""

    mu: float
    e: float

    def __post_init__(self):
        if not (0.0 <= self.mu <= 0.5):
            raise DomainError(f"mass ratio must be in [0, 1/2], got {self.mu}")
        if not (0.0 <= self.e < 1.0):
            raise DomainError(f"eccentricity must be in [0, 1), got {self.e}")

    def admissible_for_theory(self, G):
        """True iff (G, e) lies in the region where the diffusion result applies."""
        if self.e <= 0.0:
            return False
        return 32.0 <= G <= 1.0 / (8.0 * self.e)


@dataclass(frozen=True)
class McGeheeExtState:
    """Extended phase-space point (x, alpha, y, G, s); x = 0 is infinity."""

    x: float
    alpha: float
    y: float
    G: float
    s: float

    def __post_init__(self):
        if self.x < 0.0:
            raise DomainError(f"x must be >= 0, got {self.x}")
        if self.G <= 0.0:
            raise DomainError(f"G must be > 0, got {self.G}")

    def to_polar(self):
        if self.x == 0.0:
            raise DomainError("x = 0 corresponds to rho = infinity")
        return PolarState(rho=2.0 / self.x ** 2, alpha=self.alpha,
                          y=self.y, G=self.G, s=self.s)

    def as_tuple(self):
        return (self.x, self.alpha, self.y, self.G, self.s)


@dataclass(frozen=True)
class PolarState:
    """Polar-canonical point (rho, alpha, P_rho, P_alpha, s)."""

    rho: float
    alpha: float
    y: float
    G: float
    s: float

    def __post_init__(self):
        if self.rho <= 0.0:
            raise DomainError(f"rho must be > 0, got {self.rho}")

    def to_mcgehee(self):
        return McGeheeExtState(x=math.sqrt(2.0 / self.rho), alpha=self.alpha,
                               y=self.y, G=self.G, s=self.s)

    def to_cartesian(self):
        """(q, p) of the comet; the momentum uses the polar-canonical frame."""
        ca, sa = math.cos(self.alpha), math.sin(self.alpha)
        q = (self.rho * ca, self.rho * sa)
        pt = self.G / self.rho
        p = (self.y * ca - pt * sa, self.y * sa + pt * ca)
        return q, p

    @staticmethod
    def from_cartesian(q, p, s):
        rho = math.hypot(q[0], q[1])
        if rho == 0.0:
            raise DomainError("origin has no polar representation")
        alpha = math.atan2(q[1], q[0])
        pr = (q[0] * p[0] + q[1] * p[1]) / rho
        G = q[0] * p[1] - q[1] * p[0]
        return PolarState(rho=rho, alpha=alpha, y=pr, G=G, s=s)


def _delta_parts(x, cpsi, r, mu):
    """(DeltaU, dDeltaU/dc, dDeltaU/dx) at cos(alpha - f) = cpsi.

    Written so that (U_mu - x^2/2)/mu is evaluated without cancellation;
    the mu = 0 limit is the exact first-order potential.
    """
    x2 = x * x
    rx2 = r * x2
    sS2 = 1.0 - mu * rx2 * cpsi + 0.25 * (mu * r * x2) ** 2
    sJ2 = 1.0 + (1.0 - mu) * rx2 * cpsi + 0.25 * ((1.0 - mu) * r * x2) ** 2
    if sS2 <= 1e-24 or sJ2 <= 1e-24:
        raise SingularityError(
            f"collision configuration: sigma_S^2={sS2:.3e}, sigma_J^2={sJ2:.3e}")
    sS = math.sqrt(sS2)
    sJ = math.sqrt(sJ2)

    # A = (1 - sigma_S)/mu, finite as mu -> 0
    numA = rx2 * cpsi - 0.25 * mu * r * r * x2 * x2
    A = numA / (1.0 + sS)
    dsS_dc = -mu * rx2 / (2.0 * sS)
    dsS_dx = (-mu * r * x * cpsi + 0.5 * mu * mu * r * r * x2 * x) / sS
    dA_dc = (rx2 - A * dsS_dc) / (1.0 + sS)
    dA_dx = (2.0 * r * x * cpsi - mu * r * r * x2 * x - A * dsS_dx) / (1.0 + sS)

    T1 = (1.0 - mu) * A / sS
    dT1_dc = (1.0 - mu) * (dA_dc * sS - A * dsS_dc) / sS2
    dT1_dx = (1.0 - mu) * (dA_dx * sS - A * dsS_dx) / sS2

    dsJ_dc = (1.0 - mu) * rx2 / (2.0 * sJ)
    dsJ_dx = ((1.0 - mu) * r * x * cpsi + 0.5 * (1.0 - mu) ** 2 * r * r * x2 * x) / sJ
    T2 = (1.0 - sJ) / sJ
    dT2_dc = -dsJ_dc / sJ2
    dT2_dx = -dsJ_dx / sJ2

    S = T1 + T2
    val = 0.5 * x2 * S
    d_c = 0.5 * x2 * (dT1_dc + dT2_dc)
    d_x = x * S + 0.5 * x2 * (dT1_dx + dT2_dx)
    return val, d_c, d_x


def delta_potential(x, alpha, s, params):
    """First-order perturbing potential DeltaU_mu and its partials.

    Returns (value, d/dalpha, d/dx).  At mu = 0 this is the exact limit
    potential used by the Melnikov integral.
    """
    if x < 0.0:
        raise DomainError("x must be >= 0")
    if x == 0.0:
        return 0.0, 0.0, 0.0
    an = anomalies(s, params.e)
    psi = alpha - an.f
    val, d_c, d_x = _delta_parts(x, math.cos(psi), an.r, params.mu)
    return val, -math.sin(psi) * d_c, d_x


def _rhs(state, params):
    """Time derivative of (x, alpha, y, G, s)."""
    x, alpha, y, G, s = state
    if x <= 0.0:
        return (0.0, 0.0, 0.0, 0.0, 1.0)
    an = anomalies(s, params.e)
    psi = alpha - an.f
    _, d_c, d_x = _delta_parts(x, math.cos(psi), an.r, params.mu)
    mu = params.mu
    x3 = x ** 3
    Ux = x + mu * d_x
    Ua = -mu * math.sin(psi) * d_c
    return (-0.25 * x3 * y,
            0.25 * x3 * x * G,
            0.125 * G * G * x3 * x3 - 0.25 * x3 * Ux,
            Ua,
            1.0)


def vector_field(state, params):
    """Vector field of the extended ERTBP at a state.

    Accepts a McGeheeExtState or a plain 5-tuple.  On the infinity
    manifold x = 0 the field is (0, 0, 0, 0, 1).
    """
    if isinstance(state, McGeheeExtState):
        state = state.as_tuple()
    return _rhs(state, params)


def energies(state, params):
    """(H0, H_mu, jacobi) at a state; jacobi = H_mu + G (e = 0 invariant)."""
    if isinstance(state, McGeheeExtState):
        state = state.as_tuple()
    x, alpha, y, G, s = state
    h0 = 0.5 * y * y + 0.125 * x ** 4 * G * G - 0.5 * x * x
    dval = 0.0
    if x > 0.0 and params.mu > 0.0:
        an = anomalies(s, params.e)
        dval, _, _ = _delta_parts(x, math.cos(alpha - an.f), an.r, params.mu)
    hmu = h0 - params.mu * dval
    return h0, hmu, hmu + G


@dataclass
class Event:
    """Zero-crossing detector g(state) = 0 checked along the flow.

    direction: 0 any crossing, +1 only increasing g, -1 only decreasing.
    """

    fn: object
    terminal: bool = False
    direction: int = 0


@dataclass
class Trajectory:
    """Dense result of an integration: accepted nodes plus derivatives."""

    t: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    params: Params
    events: list = field(default_factory=list)

    def __len__(self):
        return len(self.t)

    def state(self, i):
        x, alpha, y, G, s = self.states[i]
        return (x, alpha, y, G, s)

    def interpolate(self, t):
        """Cubic Hermite interpolation between accepted steps."""
        tt = self.t
        sgn = 1.0 if tt[-1] >= tt[0] else -1.0
        i = int(np.searchsorted(sgn * tt, sgn * t))
        i = min(max(i, 1), len(tt) - 1)
        t0, t1 = tt[i - 1], tt[i]
        h = t1 - t0
        if h == 0.0:
            return tuple(self.states[i])
        th = (t - t0) / h
        y0, y1 = self.states[i - 1], self.states[i]
        f0, f1 = self.derivs[i - 1], self.derivs[i]
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        return tuple(out)

    def energy_series(self):
        h0 = np.empty(len(self.t))
        hmu = np.empty(len(self.t))
        for i in range(len(self.t)):
            a, b, _ = energies(tuple(self.states[i]), self.params)
            h0[i] = a
            hmu[i] = b
        return h0, hmu

    def to_csv(self, path):
        """Columns: t, x, alpha, y, G, s, H0, Hmu (17 significant digits)."""
        h0, hmu = self.energy_series()
        with open(path, "w") as fh:
            fh.write("t,x,alpha,y,G,s,H0,Hmu\n")
            for i in range(len(self.t)):
                row = [self.t[i], *self.states[i], h0[i], hmu[i]]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# Dormand-Prince 5(4) coefficients
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_NDIM = 5


def _err_norm(err, y0, y1, rtol, atol):
    acc = 0.0
    for i in range(_NDIM):
        sc = atol[i] + rtol * max(abs(y0[i]), abs(y1[i]))
        q = err[i] / sc
        acc += q * q
    return math.sqrt(acc / _NDIM)


def integrate(initial, t_span, params, rtol=1e-10, atol=1e-12,
              events=(), max_step=math.inf, first_step=None,
              max_steps=50_000_000):
    """Adaptive Dormand-Prince 5(4) integration of the extended ERTBP.

    Returns a Trajectory holding all accepted nodes (dense via cubic
    Hermite).  `events` is a sequence of Event objects; terminal events
    stop the run at the located crossing.  Backward spans are allowed.
    x is clamped to >= 0 (infinity manifold is invariant).

    Raises IntegrationError on step-size underflow, carrying the last
    good (t, state).
    """
    if isinstance(initial, McGeheeExtState):
        y = list(initial.as_tuple())
    else:
        y = list(initial)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 == t0:
        raise DomainError("empty integration span")
    direction = 1.0 if t1 > t0 else -1.0
    if isinstance(atol, (int, float)):
        atol = (float(atol),) * _NDIM
    else:
        atol = tuple(float(a) for a in atol)

    rhs = lambda st: _rhs(st, params)

    t = t0
    f = rhs(tuple(y))
    if first_step is None:
        # crude initial step from rhs magnitude
        scale = max(abs(v) for v in f[:4]) + 1e-12
        h = direction * min(1e-2 / scale, abs(t1 - t0), max_step)
    else:
        h = direction * abs(first_step)

    ts = [t]
    ys = [tuple(y)]
    fs = [f]
    hits = []
    err_old = 1e-4
    n_steps = 0
    k = [None] * 7

    while (t - t1) * direction < 0.0:
        n_steps += 1
        if n_steps > max_steps:
            raise IntegrationError("max step count exceeded", t=t, state=tuple(y))
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t=t, state=tuple(y))
        if (t + h - t1) * direction > 0.0:
            h = t1 - t

        k[0] = f
        failed = False
        for stage in range(1, 7):
            a = _A[stage]
            yn = list(y)
            for j in range(stage):
                aj = a[j]
                if aj != 0.0:
                    kj = k[j]
                    for i in range(_NDIM):
                        yn[i] += h * aj * kj[i]
            if yn[0] < 0.0:
                yn[0] = 0.0
            try:
                k[stage] = rhs(tuple(yn))
            except SingularityError:
                failed = True
                break
        if failed:
            en = math.inf
        else:
            y_new = yn  # stage 7 state (c7 = 1, FSAL) is the 5th order sol.
            err = [0.0] * _NDIM
            for j in range(7):
                ej = _E[j]
                if ej != 0.0:
                    kj = k[j]
                    for i in range(_NDIM):
                        err[i] += h * ej * kj[i]
            en = _err_norm(err, y, y_new, rtol, atol)
        if not math.isfinite(en):
            h *= 0.25
            continue

        if en <= 1.0:
            fac = 0.9 * (en + 1e-300) ** -0.14 * err_old ** 0.08
            fac = min(5.0, max(0.2, fac))
            err_old = max(en, 1e-10)
            t_new = t + h
            f_new = k[6]
            if y_new[0] < 0.0:
                y_new[0] = 0.0
                f_new = rhs(tuple(y_new))

            stop = None
            for ev in events:
                g0 = ev.fn(tuple(y))
                g1 = ev.fn(tuple(y_new))
                if g0 == 0.0 or g0 * g1 > 0.0:
                    continue
                if ev.direction > 0 and g1 < g0:
                    continue
                if ev.direction < 0 and g1 > g0:
                    continue
                te, ye = _locate_event(ev.fn, t, tuple(y), k[0], t_new,
                                       tuple(y_new), f_new)
                hits.append((te, ye, ev))
                if ev.terminal and (stop is None or
                                    (te - stop[0]) * direction < 0.0):
                    stop = (te, ye)

            if stop is not None:
                ts.append(stop[0])
                ys.append(stop[1])
                fs.append(rhs(stop[1]))
                break

            t = t_new
            y = list(y_new)
            f = f_new
            ts.append(t)
            ys.append(tuple(y))
            fs.append(f)
            h *= fac
            if abs(h) > max_step:
                h = direction * max_step
        else:
            h *= min(1.0, max(0.2, 0.9 * en ** -0.2))

    traj = Trajectory(t=np.array(ts), states=np.array(ys), derivs=np.array(fs),
                      params=params,
                      events=[(te, ye, ev) for te, ye, ev in hits])
    return traj


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    th = (t - t0) / h
    h00 = (1 + 2 * th) * (1 - th) ** 2
    h10 = th * (1 - th) ** 2
    h01 = th * th * (3 - 2 * th)
    h11 = th * th * (th - 1)
    return tuple(h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]
                 for i in range(_NDIM))


def _locate_event(g, t0, y0, f0, t1, y1, f1):
    ga = g(y0)
    a, b = t0, t1
    for _ in range(80):
        m = 0.5 * (a + b)
        ym = _hermite(t0, y0, f0, t1, y1, f1, m)
        gm = g(ym)
        if gm == 0.0 or abs(b - a) < 1e-13 * max(1.0, abs(m)):
            return m, ym
        if (ga < 0.0) == (gm < 0.0):
            a, ga = m, gm
        else:
            b = m
    m = 0.5 * (a + b)
    return m, _hermite(t0, y0, f0, t1, y1, f1, m)
