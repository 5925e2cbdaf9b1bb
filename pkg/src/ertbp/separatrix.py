"""Closed-form homoclinic manifold of the two-body limit.

For zero mass ratio the energy level H0 = 0 connecting the infinity
manifold to itself is parametrized explicitly through the auxiliary time
tau, related to physical time by the cubic t = (G^3/2)(tau + tau^3/3).
"""

import math
from dataclasses import dataclass

from .dynamics import McGeheeExtState
from .errors import DomainError

__all__ = ["SeparatrixParams", "tau_of_t", "t_of_tau", "homoclinic_state"]


@dataclass(frozen=True)
class SeparatrixParams:
    """Base point (alpha*, G*, s*) and time offset sigma along the orbit."""

    alpha_star: float
    G_star: float
    s_star: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.G_star <= 0.0:
            raise DomainError("G_star must be positive")


def t_of_tau(tau, G):
    """The cubic time change t = (G^3/2)(tau + tau^3/3)."""
    return 0.5 * G ** 3 * (tau + tau ** 3 / 3.0)


def tau_of_t(t, G):
    """Unique real root of t = (G^3/2)(tau + tau^3/3).

    Cardano in the cancellation-free form tau = w - 1/w with
    w = cbrt(3t/G^3 + sqrt(1 + (3t/G^3)^2)), then one Newton polish.
    Monotone increasing and odd in t.
    """
    if G <= 0.0:
        raise DomainError("G must be positive")
    t = float(t)
    if t == 0.0:
        return 0.0
    if t < 0.0:
        return -tau_of_t(-t, G)
    b = 3.0 * t / G ** 3
    w = math.cbrt(b + math.hypot(1.0, b))
    tau = w - 1.0 / w
    # Newton polish: residual of the defining cubic is ~1 ulp afterwards
    for _ in range(2):
        f = tau + tau ** 3 / 3.0 - 2.0 * t / G ** 3
        tau -= f / (1.0 + tau * tau)
    return tau


def homoclinic_state(t, p):
    """Point of the homoclinic solution at physical time t.

    With tau = tau_of_t(t + sigma, G*):

        x = 2 / (G* sqrt(1+tau^2)),   alpha = alpha* + pi + 2 arctan tau,
        y = 2 tau / (G* (1+tau^2)),   G = G*,   s = s* + t.

    H0 vanishes identically along the orbit.
    """
    G = p.G_star
    tau = tau_of_t(t + p.sigma, G)
    one = 1.0 + tau * tau
    return McGeheeExtState(
        x=2.0 / (G * math.sqrt(one)),
        alpha=p.alpha_star + math.pi + 2.0 * math.atan(tau),
        y=2.0 * tau / (G * one),
        G=G,
        s=p.s_star + t,
    )
