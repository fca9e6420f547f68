"""Bessel functions J_n, Y_n, H^(1)_n for real positive arguments.

Self-contained double-precision implementation used by the
separation-of-variables disk oracle, deliberately independent of the
special-function calls inside the Nystrom kernel assembly so the two
solution paths share no code.

Method: J_n by Miller's downward recurrence with sum normalization
(2 sum J_{2k} + J_0 = 1); Y_0, Y_1 by power series for small argument
and Hankel asymptotic expansions for large argument; Y_n by upward
recurrence.
"""

from __future__ import annotations

import math
from typing import NamedTuple

_EULER_GAMMA = 0.5772156649015328606
_SWITCH = 12.0  # series/asymptotics switchover for order 0 and 1


class DomainError(ValueError):
    """Argument outside the supported domain (x must be > 0)."""


class BesselValues(NamedTuple):
    j: float
    y: float
    h1: complex


def _j0j1_series(x: float):
    q = 0.25 * x * x
    # J0 = sum (-q)^k / (k!)^2 ; J1 = (x/2) sum (-q)^k / (k!(k+1)!)
    t0 = 1.0
    t1 = 1.0
    s0 = t0
    s1 = t1
    for k in range(1, 60):
        t0 *= -q / (k * k)
        t1 *= -q / (k * (k + 1))
        s0 += t0
        s1 += t1
        if abs(t0) < 1e-18 * abs(s0) and abs(t1) < 1e-18 * abs(s1):
            break
    return s0, 0.5 * x * s1


def _y0y1_series(x: float):
    j0, j1 = _j0j1_series(x)
    q = 0.25 * x * x
    lg = math.log(0.5 * x) + _EULER_GAMMA
    # Y0 = (2/pi)[(ln(x/2)+g) J0 + sum_{k>=1} (-1)^{k+1} H_k q^k/(k!)^2]
    s = 0.0
    t = 1.0
    h = 0.0
    for k in range(1, 60):
        t *= q / (k * k)
        h += 1.0 / k
        term = (-1) ** (k + 1) * h * t
        s += term
        if abs(term) < 1e-18 * (abs(s) + 1e-300):
            break
    y0 = (2.0 / math.pi) * (lg * j0 + s)
    # Y1 = (2/pi) ln(x/2) J1 - 2/(pi x)
    #      - (1/pi) sum_{k>=0} (-1)^k (H_k + H_{k+1} - 2g) (x/2)^{2k+1}/(k!(k+1)!)
    s = 0.0
    t = 0.5 * x  # (x/2)^{2k+1}/(k!(k+1)!) at k=0
    hk = 0.0
    hk1 = 1.0
    for k in range(0, 60):
        term = (-1) ** k * (hk + hk1 - 2.0 * _EULER_GAMMA) * t
        s += term
        t *= q / ((k + 1) * (k + 2))
        hk += 1.0 / (k + 1)
        hk1 += 1.0 / (k + 2)
        if abs(term) < 1e-18 * (abs(s) + 1e-300):
            break
    y1 = (2.0 / math.pi) * math.log(0.5 * x) * j1 - 2.0 / (math.pi * x) - s / math.pi
    return y0, y1


def _pq_asymptotic(x: float, order: int):
    """Hankel asymptotic modulus/phase series P, Q for order 0 or 1."""
    # a_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! (8x)^k); even k feed P
    # with sign (-1)^{k/2}, odd k feed Q with sign (-1)^{(k-1)/2}.
    mu = 4.0 * order * order
    p = 1.0
    q = 0.0
    ak = 1.0
    for k in range(1, 24):
        ak *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k % 2 == 0:
            p += ak * (-1) ** (k // 2)
        else:
            q += ak * (-1) ** ((k - 1) // 2)
        if abs(ak) < 1e-18:
            break
    return p, q


def _jy_asymptotic(x: float, order: int):
    p, q = _pq_asymptotic(x, order)
    chi = x - (0.5 * order + 0.25) * math.pi
    fac = math.sqrt(2.0 / (math.pi * x))
    j = fac * (p * math.cos(chi) - q * math.sin(chi))
    y = fac * (p * math.sin(chi) + q * math.cos(chi))
    return j, y


def _j01y01(x: float):
    if x <= _SWITCH:
        j0, j1 = _j0j1_series(x)
        y0, y1 = _y0y1_series(x)
    else:
        j0, y0 = _jy_asymptotic(x, 0)
        j1, y1 = _jy_asymptotic(x, 1)
    return j0, j1, y0, y1


def jn_down(n_max: int, x: float) -> list:
    """J_0..J_{n_max} by Miller's downward recurrence with normalization."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    # Start above both n_max and x (past the turning point n ~ x, where
    # downward recurrence picks up the decaying dominant solution).
    start = int(n_max + 16 + x + 2.0 * math.sqrt(max(n_max, x) * 40.0))
    fp = 0.0
    f = 1e-300
    out = [0.0] * (n_max + 1)
    norm = 0.0
    for k in range(start, 0, -1):
        fm = (2.0 * k / x) * f - fp
        fp = f
        f = fm
        if (k - 1) % 2 == 0:
            norm += 2.0 * fm
        if k - 1 <= n_max:
            out[k - 1] = fm
        if abs(f) > 1e280:  # rescale to avoid overflow
            f *= 1e-280
            fp *= 1e-280
            norm *= 1e-280
            out = [v * 1e-280 for v in out]
    norm -= f  # the J_0 term was double counted in the sum 2*sum J_{2k} + J_0
    return [v / norm for v in out]


def yn_up(n_max: int, x: float) -> list:
    """Y_0..Y_{n_max} by upward recurrence (stable direction for Y)."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    _, _, y0, y1 = _j01y01(x)
    out = [y0]
    if n_max >= 1:
        out.append(y1)
    for n in range(1, n_max):
        out.append((2.0 * n / x) * out[n] - out[n - 1])
    return out[: n_max + 1]


def bessel_suite(n: int, x: float) -> BesselValues:
    """J_n(x), Y_n(x) and H^(1)_n(x) for real x > 0, 0 <= n."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    if n < 0:
        raise DomainError(f"order must be >= 0, got {n}")
    j = jn_down(n, x)[n]
    y = yn_up(n, x)[n]
    return BesselValues(j=j, y=y, h1=complex(j, y))
