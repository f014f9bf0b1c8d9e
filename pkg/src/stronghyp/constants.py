"""Explicit constants relating strong hyperbolicity, (EB) and strong bolicity."""

import math


def strong_bolicity_R(eps: float, eta: float, r: float) -> float:
    """Smallest R with ``1 + exp(eps (r - R) / 2) <= exp(eps eta / 2)``.

    Any R' >= the returned value also works. The result can be negative or
    below ``r`` when ``eta`` is large; clamp it if a positive radius is needed.
    """
    if not (eps > 0 and eta > 0 and r > 0):
        raise ValueError("eps, eta and r must be positive")
    return r - (2.0 / eps) * math.log(math.expm1(0.5 * eps * eta))


def eps_from_EB(L: float, lam: float, delta: float, R0: float) -> float:
    """A strong-hyperbolicity parameter implied by (EB) constants and a delta.

    ``min{2 lam, 2/L, 1/(2 delta), 2 log 2 / R0}``; ``delta = 0`` drops its branch.
    """
    if not (L > 0 and lam > 0 and R0 > 0 and delta >= 0):
        raise ValueError("L, lam, R0 must be positive and delta nonnegative")
    branches = [2.0 * lam, 2.0 / L, 2.0 * math.log(2.0) / R0]
    if delta > 0:
        branches.append(1.0 / (2.0 * delta))
    return min(branches)


def default_A0(eps: float) -> float:
    """max(1, 1/eps): keeps exp(-eps A) <= 1/e whenever A >= A0."""
    return max(1.0, 1.0 / eps)


def eb_constants_from_strong(eps: float, A0: float | None = None):
    """(L, lam, R0) = (4/eps, eps/2, 2 A0) for a space strongly hyperbolic with parameter eps.

    Valid when ``exp(-eps A0)`` lies where ``-log(1 - a) <= 2a`` (a <= 0.79);
    the default ``A0 = max(1, 1/eps)`` keeps it at most 1/e.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if A0 is None:
        A0 = default_A0(eps)
    if not A0 > 0:
        raise ValueError("A0 must be positive")
    return 4.0 / eps, eps / 2.0, 2.0 * A0
