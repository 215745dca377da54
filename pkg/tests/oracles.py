"""Independent closed-form reference values.

Nothing here imports quasisl: each oracle is derived by hand and solved
with scipy only.
"""

import math

from scipy.optimize import brentq


def delta_dispersion(k, alpha, x0):
    """k sin k - alpha sin(k x0) sin(k (1 - x0)); zero at sqrt(lambda).

    Matching sin(k x) on the left with C sin(k (1 - x)) on the right under
    the jump u'(x0+) - u'(x0-) = -alpha u(x0).
    """
    return k * math.sin(k) - alpha * math.sin(k * x0) * math.sin(k * (1 - x0))


def delta_ground_state(alpha, x0):
    """Principal Dirichlet eigenvalue of -u'' - alpha delta(x - x0) on (0, 1), alpha > 0 small.

    The first sign change of the dispersion function in (0, pi].
    """
    ks = [0.05 * j for j in range(1, 63)] + [math.pi]
    prev = ks[0]
    for k in ks[1:]:
        if delta_dispersion(prev, alpha, x0) * delta_dispersion(k, alpha, x0) <= 0:
            root = brentq(delta_dispersion, prev, k, args=(alpha, x0), xtol=1e-15, rtol=1e-15)
            return root * root
        prev = k
    raise RuntimeError("no root below pi")


# frozen by the computation above (alpha = 1, x0 = 1/2)
DELTA_LAMBDA1 = 7.764571943582431


def dirichlet_constant(n, length):
    return (n * math.pi / length) ** 2


def mixed_constant(n):
    """u(0) = 0, u'(pi) = 0 for -u'' on (0, pi): (n - 1/2)^2."""
    return (n - 0.5) ** 2
