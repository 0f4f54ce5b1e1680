"""Pure-Python scalar kernels; reference twin of ``_kernels.pyx``."""
import math

# Stand-in for an infinite dual exponent; exp(-LOG_CAP) underflows to 0.0.
LOG_CAP = 1000.0


def _block_value(qs, as_):
    if qs <= 0.0:
        return -math.inf
    if as_ <= 0.0:
        return math.inf
    return math.log(qs / as_)


def kl_dual_sorted(q, alpha):
    """Dual exponents x for the KL projection of sorted ``q`` onto P_alpha.

    Minimizes sum q_i exp(-x_i) + alpha_i x_i over x_1 >= ... >= x_n >= 0 by
    pooling adjacent violators on the blockwise minimizers log(Q_B / A_B) and
    clipping at zero.  ``q`` and ``alpha`` must both be nonincreasing.
    """
    n = len(q)
    starts, qsum, asum, val = [], [], [], []
    for i in range(n):
        starts.append(i)
        qsum.append(float(q[i]))
        asum.append(float(alpha[i]))
        val.append(_block_value(qsum[-1], asum[-1]))
        while len(val) > 1 and val[-2] < val[-1]:
            qsum[-2] += qsum[-1]
            asum[-2] += asum[-1]
            starts.pop()
            qsum.pop()
            asum.pop()
            val.pop()
            val[-1] = _block_value(qsum[-1], asum[-1])
    x = [0.0] * n
    ends = starts[1:] + [n]
    for s, e, v in zip(starts, ends, val):
        xv = LOG_CAP if v > LOG_CAP else (v if v > 0.0 else 0.0)
        for i in range(s, e):
            x[i] = xv
    return x


def _one_minus_tail(x):
    # 1 - exp(-x) (1 + x), accurate for small x
    if x < 1e-2:
        x2 = x * x
        return x2 * (0.5 - x / 3.0 + x2 / 8.0 - x2 * x / 30.0)
    return 1.0 - math.exp(-x) * (1.0 + x)


def kl_projection_gap(q, x):
    """D(p || q) for p_i = q_i exp(-x_i)."""
    total = 0.0
    for qi, xi in zip(q, x):
        if qi > 0.0 and xi > 0.0:
            total += qi * _one_minus_tail(xi)
    return total


def gen_kl(p, q):
    """Generalized KL divergence with 0 log 0 = 0; inf on support violation."""
    total = 0.0
    for pi, qi in zip(p, q):
        if pi > 0.0:
            if qi <= 0.0:
                return math.inf
            total += pi * math.log(pi / qi) - pi + qi
        else:
            total += qi
    return total


def halfspace_z(nu, w, k, tol=1e-12):
    """argmin_{z >= 0} sum exp(w_i z) nu_i - k z by bisection on the derivative."""
    def slope(z):
        s = 0.0
        for ni, wi in zip(nu, w):
            if wi > 0.0 and ni > 0.0:
                s += wi * ni * math.exp(wi * z)
        return s - k

    if slope(0.0) >= 0.0:
        return 0.0
    hi = 1.0
    for _ in range(2000):
        if slope(hi) >= 0.0:
            break
        hi *= 2.0
        if hi > 1e300:
            raise ArithmeticError("half-space objective unbounded below")
    else:
        raise ArithmeticError("half-space objective unbounded below")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if slope(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
