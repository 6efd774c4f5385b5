"""Independent reference computations used by the tests.

None of these call into the package; each uses a different method from
the code under test (dense linear algebra, high-precision arithmetic,
fixed Gauss rules, plain loops).
"""

import math

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

mpmath.mp.dps = 30


def sin_product(z, n_pairs=200_000):
    """z * prod_{k<=N} (1 - z^2/(k pi)^2), with the tail
    log prod_{k>N} ~ -(z/pi)^2 (1/N - 1/(2N^2)) folded in."""
    z = mpmath.mpc(z)
    zz = z * z / mpmath.pi ** 2
    k = np.arange(1, n_pairs + 1, dtype=float)
    # float64 summation of the small terms is adequate at the 1e-10 level
    terms = np.log1p(-complex(zz) / (k * k))
    log_sum = mpmath.mpc(terms.sum())
    tail = -zz * (mpmath.mpf(1) / n_pairs - mpmath.mpf(1) / (2 * n_pairs ** 2))
    return complex(z * mpmath.exp(log_sum + tail))


def sinc_sqrt(z):
    """sin(sqrt z)/sqrt z, the product over the zeros (k pi)^2."""
    s = mpmath.sqrt(mpmath.mpc(z))
    return complex(mpmath.sin(s) / s) if s != 0 else 1.0


def central_difference(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def laplacian_root_bisection(a, beta, k):
    """k-th positive root (k >= 1) of s tan(s a) = tan(beta) by plain bisection,
    returned as the eigenvalue s^2; valid for 0 < beta < pi/2."""
    lo = (k - 1) * math.pi / a + 1e-15
    hi = (k - 0.5) * math.pi / a - 1e-15

    def f(s):
        return s * math.sin(s * a) * math.cos(beta) - math.cos(s * a) * math.sin(beta)

    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (0.5 * (lo + hi)) ** 2


def fd_schrodinger(a, potential, dirichlet_right, count, n=4000):
    """Lowest eigenvalues of -u'' + V u on [0, a], u'(0) = 0 and either
    u(a) = 0 or u'(a) = 0, by a cell-centred finite-difference matrix with
    Richardson extrapolation over n and 2n cells."""
    def solve(m):
        h = a / m
        x = (np.arange(m) + 0.5) * h
        diag = 2.0 / h ** 2 + potential(x)
        diag[0] -= 1.0 / h ** 2              # Neumann ghost u_{-1} = u_0
        diag[-1] += (1.0 if dirichlet_right else -1.0) / h ** 2
        off = -np.ones(m - 1) / h ** 2
        return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                                select_range=(0, count - 1))

    coarse, fine = solve(n), solve(2 * n)
    return (4 * fine - coarse) / 3


def jacobi_det_poly(b, q, z, k):
    """P_k(z) = det(z I - J_k) / (b_1 ... b_k) from the leading k x k block."""
    if k == 0:
        return 1.0 + 0j
    J = np.diag(np.asarray(q[:k], dtype=complex))
    for i in range(k - 1):
        J[i, i + 1] = J[i + 1, i] = b[i]
    return np.linalg.det(z * np.eye(k) - J) / np.prod(b[:k])


def gauss_fourier(a, c, nodes=400):
    """int_{-a}^{a} exp(c x) dx by a fixed Gauss-Legendre rule."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return complex(a * np.sum(w * np.exp(c * a * x)))


def mp_piece_transform(coeffs, lo, hi, z):
    """int_lo^hi p(x) exp(-izx) dx with mpmath quadrature."""
    def f(x):
        return sum(complex(c) * x ** m for m, c in enumerate(coeffs)) * mpmath.exp(-1j * z * x)
    return complex(mpmath.quad(f, [lo, hi]))


def partial_sum_plus_integral(n, p, c):
    """sum_{j<=n} 1/(c j^p), plus the integral tail and the
    trapezoid correction: an independent estimate of the full sum."""
    j = np.arange(1, n + 1, dtype=float)
    head = math.fsum(1.0 / (c * j ** p))
    tail = n ** (1 - p) / (c * (p - 1)) - 0.5 / (c * n ** p)
    return head + tail
