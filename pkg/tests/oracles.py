"""Independent reference data for the tests.

Two kinds of oracle live here, deliberately decoupled from the library's
solution path:

* closed-form factor columns, metric functions and R2 coefficients of the two
  monodromy families, written directly from the printed formulas;
* a truncated Fourier-Galerkin solver for the boundary relation
  M*phi+ = phi- on the unit circle, which knows nothing about rational
  structure, interior poles or the analyticity reduction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EpsFamily:
    """lambda = +1 family with parameter eps."""

    eps: complex
    rho: float
    v: float

    @property
    def root(self) -> float:
        return math.sqrt(self.v * self.v + self.rho * self.rho)

    @property
    def tau0(self) -> float:
        return (self.v - self.root) / self.rho

    @property
    def tau0tilde(self) -> float:
        return (self.v + self.root) / self.rho

    @property
    def axis_m(self) -> float:
        return (self.v + self.root) / 2.0

    def omega(self, t):
        return self.v + 0.5 * self.rho * (1.0 - t * t) / t

    def m_plus(self, t):
        return 1.0 - t / self.tau0tilde

    def m_minus(self, t):
        return 0.5 * self.rho * self.tau0tilde * (t - self.tau0) / t

    def f_plus(self, t):
        return np.array([self.m_plus(t), 0.0 * t])

    def f_minus(self, t):
        return np.array([1.0 / self.m_minus(t), self.eps / self.m_minus(t)])

    def s_plus(self, t):
        mp = self.m_plus(t)
        return np.array([self.eps * (mp - 1.0 / mp), 1.0 / mp])

    def s_minus(self, t):
        mm = self.m_minus(t)
        return np.array([self.eps / mm, mm + self.eps * self.eps / mm])

    def q(self, t):
        w = self.omega(t)
        return 1.0 / (w * w + self.eps * self.eps)

    def p1(self, t):
        return t * t

    def p2(self, t):
        return (0.25 * self.rho ** 2 * (t - self.tau0) ** 2
                * (t - self.tau0tilde) ** 2 + self.eps ** 2 * t * t)

    def r2_coeffs(self):
        """(E, D, C, B, A) ascending for R2 = eps*t^3*(t/t0t^2 - 2/t0t)."""
        t0t = self.tau0tilde
        return (0.0, 0.0, 0.0, -2.0 * self.eps / t0t, self.eps / t0t ** 2)

    def R2(self, t):
        return self.eps * t ** 3 * (t / self.tau0tilde ** 2
                                    - 2.0 / self.tau0tilde)

    @property
    def Delta(self) -> float:
        m = self.axis_m
        return (m / (abs(self.eps) ** 2 + m * m)).real

    @property
    def B(self) -> float:
        return (2.0 * self.eps * (self.v - self.root)).real

    @property
    def e_psi(self) -> float:
        return (self.v + self.root) / (2.0 * self.root)

    def matrix_at(self, t):
        w = self.omega(t)
        e = self.eps
        return np.array([[1.0 / w, e / w], [e / w, w + e * e / w]])


@dataclass(frozen=True)
class CsFamily:
    """lambda = -1 family with parameters (c, s), c^2 - s^2 = 1."""

    c: complex
    s: complex
    rho: float
    v: float

    @property
    def root(self) -> float:
        return math.sqrt(self.v * self.v - self.rho * self.rho)

    @property
    def tau0(self) -> float:
        return (-self.v + self.root) / self.rho

    @property
    def tau0tilde(self) -> float:
        return (-self.v - self.root) / self.rho

    @property
    def axis_m(self) -> float:
        return (self.v + self.root) / 2.0

    def omega(self, t):
        return self.v + 0.5 * self.rho * (1.0 + t * t) / t

    def m_plus(self, t):
        return 1.0 - t * self.tau0  # 1/tau0tilde = tau0

    def m_minus(self, t):
        return -0.5 * self.rho * self.tau0tilde * (t - self.tau0) / t

    def f_plus(self, t):
        mp = self.m_plus(t)
        c2, s2, cs = self.c ** 2, self.s ** 2, self.c * self.s
        return np.array([c2 * mp - s2 / mp, cs * (1.0 / mp - mp)])

    def f_minus(self, t):
        mm = self.m_minus(t)
        c2, s2, cs = self.c ** 2, self.s ** 2, self.c * self.s
        return np.array([c2 / mm + s2 * mm, cs * (1.0 / mm + mm)])

    def s_plus(self, t):
        mp = self.m_plus(t)
        c2, s2, cs = self.c ** 2, self.s ** 2, self.c * self.s
        return np.array([cs * (mp - 1.0 / mp), c2 / mp - s2 * mp])

    def s_minus(self, t):
        mm = self.m_minus(t)
        c2, s2, cs = self.c ** 2, self.s ** 2, self.c * self.s
        return np.array([cs * (1.0 / mm + mm), s2 / mm + c2 * mm])

    def q(self, t):
        w = self.omega(t)
        c2, s2 = self.c ** 2, self.s ** 2
        return (c2 + s2 * w * w) / (c2 * w * w + s2)

    def r2(self, t):
        """Closed form r2 = -(q f1+ + c^2/m+ - s^2 m+) f2+."""
        mp = self.m_plus(t)
        c2, s2 = self.c ** 2, self.s ** 2
        f1p, f2p = self.f_plus(t)
        return -(self.q(t) * f1p + c2 / mp - s2 * mp) * f2p

    @property
    def Delta(self) -> float:
        m = self.axis_m
        return (m / (self.s ** 2 + self.c ** 2 * m * m)).real

    @property
    def B(self) -> float:
        return (-2.0 * self.c * self.s * (self.v - self.root)).real

    @property
    def e_psi(self) -> float:
        return (self.v + self.root) / (2.0 * self.root)

    def matrix_at(self, t):
        w = self.omega(t)
        c2, s2, cs = self.c ** 2, self.s ** 2, self.c * self.s
        return np.array([[c2 / w + s2 * w, cs * (1.0 / w + w)],
                         [cs * (1.0 / w + w), c2 * w + s2 / w]])


def galerkin_columns(matrix_at, norm, nmodes: int = 64, nfft: int = 512):
    """Brute-force Fourier-Galerkin solve of M*phi+ = phi- on |tau| = 1.

    phi+ is expanded in tau^0..tau^nmodes, the positive Fourier modes 1..nmodes
    of M*phi+ are forced to vanish, and phi+(0) = norm closes the system.
    phi- is reassembled from the non-positive modes of M*phi+.  Returns
    callables (phi_plus, phi_minus) mapping arrays of contour points to
    2-vector arrays of shape (2, len(points)).
    """
    theta = 2.0 * np.pi * np.arange(nfft) / nfft
    zs = np.exp(1j * theta)
    samples = np.array([matrix_at(z) for z in zs])      # (nfft, 2, 2)
    mhat = np.fft.fft(samples, axis=0) / nfft           # coefficient of tau^k

    def coeff(k):
        return mhat[k % nfft]

    nun = 2 * (nmodes + 1)
    rows = np.zeros((2 * nmodes + 2, nun), dtype=complex)
    rhs = np.zeros(2 * nmodes + 2, dtype=complex)
    for n in range(1, nmodes + 1):
        for k in range(nmodes + 1):
            block = coeff(n - k)
            rows[2 * (n - 1): 2 * n, 2 * k: 2 * k + 2] = block
    rows[2 * nmodes, 0] = 1.0
    rows[2 * nmodes + 1, 1] = 1.0
    rhs[2 * nmodes] = norm[0]
    rhs[2 * nmodes + 1] = norm[1]
    sol, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    cplus = sol.reshape(nmodes + 1, 2)

    # non-positive modes of M*phi+ give phi-
    dminus = {}
    for n in range(-nmodes, 1):
        acc = np.zeros(2, dtype=complex)
        for k in range(nmodes + 1):
            acc += coeff(n - k) @ cplus[k]
        dminus[n] = acc

    def phi_plus(pts):
        pts = np.asarray(pts)
        acc = np.zeros((2,) + pts.shape, dtype=complex)
        for k in range(nmodes + 1):
            acc += cplus[k][:, None] * pts[None, :] ** k
        return acc

    def phi_minus(pts):
        pts = np.asarray(pts)
        acc = np.zeros((2,) + pts.shape, dtype=complex)
        for n in range(-nmodes, 1):
            acc += dminus[n][:, None] * pts[None, :] ** float(n)
        return acc

    return phi_plus, phi_minus
