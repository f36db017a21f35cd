"""Scalar evaluation of q(tau, w) = w e^{w tau}/(e^w - 1) and its mode sums."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .bernoulli import eval_bernoulli, lanczos_polynomial, shared_table
from .summation import kahan_add

TWO_PI = 2.0 * math.pi

#: the closed form loses about |w|^{-1} digits near the removable
#: singularity; below this radius the generating series is used instead
SERIES_RADIUS = 1e-1

#: distance to a nonzero pole 2*pi*i*k below which evaluation is refused
POLE_TOL = 1e-12


class PoleProximityError(ValueError):
    """Raised when w lies within POLE_TOL of a nonzero pole 2*pi*i*k."""


def check_pole(w: complex) -> complex:
    """Return w as a complex number, refusing near-pole arguments."""
    w = complex(w)
    k = round(w.imag / TWO_PI)
    if k != 0 and abs(w - complex(0.0, TWO_PI * k)) < POLE_TOL:
        raise PoleProximityError(
            f"w={w} is within {POLE_TOL} of the pole {TWO_PI * k}i")
    return w


@dataclass(frozen=True)
class ApproxParams:
    """The parameter tuple (p, N, ell, tau, w) shared by every approximation.

    p is the order of the polynomial part (p = 2n + 2 for the even family),
    N the number of retained modes, ell the correction depth, tau the
    evaluation point in [0, 1], and w the (complex) argument.  alpha is the
    offset used when evaluating at tau = 0 through the shift identity.
    """

    p: int
    N: int
    tau: float
    w: complex = 0.0
    ell: int = 0
    alpha: float = 0.125

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.ell < 0:
            raise ValueError("ell must be >= 0")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        check_pole(self.w)

    @property
    def n(self) -> int | None:
        """Half-order with p = 2n + 2; None when p is odd."""
        if self.p % 2 == 0 and self.p >= 2:
            return (self.p - 2) // 2
        return None

    @property
    def z(self) -> complex:
        return complex(self.w) / TWO_PI


@dataclass(frozen=True)
class ModeCoefficients:
    """Trigonometric coefficients (c_k, s_k) of one residual mode."""

    k: int
    c: complex
    s: complex


def reference_q(tau: float, w: complex) -> complex:
    """Closed-form q for |w| >= SERIES_RADIUS, generating series below it.

    The removable singularity at w = 0 takes the value 1; for large
    positive real part the closed form is rewritten to avoid overflow.
    """
    w = check_pole(w)
    if abs(w) < SERIES_RADIUS:
        table = shared_table()
        acc = 0.0 + 0.0j
        term = 1.0 + 0.0j  # w^k / k!
        for k in range(table.max_degree + 1):
            t = eval_bernoulli(table, k, tau) * term
            acc += t
            term *= w / (k + 1)
            if abs(t) <= 1e-18 * abs(acc):
                break
        return acc
    if w.real > 0.0:
        return w * cmath.exp(w * (tau - 1.0)) / (1.0 - cmath.exp(-w))
    return w * cmath.exp(w * tau) / (cmath.exp(w) - 1.0)


def hat_coefficients(k: int, w: complex) -> tuple[complex, complex]:
    """Fourier coefficients of q itself: (c_hat_k, s_hat_k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    w = check_pole(w)
    den = w * w + (TWO_PI * k) ** 2
    return w * w / den, -TWO_PI * k * w / den


def parity_signs(p: int) -> tuple[float, float]:
    """(cosine, sine) signs multiplying the order-p base magnitudes.

    The shared sign is (-1)^ceil((p+1)/2); for odd p the cosine family
    carries the opposite sign (verified against quadrature of the Fourier
    integrals, see the acceleration module's base coefficients).
    """
    sg = (-1.0) ** ((p + 2) // 2)
    if p % 2 == 0:
        return sg, sg
    return -sg, sg


def _gamma0(p, k, w):
    """Cosine-family base magnitude; k may be an int or a numpy array."""
    tk = TWO_PI * k
    den = w * w + tk * tk
    if p % 2 == 0:
        return w ** p / (tk ** (p - 2) * den)
    return w ** (p + 1) / (tk ** (p - 1) * den)


def _delta0(p, k, w):
    """Sine-family base magnitude (parity-swapped counterpart of _gamma0)."""
    tk = TWO_PI * k
    den = w * w + tk * tk
    if p % 2 == 0:
        return w ** (p + 1) / (tk ** (p - 1) * den)
    return w ** p / (tk ** (p - 2) * den)


def lanczos_coefficients(p: int, k: int, w: complex) -> ModeCoefficients:
    """Order-p residual-mode coefficients (c_k, s_k)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    w = check_pole(w)
    sc, ss = parity_signs(p)
    return ModeCoefficients(k=k, c=sc * _gamma0(p, k, w),
                            s=ss * _delta0(p, k, w))


def fourier_partial(tau: float, w: complex, N: int) -> complex:
    """Plain N-mode Fourier partial sum of q (slow O(1/N) convergence)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    w = check_pole(w)
    acc = 1.0 + 0.0j
    comp = 0.0 + 0.0j
    for k in range(1, N + 1):
        ch, sh = hat_coefficients(k, w)
        term = 2.0 * (ch * math.cos(TWO_PI * k * tau)
                      + sh * math.sin(TWO_PI * k * tau))
        acc, comp = kahan_add(acc, comp, term)
    return acc


def g_approx(params: ApproxParams) -> complex:
    """Polynomial part plus the N-mode trigonometric remainder sum."""
    p, N, tau = params.p, params.N, params.tau
    w = check_pole(params.w)
    table = shared_table(p - 1)
    acc = lanczos_polynomial(table, p, tau, w)
    comp = 0.0 + 0.0j
    sc, ss = parity_signs(p)
    for k in range(1, N + 1):
        term = 2.0 * (sc * _gamma0(p, k, w) * math.cos(TWO_PI * k * tau)
                      + ss * _delta0(p, k, w) * math.sin(TWO_PI * k * tau))
        acc, comp = kahan_add(acc, comp, term)
    return acc


def residual_l2(p: int, w: complex, N: int, K: int) -> float:
    """L2 norm of the order-p residual restricted to modes N+1 .. K.

    Computed from the coefficients directly (Parseval), which is exact for
    the trigonometric remainder and avoids quadrature noise.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if K < N:
        raise ValueError("K must be >= N")
    if K == N:
        return 0.0
    w = check_pole(w)
    k = np.arange(N + 1, K + 1, dtype=np.float64)
    mags = np.abs(_gamma0(p, k, w)) ** 2 + np.abs(_delta0(p, k, w)) ** 2
    # summed in ascending magnitude, i.e. descending k
    return math.sqrt(2.0 * float(np.sum(mags[::-1])))


def delta_of_N(z: complex, N: int, K: int) -> float:
    """Scaled residual norm N^{7/2} |z|^{-4} ||R_{4,N}||_2 over modes <= K."""
    if K < 2 * N:
        raise ValueError("K must be >= 2N")
    z = complex(z)
    return N ** 3.5 * abs(z) ** -4.0 * residual_l2(4, TWO_PI * z, N, K)
