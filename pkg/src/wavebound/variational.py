"""Analytic window thresholds and the model-B existence certificate.

Three ingredients bracket the model-A emergence threshold and certify
binding for model B:

* ``q2_closed`` / ``q2_quadrature``: the reduced window functional whose
  sign decides whether a variational trial state beats the threshold;
  its unique root in (0, 1) is the upper estimate ``lambda2()``.
* ``konec2_rhs``: the rational function whose crossing with 1 - 2/pi
  yields the lower estimate ``lambda1() = kappa0/pi``.
* ``modelB_certificate``: the two-parameter trial-state energy whose
  negativity certifies a model-B bound state for any window size.

The trial profiles entering the window functional solve a coupled
linear Euler system; their closed forms and analytic derivatives are
implemented in ``TrialProfiles`` and verified by the test suite (Euler
residuals, finite-difference derivative checks, and quadrature
equivalence of the closed-form functional).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize

__all__ = [
    "T1",
    "T2",
    "KONEC2_LHS",
    "KAPPA_MAX",
    "TrialProfiles",
    "euler_residuals",
    "q2_closed",
    "q2_quadrature",
    "lambda2",
    "konec2_rhs",
    "kappa0",
    "lambda1",
    "certificate_norms",
    "modelB_certificate",
    "find_negative_certificate",
    "ThresholdReport",
]

_PI = math.pi

#: hyperbolic rates of the even/odd profile components
T1 = math.sqrt((4.0 - _PI) / (_PI**2 + 2.0 * _PI - 16.0))
T2 = math.sqrt(3.0 * (3.0 * _PI - 8.0) / (9.0 * _PI**2 - 18.0 * _PI - 32.0))

#: left-hand side of the window inequality deciding lambda1
KONEC2_LHS = 1.0 - 2.0 / _PI

#: upper end of the admissible kappa window (denominator sign change)
KAPPA_MAX = (math.sqrt(129.0) - 1.0) / (8.0 * math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Trial profiles (closed-form Euler solutions) and the window functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialProfiles:
    """Closed-form trial profiles chi, phi, psi, eta on [-delta, delta].

    They solve the coupled Euler system of the window functional with
    boundary values phi(-delta) = psi(delta) = 1, phi(delta) =
    psi(-delta) = 0 and chi, eta vanishing at both ends.  ``phi(x) =
    psi(-x)``, chi is odd and eta is even.  Analytic first and second
    derivatives are provided for the functional quadrature and the Euler
    residual check.
    """

    delta: float
    d: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.delta < self.d):
            raise ValueError(
                f"window must satisfy 0 < delta < d, got delta={self.delta}, d={self.d}"
            )

    # rates of the three longitudinal components
    @property
    def _a1(self) -> float:  # cosh component of phi/psi and eta
        return _PI * T1 / self.d

    @property
    def _a2(self) -> float:  # sinh component of phi/psi and chi
        return _PI * T2 / self.d

    @property
    def _a3(self) -> float:  # sinh component of chi
        return math.sqrt(3.0) * _PI / (2.0 * self.d)

    @property
    def _a4(self) -> float:  # cosine component of eta
        return _PI / (2.0 * self.d)

    # normalized component functions: value 1 at x = delta (cosh/cos: even)
    def _ch1(self, x):
        return np.cosh(self._a1 * x) / math.cosh(self._a1 * self.delta)

    def _sh2(self, x):
        return np.sinh(self._a2 * x) / math.sinh(self._a2 * self.delta)

    def _sh3(self, x):
        return np.sinh(self._a3 * x) / math.sinh(self._a3 * self.delta)

    def _cs4(self, x):
        return np.cos(self._a4 * x) / math.cos(self._a4 * self.delta)

    def chi(self, x):
        return (4.0 / (3.0 * _PI)) * (self._sh3(x) - self._sh2(x))

    def phi(self, x):
        return 0.5 * (self._ch1(x) - self._sh2(x))

    def psi(self, x):
        return 0.5 * (self._ch1(x) + self._sh2(x))

    def eta(self, x):
        return (2.0 / _PI) * (self._cs4(x) - self._ch1(x))

    # first derivatives
    def _dch1(self, x):
        return self._a1 * np.sinh(self._a1 * x) / math.cosh(self._a1 * self.delta)

    def _dsh2(self, x):
        return self._a2 * np.cosh(self._a2 * x) / math.sinh(self._a2 * self.delta)

    def _dsh3(self, x):
        return self._a3 * np.cosh(self._a3 * x) / math.sinh(self._a3 * self.delta)

    def _dcs4(self, x):
        return -self._a4 * np.sin(self._a4 * x) / math.cos(self._a4 * self.delta)

    def dchi(self, x):
        return (4.0 / (3.0 * _PI)) * (self._dsh3(x) - self._dsh2(x))

    def dphi(self, x):
        return 0.5 * (self._dch1(x) - self._dsh2(x))

    def dpsi(self, x):
        return 0.5 * (self._dch1(x) + self._dsh2(x))

    def deta(self, x):
        return (2.0 / _PI) * (self._dcs4(x) - self._dch1(x))

    # second derivatives (cosh/sinh reproduce with rate^2, cos with -rate^2)
    def d2chi(self, x):
        return (4.0 / (3.0 * _PI)) * (
            self._a3**2 * self._sh3(x) - self._a2**2 * self._sh2(x)
        )

    def d2phi(self, x):
        return 0.5 * (self._a1**2 * self._ch1(x) - self._a2**2 * self._sh2(x))

    def d2psi(self, x):
        return 0.5 * (self._a1**2 * self._ch1(x) + self._a2**2 * self._sh2(x))

    def d2eta(self, x):
        return (2.0 / _PI) * (-self._a4**2 * self._cs4(x) - self._a1**2 * self._ch1(x))

    def functional_integrand(self, x):
        """Quadratic density of the reduced window functional."""
        d = self.d
        phi, psi = self.phi(x), self.psi(x)
        chi, eta = self.chi(x), self.eta(x)
        dphi, dpsi = self.dphi(x), self.dpsi(x)
        dchi, deta = self.dchi(x), self.deta(x)
        return (
            (d / 2.0) * (dphi**2 + dpsi**2 + dchi**2)
            + d * deta**2
            + (2.0 * d / _PI) * dphi * dpsi
            + (4.0 * d / (3.0 * _PI)) * dchi * (dpsi - dphi)
            + (4.0 * d / _PI) * deta * (dphi + dpsi)
            + (_PI / d) * chi * (psi - phi)
            + (3.0 * _PI**2 / (8.0 * d)) * chi**2
            - (_PI / d) * phi * psi
            - (_PI**2 / (4.0 * d)) * eta**2
            - (_PI / d) * eta * (psi + phi)
        )


def euler_residuals(profiles: TrialProfiles, x) -> np.ndarray:
    """Residuals of the four Euler equations at points x, shape (4, len(x)).

    Zero (to rounding) certifies that the closed-form profiles solve the
    stationarity system of the window functional.
    """
    d = profiles.d
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi, psi = profiles.phi(x), profiles.psi(x)
    chi, eta = profiles.chi(x), profiles.eta(x)
    d2phi, d2psi = profiles.d2phi(x), profiles.d2psi(x)
    d2chi, d2eta = profiles.d2chi(x), profiles.d2eta(x)
    r1 = (
        d * d2phi
        + (2.0 * d / _PI) * d2psi
        - (4.0 * d / (3.0 * _PI)) * d2chi
        + (4.0 * d / _PI) * d2eta
        + (_PI / d) * (psi + eta + chi)
    )
    r2 = (
        d * d2psi
        + (2.0 * d / _PI) * d2phi
        + (4.0 * d / (3.0 * _PI)) * d2chi
        + (4.0 * d / _PI) * d2eta
        + (_PI / d) * (phi + eta - chi)
    )
    r3 = (
        d * d2chi
        + (4.0 * d / (3.0 * _PI)) * (d2psi - d2phi)
        - (_PI / d) * (psi - phi)
        - (3.0 * _PI**2 / (4.0 * d)) * chi
    )
    r4 = (
        2.0 * d * d2eta
        + (4.0 * d / _PI) * (d2psi + d2phi)
        + (_PI / d) * (psi + phi)
        + (_PI**2 / (2.0 * d)) * eta
    )
    return np.stack([r1, r2, r3, r4])


#: coefficients of the closed-form window functional
_C1 = math.sqrt((4.0 - _PI) * (_PI**2 + 2.0 * _PI - 16.0)) / (2.0 * _PI)
_C2 = 8.0 / (3.0 * math.sqrt(3.0) * _PI)
_C3 = math.sqrt((3.0 * _PI - 8.0) * (9.0 * _PI**2 - 18.0 * _PI - 32.0)) / (
    6.0 * math.sqrt(3.0) * _PI
)
_C4 = 4.0 / _PI


def q2_closed(delta: float, d: float = 1.0) -> float:
    """Closed form of the reduced window functional at the Euler profiles.

    Diverges to +inf as delta -> 0+ (coth terms) and to -inf as
    delta -> d- (tan term); its unique root defines lambda2.
    """
    if not (0.0 < delta < d):
        raise ValueError(f"window must satisfy 0 < delta < d, got delta={delta}, d={d}")
    r = delta / d
    return (
        _C1 * math.tanh(_PI * r * T1)
        + _C2 / math.tanh(math.sqrt(3.0) * _PI * r / 2.0)
        + _C3 / math.tanh(_PI * r * T2)
        - _C4 * math.tan(_PI * r / 2.0)
    )


def q2_quadrature(delta: float, d: float = 1.0) -> float:
    """The same functional by adaptive quadrature of the ten-term density.

    This is the independent oracle for ``q2_closed``.
    """
    profiles = TrialProfiles(delta=delta, d=d)
    val, err = quad(
        lambda x: float(profiles.functional_integrand(x)),
        -delta,
        delta,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=300,
    )
    if err > 1e-10:
        raise RuntimeError(f"window functional quadrature did not converge: err={err}")
    return val


def _bisect(f, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Plain bisection; requires a sign change on [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise RuntimeError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


@lru_cache(maxsize=1)
def lambda2() -> float:
    """Upper window estimate: the root of q2_closed in (0.05, 0.95)."""
    return _bisect(q2_closed, 0.05, 0.95, tol=1e-10)


# ---------------------------------------------------------------------------
# The lower estimate lambda1 from the kappa inequality
# ---------------------------------------------------------------------------


def konec2_rhs(kappa: float) -> float:
    """Right-hand side of the window inequality in the variable kappa.

    Defined for 0 < kappa < KAPPA_MAX (the denominator changes sign at
    the upper end).  Vanishes as kappa -> 0 and diverges at KAPPA_MAX.
    """
    if not (0.0 < kappa < KAPPA_MAX):
        raise ValueError(
            f"kappa must lie in (0, {KAPPA_MAX:.6f}), got {kappa}"
        )
    s = 2.0 * math.sqrt(2.0)
    num = 3.0 * kappa * (s * (1.0 + kappa) * kappa + 1.0 - kappa)
    den = (1.0 - kappa) * (2.0 * s * (1.0 - kappa**2) - kappa)
    return num / den


@lru_cache(maxsize=1)
def kappa0() -> float:
    """The crossing konec2_rhs(kappa) = 1 - 2/pi."""
    return _bisect(
        lambda k: konec2_rhs(k) - KONEC2_LHS,
        1e-6,
        KAPPA_MAX - 1e-6,
        tol=1e-12,
    )


def lambda1() -> float:
    """Lower window estimate Lambda1 = kappa0 / pi."""
    return kappa0() / _PI


# ---------------------------------------------------------------------------
# Model-B existence certificate
# ---------------------------------------------------------------------------


def _bump(x, delta):
    """Smooth compactly supported bump exp(-1/(1 - (x/delta)^2)) on (-delta, delta)."""
    u = np.asarray(x, dtype=float) / delta
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


def _bump_prime(x, delta):
    """Analytic derivative of the bump."""
    u = np.asarray(x, dtype=float) / delta
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    w = 1.0 - ui * ui
    out[inside] = np.exp(-1.0 / w) * (-2.0 * ui / delta) / (w * w)
    return out


@lru_cache(maxsize=32)
def certificate_norms(delta: float, d: float = 1.0) -> tuple[float, float, float]:
    """Coefficients (A, B, C) of the certificate q = sigma A - eps B + eps^2 C.

    A = ||phi'||^2 for the plateau function (1 on [-2 delta, 2 delta],
    Gaussian decay outside), B = (pi/d) sqrt(2/d) ||j||^2 for the bump
    localization j, and C = 4 d ||j j'||^2 - d mu ||j^2||^2.  All norms
    by adaptive quadrature.
    """
    b = 2.0 * delta
    mu = _PI**2 / (4.0 * d * d)

    # plateau envelope: 1 on [-b, b], exp(-((|x|-b)/d)^2) outside
    def dplateau_sq(x):
        t = (x - b) / d
        return (2.0 * t / d * math.exp(-t * t)) ** 2

    half, err1 = quad(dplateau_sq, b, b + 12.0 * d, epsabs=1e-12, limit=200)
    A = 2.0 * half

    j_sq, err2 = quad(lambda x: float(_bump(x, delta) ** 2), -delta, delta,
                      epsabs=1e-12, limit=200)
    jjp_sq, err3 = quad(lambda x: float((_bump(x, delta) * _bump_prime(x, delta)) ** 2),
                        -delta, delta, epsabs=1e-12, limit=200)
    j2_sq, err4 = quad(lambda x: float(_bump(x, delta) ** 4), -delta, delta,
                       epsabs=1e-12, limit=200)
    if max(err1, err2, err3, err4) > 1e-9:
        raise RuntimeError("certificate norm quadrature did not converge")

    B = (_PI / d) * math.sqrt(2.0 / d) * j_sq
    C = 4.0 * d * jjp_sq - d * mu * j2_sq
    return A, B, C


def modelB_certificate(delta: float, d: float, sigma: float, epsilon: float) -> float:
    """Trial-state energy excess q[Phi_{sigma, eps}] for model B.

    Negative values certify a bound state below the threshold.  The
    linear-in-epsilon term is strictly negative, so for every delta > 0
    suitable (sigma, epsilon) make the certificate negative.
    """
    if sigma < 0.0 or epsilon < 0.0:
        raise ValueError("sigma and epsilon must be nonnegative")
    if not (delta > 0.0) or not (d > 0.0):
        raise ValueError("delta and d must be positive")
    A, B, C = certificate_norms(delta, d)
    return sigma * A - epsilon * B + epsilon * epsilon * C


def find_negative_certificate(
    delta: float, d: float = 1.0
) -> tuple[float, float, float]:
    """Search (sigma, epsilon) making the certificate negative.

    Coarse log-grid search over sigma in 10^[-6, 0], epsilon in
    10^[-4, 0], followed by local refinement.  Returns
    (sigma, epsilon, value) with the most negative value found.
    """
    best = None
    for sigma in np.logspace(-6.0, 0.0, 13):
        for eps in np.logspace(-4.0, 0.0, 13):
            val = modelB_certificate(delta, d, sigma, eps)
            if best is None or val < best[2]:
                best = (sigma, eps, val)
    sigma, eps, _ = best

    def objective(p):
        s, e = math.exp(p[0]), math.exp(p[1])
        return modelB_certificate(delta, d, s, e)

    res = minimize(
        objective,
        [math.log(sigma), math.log(eps)],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400},
    )
    # the certificate increases with sigma, so the optimizer drives sigma
    # toward zero; clamp to a positive floor (the construction needs sigma > 0)
    s = max(math.exp(res.x[0]), 1e-12)
    e = math.exp(res.x[1])
    val = modelB_certificate(delta, d, s, e)
    if val < best[2]:
        best = (s, e, val)
    return best


# ---------------------------------------------------------------------------
# Threshold report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    """The three window thresholds and their expected ordering."""

    lambda1: float
    kappa0: float
    lambda2: float
    lambda0_numeric: float | None = None

    @property
    def ordering_ok(self) -> bool:
        """lambda1 < lambda0 < lambda2 < 1 (false when lambda0 unresolved)."""
        if self.lambda0_numeric is None:
            return False
        return (
            0.0 < self.lambda1 < self.lambda0_numeric < self.lambda2 < 1.0
        )
