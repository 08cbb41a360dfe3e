"""Interface-matching eigenvalue solver for the three-region strip.

At a trial energy E below the threshold mu, the field is expanded in
the exact transverse basis of each region:

* region I   (x < -delta):  sum_k a_k exp(+kappa_k (x + delta)) T^I_k(y)
* region II  (|x| < delta): sum_m [alpha_m c_m(x) + beta_m s_m(x)] w_m(y)
* region III (x > delta):   sum_k b_k exp(-kappa_k (x - delta)) T^III_k(y)

with kappa_k the tail decay rates.  The center longitudinal functions
are unit-scaled to keep matrix entries bounded: for m = 0 (the only
propagating center mode below mu) c_0 = cos(sqrt(E) x), s_0 =
sin(sqrt(E) x); for m >= 1 c_m = cosh(gamma_m x)/cosh(gamma_m delta)
and s_m = sinh(gamma_m x)/sinh(gamma_m delta).

Truncating each expansion at N modes and enforcing continuity of the
field (projected on the center basis) and of its x-derivative
(projected on the tail bases) at x = -delta and x = +delta yields a
4N x 4N homogeneous linear system.  Energies where the system is
singular are the discrete eigenvalues; they are located by scanning a
dispersion indicator (determinant sign and smallest singular value)
over (0, mu) and refining the brackets by bisection.

All computations are done in nondimensional units d = 1; reported
eigenvalues are the dimensionless ratios E/mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import lu_factor, svd, svdvals

from .geometry import (
    Geometry,
    ModelKind,
    ProfileKind,
    Region,
    TransverseMode,
    region_profile,
)

__all__ = [
    "MatchingSystem",
    "DispersionTrace",
    "Spectrum",
    "EigenField",
    "assemble",
    "dispersion",
    "dispersion_trace",
    "scan_spectrum",
    "solve_coefficients",
    "evaluate_field",
    "convergence_study",
    "ConvergenceStudy",
]

#: scan window margins, in units of mu
SCAN_LO_FRAC = 1e-8
SCAN_HI_FRAC = 1.0 - 1e-6

#: refinement width, acceptance residual, and stability drift tolerances
REFINE_FRAC = 1e-10
ACCEPT_SIGMA = 1e-6
DIP_SIGMA = 1e-3
STABLE_DRIFT_FRAC = 1e-4
NEAR_THRESHOLD_FRAC = 1e-6

#: truncation bump used by the stability check
STABILITY_BUMP = 8


def _tail_profiles(model: ModelKind) -> tuple[ProfileKind, ProfileKind]:
    return (
        region_profile(model, Region.I),
        region_profile(model, Region.III),
    )


def _overlap_matrix(tail_profile: ProfileKind, N: int) -> np.ndarray:
    """O[k, m] = int tail_k(y) w_m(y) dy for k, m < N (closed forms, d=1)."""
    k = np.arange(N)
    nu = k + 0.5
    m = np.arange(N)
    O = np.empty((N, N))
    O[:, 0] = math.sqrt(2.0) / (nu * math.pi)
    denom = nu[:, None] ** 2 - m[None, 1:] ** 2
    O[:, 1:] = (2.0 * nu[:, None] / math.pi) / denom
    if tail_profile is ProfileKind.ND_COSINE:
        signs = (-1.0) ** (k[:, None] + m[None, :])
        O = O * signs
    return O


@dataclass(frozen=True)
class MatchingSystem:
    """The assembled 4N x 4N interface-matching matrix at energy E.

    Row blocks: value continuity at x = -delta projected on the center
    modes (R1), derivative continuity at -delta projected on the tail-I
    modes (R2), and the analogous blocks R3/R4 at x = +delta.  Column
    blocks: a (tail I), b (tail III), alpha (center even functions),
    beta (center odd functions).
    """

    model: ModelKind
    geometry: Geometry
    N: int
    E: float
    matrix: np.ndarray


def _assemble_general(
    profile_I: ProfileKind,
    profile_III: ProfileKind,
    delta: float,
    N: int,
    E: float,
) -> np.ndarray:
    """Matching matrix for arbitrary tail families (d = 1 units)."""
    mu = math.pi**2 / 4.0
    if not (0.0 < E < mu):
        raise ValueError(f"energy must lie in (0, mu)=(0, {mu}), got {E}")
    if not (4 <= N <= 256):
        raise ValueError(f"truncation N must lie in [4, 256], got {N}")

    k = np.arange(N)
    nu = k + 0.5
    kappa = np.sqrt((nu * math.pi) ** 2 - E)

    m = np.arange(N)
    rootE = math.sqrt(E)
    gamma = np.empty(N)
    gamma[0] = rootE  # placeholder; m=0 handled separately below
    if N > 1:
        gamma[1:] = np.sqrt((m[1:] * math.pi) ** 2 - E)

    # center longitudinal values and derivatives at the interfaces
    c_minus = np.ones(N)  # c_m(-delta)
    c_plus = np.ones(N)  # c_m(+delta)
    s_minus = -np.ones(N)  # s_m(-delta)
    s_plus = np.ones(N)  # s_m(+delta)
    dc_minus = np.empty(N)
    dc_plus = np.empty(N)
    ds_minus = np.empty(N)
    ds_plus = np.empty(N)

    c_minus[0] = c_plus[0] = math.cos(rootE * delta)
    s_plus[0] = math.sin(rootE * delta)
    s_minus[0] = -s_plus[0]
    dc_minus[0] = rootE * math.sin(rootE * delta)
    dc_plus[0] = -dc_minus[0]
    ds_minus[0] = ds_plus[0] = rootE * math.cos(rootE * delta)

    if N > 1:
        gd = gamma[1:] * delta
        tanh = np.tanh(gd)
        dc_plus[1:] = gamma[1:] * tanh
        dc_minus[1:] = -dc_plus[1:]
        ds_plus[1:] = gamma[1:] / tanh
        ds_minus[1:] = ds_plus[1:]

    O_I = _overlap_matrix(profile_I, N)
    O_III = _overlap_matrix(profile_III, N)

    A = np.zeros((4 * N, 4 * N))
    r1 = slice(0, N)
    r2 = slice(N, 2 * N)
    r3 = slice(2 * N, 3 * N)
    r4 = slice(3 * N, 4 * N)
    ca = slice(0, N)
    cb = slice(N, 2 * N)
    cal = slice(2 * N, 3 * N)
    cbe = slice(3 * N, 4 * N)

    # R1: value continuity at x = -delta, projected on w_m
    A[r1, ca] = O_I.T
    A[r1, cal] = -np.diag(c_minus)
    A[r1, cbe] = -np.diag(s_minus)
    # R2: derivative continuity at x = -delta, projected on tail-I modes
    A[r2, ca] = np.diag(kappa)
    A[r2, cal] = -O_I * dc_minus[None, :]
    A[r2, cbe] = -O_I * ds_minus[None, :]
    # R3: value continuity at x = +delta, projected on w_m
    A[r3, cb] = O_III.T
    A[r3, cal] = -np.diag(c_plus)
    A[r3, cbe] = -np.diag(s_plus)
    # R4: derivative continuity at x = +delta, projected on tail-III modes
    A[r4, cb] = -np.diag(kappa)
    A[r4, cal] = -O_III * dc_plus[None, :]
    A[r4, cbe] = -O_III * ds_plus[None, :]
    return A


def assemble(model: ModelKind, geometry: Geometry, N: int, E: float) -> MatchingSystem:
    """Assemble the interface-matching system at energy E (d = 1 units).

    E is the absolute energy of the nondimensional problem, so it must
    lie strictly inside (0, pi^2/4).
    """
    unit = geometry.unit()
    profile_I, profile_III = _tail_profiles(model)
    A = _assemble_general(profile_I, profile_III, unit.delta, N, E)
    return MatchingSystem(model=model, geometry=unit, N=N, E=E, matrix=A)


def _det_sign(A: np.ndarray) -> int:
    """Sign of det(A) from a pivoted LU factorization (never the value)."""
    try:
        lu, piv = lu_factor(A, check_finite=False)
    except Exception:
        return 0
    diag = np.diag(lu)
    if np.any(diag == 0.0) or not np.all(np.isfinite(diag)):
        return 0
    sign = 1 if (np.sum(piv != np.arange(len(piv))) % 2 == 0) else -1
    neg = int(np.sum(diag < 0.0))
    if neg % 2 == 1:
        sign = -sign
    return sign


def _sigma_min(A: np.ndarray) -> float:
    return float(svdvals(A, check_finite=False)[-1])


def dispersion(system: MatchingSystem) -> tuple[int, float]:
    """Dispersion indicator (det_sign, sigma_min) of an assembled system."""
    return _det_sign(system.matrix), _sigma_min(system.matrix)


@dataclass(frozen=True)
class DispersionTrace:
    """Sampled dispersion indicator over the scan window."""

    model: ModelKind
    geometry: Geometry
    N: int
    energies: np.ndarray
    det_signs: np.ndarray
    sigma_mins: np.ndarray

    @property
    def window(self) -> tuple[float, float]:
        return float(self.energies[0]), float(self.energies[-1])


def dispersion_trace(
    model: ModelKind, geometry: Geometry, N: int, grid_points: int = 400
) -> DispersionTrace:
    """Sample the dispersion indicator on a uniform energy grid."""
    unit = geometry.unit()
    mu = unit.mu
    energies = np.linspace(SCAN_LO_FRAC * mu, SCAN_HI_FRAC * mu, grid_points)
    profile_I, profile_III = _tail_profiles(model)
    det_signs = np.empty(grid_points, dtype=int)
    sigma_mins = np.empty(grid_points)
    for i, E in enumerate(energies):
        A = _assemble_general(profile_I, profile_III, unit.delta, N, float(E))
        det_signs[i] = _det_sign(A)
        sigma_mins[i] = _sigma_min(A)
    return DispersionTrace(
        model=model,
        geometry=unit,
        N=N,
        energies=energies,
        det_signs=det_signs,
        sigma_mins=sigma_mins,
    )


def _bisect_sign(f_sign, lo: float, hi: float, sign_lo: int, tol: float) -> float:
    """Bisection on a sign-valued function; returns the midpoint root."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        s = f_sign(mid)
        if s == 0:
            return mid
        if s == sign_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimization; returns the abscissa of the minimum."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Spectrum:
    """Discrete eigenvalues (as E/mu) with residuals and stability flags.

    ``near_threshold`` lists candidate roots within NEAR_THRESHOLD_FRAC *
    mu of the threshold; they are reported as unresolved rather than as
    eigenvalues because the leading tail decay rate vanishes there.
    """

    model: ModelKind
    geometry: Geometry
    N: int
    eigenvalues: tuple  # E/mu, sorted, strictly inside (0, 1)
    residuals: tuple  # sigma_min at each refined root
    stable: tuple  # per-eigenvalue bool
    near_threshold: tuple = ()
    grid_points: int = 400

    def stable_eigenvalues(self) -> tuple:
        return tuple(e for e, s in zip(self.eigenvalues, self.stable) if s)


def _find_roots(
    model: ModelKind, geometry: Geometry, N: int, grid_points: int
) -> tuple[list[float], list[float]]:
    """Locate refined dispersion roots; returns (roots, sigma_at_roots).

    Roots are bracketed by determinant sign changes and by interior
    local minima of sigma_min below DIP_SIGMA, then refined to
    REFINE_FRAC * mu (bisection for sign brackets, golden-section on
    sigma_min otherwise).
    """
    unit = geometry.unit()
    mu = unit.mu
    delta = unit.delta
    profile_I, profile_III = _tail_profiles(model)

    def det_sign_at(E: float) -> int:
        return _det_sign(_assemble_general(profile_I, profile_III, delta, N, E))

    def sigma_at(E: float) -> float:
        return _sigma_min(_assemble_general(profile_I, profile_III, delta, N, E))

    trace = dispersion_trace(model, geometry, N, grid_points)
    E = trace.energies
    ds = trace.det_signs
    sm = trace.sigma_mins
    tol = REFINE_FRAC * mu

    brackets = []  # (kind, lo, hi, aux)
    sign_cells = set()
    for i in range(len(E) - 1):
        if ds[i] != 0 and ds[i + 1] != 0 and ds[i] != ds[i + 1]:
            brackets.append(("sign", float(E[i]), float(E[i + 1]), int(ds[i])))
            sign_cells.add(i)
    for i in range(1, len(E) - 1):
        if sm[i] < DIP_SIGMA and sm[i] < sm[i - 1] and sm[i] <= sm[i + 1]:
            if {i - 1, i} & sign_cells:
                continue
            brackets.append(("dip", float(E[i - 1]), float(E[i + 1]), None))

    roots = []
    sigmas = []
    for kind, lo, hi, aux in brackets:
        if kind == "sign":
            root = _bisect_sign(det_sign_at, lo, hi, aux, tol)
        else:
            root = _golden_min(sigma_at, lo, hi, tol)
        roots.append(root)
        sigmas.append(sigma_at(root))

    # deduplicate refined roots that collapsed to the same energy
    order = np.argsort(roots)
    dedup_roots, dedup_sigmas = [], []
    for idx in order:
        if dedup_roots and abs(roots[idx] - dedup_roots[-1]) < 10 * tol:
            if sigmas[idx] < dedup_sigmas[-1]:
                dedup_roots[-1], dedup_sigmas[-1] = roots[idx], sigmas[idx]
            continue
        dedup_roots.append(roots[idx])
        dedup_sigmas.append(sigmas[idx])
    return dedup_roots, dedup_sigmas


def scan_spectrum(
    model: ModelKind,
    geometry: Geometry,
    N: int = 64,
    grid_points: int = 400,
    check_stability: bool = True,
) -> Spectrum:
    """Scan (0, mu) for discrete eigenvalues and refine each root.

    Roots whose refined sigma_min exceeds ACCEPT_SIGMA are rejected as
    spurious.  Roots within NEAR_THRESHOLD_FRAC * mu of the threshold
    are reported in ``near_threshold`` instead of ``eigenvalues``.  When
    ``check_stability`` is set, the scan is repeated at truncation
    N + STABILITY_BUMP and each root is flagged stable when it moves by
    less than STABLE_DRIFT_FRAC * mu; if any root is unstable (for
    example, two roots in one grid cell) the scan is redone once with a
    doubled grid.
    """
    unit = geometry.unit()
    mu = unit.mu

    def run(points: int) -> tuple[list[float], list[float], list[bool]]:
        roots, sigmas = _find_roots(model, geometry, N, points)
        accepted = [
            (r, s) for r, s in zip(roots, sigmas) if s < ACCEPT_SIGMA
        ]
        roots = [r for r, _ in accepted]
        sigmas = [s for _, s in accepted]
        if not check_stability:
            return roots, sigmas, [True] * len(roots)
        roots_hi, sigmas_hi = _find_roots(model, geometry, N + STABILITY_BUMP, points)
        roots_hi = [r for r, s in zip(roots_hi, sigmas_hi) if s < ACCEPT_SIGMA]
        stable = []
        for r in roots:
            drift = min((abs(r - rh) for rh in roots_hi), default=math.inf)
            stable.append(drift < STABLE_DRIFT_FRAC * mu)
        return roots, sigmas, stable

    roots, sigmas, stable = run(grid_points)
    used_points = grid_points
    if check_stability and not all(stable):
        used_points = 2 * grid_points
        roots, sigmas, stable = run(used_points)

    eigenvalues, residuals, flags, near = [], [], [], []
    for r, s, st in zip(roots, sigmas, stable):
        if mu - r <= NEAR_THRESHOLD_FRAC * mu:
            near.append(r / mu)
        else:
            eigenvalues.append(r / mu)
            residuals.append(s)
            flags.append(st)
    return Spectrum(
        model=model,
        geometry=unit,
        N=N,
        eigenvalues=tuple(eigenvalues),
        residuals=tuple(residuals),
        stable=tuple(flags),
        near_threshold=tuple(near),
        grid_points=used_points,
    )


# ---------------------------------------------------------------------------
# Eigenfields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenField:
    """Matched modal coefficients of one eigenfunction (d = 1 units).

    Normalized to unit L^2 norm over the full strip: the tail integrals
    are analytic (the transverse bases are orthonormal and the
    longitudinal factors pure exponentials), the center part is a
    per-mode quadrature.
    """

    model: ModelKind
    geometry: Geometry
    N: int
    E: float
    a: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    sigma_min: float
    possible_multiplicity: bool = False

    @property
    def kappa(self) -> np.ndarray:
        nu = np.arange(self.N) + 0.5
        return np.sqrt((nu * math.pi) ** 2 - self.E)

    @property
    def gamma(self) -> np.ndarray:
        """Center longitudinal rates; entry 0 is sqrt(E) (propagating)."""
        m = np.arange(self.N)
        g = np.empty(self.N)
        g[0] = math.sqrt(self.E)
        g[1:] = np.sqrt((m[1:] * math.pi) ** 2 - self.E)
        return g


def _center_factors(field: EigenField, x: np.ndarray) -> np.ndarray:
    """Longitudinal center functions c_m(x), s_m(x), shape (2, N, len(x)).

    Uses exponential scaling for the hyperbolic modes so that no
    intermediate overflows even at large gamma_m * delta.
    """
    delta = field.geometry.delta
    g = field.gamma
    x = np.asarray(x, dtype=float)
    out = np.empty((2, field.N, x.size))
    rootE = g[0]
    out[0, 0] = np.cos(rootE * x)
    out[1, 0] = np.sin(rootE * x)
    if field.N > 1:
        gx = g[1:, None] * x[None, :]
        gd = g[1:, None] * delta
        # cosh(gx)/cosh(gd) and sinh(gx)/sinh(gd) without overflow
        ep = np.exp(gx - gd)
        em = np.exp(-gx - gd)
        denom_c = 1.0 + np.exp(-2.0 * gd)
        denom_s = 1.0 - np.exp(-2.0 * gd)
        out[0, 1:] = (ep + em) / denom_c
        out[1, 1:] = (ep - em) / denom_s
    return out


def solve_coefficients(system: MatchingSystem) -> EigenField:
    """Null-vector extraction and normalization at a converged root.

    The coefficient vector is the right singular vector of the smallest
    singular value; it is rescaled to unit L^2(Omega) norm and its
    global sign fixed so the largest-magnitude coefficient is positive.
    A near-degenerate second singular value (less than 1e3 times the
    smallest) flags possible eigenvalue multiplicity.
    """
    A = system.matrix
    _, s, Vt = svd(A, check_finite=False)
    sigma_min = float(s[-1])
    if sigma_min >= ACCEPT_SIGMA:
        raise ValueError(
            f"system is not at a converged root: sigma_min={sigma_min} >= {ACCEPT_SIGMA}"
        )
    possible_multiplicity = bool(s[-2] < 1e3 * s[-1])
    v = Vt[-1]
    pivot = int(np.argmax(np.abs(v)))
    if v[pivot] < 0.0:
        v = -v
    N = system.N
    field = EigenField(
        model=system.model,
        geometry=system.geometry,
        N=N,
        E=system.E,
        a=v[0:N].copy(),
        b=v[N : 2 * N].copy(),
        alpha=v[2 * N : 3 * N].copy(),
        beta=v[3 * N : 4 * N].copy(),
        sigma_min=sigma_min,
        possible_multiplicity=possible_multiplicity,
    )
    norm = math.sqrt(_field_norm_sq(field))
    return EigenField(
        model=field.model,
        geometry=field.geometry,
        N=N,
        E=field.E,
        a=field.a / norm,
        b=field.b / norm,
        alpha=field.alpha / norm,
        beta=field.beta / norm,
        sigma_min=sigma_min,
        possible_multiplicity=possible_multiplicity,
    )


def _field_norm_sq(field: EigenField) -> float:
    """L^2(Omega) norm squared: analytic tails plus center quadrature."""
    kappa = field.kappa
    tails = float(np.sum(field.a**2 / (2.0 * kappa)) + np.sum(field.b**2 / (2.0 * kappa)))
    delta = field.geometry.delta

    center = 0.0
    for m in range(field.N):
        am, bm = field.alpha[m], field.beta[m]
        if am == 0.0 and bm == 0.0:
            continue

        def integrand(x, m=m, am=am, bm=bm):
            f = _center_factors(field, np.array([x]))
            return (am * f[0, m, 0] + bm * f[1, m, 0]) ** 2

        val, _ = quad(integrand, -delta, delta, epsabs=1e-12, epsrel=1e-12, limit=200)
        center += val
    return tails + center


def evaluate_field(field: EigenField, x, y) -> np.ndarray:
    """Eigenfunction value at points (x, y) of the strip (d = 1 units).

    Accepts scalars or broadcastable arrays; y must lie in [0, 1].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("points outside the strip: y must lie in [0, 1]")
    x, y = np.broadcast_arrays(x, y)
    out = np.empty(x.shape)
    delta = field.geometry.delta

    profile_I, profile_III = _tail_profiles(field.model)
    kappa = field.kappa

    left = x < -delta
    right = x > delta
    center = ~(left | right)

    if np.any(left):
        xl, yl = x[left], y[left]
        tails = np.exp(kappa[:, None] * (xl[None, :] + delta))  # decaying
        prof = _profile_values(profile_I, field.N, yl)
        out[left] = np.einsum("k,kp,kp->p", field.a, tails, prof)
    if np.any(right):
        xr, yr = x[right], y[right]
        tails = np.exp(-kappa[:, None] * (xr[None, :] - delta))
        prof = _profile_values(profile_III, field.N, yr)
        out[right] = np.einsum("k,kp,kp->p", field.b, tails, prof)
    if np.any(center):
        xc, yc = x[center], y[center]
        f = _center_factors(field, xc)
        prof = _profile_values(ProfileKind.NN_COSINE, field.N, yc)
        longi = field.alpha[:, None] * f[0] + field.beta[:, None] * f[1]
        out[center] = np.einsum("mp,mp->p", longi, prof)
    return out


def _profile_values(profile: ProfileKind, N: int, y: np.ndarray) -> np.ndarray:
    """Transverse profiles evaluated at y, shape (N, len(y)) (d = 1)."""
    y = np.asarray(y, dtype=float)
    idx = np.arange(N)
    if profile is ProfileKind.DN_SINE:
        nu = idx + 0.5
        return math.sqrt(2.0) * np.sin(nu[:, None] * math.pi * y[None, :])
    if profile is ProfileKind.ND_COSINE:
        nu = idx + 0.5
        return math.sqrt(2.0) * np.cos(nu[:, None] * math.pi * y[None, :])
    vals = math.sqrt(2.0) * np.cos(idx[:, None] * math.pi * y[None, :])
    vals[0] = 1.0
    return vals


def solve_field(
    model: ModelKind,
    geometry: Geometry,
    branch: int,
    N: int = 64,
    grid_points: int = 400,
) -> EigenField:
    """Spectrum scan plus coefficient solve for the given branch (1-based)."""
    spectrum = scan_spectrum(model, geometry, N=N, grid_points=grid_points)
    if branch < 1 or branch > len(spectrum.eigenvalues):
        raise LookupError(
            f"branch {branch} absent: spectrum has {len(spectrum.eigenvalues)} "
            f"eigenvalue(s) at lam={geometry.lam}"
        )
    unit = geometry.unit()
    E = spectrum.eigenvalues[branch - 1] * unit.mu
    system = assemble(model, geometry, N, E)
    return solve_coefficients(system)


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceStudy:
    """Eigenvalue estimates per truncation and the fitted algebraic order."""

    rows: tuple  # (N, E/mu) pairs
    order: float


def convergence_study(
    model: ModelKind,
    geometry: Geometry,
    N_list,
    branch: int = 1,
    grid_points: int = 400,
) -> ConvergenceStudy:
    """Track one eigenvalue branch across truncations and fit its order.

    The empirical order p comes from a log-log least-squares fit of the
    successive differences |E(N_i) - E(N_{i+1})| against N_i.
    """
    N_list = sorted(N_list)
    if len(N_list) < 3:
        raise ValueError("need at least three truncation orders")
    rows = []
    for N in N_list:
        spec = scan_spectrum(model, geometry, N=N, grid_points=grid_points,
                             check_stability=False)
        if len(spec.eigenvalues) >= branch:
            rows.append((N, spec.eigenvalues[branch - 1]))
    if len(rows) < 2:
        raise RuntimeError("fewer than two resolved eigenvalue estimates")
    diffs = []
    for (N1, e1), (_, e2) in zip(rows[:-1], rows[1:]):
        d = abs(e1 - e2)
        if d > 0.0:
            diffs.append((N1, d))
    if len(diffs) < 2:
        # differences at rounding level: effectively converged
        return ConvergenceStudy(rows=tuple(rows), order=math.inf)
    logN = np.log([n for n, _ in diffs])
    logd = np.log([d for _, d in diffs])
    slope = np.polyfit(logN, logd, 1)[0]
    return ConvergenceStudy(rows=tuple(rows), order=float(-slope))
