"""Two fully computable model operators and their resolvent profiles.

Differentiation operator: A = d/dx on L2(0, 1) with boundary condition
u(1) = 0.  Its semigroup is the left shift, which is the identity in norm
until t = 1 and exactly zero afterwards.  The resolvent rate depends only on
Re z and satisfies r(w) = sqrt(w^2 + nu(w)^2) where nu solves the secular
equation -nu cot(nu) = w; nu is real in (0, pi) for w > -1 and imaginary
(nu = i eta with eta coth(eta) = -w) for w < -1.  For very negative w the
rate collapses like 2 |w| exp(-|w|), so the hyperbolic branch is evaluated
through cancellation-free factorizations rather than the raw w^2 + nu^2.

Jordan block of size n: nilpotent generator, exponential computed exactly
from the terminating series, norms as largest singular values, the numerical
range line of slope cos(pi / (n + 1)), and a resolvent rate obtained by
minimizing the smallest singular value of (z - J) over the boundary line
Re z = w (boundary search is enough because the resolvent norm obeys a
maximum principle on the half-plane and vanishes at infinity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import PiecewiseLogAffineBound
from .iteration import ResolventProfile
from .riccati import OmegaRPair, first_crossing_time

__all__ = [
    "ConvergenceError",
    "DiffopEigenroot",
    "JordanBlockModel",
    "diffop_eigenroot",
    "diffop_first_crossing",
    "diffop_profile",
    "diffop_rate",
    "diffop_resolvent_norm",
    "diffop_scaled_first_crossing",
    "diffop_semigroup_norm",
    "improvement_region_thresholds",
    "jordan_matrix_exponential",
    "jordan_numerical_range_slope",
    "jordan_profile",
    "jordan_resolvent_rate",
    "jordan_semigroup_norm",
    "rate_for_crossing_time",
]

_BISECT_MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """A root find or refinement failed to converge."""


# -- differentiation operator ------------------------------------------------


@dataclass(frozen=True)
class DiffopEigenroot:
    """Root of the secular equation at abscissa omega, stored as signed nu^2.

    nu_sq > 0 encodes a real root nu = sqrt(nu_sq) in ]0, pi[ (omega > -1);
    nu_sq < 0 encodes an imaginary root nu = i eta with eta = sqrt(-nu_sq)
    (omega < -1); nu_sq = 0 at omega = -1.
    """

    nu_sq: float
    omega: float

    def residual(self) -> float:
        """Defect of the secular equation at the stored root."""
        if self.nu_sq > 0.0:
            nu = math.sqrt(self.nu_sq)
            return -nu / math.tan(nu) - self.omega
        if self.nu_sq < 0.0:
            eta = math.sqrt(-self.nu_sq)
            return -eta / math.tanh(eta) - self.omega
        return -1.0 - self.omega


def _bisect(f, lo: float, hi: float, increasing: bool) -> float:
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (f(mid) < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def diffop_eigenroot(omega: float) -> DiffopEigenroot:
    """Solve -nu cot(nu) = omega for the branch continuous through nu(-1) = 0."""
    if not math.isfinite(omega):
        raise ValueError("omega must be finite")
    if omega == -1.0:
        return DiffopEigenroot(0.0, omega)
    if omega > -1.0:
        # f(nu) = -nu cot(nu) increases from -1 to +inf on ]0, pi[
        f = lambda nu: -nu / math.tan(nu) - omega
        lo, hi = 1e-12, math.nextafter(math.pi, 0.0)
        if f(lo) > 0.0 or f(hi) < 0.0:
            raise ConvergenceError(f"secular bracket failed at omega = {omega!r}")
        nu = _bisect(f, lo, hi, increasing=True)
        return DiffopEigenroot(nu * nu, omega)
    # omega < -1: g(eta) = -eta coth(eta) decreases from -1 to -inf,
    # and the root sits within 1 of |omega| once |omega| >= 2
    g = lambda eta: -eta / math.tanh(eta) - omega
    lo = max(1.0, -omega - 1.0)
    hi = -omega + 1.0
    while g(lo) < 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise ConvergenceError(f"secular bracket failed at omega = {omega!r}")
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceError(f"secular bracket failed at omega = {omega!r}")
    eta = _bisect(g, lo, hi, increasing=False)
    return DiffopEigenroot(-eta * eta, omega)


def diffop_rate(omega: float) -> float:
    """Resolvent rate r(omega) = sqrt(omega^2 + nu(omega)^2) of the shift model.

    For omega < -1 the two squares cancel almost exactly, so the value is
    assembled from omega + eta = -2 eta / expm1(2 eta), which the secular
    equation provides without subtraction.
    """
    if omega == -1.0:
        return 1.0
    root = diffop_eigenroot(omega)
    if omega > -1.0:
        return math.sqrt(omega * omega + root.nu_sq)
    eta = math.sqrt(-root.nu_sq)
    minus_omega_plus_eta = 2.0 * eta / math.expm1(2.0 * eta)
    return math.sqrt(minus_omega_plus_eta * (eta - omega))


def diffop_resolvent_norm(z_re: float) -> float:
    """sup of the resolvent norm over Re z >= z_re; depends on Re z only."""
    return 1.0 / diffop_rate(z_re)


def diffop_semigroup_norm(t: float) -> float:
    """Exact norm of the shift semigroup: 1 before time 1, 0 from time 1 on."""
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    return 1.0 if t < 1.0 else 0.0


def rate_for_crossing_time(alpha: float, omega: float) -> float:
    """The rate that makes the trivial bound's crossing time equal alpha.

    For the shift model this is r(2 alpha omega) / (2 alpha), by the scaling
    of the model under gamma A + delta.
    """
    if alpha <= 0.0:
        raise ValueError("crossing time must be positive")
    return diffop_rate(2.0 * alpha * omega) / (2.0 * alpha)


def diffop_first_crossing(omega: float) -> float:
    """Crossing time of the trivial bound under the model's own rate (always 1/2)."""
    return first_crossing_time(
        PiecewiseLogAffineBound.constant(), OmegaRPair(omega, diffop_rate(omega))
    )


def diffop_scaled_first_crossing(gamma: float, delta: float, omega: float) -> float:
    """Crossing time for the scaled model gamma A + delta with bound exp(delta t).

    Equals 1 / (2 gamma) for every omega.
    """
    if gamma <= 0.0:
        raise ValueError("scale must be positive")
    rate = gamma * diffop_rate((omega - delta) / gamma)
    return first_crossing_time(PiecewiseLogAffineBound.exponential(delta), OmegaRPair(omega, rate))


def diffop_profile() -> ResolventProfile:
    """The shift model's rate as a profile valid on the whole line."""
    return ResolventProfile.from_callable(diffop_rate)


def improvement_region_thresholds() -> tuple[float, float]:
    """Abscissas where the matched-rate curves for crossing times pi/2 and pi/8
    meet the line r = omega + 1; they delimit where combining a second pair
    with the reference pair (0, 1) can pay off."""
    f = lambda w: rate_for_crossing_time(0.5 * math.pi, w) - (w + 1.0)
    g = lambda w: rate_for_crossing_time(0.125 * math.pi, w) - (w + 1.0)
    if not (f(-1.0 + 1e-9) > 0.0 > f(0.0)):
        raise ConvergenceError("lower threshold bracket failed")
    if not (g(1.0) > 0.0 > g(10.0)):
        raise ConvergenceError("upper threshold bracket failed")
    lower = _bisect(f, -1.0 + 1e-9, 0.0, increasing=False)
    upper = _bisect(g, 1.0, 10.0, increasing=False)
    return lower, upper


# -- Jordan blocks ------------------------------------------------------------


@dataclass(frozen=True)
class JordanBlockModel:
    """A single nilpotent Jordan block of size n."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("block size must be at least 1")

    def matrix(self) -> np.ndarray:
        return np.eye(self.n, k=1)


def jordan_matrix_exponential(model: JordanBlockModel, t: float) -> np.ndarray:
    """exp(tJ) in closed form: the nilpotent series terminates after n terms."""
    n = model.n
    out = np.zeros((n, n))
    coeff = 1.0
    for d in range(n):
        if d > 0:
            coeff *= t / d
        out += coeff * np.eye(n, k=d)
    return out


def jordan_semigroup_norm(model: JordanBlockModel, t: float) -> float:
    """Largest singular value of exp(tJ), by power iteration on the Gram matrix.

    The Gram matrix has strictly positive entries for t > 0, so iteration from
    a positive vector converges to the top eigenvalue.
    """
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    exp_tj = jordan_matrix_exponential(model, t)
    gram = exp_tj.T @ exp_tj
    v = np.linspace(1.0, 2.0, model.n)
    v /= np.linalg.norm(v)
    lam = float(v @ gram @ v)
    for _ in range(10_000):
        w = gram @ v
        v = w / np.linalg.norm(w)
        new_lam = float(v @ gram @ v)
        if abs(new_lam - lam) <= 1e-13 * max(abs(new_lam), 1.0):
            lam = new_lam
            break
        lam = new_lam
    else:
        raise ConvergenceError("Gram power iteration did not settle")
    return math.sqrt(lam)


def jordan_numerical_range_slope(model: JordanBlockModel) -> float:
    """Largest real part of the numerical range of J: cos(pi / (n + 1))."""
    return math.cos(math.pi / (model.n + 1))


def _min_singular_value(model: JordanBlockModel, omega: float, y: float) -> float:
    z = complex(omega, y)
    shifted = z * np.eye(model.n) - model.matrix()
    return float(np.linalg.svd(shifted, compute_uv=False)[-1])


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(500):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    else:
        raise ConvergenceError("golden-section refinement did not converge")
    return min((fc, fd))


def jordan_resolvent_rate(model: JordanBlockModel, omega: float) -> float:
    """Resolvent rate of the Jordan block at omega > 0.

    Equals the infimum over the boundary line Re z = omega of the smallest
    singular value of (z - J); by conjugation symmetry only Im z >= 0 is
    searched (coarse scan plus golden-section refinement to 1e-8).  The scan
    can only miss mass, so the result never exceeds the true rate by more
    than the refinement tolerance.
    """
    if omega <= 0.0:
        raise ValueError("the block's spectrum {0} leaves no positive rate for omega <= 0")
    if model.n == 1:
        return omega  # resolvent norm of the scalar zero operator is 1/|z|
    f = lambda y: _min_singular_value(model, omega, y)
    ys = np.linspace(0.0, 10.0, 801)
    # extra resolution near the real axis, where the minimum narrows as omega -> 0
    ys = np.union1d(ys, omega * np.array([0.25, 0.5, 1.0, 2.0, 4.0]))
    vals = np.array([f(y) for y in ys])
    k = int(np.argmin(vals))
    lo = ys[k - 1] if k > 0 else ys[0]
    hi = ys[k + 1] if k + 1 < len(ys) else ys[-1]
    best = _golden_min(f, lo, hi, 1e-8)
    return min(best, float(vals[k]))


def jordan_profile(model: JordanBlockModel) -> ResolventProfile:
    """The block's rate as a profile on ]0, inf[, memoized across sweeps."""
    cached = lru_cache(maxsize=None)(lambda w: jordan_resolvent_rate(model, w))
    return ResolventProfile.from_callable(cached, domain=(0.0, math.inf))
