"""
The one-dimensional weighted p-Wirtinger problem on a segment [0, L]:
pi_p, the constraint shift and the discrete minimization of

    ∫ |u'|^p f / ∫ |u|^p f   over u with ∫ |u|^{p-2} u f = 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.optimize import bisect, minimize

from .config import Settings, resolve
from .errors import AccuracyError, DegenerateInputError, DomainError, InvalidInputError
from .helpers import is_log_concave, validate_exponent, validate_positive

log = logging.getLogger("poincare-bound")

WEIGHT1D_KINDS = ("constant", "exp_linear", "gaussian", "section_induced")
MIN_NODES = 16


def _check_exponent(p: float) -> float:
    ok, err = validate_exponent(p)
    if not ok:
        raise DomainError(err)
    return float(p)


def pi_p_closed(p: float) -> float:
    """2π (p-1)^{1/p} / (p sin(π/p))."""
    p = _check_exponent(p)
    return 2.0 * math.pi * (p - 1.0) ** (1.0 / p) / (p * math.sin(math.pi / p))


def pi_p_quadrature(p: float, tol: float = 1e-10) -> float:
    """
    2 ∫_0^∞ ds / (1 + s^p / (p-1)) after s = τ / (1 - τ). The endpoint factor
    (1 - τ)^{p-2} is passed to QUADPACK as an algebraic weight, which leaves a
    bounded smooth integrand for every p > 1.
    """
    p = _check_exponent(p)
    ok, err = validate_positive(tol, "tol")
    if not ok:
        raise InvalidInputError(err)

    def integrand(tau: float) -> float:
        return 1.0 / ((1.0 - tau) ** p + tau**p / (p - 1.0))

    value, abserr = quad(
        integrand, 0.0, 1.0, weight="alg", wvar=(0.0, p - 2.0), epsabs=tol / 10.0, epsrel=0.0, limit=500
    )
    if 2.0 * abserr > tol:
        raise AccuracyError(f"pi_p quadrature for p={p} reached error {2.0 * abserr:.3e} > {tol:.3e}")
    return 2.0 * value


# --- discretization -------------------------------------------------------------


@dataclass(frozen=True)
class Grid1D:
    L: float
    n: int

    def __post_init__(self) -> None:
        ok, err = validate_positive(self.L, "segment length L")
        if not ok:
            raise InvalidInputError(err)
        if int(self.n) < MIN_NODES:
            raise InvalidInputError(f"1-D grid needs at least {MIN_NODES} nodes, got: {self.n}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "n", int(self.n))

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.n)

    @property
    def spacing(self) -> float:
        return self.L / (self.n - 1)

    @property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


@dataclass(frozen=True, eq=False)
class Profile1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InvalidInputError(f"profile needs {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("profile has non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class Weight1D:
    grid: Grid1D
    values: np.ndarray
    kind: str = "constant"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in WEIGHT1D_KINDS:
            raise InvalidInputError(f"unknown 1-D weight kind '{self.kind}'")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InvalidInputError(f"weight needs {self.grid.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise InvalidInputError("1-D weight must be finite and strictly positive")
        if not is_log_concave(v, tol=1e-9):
            raise InvalidInputError(f"1-D weight '{self.kind}' is not log-concave on the grid")
        object.__setattr__(self, "values", v)

    @staticmethod
    def constant(grid: Grid1D, value: float = 1.0) -> "Weight1D":
        return Weight1D(grid, np.full(grid.n, float(value)), "constant", {"value": float(value)})

    @staticmethod
    def exp_linear(grid: Grid1D, c: float) -> "Weight1D":
        return Weight1D(grid, np.exp(float(c) * grid.nodes), "exp_linear", {"c": float(c)})

    @staticmethod
    def gaussian(grid: Grid1D, c: float, center: float = 0.0) -> "Weight1D":
        values = np.exp(-float(c) * (grid.nodes - float(center)) ** 2)
        return Weight1D(grid, values, "gaussian", {"c": float(c), "center": float(center)})

    @staticmethod
    def section_induced(grid: Grid1D, profile: Any, omega: Any) -> "Weight1D":
        """f = g * ω from a section profile g and the weight on the axis; zeros at the ends are clamped."""
        values = np.asarray(profile, dtype=float) * np.asarray(omega, dtype=float)
        floor = 1e-12 * float(values.max()) if values.max() > 0.0 else 1e-300
        return Weight1D(grid, np.maximum(values, floor), "section_induced")


def _phi(x: np.ndarray, p: float) -> np.ndarray:
    return np.sign(x) * np.abs(x) ** (p - 1.0)


def shift_root(values: Any, masses: Any, p: float) -> float:
    """
    The t with Σ m_k |v_k - t|^{p-2} (v_k - t) = 0. The left side decreases
    strictly in t, so bisection on [min v, max v] always converges.
    """
    v = np.asarray(values, dtype=float)
    m = np.asarray(masses, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    spread = hi - lo
    if spread == 0.0:
        return lo
    if p == 2.0:
        return float(np.dot(m, v) / m.sum())

    def balance(t: float) -> float:
        return float(np.dot(m, _phi(v - t, p)))

    return float(bisect(balance, lo, hi, xtol=1e-12 * spread, maxiter=200))


def constraint_shift(u: Profile1D, f: Weight1D, p: float) -> float:
    p = _check_exponent(p)
    return shift_root(u.values, u.grid.trapezoid_weights * f.values, p)


def rayleigh_1d(u: Profile1D, f: Weight1D, p: float) -> float:
    """Quotient of the shifted profile; centred differences and trapezoidal sums."""
    p = _check_exponent(p)
    x = u.grid.nodes
    v = u.values - constraint_shift(u, f, p)
    du = np.gradient(v, x)
    den = trapezoid(np.abs(v) ** p * f.values, x)
    if not den > 0.0:
        raise DegenerateInputError("profile is constant after the constraint shift")
    return float(trapezoid(np.abs(du) ** p * f.values, x) / den)


# --- minimization ---------------------------------------------------------------


@dataclass
class Minimization1D:
    mu_hat: float
    minimizer: Profile1D
    bound: float
    slack: float
    iterations: int
    converged: bool
    best_effort: bool
    start_values: list[float]


def _staggered_objective(f: Weight1D, p: float):
    h = f.grid.spacing
    masses = f.grid.trapezoid_weights * f.values
    f_mid = 0.5 * (f.values[1:] + f.values[:-1])

    def objective(v: np.ndarray) -> tuple[float, np.ndarray]:
        s = np.diff(v) / h
        num = h * float(np.dot(f_mid, np.abs(s) ** p))
        w = v - shift_root(v, masses, p)
        den = float(np.dot(masses, np.abs(w) ** p))
        if not (num > 0.0 and den > 0.0):
            return math.inf, np.zeros_like(v)

        flux = f_mid * p * _phi(s, p)
        g_num = np.zeros_like(v)
        g_num[1:] += flux
        g_num[:-1] -= flux
        # d t / d v drops out: Σ m_k φ(w_k) = 0
        g_den = masses * p * _phi(w, p)
        return math.log(num) - math.log(den), g_num / num - g_den / den

    return objective


def start_profiles(grid: Grid1D, count: int, seed: int) -> list[np.ndarray]:
    """cosine, linear, then seeded random low-frequency cosine combinations."""
    t = grid.nodes / grid.L
    starts = [np.cos(math.pi * t), t - 0.5]
    k = 0
    while len(starts) < count:
        rng = np.random.default_rng(seed + k)
        coeffs = rng.normal(size=4) / np.arange(1, 5)
        starts.append(sum(c * np.cos((j + 1) * math.pi * t) for j, c in enumerate(coeffs)))
        k += 1
    return starts[:count]


def minimize_1d(
    f: Weight1D,
    p: float,
    seed: int | None = None,
    settings: Settings | None = None,
    max_iter: int | None = None,
    seeds: int | None = None,
) -> Minimization1D:
    """
    Multi-start L-BFGS on the log quotient of a staggered discretization: cell
    slopes for u', trapezoidal nodal masses for |u|^p f. The constraint shift
    is solved inside every objective evaluation.
    """
    p = _check_exponent(p)
    s = resolve(settings)
    seed = s.seed if seed is None else int(seed)
    max_iter = s.max_iter if max_iter is None else int(max_iter)
    count = max(1, s.seeds if seeds is None else int(seeds))
    grid = f.grid
    objective = _staggered_objective(f, p)

    best_val, best_x, iterations, converged = math.inf, None, 0, True
    start_values = []
    for k, x0 in enumerate(start_profiles(grid, count, seed)):
        x0 = x0 / np.max(np.abs(x0))
        res = minimize(
            objective,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter, "ftol": s.solver_tol, "gtol": 1e-14},
        )
        val = float(np.exp(res.fun))
        start_values.append(val)
        iterations += int(res.nit)
        converged = converged and (bool(res.success) or res.nit < max_iter)
        log.debug("1-D start %d: quotient %.8g after %d iterations (%s)", k, val, res.nit, res.message)
        if val < best_val:
            best_val, best_x = val, res.x

    if best_x is None:
        raise DegenerateInputError("every 1-D start collapsed to a constant profile")

    masses = grid.trapezoid_weights * f.values
    values = best_x - shift_root(best_x, masses, p)
    bound = (pi_p_closed(p) / grid.L) ** p
    slack = best_val - bound
    if not converged:
        log.warning("1-D minimization hit max_iter=%d; result is best effort", max_iter)
    if best_val < bound * (1.0 - s.solver_slack):
        log.warning("1-D quotient %.6g is below pi_p^p / L^p = %.6g beyond slack", best_val, bound)
    log.info("1-D minimum %.8g (bound %.8g, slack %.3g) over %d starts", best_val, bound, slack, count)

    return Minimization1D(
        mu_hat=best_val,
        minimizer=Profile1D(grid, values),
        bound=bound,
        slack=slack,
        iterations=iterations,
        converged=converged,
        best_effort=not converged,
        start_values=start_values,
    )
