"""Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Marquardt's diagonal scaling and relative finite-difference steps make the
iteration invariant to rescaling individual parameters.
"""

from dataclasses import dataclass

import numpy as np

_EPS = np.finfo(float).eps


@dataclass
class LMResult:
    x: np.ndarray
    residual: np.ndarray
    jacobian: np.ndarray
    iterations: int
    converged: bool
    gradient_norm: float
    message: str

    @property
    def cost(self):
        return float(self.residual @ self.residual)

    def covariance(self):
        """Parameter covariance scaled by the reduced chi-square."""
        J = self.jacobian
        dof = max(J.shape[0] - J.shape[1], 1)
        s2 = self.cost / dof
        return s2 * np.linalg.pinv(J.T @ J)


def numeric_jacobian(fun, x, r0=None, typical=None):
    """Central differences with steps relative to each parameter's magnitude."""
    x = np.asarray(x, dtype=float)
    scale = np.abs(x)
    if typical is not None:
        scale = np.maximum(scale, np.abs(typical))
    scale = np.where(scale > 0, scale, 1.0)
    h = _EPS ** (1 / 3) * scale
    cols = []
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h[j]
        xm[j] -= h[j]
        cols.append((fun(xp) - fun(xm)) / (xp[j] - xm[j]))
    return np.column_stack(cols)


def levenberg_marquardt(fun, x0, jac=None, gtol=1e-10, xtol=1e-12, ftol=1e-14,
                        max_iter=500, typical=None):
    """Minimize ``sum(fun(x)**2)``.

    Convergence is declared when the scaled gradient (largest cosine between
    the residual and a Jacobian column) drops below ``gtol``, the relative
    step falls below ``xtol``, or the relative cost reduction falls below
    ``ftol``.
    """
    x = np.asarray(x0, dtype=float).copy()
    if jac is None:
        def jac(p, r):
            return numeric_jacobian(fun, p, r, typical)

    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        return LMResult(x, r, np.full((r.size, x.size), np.nan), 0, False, np.nan,
                        "residual not finite at the initial guess")
    cost = r @ r
    damping = None
    diag = np.zeros(x.size)
    gnorm = np.inf
    J = None
    for it in range(1, max_iter + 1):
        J = jac(x, r)
        col = np.linalg.norm(J, axis=0)
        diag = np.maximum(diag, col)
        d = np.where(diag > 0, diag, 1.0)
        rnorm = np.sqrt(cost)
        if rnorm == 0:
            return LMResult(x, r, J, it, True, 0.0, "exact fit")
        g = J.T @ r
        with np.errstate(divide="ignore", invalid="ignore"):
            gnorm = float(np.max(np.where(col > 0, np.abs(g) / (col * rnorm), 0.0)))
        if gnorm <= gtol:
            return LMResult(x, r, J, it, True, gnorm, "gradient tolerance reached")
        if damping is None:
            # dimensionless: D already carries each parameter's scale
            damping = 1e-3
        while True:
            # solve for the scaled step d*step so column magnitudes do not matter
            A = np.vstack([J / d, np.sqrt(damping) * np.eye(x.size)])
            b = np.concatenate([-r, np.zeros(x.size)])
            step = np.linalg.lstsq(A, b, rcond=None)[0] / d
            x_new = x + step
            r_new = np.asarray(fun(x_new), dtype=float)
            cost_new = r_new @ r_new if np.all(np.isfinite(r_new)) else np.inf
            predicted = cost - np.sum((r + J @ step) ** 2)
            actual = cost - cost_new
            small_step = np.linalg.norm(d * step) <= xtol * (np.linalg.norm(d * x) + xtol)
            if actual > 0:
                rho = actual / predicted if predicted > 0 else 0.0
                damping *= max(1 / 3, 1 - (2 * rho - 1) ** 3)
                x, r = x_new, r_new
                small_reduction = actual <= ftol * cost
                cost = cost_new
                if small_step or small_reduction:
                    J = jac(x, r)
                    g = J.T @ r
                    col = np.linalg.norm(J, axis=0)
                    rn = np.sqrt(cost)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        gnorm = float(np.max(np.where(col > 0, np.abs(g) / (col * rn), 0.0))) if rn > 0 else 0.0
                    why = "step tolerance reached" if small_step else "cost reduction below tolerance"
                    return LMResult(x, r, J, it, True, gnorm, why)
                break
            if small_step:
                return LMResult(x, r, J, it, True, gnorm, "no further decrease possible")
            damping *= 2.0
            if damping > 1e300:
                return LMResult(x, r, J, it, False, gnorm, "damping overflow")
    return LMResult(x, r, J, max_iter, False, gnorm, "maximum iterations reached")
