"""Cox proportional-hazards baseline fit by Newton-Raphson.

Breslow handling for tied event times; step-halving keeps the log partial
likelihood non-decreasing across accepted iterations. Inputs are expected in
standardized units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, MetricError

SEPARABLE_BOUND = 50.0


@dataclass(frozen=True)
class CoxModel:
    beta: np.ndarray
    log_likelihood: float
    iterations: int
    gradient_norm: float
    converged: bool
    separable: bool

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=np.float64).copy()
        b.flags.writeable = False
        object.__setattr__(self, "beta", b)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Linear risk scores; monotone in predicted hazard."""
        return np.asarray(X, dtype=np.float64) @ self.beta


def _order_by_time(times: np.ndarray):
    # descending time so risk sets are prefixes of the sorted arrays
    return np.argsort(-times, kind="stable")


def _validate(X, times, censored):
    X = np.asarray(X, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    cens = np.asarray(censored).astype(bool)
    if X.ndim != 2 or times.shape != (X.shape[0],) or cens.shape != (X.shape[0],):
        raise MetricError("X must be (n, p) with matching event time and censor vectors")
    if not np.isfinite(X).all() or not np.isfinite(times).all():
        raise MetricError("Cox inputs must be finite")
    if (times <= 0).any():
        raise MetricError("event times must be positive")
    if int((~cens).sum()) < 2:
        raise MetricError("Cox fit needs at least two uncensored events")
    return X, times, cens


def cox_log_partial_likelihood(beta: np.ndarray, X: np.ndarray, times: np.ndarray,
                               censored: np.ndarray) -> float:
    """Breslow log partial likelihood at the given coefficients."""
    X, times, cens = _validate(X, times, censored)
    beta = np.asarray(beta, dtype=np.float64)
    ll, _, _ = _ll_grad_hess(beta, X, times, cens, need_hess=False)
    return ll


def _ll_grad_hess(beta, X, times, cens, need_hess=True):
    # Accumulate in extended precision: with thousands of rows the likelihood
    # is O(1e4) while Newton must resolve gradient norms below 1e-6 at the
    # optimum, which plain float64 accumulation cannot distinguish from its
    # own rounding noise (the line search then stalls just above tolerance).
    acc = np.longdouble
    n, p = X.shape
    order = _order_by_time(times)
    Xs = X[order].astype(acc)
    ts = times[order]
    es = ~cens[order]
    eta = Xs @ np.asarray(beta, dtype=acc)
    shift = eta.max() if n else acc(0.0)
    w = np.exp(eta - shift)

    ll = acc(0.0)
    grad = np.zeros(p, dtype=acc)
    hess = np.zeros((p, p), dtype=acc) if need_hess else None
    s0 = acc(0.0)
    s1 = np.zeros(p, dtype=acc)
    s2 = np.zeros((p, p), dtype=acc) if need_hess else None
    i = 0
    while i < n:
        j = i
        while j < n and ts[j] == ts[i]:
            j += 1
        for k in range(i, j):  # whole tie group enters the risk set first
            s0 += w[k]
            s1 += w[k] * Xs[k]
            if need_hess:
                s2 += w[k] * np.outer(Xs[k], Xs[k])
        xbar = s1 / s0
        for k in range(i, j):
            if es[k]:
                ll += (eta[k] - shift) - np.log(s0)
                grad += Xs[k] - xbar
                if need_hess:
                    hess -= s2 / s0 - np.outer(xbar, xbar)
        i = j
    hess64 = np.asarray(hess, dtype=np.float64) if need_hess else None
    return float(ll), np.asarray(grad, dtype=np.float64), hess64


def fit_cox(X: np.ndarray, times: np.ndarray, censored: np.ndarray,
            max_iter: int = 100, tol: float = 1e-6) -> CoxModel:
    """Newton-Raphson with step-halving until the gradient 2-norm falls to tol."""
    X, times, cens = _validate(X, times, censored)
    p = X.shape[1]
    beta = np.zeros(p)
    ll, grad, hess = _ll_grad_hess(beta, X, times, cens)
    iterations = 0
    converged = False
    separable = False
    for it in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol:
            converged = True
            break
        try:
            delta = np.linalg.solve(-hess + 1e-12 * np.eye(p), grad)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(-hess, grad, rcond=None)[0]
        step = 1.0
        accepted = False
        for _ in range(40):
            candidate = beta + step * delta
            ll_new, grad_new, hess_new = _ll_grad_hess(candidate, X, times, cens)
            if np.isfinite(ll_new) and ll_new >= ll - 1e-12:
                beta, ll, grad, hess = candidate, ll_new, grad_new, hess_new
                accepted = True
                break
            step *= 0.5
        iterations = it
        if p and float(np.abs(beta).max()) > SEPARABLE_BOUND:
            # likelihood keeps rising as coefficients diverge: separable data
            separable = True
            break
        if not accepted:
            break
    gnorm = float(np.linalg.norm(grad))
    if not converged:
        converged = gnorm <= tol
    if not converged and not separable:
        raise ConvergenceError(
            f"Cox fit did not converge: gradient norm {gnorm:.3e} after {iterations} iterations",
            iterations=iterations, gradient_norm=gnorm)
    return CoxModel(beta=beta, log_likelihood=ll, iterations=iterations,
                    gradient_norm=gnorm, converged=converged, separable=separable)
