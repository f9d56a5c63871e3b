"""Maximum-likelihood spatial regression.

Two models over row-standardized contiguity weights W:

* spatial error: y = Xb + u, u = lam*W*u + eps
* spatial lag:   y = rho*W*y + Xb + eps

Both are fit by concentrating the likelihood down to the single spatial
parameter, searched over the interval where the Jacobian determinant is
positive.  The log-determinant term is evaluated exactly from the spectrum
of the degree-normalized adjacency, which W shares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg
from scipy import stats as _scipy_stats

from .ols import DesignMatrix, OlsFit, _rank_check
from .weights import SpatialWeights

__all__ = [
    "SpectralCache",
    "spectral_cache",
    "log_det",
    "error_concentrated_loglik",
    "lag_concentrated_loglik",
    "SpatialFit",
    "fit_error_ml",
    "fit_lag_ml",
    "ModelComparison",
    "compare",
]


@dataclass(eq=False)
class SpectralCache:
    """Eigenvalues (ascending) shared by W and its symmetric normalization,
    plus the open interval of spatial parameter values with a positive
    Jacobian determinant."""

    eigenvalues: np.ndarray
    interval: tuple[float, float]

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def spectral_cache(weights: SpatialWeights, max_n: int = 10000) -> SpectralCache:
    """Eigendecompose the degree-normalized adjacency behind the weights.

    Row-standardized W = D^-1 A is similar to the symmetric D^-1/2 A D^-1/2,
    so the dense symmetric eigensolver recovers W's (real) spectrum.  The
    decomposition is dense; n above ``max_n`` is refused rather than fall
    back to approximation.
    """
    if weights.mode != "row-standardized":
        raise ValueError("spectral cache requires row-standardized weights")
    if weights.include_self:
        raise ValueError("spectral cache requires weights without self-links")
    adj = weights.adjacency
    n = adj.n
    if n > max_n:
        raise ValueError(
            f"n={n} exceeds the dense decomposition budget ({max_n}); "
            "approximate log-determinant methods are out of scope"
        )
    deg = adj.degree()
    if (deg == 0).any():
        isolated = [int(i) for i in np.nonzero(deg == 0)[0]]
        raise ValueError(
            f"isolated units {isolated} have zero degree; the normalized "
            "adjacency is undefined"
        )
    a = np.zeros((n, n))
    for i, nb in enumerate(adj.neighbors):
        a[i, nb] = 1.0
    d_isqrt = 1.0 / np.sqrt(deg.astype(float))
    sym = a * d_isqrt[:, None] * d_isqrt[None, :]
    omega = np.linalg.eigvalsh(sym)
    if not (omega[0] < 0 < omega[-1]):
        raise ValueError("adjacency spectrum does not straddle 0; no valid interval")
    lo = 1.0 / float(omega[0])
    hi = 1.0 / float(omega[-1])
    return SpectralCache(eigenvalues=omega, interval=(lo, hi))


def log_det(cache: SpectralCache, p: float) -> float:
    """ln det(I - p W) as the sum of ln(1 - p*omega_i).

    Defined only strictly inside the cache interval.
    """
    lo, hi = cache.interval
    if not (lo < p < hi):
        raise ValueError(
            f"spatial parameter {p} outside the open interval ({lo}, {hi})"
        )
    return float(np.sum(np.log(1.0 - p * cache.eigenvalues)))


def _validate_inputs(
    X: DesignMatrix, y: np.ndarray, weights: SpatialWeights
) -> np.ndarray:
    if weights.mode != "row-standardized":
        raise ValueError("spatial models require row-standardized weights")
    if weights.include_self:
        raise ValueError("spatial models require weights without self-links")
    y = np.asarray(y, dtype=float)
    if y.shape != (X.n,):
        raise ValueError(f"y must have shape ({X.n},), got {y.shape}")
    if weights.n != X.n:
        raise ValueError(f"weights are for {weights.n} units, design has {X.n}")
    if np.isnan(y).any():
        raise ValueError("y contains missing values")
    if X.n <= X.q + 1:
        raise ValueError(
            f"need more observations than parameters (n={X.n}, q={X.q} + spatial)"
        )
    _rank_check(X)
    return y


def _ls_coef(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    coef, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    return coef


_LL_CONST = math.log(2.0 * math.pi) + 1.0


def error_concentrated_loglik(
    X: DesignMatrix,
    y: np.ndarray,
    weights: SpatialWeights,
    lam: float,
    cache: SpectralCache | None = None,
) -> float:
    """Profile log-likelihood of the error model at lam, with b and sigma^2
    concentrated out by filtered least squares."""
    y = _validate_inputs(X, y, weights)
    if cache is None:
        cache = spectral_cache(weights)
    w = weights.to_csr()
    return _error_profile(X.values, y, w @ X.values, w @ y, cache, lam)


def _error_profile(xv, y, wx, wy, cache, lam) -> float:
    n = y.size
    xf = xv - lam * wx
    yf = y - lam * wy
    beta = _ls_coef(xf, yf)
    resid = yf - xf @ beta
    sig2 = float(resid @ resid) / n
    return -0.5 * n * _LL_CONST - 0.5 * n * math.log(sig2) + log_det(cache, lam)


def lag_concentrated_loglik(
    X: DesignMatrix,
    y: np.ndarray,
    weights: SpatialWeights,
    rho: float,
    cache: SpectralCache | None = None,
) -> float:
    """Profile log-likelihood of the lag model at rho, concentrated through
    the two auxiliary regressions of y and Wy on X."""
    y = _validate_inputs(X, y, weights)
    if cache is None:
        cache = spectral_cache(weights)
    w = weights.to_csr()
    wy = w @ y
    e0 = y - X.values @ _ls_coef(X.values, y)
    e1 = wy - X.values @ _ls_coef(X.values, wy)
    return _lag_profile(e0, e1, cache, rho)


def _lag_profile(e0, e1, cache, rho) -> float:
    n = e0.size
    er = e0 - rho * e1
    sig2 = float(er @ er) / n
    return -0.5 * n * _LL_CONST - 0.5 * n * math.log(sig2) + log_det(cache, rho)


@dataclass(eq=False)
class SpatialFit:
    """A fitted spatial model.

    ``kind`` is "error" or "lag".  ``u`` holds the spatially correlated
    disturbance y - Xb for the error model and the innovation
    y - rho*W*y - Xb for the lag model.  Standard errors come from the
    numerical Hessian of the full likelihood; when that Hessian is not
    negative definite ``se_available`` is False and the se/p arrays are
    NaN.
    """

    kind: str
    names: list[str]
    param: float
    param_se: float
    param_p: float
    beta: np.ndarray
    beta_se: np.ndarray
    beta_p: np.ndarray
    sigma2: float
    log_likelihood: float
    aic: float
    pseudo_r2: float
    u: np.ndarray
    n: int
    q: int
    se_available: bool


def _optimize_profile(fun, interval: tuple[float, float]) -> float:
    lo, hi = interval
    span = hi - lo
    margin = 1e-10 * span
    res = scipy.optimize.minimize_scalar(
        lambda p: -fun(p),
        bounds=(lo + margin, hi - margin),
        method="bounded",
        options={"xatol": 1e-8},
    )
    param = float(res.x)
    if min(param - lo, hi - param) < 1e-6 * span:
        raise ValueError(
            f"spatial parameter estimate {param} is pinned at the interval "
            f"boundary ({lo}, {hi}); the model is not identified here"
        )
    return param


def _numerical_hessian(f, theta: np.ndarray, steps: np.ndarray) -> np.ndarray:
    k = theta.size
    h = np.zeros((k, k))
    f0 = f(theta)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        h[i, i] = (f(theta + ei) - 2.0 * f0 + f(theta - ei)) / steps[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = steps[j]
            val = (
                f(theta + ei + ej)
                - f(theta + ei - ej)
                - f(theta - ei + ej)
                + f(theta - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
            h[i, j] = val
            h[j, i] = val
    return h


def _hessian_se(
    full_ll, beta: np.ndarray, param: float, sigma2: float, interval
) -> tuple[np.ndarray, float, bool]:
    theta = np.concatenate([beta, [param, sigma2]])
    q = beta.size
    steps = np.empty(q + 2)
    steps[:q] = 1e-5 * np.maximum(np.abs(beta), 1.0)
    steps[q] = 1e-5 * max(abs(param), 1.0)
    steps[q + 1] = 1e-5 * sigma2
    # the parameter step must not cross the interval edge where the
    # log-determinant blows up
    lo, hi = interval
    steps[q] = min(steps[q], 0.5 * (hi - param), 0.5 * (param - lo))
    hess = _numerical_hessian(full_ll, theta, steps)
    neg = -hess
    try:
        eigs = np.linalg.eigvalsh(neg)
        if eigs.min() <= 0:
            raise np.linalg.LinAlgError
        cov = np.linalg.inv(neg)
        diag = np.diag(cov)
        if (diag[: q + 1] <= 0).any():
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        return np.full(q, np.nan), math.nan, False
    se = np.sqrt(diag)
    return se[:q], float(se[q]), True


def _wald_p(est: np.ndarray | float, se: np.ndarray | float):
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.abs(np.asarray(est, dtype=float) / np.asarray(se, dtype=float))
    return 2.0 * _scipy_stats.norm.sf(z)


def fit_error_ml(
    X: DesignMatrix,
    y: np.ndarray,
    weights: SpatialWeights,
    cache: SpectralCache | None = None,
) -> SpatialFit:
    """Fit the spatial error model by concentrated maximum likelihood."""
    y = _validate_inputs(X, y, weights)
    if cache is None:
        cache = spectral_cache(weights)
    w = weights.to_csr()
    xv = X.values
    wx = w @ xv
    wy = w @ y
    n, q = X.n, X.q

    lam = _optimize_profile(
        lambda p: _error_profile(xv, y, wx, wy, cache, p), cache.interval
    )
    xf = xv - lam * wx
    yf = y - lam * wy
    beta = _ls_coef(xf, yf)
    resid_f = yf - xf @ beta
    sigma2 = float(resid_f @ resid_f) / n
    ll = -0.5 * n * _LL_CONST - 0.5 * n * math.log(sigma2) + log_det(cache, lam)

    def full_ll(theta):
        b = theta[:q]
        lm = theta[q]
        s2 = theta[q + 1]
        r = (y - lm * wy) - (xv - lm * wx) @ b
        return (
            -0.5 * n * math.log(2.0 * math.pi * s2)
            + log_det(cache, lm)
            - 0.5 * float(r @ r) / s2
        )

    beta_se, param_se, ok = _hessian_se(full_ll, beta, lam, sigma2, cache.interval)
    beta_p = _wald_p(beta, beta_se) if ok else np.full(q, np.nan)
    param_p = float(_wald_p(lam, param_se)) if ok else math.nan

    fitted = xv @ beta
    u = y - fitted
    pseudo_r2 = float(np.corrcoef(y, fitted)[0, 1]) ** 2
    aic = -2.0 * ll + 2.0 * (q + 1)
    return SpatialFit(
        kind="error",
        names=list(X.names),
        param=lam,
        param_se=param_se,
        param_p=param_p,
        beta=beta,
        beta_se=beta_se,
        beta_p=beta_p,
        sigma2=sigma2,
        log_likelihood=ll,
        aic=aic,
        pseudo_r2=pseudo_r2,
        u=u,
        n=n,
        q=q,
        se_available=ok,
    )


def fit_lag_ml(
    X: DesignMatrix,
    y: np.ndarray,
    weights: SpatialWeights,
    cache: SpectralCache | None = None,
) -> SpatialFit:
    """Fit the spatial lag model by concentrated maximum likelihood."""
    y = _validate_inputs(X, y, weights)
    if cache is None:
        cache = spectral_cache(weights)
    w = weights.to_csr()
    xv = X.values
    wy = w @ y
    n, q = X.n, X.q

    b0 = _ls_coef(xv, y)
    b1 = _ls_coef(xv, wy)
    e0 = y - xv @ b0
    e1 = wy - xv @ b1

    rho = _optimize_profile(lambda p: _lag_profile(e0, e1, cache, p), cache.interval)
    beta = b0 - rho * b1
    er = e0 - rho * e1
    sigma2 = float(er @ er) / n
    ll = -0.5 * n * _LL_CONST - 0.5 * n * math.log(sigma2) + log_det(cache, rho)

    def full_ll(theta):
        b = theta[:q]
        rh = theta[q]
        s2 = theta[q + 1]
        r = y - rh * wy - xv @ b
        return (
            -0.5 * n * math.log(2.0 * math.pi * s2)
            + log_det(cache, rh)
            - 0.5 * float(r @ r) / s2
        )

    beta_se, param_se, ok = _hessian_se(full_ll, beta, rho, sigma2, cache.interval)
    beta_p = _wald_p(beta, beta_se) if ok else np.full(q, np.nan)
    param_p = float(_wald_p(rho, param_se)) if ok else math.nan

    u = y - rho * wy - xv @ beta
    ident = sp.identity(n, format="csc")
    fitted = scipy.sparse.linalg.spsolve(ident - rho * w.tocsc(), xv @ beta)
    pseudo_r2 = float(np.corrcoef(y, fitted)[0, 1]) ** 2
    aic = -2.0 * ll + 2.0 * (q + 1)
    return SpatialFit(
        kind="lag",
        names=list(X.names),
        param=rho,
        param_se=param_se,
        param_p=param_p,
        beta=beta,
        beta_se=beta_se,
        beta_p=beta_p,
        sigma2=sigma2,
        log_likelihood=ll,
        aic=aic,
        pseudo_r2=pseudo_r2,
        u=u,
        n=n,
        q=q,
        se_available=ok,
    )


@dataclass(eq=False)
class ModelComparison:
    """Side-by-side table for a least-squares fit and a spatial fit."""

    rows: list[dict]
    preferred: str
    note: str


def compare(ols_fit: OlsFit, spatial_fit: SpatialFit) -> ModelComparison:
    """Tabulate both fits and name the preferred model by lower AIC.

    Fit shares (adjusted R^2 versus squared correlation of y with fitted
    values) are reported but never compared across models; exact AIC ties
    go to the model with fewer parameters.
    """
    if ols_fit.n != spatial_fit.n:
        raise ValueError(
            f"fits cover different unit counts ({ols_fit.n} vs {spatial_fit.n})"
        )
    spatial_name = f"spatial-{spatial_fit.kind}"
    rows = [
        {
            "model": "ols",
            "fit_statistic": "adj_r2",
            "fit_value": ols_fit.adj_r2,
            "log_likelihood": ols_fit.log_likelihood,
            "aic": ols_fit.aic,
            "n_params": ols_fit.q,
        },
        {
            "model": spatial_name,
            "fit_statistic": "pseudo_r2",
            "fit_value": spatial_fit.pseudo_r2,
            "log_likelihood": spatial_fit.log_likelihood,
            "aic": spatial_fit.aic,
            "n_params": spatial_fit.q + 1,
        },
    ]
    if spatial_fit.aic < ols_fit.aic:
        preferred = spatial_name
    elif ols_fit.aic < spatial_fit.aic:
        preferred = "ols"
    else:
        preferred = "ols" if ols_fit.q <= spatial_fit.q + 1 else spatial_name
    note = (
        "adj_r2 and pseudo_r2 are different quantities and are not compared; "
        "the preferred model is the one with lower AIC, ties going to fewer "
        "parameters"
    )
    return ModelComparison(rows=rows, preferred=preferred, note=note)
