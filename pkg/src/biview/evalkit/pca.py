"""Two-component PCA by power iteration with deflation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PcaResult:
    projection: np.ndarray  # (n, 2)
    components: np.ndarray  # (2, d), orthonormal rows
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    zero_variance: bool = False


def _power(cov, start, max_iter, tol):
    v = start / np.linalg.norm(start)
    lam = 0.0
    for _ in range(max_iter):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return v, 0.0
        w /= norm
        new_lam = float(w @ cov @ w)
        # cov is PSD, so iterates never flip sign; stop on the direction itself
        done = np.linalg.norm(w - v) <= tol
        v, lam = w, new_lam
        if done:
            break
    return v, lam


def _fix_sign(v):
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def pca2(X, max_iter: int = 5000, tol: float = 1e-11, seed: int = 0) -> PcaResult:
    """Top two principal directions of the mean-centered rows of ``X``.

    Each component is signed so its largest-magnitude entry is positive.
    """
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (n - 1)
    total = float(np.trace(cov))
    k = min(2, d)
    comps = np.zeros((2, d))
    var = np.zeros(2)
    if total <= 0.0:
        if d >= 1:
            comps[0, 0] = 1.0
        if d >= 2:
            comps[1, 1] = 1.0
        return PcaResult(np.zeros((n, 2)), comps, var, np.zeros(2), zero_variance=True)
    rng = np.random.default_rng(seed)
    work = cov.copy()
    for j in range(k):
        start = rng.standard_normal(d)
        # keep later components orthogonal to earlier ones
        for i in range(j):
            start -= (start @ comps[i]) * comps[i]
        v, lam = _power(work, start, max_iter, tol)
        for i in range(j):
            v -= (v @ comps[i]) * comps[i]
        nv = np.linalg.norm(v)
        if nv == 0.0 or lam <= 0.0:
            # remaining variance is zero; complete the basis deterministically
            basis = np.eye(d)
            for e in basis:
                for i in range(j):
                    e = e - (e @ comps[i]) * comps[i]
                if np.linalg.norm(e) > 1e-8:
                    v = e
                    break
            lam = 0.0
        v = _fix_sign(v / np.linalg.norm(v))
        comps[j] = v
        var[j] = max(float(v @ cov @ v), 0.0)
        work = work - lam * np.outer(v, v)
    proj = Xc @ comps.T
    return PcaResult(proj, comps, var, var / total)
