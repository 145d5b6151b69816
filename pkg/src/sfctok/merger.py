"""Merging M enhanced tokens into T via spectral embedding and entropic OT.

Features are smoothed over the normalized vote graph, embedded by a
truncated SVD, projected to cluster logits, and softly assigned to T
output tokens by a log-domain Sinkhorn solver with importance-score row
marginals. Also hosts the k-means instance-proposal clustering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import SeededWeights, TokenMatrix
from .errors import (
    DimensionMismatch,
    InvalidMarginals,
    KTooLarge,
    NonFiniteKernel,
    RankTooLarge,
)


@dataclass(frozen=True)
class SpectralEmbedding:
    z_emb: np.ndarray  # (M, r) = U_r Sigma_r
    singular_values: np.ndarray  # (r,) nonincreasing
    u: np.ndarray  # (M, r), orthonormal columns

    @property
    def rank(self):
        return self.singular_values.shape[0]


@dataclass(frozen=True)
class TransportPlan:
    plan: np.ndarray  # (M, T), nonnegative
    mu: np.ndarray  # (M,)
    nu: np.ndarray  # (T,)
    iterations: int
    residual: float
    residual_history: np.ndarray = None


def smooth_features(a_hat, tokens: TokenMatrix):
    """Y = A_hat (S - columnwise mean of S)."""
    feats = tokens.feats
    if a_hat.shape[0] != feats.shape[0]:
        raise DimensionMismatch(
            f"adjacency {a_hat.shape} vs {feats.shape[0]} tokens"
        )
    return a_hat @ (feats - feats.mean(axis=0, keepdims=True))


def _fix_signs(u, vt):
    """Flip singular vector pairs so each u column's largest-|entry| is positive."""
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, vt * signs[:, None]


def spectral_embed(y, r, seed=0, dense_cutoff=512) -> SpectralEmbedding:
    """Truncated SVD embedding Z_emb = U_r Sigma_r of the smoothed features.

    Dense SVD for small inputs; randomized subspace iteration (2 power
    iterations, oversampling 8) above ``dense_cutoff`` rows. Signs are fixed
    so the embedding is deterministic.
    """
    y = np.asarray(y, dtype=np.float64)
    m, d = y.shape
    if r > min(m, d):
        raise RankTooLarge(f"rank {r} > min{(m, d)}")
    if m <= dense_cutoff:
        u, s, vt = np.linalg.svd(y, full_matrices=False)
        u, s, vt = u[:, :r], s[:r], vt[:r]
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        probe = rng.standard_normal((d, min(d, r + 8)))
        q = y @ probe
        for _ in range(2):
            q, _ = np.linalg.qr(y @ (y.T @ q))
        b = q.T @ y
        ub, s, vt = np.linalg.svd(b, full_matrices=False)
        u = q @ ub
        u, s, vt = u[:, :r], s[:r], vt[:r]
    u, vt = _fix_signs(u, vt)
    return SpectralEmbedding(z_emb=u * s[None, :], singular_values=s, u=u)


def importance_scores(tokens: TokenMatrix, weights: SeededWeights):
    """Per-token scalar from the importance MLP, softmaxed onto the simplex."""
    from .tokenizer import mlp_project

    raw = mlp_project(tokens.feats, weights)[:, 0]
    raw = raw - raw.max()
    e = np.exp(raw)
    return e / e.sum()


def project_logits(z_emb, w_proj: SeededWeights):
    """Plain matrix product Z_emb @ W (the projection carries no bias)."""
    w, _ = w_proj.layer(0)
    if z_emb.shape[1] != w.shape[0]:
        raise DimensionMismatch(
            f"embedding width {z_emb.shape[1]} != projection fan-in {w.shape[0]}"
        )
    return z_emb @ w


def sinkhorn(
    logits,
    mu,
    nu,
    tau,
    max_iters=500,
    residual_tol=1e-9,
    track_history=False,
) -> TransportPlan:
    """Log-domain Sinkhorn scaling of the kernel exp(logits / tau).

    Higher logit means more affinity (the cost is -logits). Alternates row
    and column potential updates until the worst marginal violation drops
    below ``residual_tol`` or the iteration cap is reached.
    """
    logits = np.asarray(logits, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if tau <= 0:
        raise ValueError(f"tau={tau} must be positive")
    if not np.isfinite(logits).all():
        raise NonFiniteKernel("logits contain non-finite entries")
    for name, marg, size in (("mu", mu, logits.shape[0]), ("nu", nu, logits.shape[1])):
        if marg.shape != (size,) or (marg <= 0).any() or abs(marg.sum() - 1.0) > 1e-8:
            raise InvalidMarginals(f"{name} must be a positive simplex vector")

    log_k = logits / tau
    log_mu = np.log(mu)
    log_nu = np.log(nu)
    f = np.zeros(mu.shape[0])
    g = np.zeros(nu.shape[0])

    history = []
    iterations = 0
    residual = np.inf
    for it in range(max_iters):
        f = log_mu - logsumexp(log_k + g[None, :], axis=1)
        g = log_nu - logsumexp(log_k + f[:, None], axis=0)
        iterations = it + 1
        plan = np.exp(log_k + f[:, None] + g[None, :])
        residual = max(
            np.abs(plan.sum(axis=1) - mu).max(),
            np.abs(plan.sum(axis=0) - nu).max(),
        )
        if track_history:
            history.append(residual)
        if residual <= residual_tol:
            break
    plan = np.exp(log_k + f[:, None] + g[None, :])
    if not np.isfinite(plan).all():
        raise NonFiniteKernel("transport plan overflowed")
    return TransportPlan(
        plan=plan,
        mu=mu,
        nu=nu,
        iterations=iterations,
        residual=float(residual),
        residual_history=np.array(history) if track_history else None,
    )


def soft_pool(plan: TransportPlan, tokens: TokenMatrix, normalize=False) -> TokenMatrix:
    """Merged tokens Z' = P^T S and centers C' = P^T C.

    With ``normalize`` each output row is divided by its column marginal
    nu_k, turning it into a proper weighted mean.
    """
    p = plan.plan
    if p.shape[0] != tokens.n_tokens:
        raise DimensionMismatch(f"plan {p.shape} vs {tokens.n_tokens} tokens")
    feats = p.T @ tokens.feats
    centers = p.T @ tokens.centers
    if normalize:
        feats = feats / plan.nu[:, None]
        centers = centers / plan.nu[:, None]
    return TokenMatrix(feats=feats, centers=centers)


def kmeans_proposals(z_emb, n_clusters, seed=0, max_iters=100):
    """Lloyd's algorithm with seeded k-means++ initialization.

    Returns per-row cluster labels; stops at an assignment fixpoint or the
    iteration cap. The objective is nonincreasing across iterations.
    """
    z = np.asarray(z_emb, dtype=np.float64)
    m = z.shape[0]
    if n_clusters > m:
        raise KTooLarge(f"{n_clusters} clusters > {m} rows")
    rng = np.random.Generator(np.random.PCG64(seed))

    # k-means++ seeding
    centers = np.empty((n_clusters, z.shape[1]))
    centers[0] = z[rng.integers(m)]
    d2 = ((z - centers[0]) ** 2).sum(axis=1)
    for c in range(1, n_clusters):
        total = d2.sum()
        if total <= 0:
            centers[c] = z[rng.integers(m)]
        else:
            centers[c] = z[rng.choice(m, p=d2 / total)]
        d2 = np.minimum(d2, ((z - centers[c]) ** 2).sum(axis=1))

    labels = np.full(m, -1, dtype=np.int64)
    for _ in range(max_iters):
        dists = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dists.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(n_clusters):
            mask = labels == c
            if mask.any():
                centers[c] = z[mask].mean(axis=0)
    return labels
