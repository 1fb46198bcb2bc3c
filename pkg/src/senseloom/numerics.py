"""Distance, clustering, 2D projection, and dispersion-ranked suggestion.

Everything here is deterministic for a fixed seed and never mutates its
inputs, so per-lemma computations can run concurrently.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .embedstore import EmbeddingMatrix
from .errors import ValidationError

_SYMMETRY_TOL = 1e-12
_BOUND_SLACK = 1e-9


@dataclass
class DistanceMatrix:
    values: np.ndarray  # (n, n) float64

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError(f"distance matrix must be square, got shape {v.shape}")
        if np.abs(v - v.T).max(initial=0.0) > _SYMMETRY_TOL:
            raise ValidationError("distance matrix is not symmetric")
        if v.shape[0] and np.abs(np.diag(v)).max() != 0.0:
            raise ValidationError("distance matrix diagonal must be exactly zero")
        if v.size and (v.min() < -_BOUND_SLACK or v.max() > 2.0 + _BOUND_SLACK):
            raise ValidationError("distance entries must lie in [0, 2]")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class ClusterLabels:
    labels: list[int]
    k: int

    def __post_init__(self):
        if any(not (0 <= l < self.k) for l in self.labels):
            raise ValidationError(f"cluster label out of range [0, {self.k})")

    def counts(self) -> list[int]:
        out = [0] * self.k
        for l in self.labels:
            out[l] += 1
        return out


@dataclass
class Projection2D:
    points: np.ndarray  # (n, 2) float64
    method: str  # "mds" or "pca"
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValidationError(f"projection must be n x 2, got shape {self.points.shape}")
        if not np.isfinite(self.points).all():
            raise ValidationError("projection contains non-finite coordinates")


def _normalized_rows(m: EmbeddingMatrix) -> np.ndarray:
    X = m.data.astype(np.float64)
    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        i = int(zero[0])
        rid = m.ids[i] if i < len(m.ids) else str(i)
        raise ValidationError(f"zero-norm embedding row for sentence id {rid!r}")
    return X / norms[:, None]


def pairwise_cosine_distance(m: EmbeddingMatrix) -> DistanceMatrix:
    """d(i, j) = 1 - cos(x_i, x_j), clamped to [0, 2]."""
    U = _normalized_rows(m)
    D = 1.0 - U @ U.T
    D = (D + D.T) / 2.0
    np.clip(D, 0.0, 2.0, out=D)
    np.fill_diagonal(D, 0.0)
    return DistanceMatrix(D)


# ---------------------------------------------------------------------------
# k-means


def _kmeans_pp_centers(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: each new center is the best of several D^2-sampled
    candidates (the variant standard libraries use)."""
    n = X.shape[0]
    n_local_trials = 2 + int(np.log(k))
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            candidates = rng.choice(n, size=n_local_trials, p=d2 / total)
        else:
            # all remaining points coincide with chosen centers
            candidates = np.array([int(np.argmin(d2))])
        best_idx, best_d2, best_potential = None, None, np.inf
        for idx in candidates:
            cand_d2 = np.minimum(d2, ((X - X[int(idx)]) ** 2).sum(axis=1))
            potential = cand_d2.sum()
            if potential < best_potential:
                best_idx, best_d2, best_potential = int(idx), cand_d2, potential
        centers[j] = X[best_idx]
        d2 = best_d2
    return centers


def _assign(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # argmin breaks ties toward the lowest center index
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _lloyd(
    X: np.ndarray, centers: np.ndarray, max_iter: int, tol: float
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Run Lloyd iterations; returns (labels, centers, inertia per iteration)."""
    k = centers.shape[0]
    inertias: list[float] = []
    labels = _assign(X, centers)
    for _ in range(max_iter):
        # repair empty clusters: reseed at the point farthest from its center
        for j in range(k):
            if not (labels == j).any():
                dists = ((X - centers[labels]) ** 2).sum(axis=1)
                p = int(np.argmax(dists))
                centers[j] = X[p]
                labels[p] = j
        new_centers = np.empty_like(centers)
        for j in range(k):
            new_centers[j] = X[labels == j].mean(axis=0)
        inertias.append(float(((X - new_centers[labels]) ** 2).sum()))
        movement = np.linalg.norm(new_centers - centers, axis=1).max()
        centers = new_centers
        labels = _assign(X, centers)
        if movement < tol:
            break
    return labels, centers, inertias


def kmeans(m: EmbeddingMatrix, k: int, seed: int, max_iter: int = 100, tol: float = 1e-6) -> ClusterLabels:
    """Spherical k-means: k-means++ seeding, Lloyd iterations on unit-norm rows."""
    n = m.n
    if not (1 <= k <= n):
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    X = _normalized_rows(m)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_centers(X, k, rng)
    labels, _, _ = _lloyd(X, centers, max_iter, tol)
    return ClusterLabels(labels=[int(l) for l in labels], k=k)


def kmeans_inertia(m: EmbeddingMatrix, labels: ClusterLabels) -> float:
    """Within-cluster sum of squared distances on unit-norm rows."""
    X = _normalized_rows(m)
    lab = np.asarray(labels.labels)
    total = 0.0
    for j in range(labels.k):
        members = X[lab == j]
        if len(members):
            total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


# ---------------------------------------------------------------------------
# agglomerative (average linkage)


def agglomerative(d: DistanceMatrix, k: int, linkage: str = "average") -> ClusterLabels:
    """Average-linkage merging until k clusters remain.

    Merge ties are broken by the lexicographically smallest pair of cluster
    representatives, a cluster's representative being its smallest member
    index. Output ids are assigned 0..k-1 in representative order.
    """
    if linkage != "average":
        raise ValidationError(f"unsupported linkage {linkage!r}")
    n = d.n
    if not (1 <= k <= n):
        raise ValidationError(f"k must be in [1, {n}], got {k}")

    # cluster-level distances; merged-away and diagonal slots masked with +inf
    D = d.values.astype(np.float64).copy()
    np.fill_diagonal(D, np.inf)
    alive = np.ones(n, dtype=bool)
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    sizes = np.ones(n)
    reps = np.arange(n)

    for _ in range(n - k):
        current = float(D.min())
        cand_i, cand_j = np.nonzero(D == current)
        best = None  # (rep_i, rep_j, i, j)
        for i, j in zip(cand_i.tolist(), cand_j.tolist()):
            if i >= j:
                continue
            ri, rj = sorted((int(reps[i]), int(reps[j])))
            if best is None or (ri, rj) < best[:2]:
                best = (ri, rj, i, j)
        _, _, i, j = best
        ni, nj = sizes[i], sizes[j]
        merged_row = (ni * D[i] + nj * D[j]) / (ni + nj)
        D[i] = merged_row
        D[:, i] = merged_row
        D[i, i] = np.inf
        D[j, :] = np.inf
        D[:, j] = np.inf
        members[i].extend(members.pop(j))
        sizes[i] = ni + nj
        reps[i] = min(reps[i], reps[j])
        alive[j] = False

    ordered = sorted(np.flatnonzero(alive).tolist(), key=lambda c: int(reps[c]))
    labels = [0] * n
    for cluster_id, c in enumerate(ordered):
        for p in members[c]:
            labels[p] = cluster_id
    return ClusterLabels(labels=labels, k=k)


# ---------------------------------------------------------------------------
# eigen-iteration shared by MDS and PCA


def _top_eigenpairs(
    matvec: Callable[[np.ndarray], np.ndarray],
    dim: int,
    k: int,
    sigma: float,
    iters: int = 1000,
    resid_tol: float = 1e-10,
) -> list[tuple[float, np.ndarray]]:
    """Extract the k most-positive eigenpairs of a symmetric operator.

    Power iteration on the shifted operator A + sigma*I (sigma an upper bound
    on |lambda| makes the most-positive eigenvalue dominant), deflating each
    converged pair out of the operator before the next stage.
    """
    rng = np.random.default_rng(0)
    pairs: list[tuple[float, np.ndarray]] = []

    def deflated(v: np.ndarray) -> np.ndarray:
        w = matvec(v)
        for lam, u in pairs:
            w = w - lam * (u @ v) * u
        return w

    for _ in range(k):
        v = rng.standard_normal(dim)
        v = v / np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            w = deflated(v) + sigma * v
            norm_w = np.linalg.norm(w)
            if norm_w < 1e-300:
                lam = 0.0
                break
            v = w / norm_w
            bv = deflated(v)
            lam = float(v @ bv)
            if np.linalg.norm(bv - lam * v) < resid_tol:
                break
        pairs.append((lam, v))
    return pairs


def _fix_signs(points: np.ndarray) -> np.ndarray:
    """Make the first non-negligible coordinate of each axis positive."""
    for col in range(points.shape[1]):
        nz = np.flatnonzero(np.abs(points[:, col]) > 1e-12)
        if nz.size and points[nz[0], col] < 0:
            points[:, col] = -points[:, col]
    return points


def classical_mds(d: DistanceMatrix, ids: list[str] | None = None) -> Projection2D:
    """Torgerson scaling: double-center squared distances, embed top-2 eigenpairs.

    Negative eigenvalues are clamped to zero (cosine distances need not be
    Euclidean-embeddable).
    """
    n = d.n
    if n < 3:
        raise ValidationError(f"classical MDS needs n >= 3 points, got {n}")
    D2 = d.values**2
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * (J @ D2 @ J)
    B = (B + B.T) / 2.0

    sigma = float(np.linalg.norm(B, "fro"))
    pairs = _top_eigenpairs(lambda v: B @ v, n, 2, sigma)
    points = np.empty((n, 2))
    for axis, (lam, vec) in enumerate(pairs):
        points[:, axis] = vec * np.sqrt(max(lam, 0.0))
    points -= points.mean(axis=0)
    points = _fix_signs(points)
    return Projection2D(points=points, method="mds", ids=list(ids) if ids else [])


def pca2(m: EmbeddingMatrix, ids: list[str] | None = None) -> Projection2D:
    """Project mean-centered rows onto the top-2 principal axes."""
    n = m.n
    if n < 3:
        raise ValidationError(f"PCA projection needs n >= 3 points, got {n}")
    X = m.data.astype(np.float64)
    Xc = X - X.mean(axis=0)

    def cov_matvec(v: np.ndarray) -> np.ndarray:
        return Xc.T @ (Xc @ v) / n

    pairs = _top_eigenpairs(cov_matvec, m.d, 2, sigma=0.0)
    W = np.stack([vec for _, vec in pairs], axis=1)
    points = Xc @ W
    points = _fix_signs(points)
    use_ids = list(ids) if ids is not None else list(m.ids)
    return Projection2D(points=points, method="pca", ids=use_ids)


# ---------------------------------------------------------------------------
# dispersion-ranked suggestion


def suggest_dispersed(p: Projection2D, m: int, seed: int) -> list[int]:
    """Farthest-point sampling over the 2D view.

    Starts at the point farthest from the centroid, then greedily maximizes
    the minimum distance to the already-picked set. Ties go to the lowest
    index. The seed only matters when every point coincides.
    """
    pts = p.points
    n = pts.shape[0]
    if not (1 <= m <= n):
        raise ValidationError(f"m must be in [1, {n}], got {m}")

    span = pts.max(axis=0) - pts.min(axis=0) if n else np.zeros(2)
    if n and float(np.abs(span).max()) == 0.0:
        rng = random.Random(seed)
        return rng.sample(range(n), m)

    centroid = pts.mean(axis=0)
    first = int(np.argmax(np.linalg.norm(pts - centroid, axis=1)))
    picked = [first]
    min_dist = np.linalg.norm(pts - pts[first], axis=1)
    min_dist[first] = -1.0
    while len(picked) < m:
        nxt = int(np.argmax(min_dist))
        picked.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(pts - pts[nxt], axis=1))
        min_dist[nxt] = -1.0
    return picked


def export_projection(lemma: str, proj: Projection2D, clusters: ClusterLabels | None = None) -> dict:
    """JSON-ready view of a projection with optional cluster labels."""
    return {
        "lemma": lemma,
        "method": proj.method,
        "ids": list(proj.ids),
        "points": [[float(x), float(y)] for x, y in proj.points],
        "clusters": list(clusters.labels) if clusters is not None else None,
    }
