"""Seeded K-means (k-means++ seeding, Lloyd iterations)."""
from __future__ import annotations

import numpy as np


def kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[int(rng.integers(n))]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            break  # every point coincides with a chosen center
        idx = int(rng.choice(n, p=d2 / total))
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def assign(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def kmeans(X, k: int, rng: np.random.Generator, n_iter: int = 100):
    """Returns (centers, labels). Clusters that end up empty are dropped, so
    fewer than ``k`` centers may come back."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("kmeans needs a non-empty 2-D array")
    k = max(1, min(int(k), len(X)))
    centers = kmeans_pp_init(X, k, rng)
    labels = assign(X, centers)
    for _ in range(n_iter):
        new = centers.copy()
        for c in range(len(centers)):
            members = X[labels == c]
            if len(members):
                new[c] = members.mean(axis=0)
        new_labels = assign(X, new)
        centers = new
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    used = np.unique(labels)
    centers = centers[used]
    return centers, assign(X, centers)
