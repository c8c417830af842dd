"""Independent reference values: Bloch bands, closed-form spectra, quadratures.

Nothing here imports the package; these are the oracles the tests compare to.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def bloch_bands(p: int, q: int, grid: int = 200) -> np.ndarray:
    """Band intervals of the Z^2 DML at flux p/q from q x q magnetic Bloch matrices.

    Landau gauge: the vertical hop at column x carries exp(2 pi i p x / q).
    Returns an array of shape (q, 2) with [min, max] per band.
    """
    theta = p / q
    ks = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    lo = np.full(q, np.inf)
    hi = np.full(q, -np.inf)
    xs = np.arange(q)
    for k1 in ks:
        for k2 in ks:
            H = np.diag(2.0 * np.cos(k2 + 2.0 * np.pi * theta * xs)).astype(complex)
            if q == 1:
                H[0, 0] += 2.0 * np.cos(k1)
            else:
                for x in range(q - 1):
                    H[x, x + 1] += 1.0
                    H[x + 1, x] += 1.0
                H[q - 1, 0] += np.exp(1j * k1)
                H[0, q - 1] += np.exp(-1j * k1)
            ev = np.sort(4.0 - np.linalg.eigvalsh(H))
            lo = np.minimum(lo, ev)
            hi = np.maximum(hi, ev)
    return np.stack([lo, hi], axis=1)


def band_gaps(bands: np.ndarray, tol: float = 1e-9) -> list:
    """Open intervals between consecutive bands (after merging overlaps)."""
    merged = []
    for lo, hi in sorted(map(tuple, bands)):
        if merged and lo <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(merged[i][1], merged[i + 1][0]) for i in range(len(merged) - 1)]


def path_dirichlet(N: int) -> np.ndarray:
    k = np.arange(1, N + 1)
    return np.sort(2.0 - 2.0 * np.cos(k * np.pi / (N + 1)))


def path_neumann(N: int) -> np.ndarray:
    k = np.arange(N)
    return np.sort(2.0 - 2.0 * np.cos(k * np.pi / N))


def box_neumann_zd(sides) -> np.ndarray:
    """Spectrum of the free Laplacian on a product of paths (sums of path spectra)."""
    ev = np.zeros(1)
    for L in sides:
        ev = (ev[:, None] + path_neumann(L)[None, :]).ravel()
    return np.sort(ev)


def h4_closed_walks(theta: Fraction) -> tuple:
    """Tr H^4 on Z^2 by brute-force closed-walk enumeration: (phase counts, value).

    Each length-4 walk from the origin is followed explicitly; the phase is the
    enclosed signed flux accumulated in the Landau gauge.
    """
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    counts: dict = {}
    for w in range(4**4):
        x = y = 0
        phase = Fraction(0)
        ok = True
        word = [(w >> (2 * i)) & 3 for i in range(4)]
        for s in word:
            dx, dy = steps[s]
            if dy == 1:
                phase += theta * x
            elif dy == -1:
                phase -= theta * x
            x, y = x + dx, y + dy
        if x == 0 and y == 0 and ok:
            key = phase % 1
            counts[key] = counts.get(key, 0) + 1
    value = sum(c * math.cos(2 * math.pi * float(t)) for t, c in counts.items())
    return counts, value


def log_mahler_1d(mu: float = 0.0, points: int = 200000) -> float:
    """(1/2pi) int log|2 - 2 cos t - mu| dt by the midpoint rule."""
    t = (np.arange(points) + 0.5) * 2 * np.pi / points
    return float(np.mean(np.log(np.abs(2 - 2 * np.cos(t) - mu))))


CATALAN = 0.915965594177219015054603514932384110774
LOGDET_Z2 = 4 * CATALAN / math.pi
GOLDEN_SQ = (3 + math.sqrt(5)) / 2


def log_mahler_2d(points: int = 2000) -> float:
    """(1/4pi^2) int log(4 - 2cos x - 2cos y) over the torus, midpoint rule."""
    t = (np.arange(points) + 0.5) * 2 * np.pi / points
    c = 2 - 2 * np.cos(t)
    return float(np.mean(np.log(c[:, None] + c[None, :])))


def spanning_trees(adj: np.ndarray) -> int:
    """Matrix-tree theorem: any cofactor of the graph Laplacian."""
    L = np.diag(adj.sum(axis=1)) - adj
    return int(round(np.linalg.det(L[1:, 1:])))


def charpoly_from_roots(roots) -> np.ndarray:
    return np.real(np.poly(np.asarray(roots)))
