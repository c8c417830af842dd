"""Eigenvalue counting functions of restricted operators and the density
approximation built on them."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

from .exhaustion import FolnerSequence, boundary_ratio, induce_subgraph
from .graph import GammaGraph
from .magnetic import WeightFunction
from .operators import HermitianMatrix, operator_bounds, restrict_dml

DEFAULT_TOL = 1e-10


class SpectralError(RuntimeError):
    pass


class NotHermitian(SpectralError):
    pass


class NoConvergence(SpectralError):
    pass


class InsufficientData(SpectralError):
    pass


class ConstructionFailed(SpectralError):
    pass


@dataclass
class EigenSpectrum:
    values: np.ndarray  # ascending
    tol: float = DEFAULT_TOL
    norm: float = 1.0
    N: int = 1  # size of Lambda_m (not of the matrix)
    source: dict = field(default_factory=dict)

    @property
    def eps_count(self) -> float:
        return max(1e-9, self.tol * self.norm)

    def __len__(self):
        return len(self.values)


def hermitian_eigenvalues(M, tol: float = DEFAULT_TOL, N: Optional[int] = None, check: bool = True) -> EigenSpectrum:
    """All eigenvalues of a Hermitian matrix, ascending.

    LAPACK's Householder tridiagonalization + implicitly shifted QR /
    divide-and-conquer does the work; residuals are checked on a sample of
    eigenpairs for moderate sizes, trace identities otherwise.
    """
    if isinstance(M, HermitianMatrix):
        meta = dict(M.meta)
        if M.defect > 1e-12:
            raise NotHermitian(f"hermiticity defect {M.defect:.3g}")
        A = M.dense()
    else:
        meta = {}
        A = np.asarray(M)
        top = np.abs(A).max() if A.size else 0.0
        if A.size and np.abs(A - A.conj().T).max() > 1e-12 * max(top, 1.0):
            raise NotHermitian("matrix is not Hermitian")
    n = A.shape[0]
    try:
        if check and n <= 600:
            vals, vecs = np.linalg.eigh(A)
        else:
            vals, vecs = np.linalg.eigvalsh(A), None
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    norm = float(max(abs(vals[0]), abs(vals[-1]))) if n else 0.0
    scale = max(norm, 1.0)
    if check and n:
        if vecs is not None:
            idx = np.unique(np.linspace(0, n - 1, min(n, 16)).astype(int))
            X = vecs[:, idx]
            res = np.linalg.norm(A @ X - X * vals[idx], axis=0)
            if res.max() > tol * scale:
                raise NoConvergence(f"residual {res.max():.3g} exceeds {tol * scale:.3g}")
        else:
            tr1 = np.real(np.trace(A))
            tr2 = np.real(np.vdot(A, A))
            if abs(vals.sum() - tr1) > tol * scale * n or abs((vals**2).sum() - tr2) > tol * scale**2 * n:
                raise NoConvergence("trace identities violated")
    return EigenSpectrum(vals, tol, scale, N if N is not None else n, meta)


def counting_function(spec: EigenSpectrum, lam) -> np.ndarray:
    """#{mu <= lam + eps_count}, vectorized over ``lam``."""
    return np.searchsorted(spec.values, np.asarray(lam, dtype=float) + spec.eps_count, side="right")


def density_function(spec: EigenSpectrum, lam) -> np.ndarray:
    """F_m(lam) = E_m(lam) / N_m."""
    return counting_function(spec, lam) / spec.N


@dataclass
class DensityTable:
    grid: np.ndarray
    labels: list
    N: list  # #Lambda_m per column
    columns: np.ndarray  # shape (len(labels), len(grid))
    spectra: list
    ratios: list  # boundary fraction (delta = 1) per column
    a: int
    K2: float
    rational: bool
    bc: str
    flux: dict = field(default_factory=dict)

    def column(self, k: int = -1) -> np.ndarray:
        return self.columns[k]

    def tail(self) -> np.ndarray:
        half = max(1, (len(self.labels) + 1) // 2)
        return self.columns[-half:]

    @property
    def Fbar(self) -> np.ndarray:
        """limsup proxy: max over the tail of the sequence."""
        return self.tail().max(axis=0)

    @property
    def Funder(self) -> np.ndarray:
        return self.tail().min(axis=0)

    @property
    def Fbar_plus(self) -> np.ndarray:
        return np.append(self.Fbar[1:], self.Fbar[-1])

    @property
    def Funder_plus(self) -> np.ndarray:
        return np.append(self.Funder[1:], self.Funder[-1])

    def F(self, k: int, lam) -> np.ndarray:
        """Exact F_m at arbitrary points from the stored spectrum."""
        return density_function(self.spectra[k], lam)


def density_sequence(
    g: GammaGraph,
    sigma: WeightFunction,
    seq: FolnerSequence,
    bc,
    grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> DensityTable:
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    bounds = operator_bounds(g)

    def job(k):
        X = induce_subgraph(g, seq[k])
        M = restrict_dml(g, sigma, X, bc)
        spec = hermitian_eigenvalues(M, tol, N=X.N)
        spec.source.update({"label": seq.label(k)})
        return spec, boundary_ratio(g, X, 1)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, range(len(seq))))
    else:
        results = [job(k) for k in range(len(seq))]
    spectra = [r[0] for r in results]
    cols = np.array([density_function(s, grid) for s in spectra])
    return DensityTable(
        grid=grid,
        labels=[seq.label(k) for k in range(len(seq))],
        N=[s.N for s in spectra],
        columns=cols,
        spectra=spectra,
        ratios=[r[1] for r in results],
        a=g.a,
        K2=bounds.K2,
        rational=sigma.rational,
        bc=str(getattr(bc, "value", bc)),
        flux=sigma.spec,
    )


@dataclass
class DensityEstimate:
    estimate: float
    error_bar: float
    verdict: str  # converged | oscillating | insufficient
    claim: str  # pointwise | right-limit


def estimate_density(table: DensityTable, lam: float) -> DensityEstimate:
    if len(table.labels) < 3:
        raise InsufficientData("need at least three columns")
    vals = np.array([float(table.F(k, lam)) for k in range(len(table.labels))])
    last3 = vals[-3:]
    osc = float(last3.max() - last3.min())
    ratio = table.ratios[-1]
    err = ratio + osc
    if osc <= ratio:
        verdict = "converged"
    else:
        verdict = "oscillating"
    claim = "pointwise" if table.rational else "right-limit"
    return DensityEstimate(float(vals[-1]), err, verdict, claim)


# --- polynomial approximation of the indicator ----------------------------------


@dataclass
class IndicatorPolynomial:
    """p_n on [0, K2] in the Chebyshev basis of that interval."""

    lam: float
    n: int
    K2: float
    coeffs: np.ndarray
    margin: float  # certified min distance to the constraints
    grid_step: float

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, mu):
        x = 2.0 * np.asarray(mu, dtype=float) / self.K2 - 1.0
        return C.chebval(x, self.coeffs)

    def derivative(self, mu):
        x = 2.0 * np.asarray(mu, dtype=float) / self.K2 - 1.0
        return C.chebval(x, C.chebder(self.coeffs)) * (2.0 / self.K2)


def f_n(mu, lam: float, n: int):
    """Piecewise-linear majorant: 1+1/n up to lam, slope -n, then 1/n."""
    mu = np.asarray(mu, dtype=float)
    return np.clip(1.0 + 1.0 / n - n * (mu - lam), 1.0 / n, 1.0 + 1.0 / n)


def indicator_polynomial(lam: float, n: int, K2: float, max_degree: int = 4096) -> IndicatorPolynomial:
    """Polynomial with chi_[0,lam] < p < f_n on [0, K2], certified.

    Interpolates f_n - 1/(2n) (distance 1/(2n) from both constraints) at
    Chebyshev points of increasing degree. Certificate: the constraints hold
    on a grid of step h <= K2/1e4 with a margin exceeding (B + n) h, where
    B = (2/K2) sum |c'_k| bounds sup|p'| (|T_k| <= 1) and n bounds the slope
    of f_n, so nothing can cross between grid points.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= lam <= K2:
        raise ValueError("lam must lie in [0, K2]")

    def target(x):
        return f_n((x + 1.0) * K2 / 2.0, lam, n) - 0.5 / n

    deg = 8
    while deg <= max_degree:
        coeffs = C.chebinterpolate(target, deg)
        p = IndicatorPolynomial(lam, n, K2, coeffs, 0.0, 0.0)
        B = (2.0 / K2) * float(np.sum(np.abs(C.chebder(coeffs))))
        # the margin is at most 1/(2n); pick h so the slack uses at most half of it
        h = min(K2 / 1e4, 1.0 / (4.0 * n * (B + n)))
        mu = np.linspace(0.0, K2, int(np.ceil(K2 / h)) + 1)
        h = mu[1] - mu[0]
        vals = p(mu)
        chi = (mu <= lam).astype(float)
        margin = min(float(np.min(vals - chi)), float(np.min(f_n(mu, lam, n) - vals)))
        slack = (B + n) * h
        if margin > slack:
            p.margin = margin - slack
            p.grid_step = h
            return p
        deg *= 2
    raise ConstructionFailed(f"no certified polynomial up to degree {max_degree}")


def moment_density_estimate(spec: EigenSpectrum, p: IndicatorPolynomial) -> float:
    """(1/N_m) Tr p_n(Delta^(m)) from the eigenvalues."""
    return float(np.sum(p(spec.values)) / spec.N)


def sandwich_bounds(spec: EigenSpectrum, p: IndicatorPolynomial, a: int) -> tuple:
    """(F_m(lam), F_m(lam + 1/n) + a/n): the two sides bracketing the trace estimate."""
    lo = float(density_function(spec, p.lam))
    hi = float(density_function(spec, p.lam + 1.0 / p.n)) + a / p.n
    return lo, hi


def polynomial_trace_exact(g: GammaGraph, sigma: WeightFunction, coeffs: Sequence[float]) -> float:
    """Tr_{Gamma,sigma} p(Delta) for p in the monomial basis, via exact moments."""
    from .operators import exact_moment

    return float(sum(a * exact_moment(g, sigma, r).value for r, a in enumerate(coeffs) if a))


# --- union of restricted spectra -------------------------------------------------


@dataclass
class SpectrumUnion:
    points: np.ndarray
    multiplicity: np.ndarray
    tol: float

    def contains(self, x: float, tol: Optional[float] = None) -> bool:
        t = self.tol if tol is None else tol
        if not len(self.points):
            return False
        i = np.searchsorted(self.points, x)
        near = [self.points[j] for j in (i - 1, i) if 0 <= j < len(self.points)]
        return any(abs(x - y) <= t for y in near)

    def outside(self, intervals) -> np.ndarray:
        """Points not covered by any (lo, hi) interval."""
        mask = np.ones(len(self.points), dtype=bool)
        for lo, hi in intervals:
            mask &= ~((self.points >= lo) & (self.points <= hi))
        return self.points[mask]


def union_restricted_spectra(spectra: Sequence[EigenSpectrum], tol: float = 1e-8) -> SpectrumUnion:
    allv = np.sort(np.concatenate([np.asarray(s.values) for s in spectra])) if spectra else np.array([])
    pts, mult = [], []
    for x in allv:
        if pts and x - pts[-1] <= tol:
            mult[-1] += 1
        else:
            pts.append(float(x))
            mult.append(1)
    return SpectrumUnion(np.array(pts), np.array(mult, dtype=int), tol)
