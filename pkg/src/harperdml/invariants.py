"""Consequences of density convergence: spectral gaps, log-Hoelder continuity of
the density, Fuglede-Kadison determinants and kernel dimension."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .algebraic import (
    AlgebraicError,
    as_cyclotomic,
    bound_params,
    charpoly_integral,
    lowest_nonzero_coefficient,
    restrict_dml_exact,
)
from .cyclotomic import CyclotomicNumber, taylor_shift
from .exhaustion import FolnerSequence, induce_subgraph
from .graph import GammaGraph
from .magnetic import WeightFunction
from .operators import BoundaryCondition, operator_bounds, restrict_dml
from .spectral import DensityTable, EigenSpectrum, InsufficientData, counting_function, hermitian_eigenvalues


class InvariantError(RuntimeError):
    pass


class GridTooCoarse(InvariantError):
    pass


class DivergentEstimate(InvariantError):
    pass


class Undecidable(InvariantError):
    pass


# --- spectral gaps -----------------------------------------------------------------


@dataclass
class GapInterval:
    lam1: float
    lam2: float
    mass_last: float  # F_m(lam2) - F_m(lam1) for the last m
    trend: list  # the same mass over the last three m
    verdict: str  # gap | undecided


@dataclass
class GapReport:
    intervals: list
    eta_gap: float
    lo: float
    hi: float
    rational: bool

    def gaps(self, interior_only: bool = False) -> list:
        out = [iv for iv in self.intervals if iv.verdict == "gap"]
        if interior_only:
            out = [iv for iv in out if iv.lam1 > self.lo and iv.lam2 < self.hi]
        return out

    def csv_rows(self):
        for iv in self.intervals:
            yield (iv.lam1, iv.lam2, iv.mass_last, ";".join(f"{t:.6g}" for t in iv.trend), iv.verdict)


def spectral_gap_scan(table: DensityTable, eta_gap: float = 1e-3, max_step: Optional[float] = None) -> GapReport:
    """Maximal grid intervals where F_m stops increasing as m grows.

    Cells whose increment is at most ``eta_gap`` in each of the last three
    columns are merged into maximal runs; requiring flatness across the tail
    rather than in the last box alone keeps a cell that one square box happens
    to leave empty from posing as a gap. A run is a gap when its mass
    F_m(lam2) - F_m(lam1) does not increase over the last three columns and
    stays below the boundary fraction of the last box; otherwise it is
    reported as undecided. Per-cell trends are not used: a cell holds only a
    handful of boundary-localized eigenvalues and their count fluctuates.
    """
    if len(table.labels) < 3:
        raise InsufficientData("gap scan needs at least three columns")
    grid = table.grid
    if len(grid) < 3:
        raise GridTooCoarse("grid needs at least three points")
    step = float(np.max(np.diff(grid)))
    cap = max_step if max_step is not None else table.K2 / 40.0
    if step > cap:
        raise GridTooCoarse(f"grid step {step:g} exceeds {cap:g}")
    last3 = table.columns[-3:]
    # a cell is flat when no box in the tail puts more than eta_gap of mass in it
    flag = np.diff(last3, axis=1).max(axis=0) <= eta_gap
    ratio = table.ratios[-1]
    intervals = []
    i = 0
    cells = len(flag)
    while i < cells:
        if not flag[i]:
            i += 1
            continue
        j = i
        while j + 1 < cells and flag[j + 1]:
            j += 1
        lam1, lam2 = float(grid[i]), float(grid[j + 1])
        trend = [float(c[j + 1] - c[i]) for c in last3]
        mass = trend[-1]
        decreasing = trend[1] <= trend[0] + 1e-15 and trend[2] <= trend[1] + 1e-15
        verdict = "gap" if decreasing and mass < max(ratio, 1e-15) else "undecided"
        intervals.append(GapInterval(lam1, lam2, mass, trend, verdict))
        i = j + 1
    return GapReport(intervals, eta_gap, float(grid[0]), float(grid[-1]), table.rational)


# --- log-Hoelder continuity --------------------------------------------------------------


@dataclass
class LogHolderReport:
    mu: float
    eps: list
    values: dict  # (label, eps) -> (F_m(mu+eps) - F_m(mu)) * (-log eps)
    constants: dict  # label -> C_m
    sup: float
    constant: float  # sup over m of C_m
    holds: bool
    params: dict = field(default_factory=dict)


def log_holder_constant(params, K2: float, mu: float) -> float:
    """C_m = h log(aN)/N + h a log Q + a log(K^2 + mu); the product is at most C_m."""
    aN = params.a * params.N
    return params.h * math.log(aN) / params.N + params.h * params.a * params.log_Q + params.a * math.log(K2 + mu)


def log_holder_check(
    g: GammaGraph,
    sigma: WeightFunction,
    table: DensityTable,
    mu: Union[Fraction, CyclotomicNumber, int],
    eps_list: Sequence[float] = tuple(10.0**-k for k in range(1, 7)),
) -> LogHolderReport:
    """(F_m(mu+eps) - F_m(mu)) (-log eps) against the explicit constant per m.

    ``mu`` is exact (rational or cyclotomic) so the algebraic constants exist.
    """
    mu_c = as_cyclotomic(mu)
    mu_f = float(complex(mu_c).real)
    if any(not 0 < e < 1 for e in eps_list):
        raise ValueError("eps must lie in (0, 1)")
    values, consts = {}, {}
    holds = True
    params = None
    for k, lab in enumerate(table.labels):
        params = bound_params(g, sigma, mu_c, table.N[k])
        C = log_holder_constant(params, table.K2, mu_f)
        consts[lab] = C
        base = float(table.F(k, mu_f))
        for e in eps_list:
            v = (float(table.F(k, mu_f + e)) - base) * (-math.log(e))
            values[(lab, e)] = v
            holds &= v <= C
    sup = max(values.values()) if values else 0.0
    return LogHolderReport(
        mu_f, list(eps_list), values, consts, sup, max(consts.values()), holds, params.constants() if params else {}
    )


# --- Fuglede-Kadison determinant ---------------------------------------------------------


@dataclass
class FKEstimate:
    mu: float
    logdet_stieltjes: float
    logdet_moddet: float
    per_m: list  # dicts: label, N, logdet, excluded
    cutoffs: list  # (cutoff, Stieltjes value) for the last spectrum
    divergent: bool
    lower_bound: Optional[float] = None

    @property
    def det(self) -> float:
        return 0.0 if self.divergent else math.exp(self.logdet_moddet)

    def to_json(self) -> dict:
        d = asdict(self)
        d["det"] = self.det
        return d


def moddet_log(spec: EigenSpectrum, mu: float) -> tuple:
    """(1/N) sum log|lam - mu| over |lam - mu| >= eps_count, and the excluded values."""
    shifted = np.asarray(spec.values) - mu
    keep = np.abs(shifted) >= spec.eps_count
    return float(np.sum(np.log(np.abs(shifted[keep]))) / spec.N), [float(x) for x in shifted[~keep]]


def stieltjes_log(spec: EigenSpectrum, mu: float, L: float, cutoff: float, points: int = 20000) -> float:
    """Integral of log|x| dG(x) over cutoff <= |x| <= L by parts.

    G is the normalized counting function of spec - mu. For the positive side
    int_(c, L] log x dG = log L (G(L) - G(c)) - int_c^L (G(x) - G(c)) / x dx,
    and with x = e^s the last integral is int (G(e^s) - G(c)) ds, evaluated by
    the midpoint rule on a uniform s-grid. The negative side is the mirror image.
    """
    s = np.linspace(math.log(cutoff), math.log(L), points + 1)
    mids = np.exp(0.5 * (s[1:] + s[:-1]))
    ds = s[1] - s[0]
    vals = np.asarray(spec.values) - mu

    def count_le(x):  # #{v <= x}
        return np.searchsorted(vals, x, side="right")

    def count_lt(x):  # #{v < x}
        return np.searchsorted(vals, x, side="left")

    N = spec.N
    # positive part: mass of (cutoff, x]
    Gp = lambda x: (count_le(x) - count_le(cutoff)) / N
    pos = math.log(L) * Gp(L) - float(np.sum(Gp(mids))) * ds
    # negative part: mass of [-x, -cutoff)
    Gn = lambda x: (count_lt(-cutoff) - count_lt(-x)) / N
    neg = math.log(L) * Gn(L) - float(np.sum(Gn(mids))) * ds
    return pos + neg


def fk_determinant(
    spectra: Union[DensityTable, Sequence[EigenSpectrum]],
    mu: float = 0.0,
    L: Optional[float] = None,
    cutoffs: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
    strict: bool = False,
    lower_bound: Optional[float] = None,
) -> FKEstimate:
    """log det_FK(A - mu) by the modified determinant and by Stieltjes quadrature."""
    specs = spectra.spectra if isinstance(spectra, DensityTable) else list(spectra)
    if not specs:
        raise InsufficientData("no spectra")
    top = max(float(np.max(np.abs(np.asarray(s.values) - mu))) for s in specs)
    if L is None:
        L = 1.01 * top + 1e-3
    if L <= top:
        raise ValueError("L must exceed the operator norm")
    per_m = []
    for s in specs:
        v, excl = moddet_log(s, mu)
        per_m.append({"label": s.source.get("label"), "N": s.N, "logdet": v, "excluded": excl})
    last = specs[-1]
    cut_vals = [(c, stieltjes_log(last, mu, L, max(c, last.eps_count))) for c in cutoffs]
    seq = [r["logdet"] for r in per_m]
    divergent = len(seq) >= 3 and all(b < a - 1e-3 for a, b in zip(seq, seq[1:])) and seq[-1] < -10.0
    if divergent and strict:
        raise DivergentEstimate("modified log-determinants drift to -inf")
    return FKEstimate(float(mu), cut_vals[-1][1], seq[-1], per_m, cut_vals, divergent, lower_bound)


# --- kernel dimension ---------------------------------------------------------------------


@dataclass
class KernelRow:
    label: object
    N: int
    count: int
    ratio: float
    components: Optional[int] = None


def _components(X) -> int:
    parent = list(range(len(X)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in X.internal_edges:
        a, b = find(X.index[e.origin]), find(X.index[e.terminus])
        if a != b:
            parent[a] = b
    return len({find(i) for i in range(len(X))})


def kernel_dimension_check(g: GammaGraph, sigma: WeightFunction, seq: FolnerSequence, bc, tol: float = 1e-10) -> list:
    """Per box: eigenvalues below eps_count, divided by N_m."""
    rows = []
    for k in range(len(seq)):
        X = induce_subgraph(g, seq[k])
        spec = hermitian_eigenvalues(restrict_dml(g, sigma, X, bc), tol, N=X.N)
        count = int(np.sum(np.abs(spec.values) < spec.eps_count))
        rows.append(KernelRow(seq.label(k), X.N, count, count / X.N, _components(X)))
    return rows


# --- positivity of the FK determinant -----------------------------------------------------------


@dataclass
class PositivityVerdict:
    mu: str
    condition: int  # 1: outside the spectrum, 2: mu = 0, 3: outside every restricted spectrum
    reason: str
    lower_bound: float
    estimate: Optional[float]
    respects_bound: Optional[bool]
    constants: dict = field(default_factory=dict)


def fk_positivity_probe(
    g: GammaGraph,
    sigma: WeightFunction,
    seq: FolnerSequence,
    mu: Union[Fraction, CyclotomicNumber, int],
    bc=BoundaryCondition.NEUMANN,
    gaps: Optional[GapReport] = None,
    estimate: Optional[float] = None,
) -> PositivityVerdict:
    """Decide which sufficient condition for det(Delta - mu) > 0 applies."""
    if not sigma.rational:
        raise AlgebraicError("positivity probe needs a rational weight function")
    mu_c = as_cyclotomic(mu)
    if mu_c.conj() != mu_c:
        raise ValueError("mu must be real")
    mu_f = float(complex(mu_c).real)
    K2 = operator_bounds(g).K2
    N_last = len(seq[-1])
    params = bound_params(g, sigma, mu_c, N_last)
    lower = -params.h * params.a * params.log_Q
    if mu_c.is_zero():
        cond, reason = 2, "mu = 0"
    elif mu_f < 0 or mu_f > K2:
        cond, reason = 1, f"mu outside [0, {K2:g}] which contains the spectrum"
    elif gaps is not None and any(iv.lam1 < mu_f < iv.lam2 for iv in gaps.gaps()):
        cond, reason = 1, "mu inside a detected spectral gap"
    else:
        for k in range(len(seq)):
            X = induce_subgraph(g, seq[k])
            M = restrict_dml_exact(g, sigma, X, bc)
            coeffs = taylor_shift(charpoly_integral(M), mu_c.lift(M.n * mu_c.n // math.gcd(M.n, mu_c.n)))
            kk, _ = lowest_nonzero_coefficient(coeffs)
            if kk > 0:
                raise Undecidable(f"mu is an eigenvalue of the restriction to box {seq.label(k)}")
        cond, reason = 3, f"mu outside every restricted spectrum ({len(seq)} boxes, exact)"
    ok = None if estimate is None else estimate >= lower
    return PositivityVerdict(str(mu), cond, reason, lower, estimate, ok, params.constants())
