"""Exact characteristic polynomials of restricted DMLs over Z[zeta_n] and the
lower bound on the first nonvanishing coefficient q_{m,lam}(0)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from .cyclotomic import (
    CycloMatrix,
    CyclotomicNumber,
    _power_table,
    charpoly_integral,
    embeddings_eval,
    taylor_shift,
    totient,
)
from .exhaustion import FiniteRestriction, FolnerSequence, induce_subgraph
from .graph import GammaGraph
from .magnetic import WeightFunction
from .operators import BoundaryCondition, operator_bounds

Scalar = Union[int, Fraction, CyclotomicNumber]


class AlgebraicError(ArithmeticError):
    pass


class ZeroPolynomial(AlgebraicError):
    pass


def as_cyclotomic(lam: Scalar, n: int = 1) -> CyclotomicNumber:
    if isinstance(lam, CyclotomicNumber):
        return lam
    if isinstance(lam, float):
        raise TypeError("exact scalars only; pass a Fraction or CyclotomicNumber")
    return CyclotomicNumber.rational(Fraction(lam), n)


def restrict_dml_exact(g: GammaGraph, sigma: WeightFunction, X: FiniteRestriction, bc) -> CycloMatrix:
    """Delta^(m) with entries in Z[zeta_n], n the order of sigma."""
    if not sigma.rational:
        raise AlgebraicError("exact assembly needs a rational weight function")
    bc = BoundaryCondition(bc)
    n = sigma.n
    h = totient(n)
    table = _power_table(n, n)
    N = len(X)
    parts = np.zeros((h, N, N), dtype=object)
    parts[...] = 0
    for e in X.internal_edges:
        o, t = X.index[e.origin], X.index[e.terminus]
        k = int(sigma.phase(e).reduced() * n)
        for j, c in enumerate(table[k]):
            parts[j, t, o] -= c
        for j, c in enumerate(table[(-k) % n]):
            parts[j, o, t] -= c
        if bc is BoundaryCondition.NEUMANN:
            parts[0, o, o] += 1
            parts[0, t, t] += 1
    if bc is BoundaryCondition.DIRICHLET:
        for i, v in enumerate(X.vertices):
            parts[0, i, i] += g.valence(v)
    return CycloMatrix(n, parts)


def exact_charpoly(M: CycloMatrix, lam: Scalar = 0, check_conjugation: bool = True) -> list:
    """det(t - (M - lam)), coefficients highest degree first.

    Faddeev-LeVerrier on the integral matrix, then p(t + lam). For Hermitian
    M and real lam every coefficient is fixed by complex conjugation.
    """
    lam = as_cyclotomic(lam, M.n)
    coeffs = charpoly_integral(M)
    if not lam.is_zero():
        coeffs = taylor_shift(coeffs, lam)
    if check_conjugation and lam.conj() == lam:
        for c in coeffs:
            if c.conj() != c:
                raise AlgebraicError("charpoly coefficient not real; matrix is not Hermitian")
    return coeffs


def lowest_nonzero_coefficient(coeffs_high_first: Sequence[CyclotomicNumber]) -> tuple:
    """(k, q0) with p(t) = t^k q(t), q(0) = q0 != 0."""
    for k, c in enumerate(reversed(coeffs_high_first)):
        if not c.is_zero():
            return k, c
    raise ZeroPolynomial("polynomial is identically zero")


# --- the lower bound ---------------------------------------------------------------


@dataclass
class AlgebraicBoundParams:
    n: int  # field Q(zeta_n)
    h: int
    R: float
    L2: float
    log_Q: float
    a: int
    N: int  # #Lambda_m
    B: Optional[int] = None  # rational lam = num/den, B = max(|num|, den, 1)
    b: Optional[int] = None  # lam = eta / b otherwise
    kind: str = "rational"

    @property
    def Q(self) -> float:
        return math.exp(self.log_Q)

    def constants(self) -> dict:
        d = asdict(self)
        d["Q"] = self.Q
        return d


def bound_params(g: GammaGraph, sigma: WeightFunction, lam: Scalar, N: int) -> AlgebraicBoundParams:
    """Constants h, Q for the bound |q(0)| >= (aN)^-h Q^(-h a N).

    Rational lam = p/q: Q = 8 B^2 K^2. Cyclotomic lam = eta/b: Q = 8 R b^2 L^2
    with R = max(1, max_j |e_j(eta)|), L^2 = K^2, in Q(zeta_lcm(n, n_lam)).
    """
    K2 = operator_bounds(g).K2
    n = sigma.n if sigma.n is not None else 1
    lam_c = as_cyclotomic(lam, 1)
    if lam_c.is_rational():
        r = lam_c.to_rational()
        B = max(abs(r.numerator), r.denominator, 1)
        return AlgebraicBoundParams(n, totient(n), 1.0, K2, math.log(8 * B * B * K2), g.a, N, B=B, kind="rational")
    field_n = lcm(n, lam_c.n)
    b = lam_c.denominator()
    eta = lam_c * b
    R = max(1.0, max(float(abs(v)) for v in embeddings_eval(eta)))
    log_Q = math.log(8 * R * b * b * K2)
    return AlgebraicBoundParams(field_n, totient(field_n), R, K2, log_Q, g.a, N, b=b, kind="cyclotomic")


def qzero_log_lower_bound(params: AlgebraicBoundParams) -> float:
    aN = params.a * params.N
    return -params.h * math.log(aN) - params.h * aN * params.log_Q


def qzero_lower_bound(params: AlgebraicBoundParams) -> tuple:
    """(bound, constants); the bound underflows to 0.0 for large boxes, use the log form."""
    lb = qzero_log_lower_bound(params)
    return math.exp(lb) if lb > -745 else 0.0, params.constants()


def coefficient_bound_holds(coeffs: Sequence[CyclotomicNumber], params: AlgebraicBoundParams) -> bool:
    """|e_j(c_i)| < (4 L^2)^(aN) for every coefficient of the unshifted charpoly."""
    log_cap = params.a * params.N * math.log(4 * params.L2)
    for c in coeffs:
        if c.is_zero():
            continue
        top = max(abs(v) for v in embeddings_eval(c))
        if float(mpmath.log(top)) >= log_cap:
            return False
    return True


@dataclass
class QZeroRow:
    label: object
    N: int
    size: int
    k: int
    q0: str
    q0_abs: float
    log_q0_abs: float
    log_bound: float
    bound: float
    margin: float  # log|q0| - log bound
    coefficient_bound: bool
    constants: dict = field(default_factory=dict)


@dataclass
class QZeroReport:
    rows: list
    lam: str
    bc: str

    @property
    def all_ok(self) -> bool:
        return all(r.margin >= 0 and r.coefficient_bound for r in self.rows)

    def to_json(self) -> dict:
        return {"lambda": self.lam, "bc": self.bc, "all_ok": self.all_ok, "rows": [asdict(r) for r in self.rows]}


def _qzero_row(g, sigma, lam, bc, label, lam_set) -> QZeroRow:
    X = induce_subgraph(g, lam_set)
    M = restrict_dml_exact(g, sigma, X, bc)
    raw = charpoly_integral(M)
    lam_c = as_cyclotomic(lam, M.n)
    coeffs = taylor_shift(raw, lam_c) if not lam_c.is_zero() else raw
    if lam_c.conj() == lam_c and any(c.conj() != c for c in coeffs):
        raise AlgebraicError("charpoly coefficient not real")
    k, q0 = lowest_nonzero_coefficient(coeffs)
    params = bound_params(g, sigma, lam, X.N)
    log_bound = qzero_log_lower_bound(params)
    q0_abs = abs(embeddings_eval(q0)[0])
    log_q0 = float(mpmath.log(q0_abs))
    return QZeroRow(
        label=label,
        N=X.N,
        size=len(X),
        k=k,
        q0=repr(q0),
        q0_abs=float(q0_abs),
        log_q0_abs=log_q0,
        log_bound=log_bound,
        bound=math.exp(log_bound) if log_bound > -745 else 0.0,
        margin=log_q0 - log_bound,
        coefficient_bound=coefficient_bound_holds(raw, params),
        constants=params.constants(),
    )


def verify_lemma_qmzero(
    g: GammaGraph,
    sigma: WeightFunction,
    seq: FolnerSequence,
    bc,
    lam: Scalar,
    m_max: Optional[int] = None,
    workers: int = 1,
) -> QZeroReport:
    """Exact |q_{m,lam}(0)| against its lower bound for each box of ``seq``."""
    if not sigma.rational:
        raise AlgebraicError("weight function must be rational")
    ks = range(len(seq) if m_max is None else min(len(seq), m_max))

    def job(k):
        return _qzero_row(g, sigma, lam, bc, seq.label(k), seq[k])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(job, ks))
    else:
        rows = [job(k) for k in ks]
    return QZeroReport(rows, repr(lam), BoundaryCondition(bc).value)
