"""Assembly of the discrete magnetic Laplacian, the Harper operator and the
twisted coboundary, plus exact trace moments by walk enumeration.

Matrix convention: ``M[v1, v2] = D(v1, v2)`` with ``(Delta f)(v1) = sum D(v1, v2) f(v2)``.
The Harper sum gives H[t(e), o(e)] = sigma(e), hence D(v1, v2) = -sigma(e)
for the edge e running v2 -> v1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .cyclotomic import CyclotomicNumber, cyclotomic_reduce
from .exhaustion import FiniteRestriction, graph_delta_boundary
from .graph import GammaGraph, VertexId, act, ball
from .magnetic import Phase, PhaseCochain, WeightFunction

SPARSE_THRESHOLD = 512


class BoundaryCondition(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class OperatorBounds:
    """C bounds matrix entries, K2 = C*b bounds operator norms."""

    C: float
    b: int
    K2: float

    @property
    def K(self) -> float:
        return float(np.sqrt(self.K2))


def operator_bounds(g: GammaGraph) -> OperatorBounds:
    b = g.valence_bound
    C = max(b, 1)
    return OperatorBounds(float(C), b, float(C * b))


@dataclass
class HermitianMatrix:
    data: object  # ndarray or scipy sparse
    bc: Optional[BoundaryCondition] = None
    kind: str = "dml"
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.data.shape[0]

    def dense(self) -> np.ndarray:
        return self.data.toarray() if sp.issparse(self.data) else np.asarray(self.data)

    @property
    def defect(self) -> float:
        """max |A - A*| relative to the largest entry."""
        A = self.data
        diff = A - A.conj().T
        top = abs(A).max()
        err = abs(diff).max()
        if top == 0:
            return float(err)
        return float(err / top)


def _lift_dtype(sigma: WeightFunction):
    return np.float64 if sigma.n is not None and sigma.n <= 2 else np.complex128


def _cval(p: Phase, dtype):
    z = p.to_complex()
    return z.real if dtype is np.float64 else z


def dml_kernel(g: GammaGraph, sigma: WeightFunction, v1: VertexId, v2: VertexId) -> complex:
    if v1 == v2:
        return complex(g.valence(v1))
    total = 0j
    for e in g.edges_at(v2):
        if e.terminus == v1:
            total -= sigma(e)
    return total


def harper_kernel(g: GammaGraph, sigma: WeightFunction, v1: VertexId, v2: VertexId) -> complex:
    if v1 == v2:
        return 0j
    return -dml_kernel(g, sigma, v1, v2)


def _assemble(g, sigma, X: FiniteRestriction, diag: np.ndarray, sign: float):
    dtype = _lift_dtype(sigma)
    rows, cols, vals = [], [], []
    for e in X.internal_edges:
        o, t = X.index[e.origin], X.index[e.terminus]
        z = _cval(sigma.phase(e), dtype)
        rows += [t, o]
        cols += [o, t]
        vals += [sign * z, sign * np.conj(z)]
    N = len(X)
    rows += list(range(N))
    cols += list(range(N))
    vals += list(diag)
    A = sp.coo_matrix((np.array(vals, dtype=dtype), (rows, cols)), shape=(N, N)).tocsr()
    if N <= SPARSE_THRESHOLD:
        return A.toarray()
    return A


def restrict_dml(g: GammaGraph, sigma: WeightFunction, X: FiniteRestriction, bc) -> HermitianMatrix:
    """Dirichlet: compression with ambient valences. Neumann: intrinsic DML of X."""
    bc = BoundaryCondition(bc)
    if bc is BoundaryCondition.DIRICHLET:
        diag = np.array([g.valence(v) for v in X.vertices], dtype=float)
    else:
        diag = np.zeros(len(X))
        for e in X.internal_edges:
            diag[X.index[e.origin]] += 1
            diag[X.index[e.terminus]] += 1
    A = _assemble(g, sigma, X, diag, -1.0)
    return HermitianMatrix(A, bc, "dml", {"N": len(X), "bc": bc.value, "flux": sigma.spec})


def restrict_harper(g: GammaGraph, sigma: WeightFunction, X: FiniteRestriction, bc=BoundaryCondition.NEUMANN) -> HermitianMatrix:
    """H = valence - Delta for either boundary condition; both give the same matrix."""
    bc = BoundaryCondition(bc)
    A = _assemble(g, sigma, X, np.zeros(len(X)), 1.0)
    return HermitianMatrix(A, bc, "harper", {"N": len(X), "bc": bc.value, "flux": sigma.spec})


def twisted_coboundary_matrix(g: GammaGraph, tau: WeightFunction, X: FiniteRestriction, flip: Sequence[bool] = ()) -> np.ndarray:
    """Rows are internal edges in template orientation (``flip[k]`` reverses row k).

    (d_tau f)(e) = tau(e) f(t(e)) - conj(tau(e)) f(o(e)).
    """
    E = len(X.internal_edges)
    D = np.zeros((E, len(X)), dtype=np.complex128)
    for k, e in enumerate(X.internal_edges):
        if k < len(flip) and flip[k]:
            e = e.reverse()
        z = tau(e)
        D[k, X.index[e.terminus]] += z
        D[k, X.index[e.origin]] -= np.conj(z)
    return D


def apply_twisted_coboundary(g: GammaGraph, tau: WeightFunction, f: dict) -> dict:
    """d_tau on a finitely supported vertex function, valued on template-oriented edges."""
    out = {}
    for v in f:
        for e in g.edges_at(v):
            fe = e if e.forward else e.reverse()
            if fe in out:
                continue
            z = tau(fe)
            out[fe] = z * f.get(fe.terminus, 0) - np.conj(z) * f.get(fe.origin, 0)
    return {e: val for e, val in out.items() if val != 0}


def apply_dml(g: GammaGraph, sigma: WeightFunction, f: dict) -> dict:
    """Delta_sigma on a finitely supported function on the infinite graph."""
    out = {}
    support = set(f)
    for v in f:
        support.update(g.neighbours(v))
    for v in support:
        acc = g.valence(v) * f.get(v, 0)
        for e in g.edges_at(v):
            # edge running w -> v contributes sigma(e) f(w)
            acc -= sigma(e.reverse()) * f.get(e.terminus, 0)
        if acc != 0:
            out[v] = acc
    return out


# --- exact moments -------------------------------------------------------------


@dataclass
class ExactMoment:
    """Tr_{Gamma,sigma}(A^k) for A = Delta_sigma or H_sigma.

    ``terms`` maps a phase (turns in [0, 1)) to its integer multiplicity when
    sigma is rational; ``value`` is the float evaluation.
    """

    k: int
    operator: str
    value: float
    imag: float
    terms: Optional[dict] = None
    cyclotomic: Optional[CyclotomicNumber] = None

    def exact_str(self) -> str:
        if self.terms is None:
            return repr(self.value)
        if self.cyclotomic is not None and self.cyclotomic.is_rational():
            return str(self.cyclotomic.to_rational())
        parts = []
        for t in sorted(self.terms):
            c = self.terms[t]
            if not c:
                continue
            if t == 0:
                parts.append(f"{c}")
            elif t <= Fraction(1, 2):
                mult = c if t == Fraction(1, 2) else 2 * c
                parts.append(f"{mult}*cos(2*pi*{t})")
        return " + ".join(parts) or "0"


def _phase_step(g, sigma, operator):
    # transfer weights D(u, w) for the row-vector recursion row_{j+1}[w] = sum_u row_j[u] D(u, w)
    def steps(u):
        if operator == "dml":
            yield u, None, g.valence(u)
        for e in g.edges_at(u):
            # D(u, w) = -sigma(edge w -> u) = -conj sigma(u -> w) = -sigma(e reversed)
            p = sigma.phase(e.reverse())
            yield e.terminus, p, -1 if operator == "dml" else 1
    return steps


def exact_moment(g: GammaGraph, sigma: WeightFunction, k: int, operator: str = "dml") -> ExactMoment:
    if k < 0:
        raise ValueError("k must be >= 0")
    if operator not in ("dml", "harper"):
        raise ValueError(f"unknown operator {operator!r}")
    exact = sigma.rational
    steps = _phase_step(g, sigma, operator)
    total_terms: dict = {}
    total = 0j
    for v in g.fundamental_domain():
        dist = ball(g, v, k // 2 + 1)
        if exact:
            row = {v: {Fraction(0): 1}}
        else:
            row = {v: 1.0 + 0j}
        for j in range(k):
            reach = min(j + 1, k - j - 1)
            nxt: dict = {}
            for u, val in sorted(row.items()):
                for w, p, weight in steps(u):
                    if dist.get(w, k + 1) > reach:
                        continue
                    if exact:
                        dst = nxt.setdefault(w, {})
                        shift = Fraction(0) if p is None else p.turns
                        for t, c in val.items():
                            key = (t + shift) % 1
                            dst[key] = dst.get(key, 0) + weight * c
                    else:
                        z = 1.0 if p is None else p.to_complex()
                        nxt[w] = nxt.get(w, 0j) + weight * z * val
            row = nxt
        if exact:
            for t, c in row.get(v, {}).items():
                total_terms[t] = total_terms.get(t, 0) + c
        else:
            total += row.get(v, 0j)
    if exact:
        total_terms = {t: c for t, c in sorted(total_terms.items()) if c}
        if any(total_terms.get((-t) % 1, 0) != c for t, c in total_terms.items()):
            raise ArithmeticError("closed-walk phases are not conjugation symmetric")
        n = 1
        for t in total_terms:
            n = np.lcm(n, t.denominator)
        n = int(n)
        poly = [0] * n
        for t, c in total_terms.items():
            poly[int(t * n)] += c
        cyc = cyclotomic_reduce(poly, n)
        # conjugate pairs are symmetric, so the sum is real: sum c cos(2 pi t)
        val = sum(c * Phase(t).to_complex().real for t, c in total_terms.items())
        return ExactMoment(k, operator, float(val), 0.0, total_terms, cyc)
    return ExactMoment(k, operator, float(total.real), float(total.imag))


def trace_error_bound(g: GammaGraph, coeffs: Sequence[float], X: FiniteRestriction, C: Optional[float] = None) -> float:
    """2 * sum_r (#V(boundary_d X)/N) |a_r| C^r with d = deg p.

    ``C`` must dominate |D^r(v, v)|^(1/r); the default is the norm bound K^2.
    """
    deg = len(coeffs) - 1
    if C is None:
        C = operator_bounds(g).K2
    if deg == 0:
        ratio = 0.0 if not coeffs[0] else _ratio(g, X, 1)
    else:
        ratio = _ratio(g, X, deg)
    return 2.0 * ratio * sum(abs(a) * C**r for r, a in enumerate(coeffs))


def _ratio(g, X, delta):
    inner, outer = graph_delta_boundary(g, X, delta)
    return (len(inner) + len(outer)) / X.N


def restricted_power_trace(M: HermitianMatrix, k: int) -> float:
    """Tr(M^k) by sparse matrix powers."""
    A = sp.csr_matrix(M.data)
    if k == 0:
        return float(M.N)
    P = A
    for _ in range(k - 1):
        P = P @ A
    return float(np.real(P.diagonal().sum()))


def equivariance_check(
    g: GammaGraph,
    s: PhaseCochain,
    kernel: Callable[[VertexId, VertexId], complex],
    radius: int = 3,
    tol: float = 1e-10,
) -> bool:
    """Check conj(s(v1)) k(gamma v1, gamma v2) s(v2) = k(v1, v2) on a ball.

    ``kernel`` uses the matrix convention of this module. In terms of the
    matrix coefficient <A delta_v1, delta_v2> = k(v2, v1) this is the usual
    s(v1) k'(gamma v1, gamma v2) conj(s(v2)) = k'(v1, v2).
    """
    gamma = s.gamma
    verts = sorted(ball(g, g.base_vertex(), radius))
    worst = 0.0
    for v1 in verts:
        for v2 in verts:
            lhs = np.conj(s(v1).to_complex()) * kernel(act(g, gamma, v1), act(g, gamma, v2)) * s(v2).to_complex()
            worst = max(worst, abs(lhs - kernel(v1, v2)))
    return worst < tol


def dml_power_kernel(g: GammaGraph, sigma: WeightFunction, k: int) -> Callable:
    """Kernel sampler for Delta_sigma^k by local propagation."""
    def kern(v1, v2):
        vec = {v2: 1.0 + 0j}
        for _ in range(k):
            vec = apply_dml(g, sigma, vec)
        return vec.get(v1, 0j)
    return kern


def export_matrix(path, M: HermitianMatrix, header: dict) -> None:
    """Column-major complex128 payload next to a JSON header file."""
    path = Path(path)
    A = np.asarray(M.dense(), dtype=np.complex128)
    path.write_bytes(A.tobytes(order="F"))
    meta = {"N": M.N, "bc": M.bc.value if M.bc else None, **header}
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, sort_keys=True, indent=1))


def import_matrix(path) -> tuple:
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    N = meta["N"]
    A = np.frombuffer(path.read_bytes(), dtype=np.complex128).reshape((N, N), order="F")
    return A, meta
