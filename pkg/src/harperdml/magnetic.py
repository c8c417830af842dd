"""U(1) edge weights, phase corrections and magnetic translations.

Phases are stored in turns: ``Phase(Fraction(1, 4))`` is ``exp(2*pi*i/4)``.
A phase keeps the lift it was built with (turns are not reduced mod 1); the
lift only matters for square roots, where it selects the branch.
"""

from __future__ import annotations

import cmath
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Optional, Union

from .graph import GammaGraph, GroupElement, OrientedEdge, VertexId, act

NUMERIC_TOL = 1e-9

_EXACT_UNITS = {
    Fraction(0): 1.0 + 0.0j,
    Fraction(1, 4): 1j,
    Fraction(1, 2): -1.0 + 0.0j,
    Fraction(3, 4): -1j,
}


class MagneticError(ValueError):
    pass


class WrongGraph(MagneticError):
    pass


class NotWeaklyInvariant(MagneticError):
    pass


class InconsistentCocycle(MagneticError):
    pass


@dataclass(frozen=True)
class Phase:
    """A unit complex number ``exp(2*pi*i*turns)``; exact when ``turns`` is a Fraction."""

    turns: Union[Fraction, float]

    @classmethod
    def of(cls, x) -> "Phase":
        if isinstance(x, Phase):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(Fraction(x))
        if isinstance(x, str):
            return cls(Fraction(x))
        return cls(float(x))

    @property
    def exact(self) -> bool:
        return isinstance(self.turns, Fraction)

    def __mul__(self, other: "Phase") -> "Phase":
        return Phase(self.turns + other.turns)

    def __truediv__(self, other: "Phase") -> "Phase":
        return Phase(self.turns - other.turns)

    def inverse(self) -> "Phase":
        return Phase(-self.turns)

    conj = inverse

    def reduced(self) -> Union[Fraction, float]:
        """Turns in [0, 1)."""
        r = self.turns % 1
        return r

    def equals(self, other: "Phase", tol: float = NUMERIC_TOL) -> bool:
        if self.exact and other.exact:
            return (self.turns - other.turns) % 1 == 0
        r = float((self.turns - other.turns) % 1)
        return min(r, 1 - r) <= tol

    def half(self) -> "Phase":
        """Square root taking half of the stored lift."""
        return Phase(self.turns / 2)

    def to_complex(self) -> complex:
        r = self.reduced()
        if self.exact and r in _EXACT_UNITS:
            return _EXACT_UNITS[r]
        return cmath.exp(2j * cmath.pi * float(r))

    def denominator(self) -> Optional[int]:
        return self.turns.denominator if self.exact else None


ONE = Phase(Fraction(0))


@dataclass(frozen=True)
class WeightFunction:
    """Weight on oriented edges.

    ``rule(template_id, base)`` gives the phase of the template-oriented edge
    whose origin lies over group element ``base``; reversed edges get the
    inverse phase, so sigma(e_bar) = sigma(e)^-1 holds by construction.
    ``n`` is a common denominator when every value is an n-th root of unity.
    """

    rule: Callable[[int, GroupElement], Phase]
    n: Optional[int]
    spec: dict = field(default_factory=dict, compare=False)

    @property
    def rational(self) -> bool:
        return self.n is not None

    def phase(self, e: OrientedEdge) -> Phase:
        p = self.rule(e.template_id, e.base)
        return p if e.forward else p.inverse()

    def __call__(self, e: OrientedEdge) -> complex:
        return self.phase(e).to_complex()


def _centered(x: Fraction) -> Fraction:
    """Representative of x mod 1 in (-1/2, 1/2]."""
    r = x % 1
    return r - 1 if r > Fraction(1, 2) else r


def trivial_weight(g: GammaGraph) -> WeightFunction:
    return WeightFunction(lambda tid, base: ONE, 1, {"kind": "trivial"})


def template_weight(g: GammaGraph, phases: dict, n: Optional[int] = None) -> WeightFunction:
    """Gamma-periodic weight with one constant phase per template."""
    table = {}
    for tid in range(len(g.templates)):
        raw = phases.get(tid, phases.get(str(tid), 0))
        p = Phase.of(raw)
        table[tid] = Phase(_centered(p.turns)) if p.exact else p
    if n is None and all(p.exact for p in table.values()):
        n = lcm(*(p.turns.denominator for p in table.values())) if table else 1
    spec = {"kind": "templates", "n": n, "phases": {str(k): str(v.turns) for k, v in table.items()}}
    return WeightFunction(lambda tid, base: table[tid], n, spec)


def landau_weight(g: GammaGraph, theta) -> WeightFunction:
    """Flux ``theta`` per plaquette on the Z^2 square lattice, Landau gauge.

    Horizontal edges carry phase 1, the vertical edge with origin (x, y)
    carries exp(2*pi*i*theta*x).
    """
    if g.kind != "zd" or g.d != 2:
        raise WrongGraph("the Landau gauge needs the Z^2 Cayley graph")
    th = Phase.of(theta).turns
    n = Fraction(th).denominator if isinstance(th, Fraction) else None

    def rule(tid, base):
        if tid == 1:
            return Phase(th * base[0])
        return ONE

    return WeightFunction(rule, n, {"kind": "landau", "theta": str(th)})


def sqrt_weight(sigma: WeightFunction) -> WeightFunction:
    """tau with tau^2 = conj(sigma): halve the stored lift and negate it."""
    def rule(tid, base):
        return sigma.rule(tid, base).half().inverse()

    n = 2 * sigma.n if sigma.n is not None else None
    return WeightFunction(rule, n, {"kind": "sqrt", "of": sigma.spec})


@dataclass
class PhaseCochain:
    """Vertex phases s_gamma solving sigma(gamma e) = sigma(e) s(t(e)) conj(s(o(e))).

    Values are known on a ball around ``base`` and grown on demand; the
    defining relation fixes them once s(base) is chosen, so growth is
    deterministic. ``scale`` multiplies every value (normalization).
    """

    g: GammaGraph
    sigma: WeightFunction
    gamma: GroupElement
    base: VertexId
    values: dict
    radius: int
    scale: Phase = ONE
    dist: dict = field(default_factory=dict, repr=False)

    def __call__(self, v: VertexId) -> Phase:
        if v not in self.values:
            self._grow(v)
        return self.values[v] * self.scale

    def scaled(self, k: Phase) -> "PhaseCochain":
        return PhaseCochain(self.g, self.sigma, self.gamma, self.base, self.values, self.radius, self.scale * k, self.dist)

    def _grow(self, v: VertexId) -> None:
        # extend the search one layer at a time from the current frontier
        while v not in self.values:
            self.radius += 1
            _propagate(self.g, self.sigma, self.gamma, self.base, self.radius, self.values, self.dist)


def _propagate(g, sigma, gamma, base, radius, vals=None, dist=None) -> tuple:
    """Breadth-first solve out to ``radius``; resumes from ``vals``/``dist`` when given."""
    if vals is None:
        vals, dist = {base: ONE}, {base: 0}
        queue = deque([base])
    else:
        queue = deque(u for u, r in dist.items() if r == radius - 1)
    while queue:
        u = queue.popleft()
        for e in g.edges_at(u):
            w = e.terminus
            ratio = sigma.phase(act(g, gamma, e)) / sigma.phase(e)
            if w not in vals:
                if dist[u] >= radius:
                    continue
                vals[w] = vals[u] * ratio
                dist[w] = dist[u] + 1
                queue.append(w)
            elif not (vals[w] / vals[u]).equals(ratio):
                raise NotWeaklyInvariant(
                    f"weight is not weakly invariant under {gamma}: relation fails on edge {e}"
                )
    return vals, dist


def solve_phase_system(g: GammaGraph, sigma: WeightFunction, gamma: GroupElement, radius: int = 4) -> PhaseCochain:
    if not g.connected:
        raise MagneticError("phase systems are solved on connected graphs only")
    gamma = tuple(gamma)
    base = g.base_vertex()
    vals, dist = _propagate(g, sigma, gamma, base, radius)
    return PhaseCochain(g, sigma, gamma, base, vals, radius, ONE, dist)


def _inv(gamma):
    return tuple(-x for x in gamma)


def normalize_phase_cochain(g: GammaGraph, sigma: WeightFunction, family: dict) -> dict:
    """Rescale each s_gamma so that s'_gamma(x)^-1 = s'_{gamma^-1}(gamma x).

    ``family`` maps group elements to solved cochains; missing inverses are
    solved on the fly. The square root k_gamma takes its argument in [0, pi).
    """
    fam = dict(family)
    for gamma in list(fam):
        if _inv(gamma) not in fam:
            fam[_inv(gamma)] = solve_phase_system(g, sigma, _inv(gamma))
    out = {}
    for gamma, s in fam.items():
        s_inv = fam[_inv(gamma)]
        x = g.base_vertex()
        prod = s(x) * s_inv(act(g, gamma, x))
        target = prod.conj()
        k = Phase(target.reduced()).half()
        out[gamma] = s.scaled(k)
    return out


def phase_family(g: GammaGraph, sigma: WeightFunction, gammas) -> dict:
    """Normalized s_gamma for every listed gamma (and its inverse)."""
    fam = {tuple(gm): solve_phase_system(g, sigma, tuple(gm)) for gm in gammas}
    return normalize_phase_cochain(g, sigma, fam)


def _compose(a, b):
    return tuple(x + y for x, y in zip(a, b))


def cocycle(g: GammaGraph, sigma: WeightFunction, family: dict, gamma, gamma2, test_radius: int = 2) -> Phase:
    """Theta(gamma, gamma2) read off T_gamma T_gamma2 delta_v = Theta T_{gamma gamma2} delta_v.

    T_gamma delta_v = s_gamma(v) delta_{gamma v}, so the scalar at v is
    s_gamma2(v) s_gamma(gamma2 v) / s_{gamma gamma2}(v). It is evaluated on
    every vertex of a small ball and must not depend on v.
    """
    from .graph import ball

    gamma, gamma2 = tuple(gamma), tuple(gamma2)
    prod = _compose(gamma, gamma2)
    need = [x for x in (gamma, gamma2, prod) if x not in family]
    if need:
        family = {**family, **phase_family(g, sigma, need)}
    s1, s2, s12 = family[gamma], family[gamma2], family[prod]
    theta = None
    for v in sorted(ball(g, g.base_vertex(), test_radius)):
        val = s2(v) * s1(act(g, gamma2, v)) / s12(v)
        if theta is None:
            theta = val
        elif not theta.equals(val):
            raise InconsistentCocycle(f"Theta{gamma, gamma2} differs between test vertices")
    return Phase(theta.reduced())


def edge_translation_cochain(g: GammaGraph, tau: WeightFunction, s: PhaseCochain) -> PhaseCochain:
    """t_gamma with tau(gamma e) = tau(e) t(t(e)) conj(t(o(e))) and t^2 = conj(s_gamma)."""
    t = solve_phase_system(g, tau, s.gamma)
    b = t.base
    # t^2 / conj(s) is constant on the connected graph; fix it to 1 at the base
    fix = (s(b).conj() / (t(b) * t(b))).half()
    return t.scaled(fix)


def magnetic_translation_apply(g: GammaGraph, cochain: PhaseCochain, f: dict, on: str = "vertices") -> dict:
    """Apply T_gamma to a finitely supported function.

    Vertex functions: (T f)(x) = s(gamma^-1 x) f(gamma^-1 x).
    Edge functions (keyed by template-oriented edges), with ``cochain`` = t_gamma:
    (T f)(e) = t(gamma^-1 e) f(gamma^-1 e), t(e) = conj(t(t(e)) t(o(e))).
    """
    gamma = cochain.gamma
    out = {}
    if on == "vertices":
        for v, val in f.items():
            out[act(g, gamma, v)] = cochain(v).to_complex() * val
    elif on == "edges":
        for e, val in f.items():
            te = (cochain(e.terminus) * cochain(e.origin)).conj()
            out[act(g, gamma, e)] = te.to_complex() * val
    else:
        raise ValueError(f"unknown domain {on!r}")
    return out
