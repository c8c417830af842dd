import cmath
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from harperdml.cyclotomic import (
    CycloMatrix,
    CyclotomicNumber as Cyc,
    PreconditionViolated,
    charpoly_integral,
    conjugate_bound_check,
    cyclotomic_poly,
    embeddings_eval,
    field_norm,
    resultant,
    taylor_shift,
    totient,
)


@pytest.mark.parametrize("n,phi", [
    (1, (-1, 1)), (2, (1, 1)), (3, (1, 1, 1)), (4, (1, 0, 1)),
    (6, (1, -1, 1)), (8, (1, 0, 0, 0, 1)), (12, (1, 0, -1, 0, 1)),
])
def test_cyclotomic_polys(n, phi):
    assert cyclotomic_poly(n) == phi


@pytest.mark.parametrize("n,h", [(1, 1), (5, 4), (9, 6), (10, 4), (12, 4), (30, 8)])
def test_totient(n, h):
    assert totient(n) == h


def zeta(n, k=1):
    return Cyc.root_of_unity(n, k)


def test_embeddings_examples():
    e = embeddings_eval(1 + zeta(4))
    assert [complex(v) for v in e] == [1 + 1j, 1 - 1j]
    assert all(complex(v) == 3 for v in embeddings_eval(Cyc.rational(3, 5)))
    e3 = [complex(v) for v in embeddings_eval(zeta(3))]
    assert abs(e3[0] - cmath.exp(2j * cmath.pi / 3)) < 1e-15
    assert abs(e3[1] - cmath.exp(4j * cmath.pi / 3)) < 1e-15


def test_norm_examples():
    assert field_norm(1 + zeta(4)) == 2
    assert field_norm(Cyc.rational(3, 4)) == 9
    assert field_norm(Cyc.rational(0, 4)) == 0
    # 1 - zeta_p has norm p
    for p in (3, 5, 7, 11):
        assert field_norm(1 - zeta(p)) == p


def test_conjugate_bound_examples():
    assert conjugate_bound_check(1 + zeta(4), 2)
    assert conjugate_bound_check(Cyc.rational(1, 6), 1)
    assert conjugate_bound_check(2 + zeta(3), 3)
    with pytest.raises(PreconditionViolated):
        conjugate_bound_check(Cyc.rational(0, 4), 2)
    with pytest.raises(PreconditionViolated):
        conjugate_bound_check(Cyc(4, (F(1, 2), F(0))), 2)


def test_sqrt2_in_q_zeta8():
    s = zeta(8) + zeta(8, -1)
    assert s * s == 2
    assert s.conj() == s
    assert abs(complex(s) - 2 ** 0.5) < 1e-15


def test_resultant_small():
    # Res(a, b) = prod of b over the roots of monic a
    assert resultant([-2, 1], [-5, 1]) == -3
    assert resultant([1, 0, 1], [1, 1]) == 2


def test_charpoly_examples():
    M = CycloMatrix(1, np.array([[[2, -1], [-1, 2]]], dtype=object))
    assert [c.to_rational() for c in charpoly_integral(M)] == [1, -4, 3]
    M = CycloMatrix(1, np.array([[[1, -1], [-1, 1]]], dtype=object))
    assert [c.to_rational() for c in charpoly_integral(M)] == [1, -2, 0]


def test_taylor_shift():
    # p(t) = t^2 - 4t + 3 ; p(t + 1) = t^2 - 2t
    c = [Cyc.rational(x) for x in (1, -4, 3)]
    assert [x.to_rational() for x in taylor_shift(c, Cyc.rational(1))] == [1, -2, 0]


def cyc_elems(n):
    h = totient(n)
    return st.lists(st.integers(-5, 5), min_size=h, max_size=h).map(lambda c: Cyc(n, tuple(F(x) for x in c)))


ns = st.sampled_from([3, 4, 5, 6, 8, 12])


@given(ns.flatmap(lambda n: st.tuples(cyc_elems(n), cyc_elems(n), cyc_elems(n))))
def test_ring_matches_complex_embedding(xyz):
    x, y, z = xyz
    cx, cy, cz = complex(x), complex(y), complex(z)
    assert abs(complex(x * y + z) - (cx * cy + cz)) < 1e-9 * (1 + abs(cx * cy) + abs(cz))
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert abs(complex(x.conj()) - cx.conjugate()) < 1e-9 * (1 + abs(cx))


@given(ns.flatmap(lambda n: st.tuples(cyc_elems(n), cyc_elems(n))))
def test_norm_multiplicative_and_integral(xy):
    x, y = xy
    nx, ny = field_norm(x), field_norm(y)
    assert nx.denominator == 1 and ny.denominator == 1
    assert field_norm(x * y) == nx * ny
    prod = np.prod([complex(v) for v in embeddings_eval(x)])
    assert abs(prod - float(nx)) < 1e-6 * max(1.0, abs(float(nx)))


@given(ns.flatmap(lambda n: st.tuples(st.just(n), cyc_elems(n))), st.integers(-50, 50))
def test_lift_preserves_value(nx, k):
    n, x = nx
    y = x.lift(2 * n)
    assert y == x and abs(complex(y) - complex(x)) < 1e-9 * (1 + abs(complex(x)))
    assert zeta(n, k) == zeta(n, k % n)


@given(st.integers(1, 5), st.sampled_from([1, 2, 3, 4, 6]), st.data())
def test_charpoly_random_hermitian(N, n, data):
    h = totient(n)
    parts = np.zeros((h, N, N), dtype=object)
    parts[...] = 0
    X = CycloMatrix(n, parts)
    # build a Hermitian matrix entry by entry from random cyclotomic integers
    ent = {}
    for i in range(N):
        for j in range(i, N):
            if i == j:
                c = Cyc.rational(data.draw(st.integers(-4, 4)), n)
            else:
                c = data.draw(cyc_elems(n)) if n > 2 else Cyc.rational(data.draw(st.integers(-3, 3)), n)
            ent[(i, j)] = c
            ent[(j, i)] = c.conj()
    for (i, j), c in ent.items():
        for k, v in enumerate(c.coeffs):
            X.parts[k, i, j] = int(v)
    coeffs = charpoly_integral(X)
    A = X.to_complex()
    ref = np.poly(np.linalg.eigvalsh(A)) if N else np.array([1.0])
    got = np.array([complex(c) for c in coeffs])
    assert all(c.conj() == c for c in coeffs)
    assert np.allclose(got, ref, atol=1e-6 * max(1.0, np.abs(ref).max()))
