import itertools
import random
from fractions import Fraction

import pytest

from kmkit.errors import InputError
from kmkit.exactalg import (
    Matrix,
    QQ,
    ZZ,
    ffield_make,
    rank_kernel,
    smith_normal_form,
    snf_quotient_basis,
)


# ---------------------------------------------------------------------------
# finite fields


def test_f2_basic():
    F = ffield_make(2, 1)
    assert F.add(1, 1) == 0
    assert F.mul(1, 1) == 1


def test_f4_modulus_and_multiplication():
    F = ffield_make(2, 2)
    assert F.modulus == (1, 1, 1)  # 1 + x + x^2
    x = F.gen()
    assert F.mul(x, F.add(x, F.one)) == F.one


def test_f4_modulus_is_smallest_irreducible():
    # oracle: a degree-2 polynomial over F_2 is irreducible iff it has no root
    def has_root(c0, c1):
        return any((t * t + c1 * t + c0) % 2 == 0 for t in (0, 1))

    irreducible = [
        (c0, c1, 1) for c1 in (0, 1) for c0 in (0, 1) if not has_root(c0, c1)
    ]
    assert (1, 1, 1) in irreducible and len(irreducible) == 1


def test_f5():
    F = ffield_make(5, 1)
    assert F.mul(2, 3) == 1


def test_ffield_rejects_bad_input():
    with pytest.raises(InputError):
        ffield_make(4, 1)
    with pytest.raises(InputError):
        ffield_make(5, 0)


def test_custom_modulus_echoed_and_checked():
    F = ffield_make(2, 3, modulus=(1, 1, 0, 1))
    assert F.tag()["modulus"] == [1, 1, 0, 1]
    with pytest.raises(InputError):
        ffield_make(2, 2, modulus=(1, 0, 1))  # x^2 + 1 = (x+1)^2 over F_2


FIELD_SIZES = [(2, m) for m in range(1, 7)] + [(3, m) for m in range(1, 4)] + [
    (5, 1),
    (5, 2),
    (7, 1),
    (7, 2),
    (11, 1),
    (13, 1),
    (31, 1),
    (61, 1),
]


@pytest.mark.parametrize("p,m", FIELD_SIZES)
def test_field_axioms_exhaustive(p, m):
    F = ffield_make(p, m)
    els = list(F.elements())
    assert len(els) == p**m
    for a in els:
        if a != F.zero:
            assert F.mul(a, F.inv(a)) == F.one
    # Frobenius is additive
    for a in els:
        for b in els:
            assert F.pow(F.add(a, b), p) == F.add(F.pow(a, p), F.pow(b, p))


# ---------------------------------------------------------------------------
# Smith normal form


def _determinantal_divisors(rows):
    # independent oracle: d_k = gcd of all k x k minors divided by d_{k-1}
    import math

    n, m = len(rows), len(rows[0]) if rows else 0
    prev = 1
    out = []
    for k in range(1, min(n, m) + 1):
        g = 0
        for ri in itertools.combinations(range(n), k):
            for ci in itertools.combinations(range(m), k):
                sub = [[rows[i][j] for j in ci] for i in ri]
                g = math.gcd(g, _det(sub))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j, v in enumerate(rows[0]):
        if v:
            minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
            total += (-1) ** j * v * _det(minor)
    return total


def test_snf_examples():
    assert smith_normal_form([[2, 0], [0, 3]]) == ([1, 6], 2)
    assert smith_normal_form([[0, 0], [0, 0]]) == ([], 0)
    assert smith_normal_form([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == ([1, 1, 1], 3)


def test_snf_against_minor_oracle():
    rng = random.Random(5)
    for _ in range(25):
        n, m = rng.randrange(1, 5), rng.randrange(1, 5)
        rows = [[rng.randrange(-6, 7) for _ in range(m)] for _ in range(n)]
        divs, rank = smith_normal_form(rows)
        assert divs == _determinantal_divisors(rows)
        assert len(divs) == rank
        for a, b in zip(divs, divs[1:]):
            assert b % a == 0


def test_snf_unimodular_invariance():
    rng = random.Random(11)
    base = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    expect = smith_normal_form(base)
    for _ in range(10):
        rows = [list(r) for r in base]
        for _ in range(6):
            i, j = rng.randrange(3), rng.randrange(3)
            if i == j:
                continue
            c = rng.randrange(-3, 4)
            if rng.random() < 0.5:
                rows[j] = [a + c * b for a, b in zip(rows[j], rows[i])]
            else:
                for r in rows:
                    r[j] += c * r[i]
        assert smith_normal_form(rows) == expect


def test_snf_rejects_non_integers():
    with pytest.raises(InputError):
        smith_normal_form([[Fraction(1, 2)]])


def test_snf_quotient_basis_roundtrip():
    rank, coords, lifts = snf_quotient_basis([[2, 4]], 2)
    assert rank == 1 and len(lifts) == 1
    for k, lift in enumerate(lifts):
        c = coords(lift)
        assert c == tuple(1 if i == k else 0 for i in range(len(lifts)))
    assert coords((1, 2)) == (0,)


# ---------------------------------------------------------------------------
# rank / kernel


def test_rank_kernel_identity_over_f5():
    F = ffield_make(5, 1)
    rank, ker = rank_kernel(Matrix.identity(F, 4))
    assert rank == 4 and ker == []


def test_rank_kernel_ones_over_q():
    rank, ker = rank_kernel(Matrix.from_int_rows(QQ, [[1, 1], [1, 1]]))
    assert rank == 1 and len(ker) == 1
    (v,) = ker
    assert v[0] == -v[1] != 0  # spans the line through (1, -1)


def test_rank_kernel_random_f2_vs_column_space():
    F = ffield_make(2, 1)
    rng = random.Random(7)
    for _ in range(20):
        rows = [[rng.randrange(2) for _ in range(6)] for _ in range(4)]
        M = Matrix(F, rows)
        rank, ker = rank_kernel(M)
        assert rank + len(ker) == 6
        for v in ker:
            assert all(x == 0 for x in M.matvec(v))
        cols = list(zip(*rows))
        span = set()
        for take in itertools.product((0, 1), repeat=6):
            vec = tuple(
                sum(t * c[i] for t, c in zip(take, cols)) % 2 for i in range(4)
            )
            span.add(vec)
        assert len(span) == 2**rank


def test_rank_kernel_rejects_integers():
    with pytest.raises(InputError):
        rank_kernel(Matrix.from_int_rows(ZZ, [[1, 2], [3, 4]]))


def test_rank_mod_p_matches_rank_over_q_away_from_divisors():
    rows = [[2, 0, 0], [0, 3, 0]]
    divs, rank_z = smith_normal_form(rows)
    F = ffield_make(5, 1)
    rank_p, _ = rank_kernel(Matrix.from_int_rows(F, rows))
    assert all(d % 5 != 0 for d in divs)
    assert rank_p == rank_z
