import pytest

from kmkit.errors import InputError, WindowExceededError
from kmkit import weyl
from kmkit.weyl import (
    Root,
    coset_minimal,
    enumerate_parabolic,
    enumerate_real_roots,
    enumerate_weyl_ball,
    from_word,
    identity_element,
    is_spherical,
    reduced_word,
    simple_reflection,
)


def test_simple_reflection_on_simple_roots(a2_datum):
    s1 = simple_reflection(a2_datum, 1)
    assert s1.image_of_simple(1) == (-1, 0)
    assert s1.image_of_simple(2) == (1, 1)
    assert (s1 * s1).is_identity


def test_simple_reflection_fixes_pairing_kernel(a2_datum):
    s1 = simple_reflection(a2_datum, 1)
    # covector v with v(h_1) = 0 is fixed
    v = (0, 1)
    assert sum(a * b for a, b in zip(v, a2_datum.coroots[0])) == 0
    assert s1.apply_covector(v) == v


def test_simple_reflection_range(a2_datum):
    with pytest.raises(InputError):
        simple_reflection(a2_datum, 3)


def test_reduced_word_identity(a2_datum):
    assert reduced_word(identity_element(a2_datum)) == ()


def test_reduced_word_longest_s3(a2_datum):
    w = from_word(a2_datum, (1, 2, 1))
    assert w.word == (1, 2, 1) and w.length == 3
    # oracle: enumerate all of S_3 and check 3 is the maximum length
    ball = enumerate_weyl_ball(a2_datum, 10)
    assert max(u.length for u in ball) == 3


def test_reduced_word_affine_length_4(aff_datum):
    w = from_word(aff_datum, (1, 2, 1, 2))
    assert w.length == 4


def test_word_canonical_and_consistent(aff_datum):
    w = from_word(aff_datum, (2, 1, 2, 1, 2))
    assert from_word(aff_datum, w.word) == w
    assert w.length == 5


def test_real_roots_a2(a2_datum):
    roots = enumerate_real_roots(a2_datum, 10)
    assert [r.coeffs for r in roots] == [(0, 1), (1, 0), (1, 1)]
    assert all(r.real and r.is_positive for r in roots)


def test_real_roots_g2(g2_datum):
    roots = enumerate_real_roots(g2_datum, 10)
    assert len(roots) == 6
    assert (2, 3) in {r.coeffs for r in roots}


def test_real_roots_affine(aff_datum):
    roots = enumerate_real_roots(aff_datum, 5)
    assert [r.coeffs for r in roots] == [
        (0, 1),
        (1, 0),
        (1, 2),
        (2, 1),
        (2, 3),
        (3, 2),
    ]


def test_real_roots_window_idempotent(aff_datum, g2_datum):
    for datum, h in ((aff_datum, 7), (g2_datum, 4)):
        small = {r.coeffs for r in enumerate_real_roots(datum, h)}
        big = {
            r.coeffs for r in enumerate_real_roots(datum, h + 2) if r.height <= h
        }
        assert small == big


def test_positive_count_equals_longest_length(a2_datum, g2_datum):
    for datum, expect in ((a2_datum, 3), (g2_datum, 6)):
        ball = enumerate_weyl_ball(datum, 20)
        longest = max(w.length for w in ball)
        roots = enumerate_real_roots(datum, longest)
        assert len(roots) == longest == expect


def test_reflection_permutes_other_positives(a2_datum, g2_datum):
    for datum in (a2_datum, g2_datum):
        positives = {r.coeffs for r in enumerate_real_roots(datum, 10)}
        for i in range(1, datum.n + 1):
            s = simple_reflection(datum, i)
            alpha = tuple(1 if k == i - 1 else 0 for k in range(datum.n))
            for c in positives:
                img = s.apply_root_coeffs(c)
                if c == alpha:
                    assert img == tuple(-x for x in alpha)
                else:
                    assert img in positives


def test_length_changes_by_one(a2_datum, aff_datum):
    for datum, bound in ((a2_datum, 10), (aff_datum, 4)):
        for w in enumerate_weyl_ball(datum, bound):
            for i in range(1, datum.n + 1):
                u = w * simple_reflection(datum, i)
                assert abs(u.length - w.length) == 1


def test_is_spherical(a2_datum, gen_datum):
    assert is_spherical(gen_datum.gcm, [1]) is True
    assert is_spherical(gen_datum.gcm, [1, 2]) is False
    assert is_spherical(a2_datum.gcm, [1, 2]) is True
    assert is_spherical(a2_datum.gcm, []) is True


def test_ball_counts(a2_datum, aff_datum):
    assert len(enumerate_weyl_ball(a2_datum, 10)) == 6
    assert len(enumerate_weyl_ball(aff_datum, 3)) == 7
    ball0 = enumerate_weyl_ball(aff_datum, 0)
    assert len(ball0) == 1 and ball0[0].is_identity


def test_ball_memory_guard(aff_datum):
    with pytest.raises(WindowExceededError):
        enumerate_weyl_ball(aff_datum, 50, max_elements=10)


def test_coset_minimal_and_parabolic(a2_datum, gen_datum):
    w0 = from_word(a2_datum, (1, 2, 1))
    m = coset_minimal(w0, [1, 2])
    assert m.is_identity
    par = enumerate_parabolic(a2_datum, [1])
    assert len(par) == 2
    with pytest.raises(InputError):
        enumerate_parabolic(gen_datum, [1, 2])


def test_root_flags():
    r = Root((1, 1), real=False)
    assert r.height == 2 and not r.real
    assert (-r).is_negative
