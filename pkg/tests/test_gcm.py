import random

import pytest

from kmkit.errors import InputError
from kmkit.gcm import (
    AFFINE,
    CARTAN_A2,
    CARTAN_AFFINE_A1,
    CARTAN_GENERIC_33,
    FINITE,
    INDEFINITE,
    build_root_datum,
    classify,
    gcm_from_json,
    validate_gcm,
)
from kmkit.weyl import is_spherical


def test_validate_a2():
    g = validate_gcm(CARTAN_A2)
    assert g.n == 2 and g[0, 1] == -1


def test_validate_zero_symmetry_error():
    with pytest.raises(InputError) as exc:
        validate_gcm([[2, -1], [0, 2]])
    assert exc.value.detail["axiom"] == "zero-symmetry"
    assert (exc.value.detail["row"], exc.value.detail["col"]) == (1, 2)


def test_validate_diagonal_error():
    with pytest.raises(InputError) as exc:
        validate_gcm([[3]])
    assert exc.value.detail["axiom"] == "diagonal"


def test_validate_shape_and_sign_errors():
    with pytest.raises(InputError):
        validate_gcm([[2, -1]])
    with pytest.raises(InputError) as exc:
        validate_gcm([[2, 1], [1, 2]])
    assert exc.value.detail["axiom"] == "offdiag"


def test_minimal_datum_a2():
    d = build_root_datum(validate_gcm(CARTAN_A2))
    assert d.d == 2
    for i in range(2):
        for j in range(2):
            assert d.pairing(j, i) == CARTAN_A2[i][j]


def test_minimal_datum_affine():
    d = build_root_datum(validate_gcm(CARTAN_AFFINE_A1))
    assert d.d == 3
    for i in range(2):
        for j in range(2):
            assert d.pairing(j, i) == CARTAN_AFFINE_A1[i][j]
    assert len(d.completion) == 1


def test_simply_connected_a2():
    d = build_root_datum(validate_gcm(CARTAN_A2), "simply-connected")
    assert d.d == 2
    assert d.roots == ((1, 0), (0, 1))
    for i in range(2):
        for j in range(2):
            assert d.pairing(j, i) == CARTAN_A2[i][j]


def test_simply_connected_rejects_singular():
    with pytest.raises(InputError):
        build_root_datum(validate_gcm(CARTAN_AFFINE_A1), "simply-connected")


def test_classify_examples():
    assert classify(validate_gcm(CARTAN_A2)).tags == (FINITE,)
    assert classify(validate_gcm(CARTAN_AFFINE_A1)).tags == (AFFINE,)
    rep = classify(validate_gcm(CARTAN_GENERIC_33))
    assert rep.tags == (INDEFINITE,)
    assert rep.is_generic and not rep.is_2_spherical


def test_classify_components_and_flags():
    block = [
        [2, -1, 0, 0],
        [-1, 2, 0, 0],
        [0, 0, 2, -2],
        [0, 0, -2, 2],
    ]
    rep = classify(validate_gcm(block))
    assert rep.tags == (FINITE, AFFINE)
    assert rep.is_2_spherical is False  # the affine pair has product 4
    assert rep.is_generic is False


def test_classify_permutation_invariance():
    rng = random.Random(3)
    base = [
        [2, -1, 0],
        [-2, 2, -1],
        [0, -1, 2],
    ]
    tags = sorted(classify(validate_gcm(base)).tags)
    for _ in range(6):
        perm = list(range(3))
        rng.shuffle(perm)
        mat = [[base[perm[i]][perm[j]] for j in range(3)] for i in range(3)]
        assert sorted(classify(validate_gcm(mat)).tags) == tags


def test_generic_blocks_spherical_pairs():
    g = validate_gcm(CARTAN_GENERIC_33)
    assert classify(g).is_generic
    assert not is_spherical(g, [1, 2])
    assert is_spherical(g, [1]) and is_spherical(g, [])


def test_gcm_from_json():
    g, variant = gcm_from_json({"matrix": [[2, -1], [-1, 2]], "variant": "minimal"})
    assert g.n == 2 and variant == "minimal"
    with pytest.raises(InputError):
        gcm_from_json({"matrix": [[2]], "variant": "nope"})
    with pytest.raises(InputError):
        gcm_from_json([[2]])
