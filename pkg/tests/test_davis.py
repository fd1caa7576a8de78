import pytest

from kmkit.cosheaf import homology, trivial_cosheaf
from kmkit.davis import (
    building_ball,
    coxeter_davis_ball,
    davis_realization_of_ball,
    field_from_q,
    parabolic_index,
)
from kmkit.errors import InputError, UnsupportedConfigurationError
from kmkit.exactalg import QQ
from kmkit.gcm import build_root_datum, validate_gcm
from kmkit.weyl import enumerate_weyl_ball


def test_field_from_q():
    assert field_from_q(5).order == 5
    assert field_from_q(4).order == 4
    with pytest.raises(InputError):
        field_from_q(6)


# ---------------------------------------------------------------------------
# Coxeter-level Davis complexes


def test_coxeter_davis_a2(a2_datum):
    dc = coxeter_davis_ball(a2_datum, 3)
    assert dc.vertex_count() == 13  # 6 + 3 + 3 + 1
    by_type = {}
    for v in dc.vertices:
        by_type[v.types] = by_type.get(v.types, 0) + 1
    assert by_type == {(): 6, (1,): 3, (2,): 3, (1, 2): 1}
    rep = homology(trivial_cosheaf(dc.complex, 1, QQ))
    assert rep.rank(0) == 1
    assert all(rep.rank(k) == 0 for k in range(1, dc.complex.dim + 1))
    assert all(v.complete for v in dc.vertices)
    assert sum(1 for v in dc.vertices if v.marked) == 1


def test_coxeter_davis_generic_is_tree(gen_datum):
    dc = coxeter_davis_ball(gen_datum, 4)
    cx = dc.complex
    assert cx.dim == 1
    assert cx.n_faces(0) - cx.n_faces(1) == 1
    assert cx.is_connected()


def test_coxeter_davis_affine_segment(aff_datum):
    dc = coxeter_davis_ball(aff_datum, 3)
    chambers = [v for v in dc.vertices if v.types == ()]
    panels = [v for v in dc.vertices if len(v.types) == 1]
    assert len(chambers) == 7 and len(panels) == 8
    assert dc.complex.euler_characteristic() == 1
    assert any(not v.complete for v in dc.vertices)


def test_coxeter_davis_maximal_chain_length(a2_datum):
    dc = coxeter_davis_ball(a2_datum, 3)
    assert dc.complex.dim + 1 == a2_datum.n + 1


# ---------------------------------------------------------------------------
# building balls


def test_tree_ball_counts(gen_datum):
    ball = building_ball(gen_datum, 2, 2)
    assert len(ball.chambers) == 13  # 1 + 2*2 + 2*4
    complete = [p for p in ball.panels if p.complete]
    assert complete and all(len(p.members) == 3 for p in complete)
    boundary = [p for p in ball.panels if not p.complete]
    assert boundary  # frontier panels flagged, never silently undersized


def test_tree_ball_distance_counts_match_weyl(gen_datum):
    for q in (2, 3):
        ball = building_ball(gen_datum, q, 3)
        words = {}
        for w in enumerate_weyl_ball(gen_datum, 3):
            words[w.length] = words.get(w.length, 0) + 1
        for dist, count in words.items():
            assert len(ball.chambers_at(dist)) == count * q**dist


def test_a2_building_q2(a2_datum):
    ball = building_ball(a2_datum, 2, 10)
    assert len(ball.chambers) == 21
    assert all(p.complete and len(p.members) == 3 for p in ball.panels)
    assert len(ball.panels) == 14  # 7 points + 7 lines of the Fano plane


def test_a2_building_q3_count(a2_datum):
    ball = building_ball(a2_datum, 3, 10)
    assert len(ball.chambers) == 52  # (q^2+q+1)(q+1) at q = 3


def test_a2_distance_counts_match_weyl(a2_datum):
    ball = building_ball(a2_datum, 2, 10)
    words = {}
    for w in enumerate_weyl_ball(a2_datum, 10):
        words[w.length] = words.get(w.length, 0) + 1
    for dist, count in words.items():
        assert len(ball.chambers_at(dist)) == count * 2**dist


def test_ball_radius_zero(gen_datum, a2_datum):
    for datum in (gen_datum, a2_datum):
        ball = building_ball(datum, 2, 0)
        assert len(ball.chambers) == 1
        assert ball.chambers[0].word == ()


def test_ball_refusal_names_gap():
    rank3 = build_root_datum(
        validate_gcm([[2, -2, -2], [-2, 2, -2], [-2, -2, 2]])
    )
    with pytest.raises(UnsupportedConfigurationError) as exc:
        building_ball(rank3, 2, 1)
    assert "backend" in str(exc.value)


def test_affine_uses_tree_backend(aff_datum):
    ball = building_ball(aff_datum, 2, 2)
    assert ball.backend == "rank2-tree"
    assert len(ball.chambers) == 13


# ---------------------------------------------------------------------------
# Davis realizations of balls


def test_davis_realization_tree(gen_datum):
    ball = building_ball(gen_datum, 2, 2)
    dr = davis_realization_of_ball(ball)
    cx = dr.complex
    assert cx.dim == 1
    assert cx.n_faces(0) - cx.n_faces(1) == 1
    assert cx.is_connected()


def test_davis_realization_a2_full(a2_datum):
    ball = building_ball(a2_datum, 2, 10)
    dr = davis_realization_of_ball(ball)
    by_type = {}
    for v in dr.vertices:
        by_type[v.types] = by_type.get(v.types, 0) + 1
    assert by_type == {(): 21, (1,): 7, (2,): 7, (1, 2): 1}
    assert dr.complex.dim == 2
    rep = homology(trivial_cosheaf(dr.complex, 1, QQ))
    assert [rep.rank(k) for k in range(3)] == [1, 0, 0]
    assert all(v.complete for v in dr.vertices)
    marked = [v for v in dr.vertices if v.marked]
    assert len(marked) == 1 and marked[0].types == (1, 2)


def test_davis_realization_r0(gen_datum):
    ball = building_ball(gen_datum, 2, 0)
    dr = davis_realization_of_ball(ball)
    # the chain poset over the single chamber: the chamber plus one
    # (incomplete) panel residue per type
    assert dr.vertex_count() == 3
    assert sum(1 for v in dr.vertices if not v.complete) == 2


def test_davis_realization_flags_boundary(gen_datum):
    ball = building_ball(gen_datum, 2, 2)
    dr = davis_realization_of_ball(ball)
    assert any(not v.complete for v in dr.vertices)
    flagged = [f for f, b in dr.complex.boundary_flags.items() if b]
    assert flagged


# ---------------------------------------------------------------------------
# parabolic index


@pytest.mark.parametrize("q", [2, 3, 5])
def test_parabolic_index(gen_datum, q):
    assert parabolic_index(gen_datum, q, 1) == q + 1
    assert parabolic_index(gen_datum, q, 2) == q + 1


def test_parabolic_index_finite_backend(a2_datum):
    assert parabolic_index(a2_datum, 2, 1) == 3
    assert parabolic_index(a2_datum, 2, 2) == 3


def test_dump_formats(gen_datum):
    ball = building_ball(gen_datum, 2, 1)
    doc = ball.to_json()
    assert doc["schema"] == 1 and doc["backend"] == "rank2-tree"
    assert ball.adjacency_tsv().count("\n") >= 1
    dr = davis_realization_of_ball(ball)
    assert dr.to_json()["source"] == "building-rank2-tree"
    assert dr.edge_tsv()
