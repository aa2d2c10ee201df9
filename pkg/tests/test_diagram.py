from __future__ import annotations

import pytest

from oddkh.diagram import (
    PlanarDiagram,
    crossing_signs,
    gen_braid_closure,
    gen_pretzel,
    gen_torus,
    mirror,
    mirror_name,
    parse_pd,
    resolve,
    torus_word,
    writhe,
)
from oddkh.utils import DiagramError


def test_parse_negative_hopf():
    d = parse_pd("PD[X[1,3,2,4],X[3,1,4,2]]")
    assert d.crossing_count == 2
    assert d.edge_count == 4
    assert d.component_count == 2
    assert crossing_signs(d) == [-1, -1]


def test_parse_empty_pd_is_unknot():
    d = parse_pd("PD[]")
    assert d.crossing_count == 0
    assert d.unknots == 1
    assert d.component_count == 1
    assert writhe(d) == 0


@pytest.mark.parametrize("text", [
    "PD[X[1,3,2,4]]",
    "PD[X[1,2,3]]",
    "",
    "PD[X[1,1,2,2],X[3,3,4,5]]",
    "PD[X[1,4,2,5]X[3,6,4,1]X[5,2,6,3]]",
    "PD[X[1,4,2,5],,X[3,6,4,1],X[5,2,6,3]]",
    "PD[X[1,4,2,5] ; X[3,6,4,1] X[5,2,6,3]]",
])
def test_parse_rejects_malformed(text):
    with pytest.raises(DiagramError):
        parse_pd(text)


def test_positive_hopf_signs(hopf):
    assert crossing_signs(hopf) == [1, 1]
    assert writhe(hopf) == 2


def test_trefoil_chirality(corpus):
    assert crossing_signs(corpus["trefoil_left"]) == [-1, -1, -1]
    assert writhe(corpus["trefoil_right"]) == 3


def test_figure_eight_signs(corpus):
    assert sorted(crossing_signs(corpus["figure_eight"])) == [-1, -1, 1, 1]


def test_mirror(hopf, trefoil):
    assert writhe(mirror(hopf)) == -2
    assert mirror(mirror(trefoil)).crossings == trefoil.crossings
    assert crossing_signs(mirror(trefoil)) == [-1, -1, -1]


def test_mirror_name():
    assert mirror_name("9_46") == "mirror(9_46)"
    assert mirror_name("mirror(9_46)") == "9_46"
    assert mirror_name("") == ""


def test_to_pd_round_trip(trefoil):
    again = parse_pd(trefoil.to_pd())
    assert again == trefoil


@pytest.mark.parametrize("spec, crossings, w", [
    ([3, 3, -3], 9, -3),
    ([3, 4, -3], 10, -4),
])
def test_pretzel_knots(spec, crossings, w):
    d = gen_pretzel(spec)
    assert d.crossing_count == crossings
    assert d.component_count == 1
    assert writhe(d) == w


def test_pretzel_hopf():
    d = gen_pretzel([1, 1])
    assert d.crossing_count == 2
    assert d.component_count == 2


def test_pretzel_rejects_zero():
    with pytest.raises(DiagramError):
        gen_pretzel([3, 0, -3])


def test_braid_trefoil():
    d = gen_braid_closure([1, 1, 1], 2)
    assert d.crossing_count == 3
    assert d.component_count == 1
    assert writhe(d) == 3


def test_braid_single_crossing_is_unknot():
    d = gen_braid_closure([1], 2)
    assert d.crossing_count == 1
    assert d.component_count == 1


def test_braid_free_strands():
    d = gen_braid_closure([1], 3)
    assert d.unknots == 1
    assert d.component_count == 2


def test_braid_rejects_bad_generator():
    with pytest.raises(DiagramError):
        gen_braid_closure([3], 3)


def test_torus_knot():
    assert torus_word(4, -5)[:3] == [-1, -2, -3]
    d = gen_torus(4, -5)
    assert d.crossing_count == 15
    assert d.component_count == 1
    assert writhe(d) == -15


def test_resolution_circle_counts(hopf, unknot):
    assert resolve(hopf, (1, 1)).circle_count == 2
    assert resolve(hopf, (1, 0)).circle_count == 1
    assert resolve(unknot, ()).circle_count == 1


def test_resolution_labels_are_minimal_edges(hopf):
    res = resolve(hopf, (1, 1))
    for circle in res.circles:
        assert circle[0] == min(circle)
        assert all(res.circle_of[e] == circle[0] for e in circle)


def test_free_loop_labels_follow_edges():
    d = gen_braid_closure([1], 3)
    res = resolve(d, (1,))
    assert d.loop_labels == (d.max_label + 1,)
    assert d.loop_labels[0] in res.labels


def test_resolve_rejects_wrong_state_length(hopf):
    with pytest.raises(DiagramError):
        resolve(hopf, (1,))


def test_diagram_requires_content():
    with pytest.raises(DiagramError):
        PlanarDiagram(())


def test_parse_accepts_either_separator():
    a = parse_pd("PD[X[1,4,2,5], X[3,6,4,1], X[5,2,6,3]]")
    b = parse_pd("X[1,4,2,5]; X[3,6,4,1]; X[5,2,6,3];")
    assert a.crossings == b.crossings


def test_parse_reports_missing_separator():
    with pytest.raises(DiagramError, match="分隔符"):
        parse_pd("PD[X[1,4,2,5]X[3,6,4,1]X[5,2,6,3]]")
