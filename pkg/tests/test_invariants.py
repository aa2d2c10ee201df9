from __future__ import annotations

import pytest

from oddkh.chain import Flavor
from oddkh.diagram import PlanarDiagram, gen_pretzel, mirror
from oddkh.homology import HomologyTable, Ring, compute_homology
from oddkh.invariants import (
    homological_width,
    is_zero_omitting,
    j_minus_i,
    jones_from_table,
    jones_skein_oracle,
    qa_obstruction,
    tb_bound,
    torsion_profile,
)
from oddkh.polynomial import LaurentPolynomial
from oddkh.selftest import expected_table

UNKNOT = LaurentPolynomial.unknot()


@pytest.mark.parametrize("name, text", [
    ("unknot", "q + q^-1"),
    ("hopf", "q^6 + q^4 + q^2 + 1"),
    ("trefoil_right", "-q^9 + q^5 + q^3 + q"),
    ("figure_eight", "q^5 + q^-5"),
])
def test_skein_oracle(corpus, name, text):
    assert str(jones_skein_oracle(corpus[name])) == text


def test_skein_oracle_unlink():
    assert jones_skein_oracle(PlanarDiagram((), unknots=2)) == UNKNOT**2


def test_skein_oracle_mirror(corpus):
    right = jones_skein_oracle(corpus["trefoil_right"])
    left = jones_skein_oracle(corpus["trefoil_left"])
    assert left.coefficients == {-e: c for e, c in right.coefficients.items()}


def test_jones_from_table(hopf, config):
    t = compute_homology(hopf, "odd", config=config)
    assert str(jones_from_table(t)) == "q^6 + q^4 + q^2 + 1"


def test_jones_from_reduced_table(trefoil, config):
    t = compute_homology(trefoil, "odd", reduced=True, config=config)
    assert jones_from_table(t) == jones_skein_oracle(trefoil).exact_divide(UNKNOT)


def test_width_trefoil_over_rationals(trefoil, config):
    t = compute_homology(trefoil, "even", ring=Ring.Q, config=config)
    w = homological_width(t)
    assert w.width == 2
    assert w.thin
    assert w.diagonals == (1, 3)


def test_width_9_46():
    odd = homological_width(expected_table("pretzel_3_3_m3_reduced_odd"))
    assert odd.width == 2
    assert odd.diagonals == (-2, 0)
    assert not odd.thin
    even = homological_width(expected_table("pretzel_3_3_m3_reduced_even"))
    assert even.width == 1
    assert even.thin


def test_width_ignoring_torsion():
    w = homological_width(expected_table("pretzel_3_3_m3_reduced_odd"), include_torsion=False)
    assert w.width == 1
    assert not w.torsion_included


def test_width_of_empty_table():
    with pytest.raises(ValueError):
        homological_width(HomologyTable({}, Flavor.ODD, Ring.Z))


def test_tb_unknot(unknot, config):
    t = compute_homology(unknot, "even", config=config)
    assert tb_bound(even_z=t).even_z == -1


def test_tb_reduced_offset():
    tb = tb_bound(reduced_odd=expected_table("12n_475_reduced_odd"))
    assert tb.reduced_odd == -3
    assert tb.even_z is None
    assert tb.items() == [("reduced-odd", -3)]


def test_tb_mirror_reflection(trefoil, config):
    t = compute_homology(trefoil, "even", ring=Ring.Q, config=config)
    m = compute_homology(mirror(trefoil), "even", ring=Ring.Q, config=config)
    assert j_minus_i(t)[0] == -j_minus_i(m)[-1]


def test_zero_omitting():
    assert is_zero_omitting(expected_table("12n_475_reduced_odd"))
    assert not is_zero_omitting(expected_table("pretzel_3_3_m3_reduced_odd"))


def test_zero_omitting_unknot(unknot, config):
    assert not is_zero_omitting(compute_homology(unknot, "odd", config=config))


def test_zero_omitting_requires_odd():
    with pytest.raises(ValueError):
        is_zero_omitting(expected_table("trefoil_right_even"))


def test_torsion_profile():
    profile = torsion_profile(expected_table("pretzel_3_3_m3_reduced_odd"))
    assert profile.free_diagonals == (0,)
    assert profile.off_diagonal == {-2: (3,)}
    assert profile.orders() == {3}


def test_torsion_profile_unknot(unknot, config):
    profile = torsion_profile(compute_homology(unknot, "odd", config=config))
    assert profile.by_diagonal == {}


def test_qa_trefoil(trefoil, config):
    report = qa_obstruction(trefoil, config=config)
    assert report.verdict == "no obstruction"
    assert not report.obstructed
    assert report.determinant == 3


def test_qa_9_46(config):
    report = qa_obstruction(gen_pretzel([3, 3, -3], name="9_46"), config=config)
    assert report.verdict == "not quasi-alternating (odd-thick)"
    assert report.widths["reduced-even"].thin
    assert not report.widths["reduced-odd"].thin
    assert report.to_json()["verdict"] == report.verdict


@pytest.mark.slow
def test_qa_10_140(config):
    report = qa_obstruction(gen_pretzel([3, 4, -3]), config=config)
    assert report.verdict == "not quasi-alternating (odd-thick)"


@pytest.mark.slow
def test_pretzel_4_4_m4_torsion(config):
    t = compute_homology(gen_pretzel([4, 4, -4]), "odd", config=config)
    assert any(o % 4 == 0 for o in torsion_profile(t).orders())
