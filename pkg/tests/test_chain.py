from __future__ import annotations

import pytest

from oddkh.chain import (
    ExteriorMonomial,
    Flavor,
    build_complex,
    canonical_wedge,
    d_squared_is_zero,
    delta_odd,
    euler_characteristic,
    even_merge,
    even_split,
    face_types,
    m_odd,
    shift,
    verify_differential,
)
from oddkh.cube import CubeEdge, FaceType, build_cube
from oddkh.diagram import gen_braid_closure, gen_pretzel
from oddkh.invariants import jones_skein_oracle
from oddkh.selftest import RANDOM_DIAGRAMS, random_diagrams
from oddkh.utils import Budget, ConsistencyError, DiagramError, ResourceLimitError

MERGE = CubeEdge(source=1, target=0, crossing=0, kind="merge", before=(1, 2), after=(1,))
SPLIT = CubeEdge(source=1, target=0, crossing=0, kind="split", before=(1,), after=(1, 5))

SMALL = ["unknot", "hopf", "hopf_negative", "trefoil_right", "trefoil_left", "figure_eight"]


def test_canonical_wedge():
    assert canonical_wedge([1, 3]) == (1, (1, 3))
    assert canonical_wedge([3, 1]) == (-1, (1, 3))
    assert canonical_wedge([2, 1, 3]) == (-1, (1, 2, 3))
    assert canonical_wedge([1, 1]) == (0, ())


def test_odd_merge():
    assert m_odd(MERGE, ExteriorMonomial(())) == ExteriorMonomial(())
    assert m_odd(MERGE, ExteriorMonomial((1,))) == ExteriorMonomial((1,))
    assert m_odd(MERGE, ExteriorMonomial((2,))) == ExteriorMonomial((1,))
    assert m_odd(MERGE, ExteriorMonomial((1, 2))).is_zero


def test_odd_merge_reorders_wedge():
    # 合并 (2,4)：X3 ∧ X4 变为 X3 ∧ X2 = -X2 ∧ X3
    edge = CubeEdge(source=1, target=0, crossing=0, kind="merge", before=(2, 4), after=(2,))
    assert m_odd(edge, ExteriorMonomial((3, 4))) == ExteriorMonomial((2, 3), -1)
    assert m_odd(MERGE, ExteriorMonomial((2, 3))) == ExteriorMonomial((1, 3))


def test_odd_split():
    assert delta_odd(SPLIT, ExteriorMonomial(())) == [
        ExteriorMonomial((1,), 1),
        ExteriorMonomial((5,), -1),
    ]
    # (X1 - X5) ∧ X1 = X1 ∧ X5
    assert delta_odd(SPLIT, ExteriorMonomial((1,))) == [ExteriorMonomial((1, 5), 1)]


def test_odd_split_with_spectator():
    # (X1 - X5) ∧ X1 ∧ X3 = -X5 ∧ X1 ∧ X3 = -X1 ∧ X3 ∧ X5
    assert delta_odd(SPLIT, ExteriorMonomial((1, 3))) == [
        ExteriorMonomial((1, 3, 5), -1),
    ]


def test_even_maps():
    assert even_merge(MERGE, ExteriorMonomial((1, 2))).is_zero
    assert even_merge(MERGE, ExteriorMonomial((2,))) == ExteriorMonomial((1,))
    assert even_split(SPLIT, ExteriorMonomial(())) == [
        ExteriorMonomial((1,)),
        ExteriorMonomial((5,)),
    ]
    assert even_split(SPLIT, ExteriorMonomial((1,))) == [ExteriorMonomial((1, 5))]


def test_unknot_complex(unknot):
    c = build_complex(unknot, Flavor.ODD)
    assert c.dims() == {(0, -1): 1, (0, 1): 1}
    assert c.differentials == {}


def test_hopf_block_dimensions(hopf):
    c = build_complex(hopf, Flavor.ODD)
    assert c.dims() == {
        (0, 0): 1, (0, 2): 2, (0, 4): 1,
        (1, 2): 2, (1, 4): 2,
        (2, 2): 1, (2, 4): 2, (2, 6): 1,
    }


@pytest.mark.parametrize("name", SMALL + ["9_46"])
@pytest.mark.parametrize("flavor", [Flavor.ODD, Flavor.EVEN, Flavor.REDUCED_EVEN])
def test_d_squared_zero(corpus, name, flavor):
    c = build_complex(corpus[name], flavor)
    verify_differential(c)


@pytest.mark.parametrize("seed", [1, 2, 3, 4])
def test_d_squared_zero_with_random_arrows(trefoil, seed):
    assert d_squared_is_zero(build_complex(trefoil, Flavor.ODD, seed=seed))


@pytest.mark.parametrize("flavor", [Flavor.ODD, Flavor.EVEN, Flavor.REDUCED_EVEN])
def test_d_squared_zero_on_random_diagrams(flavor):
    diagrams = list(random_diagrams())
    assert len(diagrams) == RANDOM_DIAGRAMS == 200
    for d in diagrams:
        assert d_squared_is_zero(build_complex(d, flavor)), d.name


def test_d_squared_zero_on_braid_with_free_strand():
    d = gen_braid_closure([1, 1, -2, 1], 4)
    assert d_squared_is_zero(build_complex(d, Flavor.ODD))


@pytest.mark.parametrize("name", SMALL)
def test_euler_characteristic_matches_jones(corpus, name):
    d = corpus[name]
    oracle = jones_skein_oracle(d)
    assert euler_characteristic(build_complex(d, Flavor.ODD)) == oracle
    assert euler_characteristic(build_complex(d, Flavor.EVEN)) == oracle


@pytest.mark.parametrize("name", SMALL)
def test_odd_and_even_agree_mod_two(corpus, name):
    odd = build_complex(corpus[name], Flavor.ODD)
    even = build_complex(corpus[name], Flavor.EVEN)
    assert odd.dims() == even.dims()
    assert odd.differentials.keys() == even.differentials.keys()
    for key, m in odd.differentials.items():
        assert m.reduced_mod(2) == even.differentials[key].reduced_mod(2)


def test_reduced_even_basepoint(trefoil):
    c = build_complex(trefoil, Flavor.REDUCED_EVEN, basepoint=3)
    assert c.basepoint == 3
    full = build_complex(trefoil, Flavor.EVEN)
    assert 2 * sum(c.dims().values()) == sum(full.dims().values())
    with pytest.raises(DiagramError):
        build_complex(trefoil, Flavor.REDUCED_EVEN, basepoint=99)


def test_reduced_odd_has_no_complex(trefoil):
    with pytest.raises(ValueError):
        build_complex(trefoil, Flavor.REDUCED_ODD)


def test_shift(trefoil):
    c = build_complex(trefoil, Flavor.ODD)
    assert shift(c, 0, 0) == c
    assert shift(shift(c, 1, 2), -1, -2) == c
    moved = shift(c, 1, 2)
    assert moved.shifts == (1, 2)
    assert set(moved.blocks) == {(i + 1, j + 2) for i, j in c.blocks}


def test_fault_injection_detected(trefoil):
    with pytest.raises(ConsistencyError):
        build_complex(trefoil, Flavor.ODD, fault_injection=True)


def test_complex_json(hopf):
    data = build_complex(hopf, Flavor.ODD).to_json()
    assert data["schema"] == 1
    assert data["flavor"] == "odd"
    assert sum(b["dim"] for b in data["blocks"]) == 12


@pytest.mark.parametrize("flavor", [Flavor.ODD, Flavor.EVEN, Flavor.REDUCED_EVEN])
def test_strands_cover_blocks(corpus, flavor):
    c = build_complex(corpus["figure_eight"], flavor)
    assert sum(c.strand_sizes().values()) == sum(c.dims().values())
    for j in c.j_values():
        s = c.strand(j)
        assert {(i, j): n for i, n in s.dims().items()} == {
            k: n for k, n in c.dims().items() if k[1] == j
        }
        for i, m in s.differentials.items():
            assert m == c.differentials[(i, j)]


def test_strand_outside_support_is_empty(trefoil):
    c = build_complex(trefoil, Flavor.ODD)
    s = c.strand(max(c.j_values()) + 2)
    assert s.blocks == {}
    assert s.differentials == {}


def test_cube_is_released_unless_kept(trefoil):
    assert build_complex(trefoil, Flavor.ODD).cube is None
    kept = build_complex(trefoil, Flavor.ODD, keep_cube=True)
    assert kept.cube is not None
    assert tuple(kept.cube.signs) == kept.signs


def test_face_types_cover_every_face(trefoil):
    cube = build_cube(trefoil)
    kinds = dict(face_types(cube))
    assert list(kinds) == list(cube.faces())
    assert any(k is not FaceType.FREE for k in kinds.values())


def test_memory_budget_stops_before_resolving():
    with pytest.raises(ResourceLimitError):
        build_complex(gen_pretzel((3, 3, -3)), Flavor.ODD, budget=Budget(memory_mb=1))


def test_memory_budget_allows_small_diagrams(trefoil):
    c = build_complex(trefoil, Flavor.ODD, budget=Budget(memory_mb=1))
    assert c.dims() == build_complex(trefoil, Flavor.ODD).dims()
