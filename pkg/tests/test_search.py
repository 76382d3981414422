from fractions import Fraction

import pytest

from app.models.algebra import SemigroupPresentation, identity_matrix
from app.models.models import DensityStatus, SearchBudget, TorusPointSet
from app.modules.cayley.cayley import elementary_presentation
from app.modules.errors import DimensionMismatchError, HypothesisViolationError, SoundnessError
from app.modules.polymat.polymat import diagonal_poly_matrix, poly_matrix
from app.modules.search import search as search_module
from app.modules.search.engines import GroupEngine, PolyEngine, ProductEngine, ScalarEngine
from app.modules.search.search import (
    check_injective_projections,
    find_group_dilation,
    find_poly_dilation,
    find_product_dilation,
    find_scalar_dilation,
    outcome_to_json,
)
from app.modules.torus.torus import apply_matrix, is_eps_dense
from app.utils.validators import ValidationError


@pytest.fixture
def lattice_25() -> TorusPointSet:
    """{(i, 7i)/25}: proyecciones inyectivas en ambos factores."""
    return TorusPointSet.exact([[Fraction(i, 25), Fraction(7 * i % 25, 25)] for i in range(25)])


def test_scalar_dense_set_found_at_one():
    Y = TorusPointSet.exact([[Fraction(j, 101)] for j in range(101)])
    outcome = find_scalar_dilation(Y, 0.02, SearchBudget(n_max=10))
    assert outcome.found
    assert outcome.dilator.n == 1
    assert outcome.scanned == 1
    assert outcome.verdict.status == DensityStatus.DENSE


def test_scalar_sweep_of_small_rotation():
    Y = TorusPointSet.exact([[0], [Fraction(1, 1000)]])
    outcome = find_scalar_dilation(Y, 0.3, SearchBudget(n_max=500))
    assert outcome.found
    # con n <= 400 algún hueco de nY mide al menos 0.6
    assert 400 < outcome.dilator.n <= 500
    assert outcome.scanned == outcome.dilator.n
    assert is_eps_dense(apply_matrix(Y, [[outcome.dilator.n]]), 0.3).status == DensityStatus.DENSE


def test_larger_budget_keeps_the_same_hit():
    Y = TorusPointSet.exact([[0], [Fraction(1, 1000)]])
    small = find_scalar_dilation(Y, 0.3, SearchBudget(n_max=500))
    large = find_scalar_dilation(Y, 0.3, SearchBudget(n_max=1000))
    assert large.found and large.dilator == small.dilator


def test_scalar_single_point_never_found(origin_1d):
    outcome = find_scalar_dilation(origin_1d, 0.45, SearchBudget(n_max=50))
    assert not outcome.found
    assert outcome.scanned == 50
    assert outcome.stop_reason == "exhausted"


def test_poly_constant_matrix_not_found():
    Y = TorusPointSet.exact([[0, 0], [Fraction(1, 2), Fraction(1, 2)]])
    outcome = find_poly_dilation(Y, poly_matrix([identity_matrix(2)]), 0.3, SearchBudget(n_max=20))
    assert not outcome.found
    assert outcome.scanned == 20


def test_poly_dense_grid_found_at_one(grid_5x5):
    outcome = find_poly_dilation(grid_5x5, diagonal_poly_matrix([[0, 1], [0, 0, 1]]), 0.25, SearchBudget(n_max=5))
    assert outcome.found
    assert outcome.dilator.kind == "poly" and outcome.dilator.n == 1


def test_poly_dimension_mismatch(quarter_set):
    with pytest.raises(DimensionMismatchError):
        find_poly_dilation(quarter_set, diagonal_poly_matrix([[0, 1], [0, 0, 1]]), 0.3)


def test_poly_engine_evaluates_in_order():
    engine = PolyEngine(diagonal_poly_matrix([[0, 1], [0, 0, 1]]))
    mats = [g for _, g in engine.candidates(3)]
    assert mats == [[[1, 0], [0, 1]], [[2, 0], [0, 4]], [[3, 0], [0, 9]]]


def test_product_shell_order():
    assert ProductEngine.shell(0) == [(0, 0)]
    assert ProductEngine.shell(1) == [(0, 1), (1, 0), (1, 1)]
    assert ProductEngine.shell(2) == [(0, 2), (1, 2), (2, 0), (2, 1), (2, 2)]


def test_product_engine_pairs_scalars():
    engine = ProductEngine(ScalarEngine(1), ScalarEngine(1))
    pairs = [tuple(f.n for f in dilator.factors) for dilator, _ in engine.candidates(4)]
    assert pairs == [(1, 1), (1, 2), (2, 1), (2, 2)]
    _, g = next(iter(ProductEngine(ScalarEngine(1), ScalarEngine(2)).candidates(1)))
    assert g == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_product_engine_stops_when_factors_run_out():
    trivial = SemigroupPresentation(dim=1, generators=[[[1]]])
    engine = ProductEngine(GroupEngine(trivial, 3, 10), GroupEngine(trivial, 3, 10))
    assert len(list(engine.candidates(100))) == 1


def test_product_search_on_lattice(lattice_25):
    outcome = find_product_dilation(lattice_25, (ScalarEngine(1), ScalarEngine(1)), 0.3, SearchBudget(n_max=50))
    assert outcome.found
    assert outcome.dilator.kind == "product"
    assert [f.n for f in outcome.dilator.factors] == [1, 1]


def test_product_search_rejects_slices():
    Y = TorusPointSet.exact([[Fraction(i, 10), Fraction(1, 3)] for i in range(10)])
    with pytest.raises(HypothesisViolationError):
        find_product_dilation(Y, (ScalarEngine(1), ScalarEngine(1)), 0.3)
    with pytest.raises(HypothesisViolationError):
        check_injective_projections(TorusPointSet.exact([[Fraction(1, 3), 0], [Fraction(1, 3), Fraction(1, 2)]]), 1)


def test_product_search_validation(lattice_25):
    with pytest.raises(ValidationError):
        check_injective_projections(lattice_25, 2)
    with pytest.raises(DimensionMismatchError):
        find_product_dilation(lattice_25, (ScalarEngine(1), ScalarEngine(2)), 0.3)


def test_product_search_single_point_is_degenerate():
    Y = TorusPointSet.exact([[Fraction(1, 3), Fraction(1, 5)]])
    outcome = find_product_dilation(Y, (ScalarEngine(1), ScalarEngine(1)), 0.3, SearchBudget(n_max=20))
    assert not outcome.found
    assert outcome.scanned == 20


def test_group_search_dense_set_found_at_identity(grid_5x5):
    outcome = find_group_dilation(grid_5x5, elementary_presentation(), 0.25)
    assert outcome.found
    assert outcome.dilator.word == ()
    assert outcome.dilator.describe() == "word:I"
    assert outcome.scanned == 1


def test_group_search_invariant_pair_not_found():
    S = SemigroupPresentation(dim=2, generators=[[[1, 1], [0, 1]]])
    Y = TorusPointSet.exact([[0, 0], [Fraction(1, 2), 0]])
    outcome = find_group_dilation(Y, S, 0.3, SearchBudget(ball_radius=3, element_budget=100))
    assert not outcome.found
    assert outcome.scanned == 4
    assert outcome.stop_reason == "exhausted"


def test_group_search_element_budget_is_not_an_error():
    Y = TorusPointSet.exact([[Fraction(1, 3), Fraction(1, 5)]])
    outcome = find_group_dilation(Y, elementary_presentation(), 0.3, SearchBudget(ball_radius=8, element_budget=10))
    assert not outcome.found
    assert outcome.stop_reason == "budget"
    assert outcome.scanned == 10


def test_group_search_dimension_mismatch(quarter_set):
    with pytest.raises(DimensionMismatchError):
        find_group_dilation(quarter_set, elementary_presentation(), 0.3)


def test_search_is_deterministic_across_threads():
    Y = TorusPointSet.exact([[0], [Fraction(1, 1000)], [Fraction(3, 7)]])
    one = find_scalar_dilation(Y, 0.2, SearchBudget(n_max=800), threads=1, seed=5)
    many = find_scalar_dilation(Y, 0.2, SearchBudget(n_max=800), threads=4, seed=5)
    assert outcome_to_json(one) == outcome_to_json(many)


def test_outcome_json_shape():
    Y = TorusPointSet.exact([[Fraction(j, 101)] for j in range(101)])
    payload = outcome_to_json(find_scalar_dilation(Y, 0.02, SearchBudget(n_max=3), seed=9))
    assert payload["found"] is True
    assert payload["dilator"] == {"kind": "scalar", "n": 1}
    assert payload["scanned"] == 1
    assert payload["seed"] == 9
    assert payload["verdict_resolution"] > 0
    missing = outcome_to_json(find_scalar_dilation(TorusPointSet.exact([[0]]), 0.2, SearchBudget(n_max=3)))
    assert missing["dilator"] is None and missing["stop_reason"] == "exhausted"


def test_search_budget_has_only_deterministic_limits():
    assert set(SearchBudget.model_fields) == {"n_max", "ball_radius", "element_budget"}
    first = find_scalar_dilation(TorusPointSet.exact([[0]]), 0.1, SearchBudget(n_max=2000))
    second = find_scalar_dilation(TorusPointSet.exact([[0]]), 0.1, SearchBudget(n_max=2000), threads=3)
    assert first.scanned == second.scanned == 2000
    assert first.stop_reason == second.stop_reason == "exhausted"


def test_hit_is_recertified_in_integer_arithmetic(monkeypatch):
    Y = TorusPointSet.exact([[Fraction(j, 101)] for j in range(101)])
    monkeypatch.setattr(search_module, "certify_dense_exact", lambda *args: False)
    with pytest.raises(SoundnessError):
        find_scalar_dilation(Y, 0.02, SearchBudget(n_max=5))
