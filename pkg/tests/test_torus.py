from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from app.config import budgets
from app.models.models import DensityStatus, PointMode, TorusPoint, TorusPointSet
from app.modules.errors import DimensionMismatchError, PrecisionError
from app.modules.torus.torus import (
    apply_matrix,
    certify_dense_exact,
    is_eps_dense,
    max_gap_1d,
    min_torsion_order,
    point_set_from_json,
    point_set_to_json,
    torus_dist,
    torus_norm,
)
from app.utils.validators import ValidationError

fractions = st.fractions(min_value=0, max_value=1, max_denominator=60)
points_2d = st.tuples(fractions, fractions).map(lambda c: TorusPoint.exact(c))


def test_dist_wraps_around():
    u, v = TorusPoint.from_floats([0.1]), TorusPoint.from_floats([0.9])
    assert torus_dist(u, v) == pytest.approx(0.2, abs=1e-12)


def test_dist_maximal_is_half():
    u = TorusPoint.exact([0, 0])
    v = TorusPoint.exact([Fraction(1, 2), Fraction(1, 2)])
    assert torus_dist(u, v) == Fraction(1, 2)


def test_dist_takes_max_over_coordinates():
    u = TorusPoint.from_floats([0.25, 0.9])
    v = TorusPoint.from_floats([0.25, 0.05])
    assert torus_dist(u, v) == pytest.approx(0.15, abs=1e-12)


def test_dist_rejects_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        torus_dist(TorusPoint.exact([0]), TorusPoint.exact([0, 0]))


@given(points_2d, points_2d, points_2d)
def test_dist_is_a_metric(u, v, w):
    assert torus_dist(u, u) == 0
    assert torus_dist(u, v) == torus_dist(v, u)
    assert torus_dist(u, w) <= torus_dist(u, v) + torus_dist(v, w)
    assert torus_dist(u, v) <= Fraction(1, 2)


def test_exact_coordinates_are_reduced_mod_1():
    p = TorusPoint.exact([Fraction(5, 4), -Fraction(1, 3)])
    assert p.coords == (Fraction(1, 4), Fraction(2, 3))
    assert torus_norm(p) == Fraction(1, 3)


@pytest.mark.parametrize("coords, expected", [
    ([Fraction(1, 3), Fraction(1, 4)], 12),
    ([0], 1),
    ([Fraction(2, 6), 0, Fraction(5, 10)], 6),
])
def test_min_torsion_order(coords, expected):
    x = TorusPoint.exact(coords)
    q = min_torsion_order(x)
    assert q == expected
    assert all((q * c) % 1 == 0 for c in x.coords)
    assert all(any((m * c) % 1 for c in x.coords) for m in range(1, q))


def test_min_torsion_order_rejects_float():
    with pytest.raises(PrecisionError):
        min_torsion_order(TorusPoint.from_floats([0.5]))


def test_quarter_set_is_dense(quarter_set):
    verdict = is_eps_dense(quarter_set, 0.13)
    assert verdict.status == DensityStatus.DENSE
    assert verdict.witness is None


def test_singleton_is_not_dense_with_witness_near_half(origin_1d):
    verdict = is_eps_dense(origin_1d, 0.4)
    assert verdict.status == DensityStatus.NOT_DENSE
    witness = verdict.witness
    assert witness.mode == PointMode.EXACT
    assert torus_dist(witness, origin_1d.points[0]) > Fraction(2, 5)
    assert abs(witness.coords[0] - Fraction(1, 2)) <= Fraction(1, 10)


def test_grid_5x5_is_dense(grid_5x5):
    assert is_eps_dense(grid_5x5, 0.11).status == DensityStatus.DENSE


def test_threshold_set_stays_undecided():
    # el hueco es exactamente 2 eps: ningún nivel de malla certifica
    Y = TorusPointSet.exact([[0], [Fraction(1, 2)]])
    verdict = is_eps_dense(Y, 0.25, max_refinements=1)
    assert verdict.status == DensityStatus.UNDECIDED
    assert verdict.levels == 2


def test_grid_budget_reports_levels_actually_run(monkeypatch):
    monkeypatch.setattr(budgets, "DENSITY_GRID_BUDGET", 20)
    Y = TorusPointSet.exact([[0], [Fraction(1, 2)]])
    # 8 y 16 celdas entran en el presupuesto, 32 no
    verdict = is_eps_dense(Y, 0.25, max_refinements=5)
    assert verdict.status == DensityStatus.UNDECIDED
    assert verdict.levels == 2
    assert verdict.resolution == pytest.approx(1 / 16)

    monkeypatch.setattr(budgets, "DENSITY_GRID_BUDGET", 5)
    assert is_eps_dense(Y, 0.25, max_refinements=5).levels == 0


def test_exact_certification_matches_dense_verdict(grid_5x5):
    verdict = is_eps_dense(grid_5x5, 0.25)
    assert verdict.status == DensityStatus.DENSE
    assert certify_dense_exact(grid_5x5, 0.25, verdict.resolution)


def test_exact_certification_is_inclusive_at_the_threshold():
    # max distancia centro -> Y es 3/16 = eps - h/2 exactamente con h = 1/8
    Y = TorusPointSet.exact([[0], [Fraction(1, 2)]])
    assert certify_dense_exact(Y, 0.25, 1 / 8)
    assert not certify_dense_exact(TorusPointSet.exact([[0]]), 0.25, 1 / 8)


def test_exact_certification_requires_exact_points():
    with pytest.raises(PrecisionError):
        certify_dense_exact(TorusPointSet.from_floats([[0.0], [0.5]]), 0.25, 1 / 8)


def test_apply_matrix_rejects_non_integer_entries(quarter_set):
    with pytest.raises(ValidationError):
        apply_matrix(quarter_set, [[1.5]])
    with pytest.raises(ValidationError):
        apply_matrix(TorusPointSet.from_floats([[0.25]]), [[Fraction(1, 2)]])
    assert apply_matrix(quarter_set, [[2.0]]).points == apply_matrix(quarter_set, [[2]]).points


def test_dense_verdict_survives_brute_force_sampling():
    rng = np.random.default_rng(7)
    Y = TorusPointSet.from_floats(rng.random((600, 2)).tolist())
    verdict = is_eps_dense(Y, 0.1)
    assert verdict.status == DensityStatus.DENSE
    samples = rng.random((10_000, 2))
    diff = np.abs(samples[:, None, :] - Y.float_array()[None, :, :])
    dist = np.minimum(diff, 1 - diff).max(axis=2).min(axis=1)
    assert dist.max() <= 0.1


@given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=40), min_size=1, max_size=12, unique=True),
       st.sampled_from([0.05, 0.1, 0.2, 0.3]))
def test_certified_verdict_agrees_with_gap(values, eps):
    Y = TorusPointSet.exact([[v] for v in values], dedupe=True)
    verdict = is_eps_dense(Y, eps)
    gap = max_gap_1d(Y.float_array()[:, 0])
    if verdict.status == DensityStatus.DENSE:
        assert gap <= 2 * eps + 1e-9
    elif verdict.status == DensityStatus.NOT_DENSE:
        assert gap > 2 * eps - 1e-9
        assert min(torus_dist(verdict.witness, p) for p in Y.points) > Fraction(eps)


@pytest.mark.parametrize("eps", [0.0, 0.5, -0.1, "x"])
def test_eps_out_of_range(origin_1d, eps):
    with pytest.raises(ValidationError):
        is_eps_dense(origin_1d, eps)


def test_point_set_rejects_duplicates():
    with pytest.raises(ValueError):
        TorusPointSet.exact([[0], [1]])


def test_apply_matrix_merges_collisions():
    Y = TorusPointSet.exact([[0], [Fraction(1, 2)]])
    image = apply_matrix(Y, [[2]])
    assert image.k == 1
    assert image.points[0].coords == (Fraction(0),)


def test_apply_matrix_exact_2d():
    Y = TorusPointSet.exact([[Fraction(1, 3), Fraction(1, 5)]])
    image = apply_matrix(Y, [[1, 1], [0, 1]])
    assert image.points[0].coords == (Fraction(8, 15), Fraction(1, 5))


def test_max_gap_1d():
    assert max_gap_1d(np.array([0.0, 0.25, 0.5, 0.75])) == pytest.approx(0.25)
    assert max_gap_1d(np.array([0.1])) == pytest.approx(1.0)


def test_point_set_json_format():
    payload = {"dim": 2, "mode": "EXACT", "points": [[[1, 3], [1, 4]], [[0, 1], [1, 2]]]}
    Y = point_set_from_json(payload)
    assert Y.k == 2 and Y.dim == 2
    assert Y.points[0].coords == (Fraction(1, 3), Fraction(1, 4))
    assert point_set_from_json(point_set_to_json(Y)).points == Y.points


def test_point_set_json_float_mode():
    Y = point_set_from_json({"dim": 1, "mode": "float", "points": [[0.25], [1.5]]})
    assert Y.mode == PointMode.FLOAT
    assert Y.float_array()[:, 0].tolist() == [0.25, 0.5]


@pytest.mark.parametrize("payload", [
    {"dim": 1, "mode": "EXACT"},
    {"dim": 1, "mode": "BOGUS", "points": [[0]]},
    {"dim": 2, "mode": "EXACT", "points": [[[1, 2]]]},
    {"dim": 1, "mode": "EXACT", "points": [[[1, 0]]]},
    {"dim": 1, "mode": "EXACT", "points": [[0], [1]]},
    [1, 2, 3],
])
def test_point_set_json_malformed(payload):
    with pytest.raises(ValidationError):
        point_set_from_json(payload)
