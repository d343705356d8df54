import numpy as np
import pytest

from quasilattice.environment import (N_CLASSES, alpha_beta, census, classify, classify_fractional,
                                      config_regions, config_table, corner_parity, corner_vector,
                                      joint_probability, reference_vector)
from quasilattice.pentagrid import EVEN, Pentagrid, mesh_vector


@pytest.fixture(scope="module")
def grid():
    return Pentagrid()


@pytest.fixture(scope="module")
def regions():
    return config_regions(resolution=256)


def test_frozen_table():
    table = config_table()
    assert len(table) == N_CLASSES == 24
    assert [c.id for c in table] == list(range(1, 25))
    assert len({c.signature for c in table}) == 24
    assert all(6 <= c.mesh_count <= 12 for c in table)
    assert {c.corner_parity for c in table} == {"even", "odd"}


def test_corner_vector_is_the_mesh_at_the_corner(grid):
    d = grid.directions
    for k0 in range(-4, 5):
        for k1 in range(-4, 5):
            corner = grid.intersection(0, k0, 1, k1)
            inside = corner - 1e-7 * (d[0] + d[1])
            assert corner_vector(grid, k0, k1) == mesh_vector(grid, inside)


def test_reference_vector_has_index_two(grid):
    for k0, k1 in [(0, 0), (3, -2), (-7, 11), (40, 41)]:
        ref = reference_vector(grid, k0, k1)
        assert ref.index == 2
        assert ref[0] == k0 and ref[1] == k1


def test_corner_parity_matches_index(grid):
    for k0 in range(-5, 6):
        for k1 in range(-5, 6):
            a, b = alpha_beta(grid, k0, k1)
            even = corner_vector(grid, k0, k1).index % 2 == 0
            assert (corner_parity(a, b) == EVEN) == even


def test_classes_depend_only_on_fractional_labels(grid):
    k0, k1 = np.arange(-30, 30), np.arange(10, 70)
    a, b = alpha_beta(grid, k0, k1)
    direct = [classify(grid, int(i), int(j)).id for i, j in zip(k0, k1)]
    via_labels = classify_fractional(a - np.floor(a), b - np.floor(b))
    assert list(via_labels) == direct


def test_region_areas(regions):
    assert regions.areas.sum() == pytest.approx(1.0)
    assert np.all(regions.areas > 0)
    assert set(np.unique(regions.ids)) == set(range(1, 25))


def test_census_against_areas(grid, regions):
    ids, meshes, _, _ = census(grid, 20000, seed=3)
    freq = np.bincount(ids - 1, minlength=24) / len(ids)
    assert np.abs(freq - regions.areas).max() < 0.015
    table = config_table()
    assert all(meshes[i] == table[ids[i] - 1].mesh_count for i in range(0, len(ids), 97))


def test_joint_probability_marginals(regions):
    jp = joint_probability(dk0=1, dk1=2, resolution=256)
    assert jp.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(jp.probs.sum(axis=1) - regions.areas).max() < 1e-12
    assert np.abs(jp.probs.sum(axis=0) - regions.areas).max() < 1e-2
    same = joint_probability(resolution=256)
    assert np.allclose(same.probs, np.diag(regions.areas))
    with pytest.raises(ValueError):
        joint_probability(resolution=2)
