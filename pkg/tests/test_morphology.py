import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manifold_hdr.grids import grid_for
from manifold_hdr.manifolds import DomainError, Manifold
from manifold_hdr.morphology import (
    BallUnionSet,
    GridSet,
    boundary_mask,
    closing,
    dilate,
    directed_hausdorff,
    erode,
    grid_components,
    hausdorff_distance,
    maximal_spacing,
    opening,
    packing_number,
    set_distance,
)

from .conftest import COMPACT, random_points
from .morph_checks import COVER_SAFETY, boundary_band, exact_identity_failures, random_ball_union, random_mask_set

S2 = Manifold.sphere()
CIRCLE = Manifold.circle()
GRID_MANIFOLDS = [CIRCLE, S2, Manifold.torus(2)]


@pytest.fixture(scope="module", params=GRID_MANIFOLDS, ids=lambda m: m.tag)
def grid(request):
    return grid_for(request.param, 256)


# -- dilation / erosion / opening examples -----------------------------------------


@pytest.mark.parametrize("op", [dilate, erode, opening, closing])
def test_empty_and_full_are_fixed(grid, op):
    assert op(GridSet.empty(grid), 0.3).is_empty()
    assert op(GridSet.full(grid), 0.3) == GridSet.full(grid)


def test_dilate_single_node_matches_scan(grid):
    i = 17
    S = GridSet(grid, np.arange(len(grid)) == i)
    r = 0.4
    expected = np.array([grid.manifold.distance(grid.nodes[i], x) <= r for x in grid.nodes])
    assert np.array_equal(dilate(S, r).mask, expected)


def test_erode_matches_de_morgan_on_circle_set():
    g = grid_for(CIRCLE, 200)
    S = GridSet(g, np.random.default_rng(3).random(len(g)) < 0.7)
    for r in (0.01, 0.05, 0.2):
        assert erode(S, r) == dilate(S.complement(), r).complement()


def test_erode_matches_definition(grid, rng):
    S = random_mask_set(grid, rng)
    r = 0.3
    dm = grid.distance_matrix()
    expected = np.array([np.all(S.mask[dm[g] <= r]) for g in range(len(grid))])
    assert np.array_equal(erode(S, r).mask, expected)


@pytest.mark.parametrize("op", [dilate, erode])
@pytest.mark.parametrize("r", [0.0, -1.0])
def test_radius_must_be_positive(grid, op, r):
    with pytest.raises(DomainError):
        op(GridSet.full(grid), r)


def test_large_grids_use_the_tree_path():
    g = grid_for(S2, 6000)
    S = BallUnionSet(S2, np.array([[0.0, 0.0, 1.0]]), 0.5).discretize(g)
    direct = S2.pairwise_distances(g.nodes, S.points).min(axis=1) <= 0.2
    assert np.array_equal(dilate(S, 0.2).mask, direct)


def test_complement_is_involution(grid, rng):
    S = random_mask_set(grid, rng)
    assert S.complement().complement() == S


def test_mask_length_checked(grid):
    with pytest.raises(DomainError):
        GridSet(grid, np.ones(len(grid) + 1, dtype=bool))


# -- exact identities on the grid metric space ------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.floats(0.01, 1.5), which=st.sampled_from([0, 1, 2]))
def test_exact_grid_identities(seed, r, which):
    g = _small_grids()[which]
    rng = np.random.default_rng(seed)
    S, T = random_mask_set(g, rng), random_mask_set(g, rng)
    assert exact_identity_failures(S, T, r) == []


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), which=st.sampled_from([0, 1, 2]))
def test_exact_identities_on_ball_unions(seed, which):
    g = _small_grids()[which]
    rng = np.random.default_rng(seed)
    _, _, S = random_ball_union(g, rng)
    _, _, T = random_ball_union(g, rng)
    assert exact_identity_failures(S, T, float(rng.uniform(0.05, 0.8))) == []


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.floats(0.01, 1.0), s=st.floats(0.01, 1.0), which=st.sampled_from([0, 1, 2]))
def test_double_dilation_sandwich(seed, r, s, which):
    # D(S, r + s - 2 delta) <= D(D(S, r), s) <= D(S, r + s): the upper half is the
    # triangle inequality, the lower half follows by snapping a geodesic midpoint
    # to its nearest node (at most one covering radius away)
    g = _small_grids()[which]
    S = random_mask_set(g, np.random.default_rng(seed))
    DD = dilate(dilate(S, r), s)
    assert DD <= dilate(S, r + s)
    slack = r + s - 2 * COVER_SAFETY * g.dispersion
    if slack > 0:
        assert dilate(S, slack) <= DD


def test_opening_idempotence_is_exact_on_grid():
    # literal reading of the contract; a discrete r-ball need not be a union of
    # discrete s-balls, so this is expected to fail (see the decisions ledger)
    rng = np.random.default_rng(0)
    failures = 0
    for g in _small_grids():
        for _ in range(100):
            _, _, S = random_ball_union(g, rng)
            r = float(rng.uniform(0.05, 0.5))
            s = float(rng.uniform(0.02, r))
            O = opening(S, r)
            failures += (opening(O, s) != O) + (not O <= opening(S, s))
    assert failures == 0


def test_double_dilation_can_miss_one_grid_step():
    # 8 nodes on the circle, step pi/4 = 2 * covering radius
    g = grid_for(CIRCLE, 8)
    step = math.pi / 4
    S = GridSet(g, np.arange(8) == 0)
    r = s = 0.6 * step
    assert dilate(dilate(S, r), s) == S
    assert len(dilate(S, r + s)) == 3


# -- derived tolerances against analytic ball unions --------------------------------------


@pytest.mark.parametrize("manifold", GRID_MANIFOLDS, ids=lambda m: m.tag)
@pytest.mark.parametrize("res", [256, 1024])
def test_morphology_against_analytic_balls(manifold, res):
    g = grid_for(manifold, res)
    delta = COVER_SAFETY * g.dispersion
    rng = np.random.default_rng(res)
    for _ in range(40):
        centers, rho, S = random_ball_union(g, rng, rho_range=(4 * delta + 0.1, 4 * delta + 0.8))
        r = float(rng.uniform(0.05, rho - 4 * delta))
        s = float(rng.uniform(0.02, r))
        O = opening(S, r)
        assert boundary_band(O, centers, rho) <= 2 * delta
        assert boundary_band(opening(O, s), centers, rho) <= 4 * delta
        assert boundary_band(opening(S, s), centers, rho) <= 2 * delta
        assert boundary_band(dilate(dilate(S, r), s), centers, rho + r + s) <= 4 * delta


def test_ball_opening_without_core_can_vanish():
    # with r just below the ball radius the eroded core may hold no node, and the
    # whole discretised ball disappears: the band then exceeds one dispersion
    g = grid_for(S2, 256)
    rng = np.random.default_rng(0)
    bands = []
    for _ in range(20):
        c = S2.uniform(1, rng)
        rho = float(rng.uniform(0.3, 0.6))
        ball = BallUnionSet(S2, c, rho).discretize(g)
        O = opening(ball, rho - 0.3 * g.dispersion)
        bands.append(boundary_band(O, c, rho) / g.dispersion)
        if O.is_empty():
            assert len(ball) > 0
    assert max(bands) > 2.0


# -- ball unions ------------------------------------------------------------------------


def test_ball_union_membership_matches_scan(rng):
    centers = random_points(S2, 30, rng)
    B = BallUnionSet(S2, centers, 0.2)
    probes = random_points(S2, 1000, rng)
    expected = np.array([min(S2.distance(p, c) for c in centers) <= 0.2 for p in probes])
    assert np.array_equal(B.contains(probes), expected)


def test_empty_ball_union():
    B = BallUnionSet(S2, np.empty((0, 3)), 0.1)
    assert B.is_empty()
    assert not B.contains(np.array([[0.0, 0.0, 1.0]])).any()


def test_ball_union_round_trip(rng):
    B = BallUnionSet(Manifold.torus(2), random_points(Manifold.torus(2), 5, rng), 0.3)
    back = BallUnionSet.from_dict(B.to_dict())
    assert np.array_equal(back.centers, B.centers) and back.radius == B.radius


def test_ball_radius_positive():
    with pytest.raises(DomainError):
        BallUnionSet(S2, np.array([[0.0, 0.0, 1.0]]), 0.0)


# -- set distances -----------------------------------------------------------------------


def test_hausdorff_identity(rng):
    a = random_points(S2, 50, rng)
    assert hausdorff_distance(a, a, S2) == 0.0


def test_hausdorff_poles():
    assert hausdorff_distance(np.array([[0, 0, 1.0]]), np.array([[0, 0, -1.0]]), S2) == pytest.approx(math.pi)


def double_loop_hausdorff(man, a, b):
    def directed(x, y):
        worst = 0.0
        for p in x:
            worst = max(worst, min(man.distance(p, q) for q in y))
        return worst

    return max(directed(a, b), directed(b, a))


@pytest.mark.parametrize("manifold", COMPACT + [Manifold.euclidean(2)], ids=lambda m: m.tag)
def test_hausdorff_equals_double_loop(manifold, rng):
    for _ in range(5):
        a, b = random_points(manifold, 100, rng), random_points(manifold, 100, rng)
        assert hausdorff_distance(a, b, manifold) == double_loop_hausdorff(manifold, a, b)


def test_hausdorff_symmetric_and_directed(rng):
    a, b = random_points(S2, 40, rng), random_points(S2, 70, rng)
    assert hausdorff_distance(a, b, S2) == hausdorff_distance(b, a, S2)
    assert hausdorff_distance(a, b, S2) == max(directed_hausdorff(a, b, S2), directed_hausdorff(b, a, S2))


def test_hausdorff_zero_means_equal_point_sets(rng):
    a = random_points(S2, 20, rng)
    assert hausdorff_distance(a, a[::-1], S2) == 0.0
    assert hausdorff_distance(a, a[:-1], S2) > 0.0


def test_hausdorff_on_grid_sets(grid, rng):
    A, B = random_mask_set(grid, rng), random_mask_set(grid, rng)
    assert hausdorff_distance(A, B) == hausdorff_distance(A.points, B.points, grid.manifold)


@pytest.mark.parametrize("fn", [hausdorff_distance, set_distance, directed_hausdorff])
def test_set_distances_reject_empty(fn):
    with pytest.raises(DomainError):
        fn(np.empty((0, 3)), np.array([[0.0, 0.0, 1.0]]), S2)


def test_set_distances_reject_mixed_manifolds(rng):
    with pytest.raises(DomainError):
        hausdorff_distance(GridSet.full(grid_for(S2, 16)), GridSet.full(grid_for(CIRCLE, 16)))


def test_set_distance_examples(rng):
    a = random_points(S2, 30, rng)
    assert set_distance(a, a[:5], S2) == 0.0
    x, y = np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]])
    assert set_distance(x, y, S2) == S2.distance(x[0], y[0])


@pytest.mark.parametrize("manifold", COMPACT, ids=lambda m: m.tag)
def test_set_distance_equals_pairwise_min(manifold, rng):
    a, b = random_points(manifold, 60, rng), random_points(manifold, 80, rng)
    assert set_distance(a, b, manifold) == manifold.pairwise_distances(a, b).min()


# -- packing and spacing -------------------------------------------------------------------


def max_separated_subset(man, pts, eps):
    n = len(pts)
    dm = man.pairwise_distances(pts, pts)
    for k in range(n, 0, -1):
        for sub in itertools.combinations(range(n), k):
            if all(dm[i, j] > eps for i, j in itertools.combinations(sub, 2)):
                return k
    return 0


def test_packing_examples():
    assert packing_number(S2, np.array([[0, 0, 1.0]]), 0.1) == 1
    two = np.array([[0, 0, 1.0], [0, np.sin(0.05), np.cos(0.05)]])
    assert packing_number(S2, two, 0.1) == 1
    circle8 = (2 * np.pi * np.arange(8) / 8)[:, None]
    assert packing_number(CIRCLE, circle8, np.pi / 8) == 8
    assert max_separated_subset(CIRCLE, circle8, np.pi / 8) == 8


@pytest.mark.parametrize("seed", range(10))
def test_greedy_packing_is_a_valid_lower_bound(seed):
    rng = np.random.default_rng(seed)
    pts = random_points(S2, int(rng.integers(2, 13)), rng)
    eps = float(rng.uniform(0.2, 1.5))
    greedy = packing_number(S2, pts, eps)
    assert 1 <= greedy <= max_separated_subset(S2, pts, eps)


def test_packing_eps_positive():
    with pytest.raises(DomainError):
        packing_number(S2, np.array([[0, 0, 1.0]]), 0.0)


def test_spacing_with_dense_sample(grid):
    region = GridSet.full(grid)
    assert maximal_spacing(region, grid.nodes) <= grid.dispersion


def test_spacing_empty_sample_is_inscribed_radius(grid, rng):
    _, _, region = random_ball_union(grid, rng, rho_range=(0.5, 0.9))
    outside = grid.nodes[~region.mask]
    expected = max(min(grid.manifold.distance(p, q) for q in outside) for p in region.points)
    assert maximal_spacing(region, np.empty((0, grid.manifold.ambient_dim))) == pytest.approx(expected)


def test_spacing_single_point_on_sphere():
    g = grid_for(S2, 4000)
    assert maximal_spacing(GridSet.full(g), np.array([[0.0, 0.0, 1.0]])) == pytest.approx(math.pi, abs=0.05)


def test_spacing_needs_region(grid):
    with pytest.raises(DomainError):
        maximal_spacing(GridSet.empty(grid), grid.nodes[:3])


# -- components ---------------------------------------------------------------------------


def test_grid_components_of_two_caps():
    g = grid_for(S2, 4000)
    caps = BallUnionSet(S2, np.array([[0, 0, 1.0], [0, 0, -1.0]]), 0.5).discretize(g)
    count, labels = grid_components(caps, g.link_radius)
    assert count == 2
    assert set(labels[caps.mask]) == {0, 1}
    assert np.all(labels[~caps.mask] == -1)


def test_boundary_mask_lies_on_the_rim():
    g = grid_for(S2, 4000)
    cap = BallUnionSet(S2, np.array([[0, 0, 1.0]]), 0.6).discretize(g)
    rim = g.nodes[boundary_mask(cap, g.link_radius)]
    d = S2.pairwise_distances(rim, np.array([[0, 0, 1.0]]))[:, 0]
    assert len(rim) > 0 and np.all(d > 0.6 - g.link_radius)


_GRIDS = {}


def _small_grids():
    if not _GRIDS:
        _GRIDS["all"] = [grid_for(m, 256) for m in GRID_MANIFOLDS]
    return _GRIDS["all"]
