"""Primitive SDFs, 2D base shapes, 3D construction operators, transforms."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdfsynth.geometry import (
    MIN_PROFILE_SCALE,
    AffineTransform,
    Polygon2D,
    ScaleProfile,
    StarSpec,
    extrude,
    gen_polygon,
    hollow,
    revolve,
    sdf_cone,
    sdf_octahedron,
    sdf_polygon,
    sdf_sphere,
    sdf_star,
    to_canonical,
)
from sdfsynth.oracle import count_sign_changes, winding_inside

SQRT3 = np.sqrt(3.0)

coords = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


def circle(radius):
    return lambda u: np.hypot(u[..., 0], u[..., 1]) - radius


def unit_triangle():
    angles = np.deg2rad([90.0, 210.0, 330.0])
    return Polygon2D(np.column_stack([np.cos(angles), np.sin(angles)]), 0.9, 1.1)


# ---------------------------------------------------------------------------
# native primitives
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("p, r, expected", [
    ((0, 0, 0), 1.0, -1.0),
    ((1, 0, 0), 1.0, 0.0),
    ((3, 4, 0), 1.0, 4.0),
])
def test_sphere_examples(p, r, expected):
    npt.assert_allclose(sdf_sphere(np.array(p, dtype=float), r), expected, atol=1e-15)


def test_sphere_vectorized_matches_scalar(rng):
    pts = rng.uniform(-2, 2, size=(50, 3))
    batch = sdf_sphere(pts, 0.7)
    for p, d in zip(pts, batch):
        npt.assert_allclose(sdf_sphere(p, 0.7), d)


@settings(max_examples=50, deadline=None)
@given(coords, coords, coords, coords, coords, coords)
def test_sphere_is_lipschitz_1(x1, y1, z1, x2, y2, z2):
    p = np.array([x1, y1, z1])
    q = np.array([x2, y2, z2])
    gap = abs(float(sdf_sphere(p, 0.8)) - float(sdf_sphere(q, 0.8)))
    assert gap <= np.linalg.norm(p - q) + 1e-12


@pytest.mark.parametrize("p, s, expected", [
    ((0, 0, 0), 1.0, -1.0 / SQRT3),
    ((1, 0, 0), 1.0, 0.0),
    ((1, 1, 1), 1.0, 2.0 / SQRT3),
])
def test_octahedron_examples(p, s, expected):
    npt.assert_allclose(sdf_octahedron(np.array(p, dtype=float), s), expected, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(coords, coords, coords, st.permutations([0, 1, 2]),
       st.tuples(st.sampled_from([-1, 1]), st.sampled_from([-1, 1]), st.sampled_from([-1, 1])))
def test_octahedron_symmetric_under_permutations_and_sign_flips(x, y, z, perm, signs):
    p = np.array([x, y, z])
    q = np.array(signs, dtype=float) * p[perm]
    npt.assert_allclose(sdf_octahedron(q, 0.9), sdf_octahedron(p, 0.9), atol=1e-12)


@pytest.mark.parametrize("p, expected", [
    ((0, 1, 0), 0.0),        # apex on the zero set
    ((0, 0, 0), 0.0),        # base disk center
    ((0, 0.5, 0), -0.25),    # half-way up the axis: -(h/2)*sin(theta)
])
def test_cone_examples(p, expected):
    npt.assert_allclose(sdf_cone(np.array(p, dtype=float), np.pi / 6, 1.0), expected, atol=1e-12)


def test_cone_sign_split_along_axis():
    theta, h = np.pi / 6, 1.0
    axis = np.array([[0.0, t, 0.0] for t in (-0.2, 0.5, 1.2)])
    d = sdf_cone(axis, theta, h)
    assert d[0] > 0 and d[1] < 0 and d[2] > 0


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------

def test_polygon_centroid_of_equilateral_triangle_is_minus_inradius():
    # circumradius 1 -> inradius cos(pi/3) = 0.5
    npt.assert_allclose(sdf_polygon(np.zeros(2), unit_triangle()), -0.5, atol=1e-12)


def test_polygon_vertices_are_on_the_boundary():
    poly = unit_triangle()
    for v in poly.vertices:
        npt.assert_allclose(sdf_polygon(v, poly), 0.0, atol=1e-12)


def test_polygon_far_point_within_triangle_inequality_band():
    d = float(sdf_polygon(np.array([10.0, 0.0]), unit_triangle()))
    assert 9.0 <= d <= 11.0


def test_polygon_sign_matches_winding_oracle(rng):
    for n in range(3, 10):
        poly = gen_polygon(n, 0.4, 1.0, rng)
        pts = rng.uniform(-1.5, 1.5, size=(500, 2))
        d = sdf_polygon(pts, poly)
        keep = np.abs(d) > 1e-6
        inside = np.array([winding_inside(p, poly) for p in pts])
        assert np.array_equal(d[keep] < 0, inside[keep])


def test_polygon_rejects_degenerate_vertex_lists():
    with pytest.raises(ValueError):
        Polygon2D(np.zeros((2, 2)), 0.4, 1.0)
    with pytest.raises(ValueError):
        Polygon2D(np.array([[0.0, 0.0], [1.0, 0.0], [np.nan, 1.0]]), 0.4, 1.0)


def test_gen_polygon_one_vertex_per_sector(rng):
    for n in (3, 6, 9):
        poly = gen_polygon(n, 0.4, 1.0, rng)
        assert len(poly.vertices) == n
        ang = np.mod(np.arctan2(poly.vertices[:, 1], poly.vertices[:, 0]), 2 * np.pi)
        sector = 2 * np.pi / n
        for i, a in enumerate(ang):
            assert sector * i <= a < sector * (i + 1)


def test_gen_polygon_radii_within_bounds(rng):
    poly = gen_polygon(7, 0.4, 1.0, rng)
    radii = np.linalg.norm(poly.vertices, axis=1)
    assert np.all((0.4 <= radii) & (radii <= 1.0))


def test_gen_polygon_deterministic_for_equal_rng_state():
    a = gen_polygon(5, 0.4, 1.0, np.random.default_rng(11))
    b = gen_polygon(5, 0.4, 1.0, np.random.default_rng(11))
    npt.assert_array_equal(a.vertices, b.vertices)


@pytest.mark.parametrize("n, lo, hi", [(2, 0.4, 1.0), (10, 0.4, 1.0), (5, 1.0, 0.4), (5, 0.0, 1.0)])
def test_gen_polygon_rejects_bad_arguments(n, lo, hi, rng):
    with pytest.raises(ValueError):
        gen_polygon(n, lo, hi, rng)


# ---------------------------------------------------------------------------
# stars
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("arms", [5, 6, 7, 8])
def test_star_contains_origin(arms):
    spec = StarSpec(arms=arms, concavity=0.6, radius=1.0)
    assert float(sdf_star(np.zeros(2), spec)) < 0


@pytest.mark.parametrize("arms", [5, 6, 7, 8])
def test_star_arm_tip_on_zero_set(arms):
    spec = StarSpec(arms=arms, concavity=0.5, radius=0.8)
    # arms point along +y and its 2*pi/n rotations
    npt.assert_allclose(sdf_star(np.array([0.0, 0.8]), spec), 0.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([5, 6, 7, 8]), st.integers(1, 7), coords, coords)
def test_star_invariant_under_sector_rotation(arms, k, x, y):
    spec = StarSpec(arms=arms, concavity=0.4, radius=1.0)
    ang = 2.0 * np.pi * k / arms
    c, s = np.cos(ang), np.sin(ang)
    u = np.array([x, y])
    ru = np.array([c * x - s * y, s * x + c * y])
    npt.assert_allclose(sdf_star(ru, spec), sdf_star(u, spec), atol=1e-9)


def test_star_spec_validation():
    with pytest.raises(ValueError):
        StarSpec(arms=4, concavity=0.5, radius=1.0)
    with pytest.raises(ValueError):
        StarSpec(arms=5, concavity=1.5, radius=1.0)
    with pytest.raises(ValueError):
        StarSpec(arms=5, concavity=0.5, radius=0.0)


# ---------------------------------------------------------------------------
# extrusion
# ---------------------------------------------------------------------------

def test_extrude_interior_reduces_to_cross_section_distance():
    f = extrude(circle(1.0), 1.0, ScaleProfile())
    npt.assert_allclose(f(np.array([0.8, 0.0, 0.0])), -0.2, atol=1e-12)


def test_extrude_pure_axial_distance_above_interior():
    f = extrude(circle(1.0), 1.0, ScaleProfile())
    npt.assert_allclose(f(np.array([0.0, 0.0, 2.0])), 1.0, atol=1e-12)


def test_extrude_exterior_corner_is_hypotenuse():
    # cross-section distance 3, axial distance 4 -> 5
    f = extrude(circle(1.0), 1.0, ScaleProfile())
    npt.assert_allclose(f(np.array([4.0, 0.0, 5.0])), 5.0, atol=1e-12)


def test_extrude_constant_profile_scales_cross_section():
    prof = ScaleProfile(kind="constant", c=0.5)
    f = extrude(circle(1.0), 1.0, prof)
    # circle radius 1 at scale 0.5 -> radius 0.5 cylinder
    npt.assert_allclose(f(np.array([0.5, 0.0, 0.0])), 0.0, atol=1e-12)
    npt.assert_allclose(f(np.array([0.25, 0.0, 0.0])), -0.25, atol=1e-12)


def test_scale_profile_formulas():
    z = np.array([-1.0, 0.0, 1.0])
    npt.assert_allclose(ScaleProfile("constant", c=0.7).scale_at(z, 1.0), [0.7, 0.7, 0.7])
    npt.assert_allclose(ScaleProfile("linear", c=0.5, a=0.4).scale_at(z, 1.0), [0.3, 0.5, 0.7])
    npt.assert_allclose(
        ScaleProfile("smooth", c=0.5, a=0.4).scale_at(z, 1.0),
        0.5 * (1.0 + 0.4 * np.cos(np.pi * z / 2.0)))


def test_linear_profile_clamps_at_minimum_scale():
    prof = ScaleProfile("linear", c=0.1, a=-0.99)
    assert prof.scale_at(np.array(1.0), 1.0) == MIN_PROFILE_SCALE


def test_scale_profile_validation():
    with pytest.raises(ValueError):
        ScaleProfile("cubic")
    with pytest.raises(ValueError):
        ScaleProfile("constant", c=0.0)


# ---------------------------------------------------------------------------
# revolution
# ---------------------------------------------------------------------------

def test_revolve_circle_gives_torus_surface_and_tube_center():
    f = revolve(circle(0.25), 0.7)
    npt.assert_allclose(f(np.array([0.95, 0.0, 0.0])), 0.0, atol=1e-12)
    npt.assert_allclose(f(np.array([0.7, 0.0, 0.0])), -0.25, atol=1e-12)


def test_revolve_at_zero_major_radius_matches_sphere(rng):
    f = revolve(circle(0.6), 0.0)
    pts = rng.uniform(-1.5, 1.5, size=(1000, 3))
    npt.assert_allclose(f(pts), sdf_sphere(pts, 0.6), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(coords, coords, coords, st.floats(0, 2 * np.pi, allow_nan=False))
def test_revolve_invariant_under_y_rotation(x, y, z, ang):
    f = revolve(circle(0.25), 0.7)
    c, s = np.cos(ang), np.sin(ang)
    p = np.array([x, y, z])
    q = np.array([c * x + s * z, y, -s * x + c * z])
    npt.assert_allclose(f(q), f(p), atol=1e-9)


# ---------------------------------------------------------------------------
# hollowing
# ---------------------------------------------------------------------------

def test_hollow_fold_arithmetic_on_unit_sphere():
    f = hollow(lambda p: sdf_sphere(p, 1.0), [0.1])
    npt.assert_allclose(f(np.array([1.0, 0.0, 0.0])), -0.1, atol=1e-12)
    npt.assert_allclose(f(np.array([1.1, 0.0, 0.0])), 0.0, atol=1e-12)
    npt.assert_allclose(f(np.array([0.9, 0.0, 0.0])), 0.0, atol=1e-12)


@pytest.mark.parametrize("thicknesses, expected_roots", [
    ([0.1], 2),          # shell radii 0.9, 1.1
    ([0.1, 0.05], 4),    # radii 0.85, 0.95, 1.05, 1.15
])
def test_hollow_root_counts_along_center_ray(thicknesses, expected_roots):
    f = hollow(lambda p: sdf_sphere(p, 1.0), thicknesses)
    roots = count_sign_changes(f, np.zeros(3), np.array([1.0, 0.0, 0.0]), t_max=2.0)
    assert roots == expected_roots
    assert roots <= 2 ** len(thicknesses) * 2


def test_hollow_rejects_empty_or_nonpositive_thickness():
    with pytest.raises(ValueError):
        hollow(lambda p: sdf_sphere(p, 1.0), [])
    with pytest.raises(ValueError):
        hollow(lambda p: sdf_sphere(p, 1.0), [0.1, 0.0])


# ---------------------------------------------------------------------------
# affine transforms
# ---------------------------------------------------------------------------

def _rot_z(ang):
    c, s = np.cos(ang), np.sin(ang)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_to_canonical_identity_is_identity(rng):
    t = AffineTransform.identity()
    pts = rng.uniform(-1, 1, size=(20, 3))
    npt.assert_array_equal(to_canonical(pts, t), pts)


def test_to_canonical_maps_translation_to_origin():
    shift = np.array([0.3, -0.2, 0.5])
    t = AffineTransform(np.eye(3), np.eye(3), shift)
    npt.assert_allclose(to_canonical(shift, t), np.zeros(3), atol=1e-15)


def test_to_canonical_round_trip(rng):
    rot = _rot_z(0.7) @ np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
    shear = np.array([[1.0, 0.2, -0.1], [0, 1.0, 0.15], [0, 0, 1.0]])
    scale = np.diag([0.3, 0.2, 0.4])
    t = AffineTransform(rot, shear @ scale, np.array([0.1, 0.2, -0.3]))
    x_canon = rng.uniform(-1, 1, size=(50, 3))
    world = x_canon @ (rot @ shear @ scale).T + t.translation
    npt.assert_allclose(to_canonical(world, t), x_canon, atol=1e-12)


def test_pure_rotation_preserves_exact_distances(rng):
    t = AffineTransform(_rot_z(1.1), np.eye(3), np.zeros(3))
    pts = rng.uniform(-1.5, 1.5, size=(200, 3))
    moved = sdf_octahedron(to_canonical(pts, t), 0.8)
    npt.assert_allclose(moved, sdf_octahedron(pts @ t.rotation, 0.8), atol=1e-12)
    # an isometry keeps the field an exact SDF: spot-check against the sphere
    npt.assert_allclose(sdf_sphere(to_canonical(pts, t), 0.8), sdf_sphere(pts, 0.8), atol=1e-12)


def test_sheared_field_keeps_sign_and_zero_set(rng):
    rot = _rot_z(0.4)
    shear = np.array([[1.0, 0.25, 0.0], [0, 1.0, -0.2], [0, 0, 1.0]])
    scale = np.diag([0.4, 0.3, 0.35])
    t = AffineTransform(rot, shear @ scale, np.array([0.2, -0.1, 0.05]))
    linear = rot @ shear @ scale

    on_sphere = rng.normal(size=(100, 3))
    on_sphere *= 0.8 / np.linalg.norm(on_sphere, axis=1, keepdims=True)
    surface = on_sphere @ linear.T + t.translation
    npt.assert_allclose(sdf_sphere(to_canonical(surface, t), 0.8), 0.0, atol=1e-9)

    interior = (0.5 * on_sphere) @ linear.T + t.translation
    assert np.all(sdf_sphere(to_canonical(interior, t), 0.8) < 0)


def test_transform_validation():
    with pytest.raises(ValueError):
        AffineTransform(np.eye(3) * 2.0, np.eye(3), np.zeros(3))  # not orthonormal
    reflection = np.diag([-1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        AffineTransform(reflection, np.eye(3), np.zeros(3))  # det -1
    with pytest.raises(ValueError):
        AffineTransform(np.eye(3), np.zeros((3, 3)), np.zeros(3))  # singular S
    with pytest.raises(ValueError):
        AffineTransform(np.eye(3), np.eye(3), np.array([np.nan, 0.0, 0.0]))
