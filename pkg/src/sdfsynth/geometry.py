"""Signed distance primitives and 3D construction operators.

Conventions used throughout:

* 3D points are arrays of shape ``(..., 3)``, 2D points ``(..., 2)``;
  distance results have shape ``(...,)``.
* Negative inside, zero on the boundary, positive outside.
* The voxel domain maps to the normalized cube ``[-1, 1]^3``; all shapes
  here live in those units.
* Scalar fields are plain callables ``f(points) -> distances`` closed over
  their construction parameters; once built they are immutable and safe to
  evaluate concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SQRT3 = np.sqrt(3.0)

# Linear profiles are clamped away from zero so the cross-section rescale
# x/s(z) stays well defined outside the slab.
MIN_PROFILE_SCALE = 0.05


# ---------------------------------------------------------------------------
# Native 3D primitives
# ---------------------------------------------------------------------------

def sdf_sphere(p: np.ndarray, r: float) -> np.ndarray:
    """Sphere of radius ``r`` centered at the origin."""
    return np.linalg.norm(p, axis=-1) - r


def sdf_octahedron(p: np.ndarray, s: float) -> np.ndarray:
    """Regular octahedron with half-diagonal ``s``.

    The ``1/sqrt(3)`` factor makes the gradient unit length along the face
    normals, so the field is an exact distance almost everywhere.
    """
    q = np.abs(p)
    return (q[..., 0] + q[..., 1] + q[..., 2] - s) / _SQRT3


def sdf_cone(p: np.ndarray, theta: float, h: float) -> np.ndarray:
    """Capped cone with half-angle ``theta``, apex at ``(0, h, 0)`` and base
    disk of radius ``h*tan(theta)`` at ``y = 0``.

    Works on the 2D representative point ``w = (rho, y - h)`` so the apex
    sits on the zero level set, then takes clamped projections onto the
    slant edge and the base cap.
    """
    rho = np.hypot(p[..., 0], p[..., 2])
    w0 = rho
    w1 = p[..., 1] - h

    q0 = h * np.tan(theta)
    q1 = -h
    qq = q0 * q0 + q1 * q1

    t = np.clip((w0 * q0 + w1 * q1) / qq, 0.0, 1.0)
    a0 = w0 - q0 * t
    a1 = w1 - q1 * t
    b0 = w0 - q0 * np.clip(w0 / q0, 0.0, 1.0)
    b1 = w1 - q1

    d2 = np.minimum(a0 * a0 + a1 * a1, b0 * b0 + b1 * b1)
    # k = sign(q1) = -1
    s = np.maximum(-(w0 * q1 - w1 * q0), -(w1 - q1))
    return np.sqrt(d2) * np.sign(s)


# ---------------------------------------------------------------------------
# 2D base shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polygon2D:
    """Simple polygon with counter-clockwise vertices, one per angular sector."""

    vertices: np.ndarray  # (n, 2)
    r_min: float
    r_max: float

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError(f"need at least 3 2D vertices, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        object.__setattr__(self, "vertices", v)


def gen_polygon(n: int, r_min: float, r_max: float, rng: np.random.Generator) -> Polygon2D:
    """Sample an ``n``-vertex simple polygon, one vertex per angular sector.

    Vertex ``i`` gets an angle uniform in ``[2*pi*i/n, 2*pi*(i+1)/n)`` and a
    radius uniform in ``[r_min, r_max]``; per-vertex the angle is drawn
    before the radius.  The sector construction guarantees a
    non-self-intersecting, counter-clockwise contour.
    """
    if not 3 <= n <= 9:
        raise ValueError(f"vertex count must be in 3..9, got {n}")
    if not 0.0 < r_min < r_max:
        raise ValueError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    sector = 2.0 * np.pi / n
    verts = np.empty((n, 2))
    for i in range(n):
        ang = sector * (i + rng.uniform(0.0, 1.0))
        rad = rng.uniform(r_min, r_max)
        verts[i] = (rad * np.cos(ang), rad * np.sin(ang))
    return Polygon2D(verts, r_min, r_max)


def sdf_polygon(u: np.ndarray, poly: Polygon2D) -> np.ndarray:
    """Exact polygon distance: min edge distance, sign from the winding number."""
    v = poly.vertices
    px = u[..., 0][..., None]  # (..., 1) against edges (n,)
    py = u[..., 1][..., None]
    ax, ay = v[:, 0], v[:, 1]
    bx, by = np.roll(v[:, 0], -1), np.roll(v[:, 1], -1)

    ex, ey = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    t = np.clip((wx * ex + wy * ey) / (ex * ex + ey * ey), 0.0, 1.0)
    dx = wx - ex * t
    dy = wy - ey * t
    dist = np.sqrt(np.min(dx * dx + dy * dy, axis=-1))

    # nonzero-winding inside test
    cross = ex * wy - ey * wx
    up = (ay <= py) & (by > py) & (cross > 0)
    down = (ay > py) & (by <= py) & (cross < 0)
    wn = up.sum(axis=-1).astype(int) - down.sum(axis=-1).astype(int)
    sign = np.where(wn != 0, -1.0, 1.0)
    return sign * dist


@dataclass(frozen=True)
class StarSpec:
    """N-armed star: ``concavity`` in [0, 1] deepens the inward cusps
    (0 degenerates to the regular n-gon), ``radius`` is the arm-tip radius."""

    arms: int
    concavity: float
    radius: float

    def __post_init__(self):
        if self.arms not in (5, 6, 7, 8):
            raise ValueError(f"arm count must be in 5..8, got {self.arms}")
        if not 0.0 <= self.concavity <= 1.0:
            raise ValueError(f"concavity must be in [0, 1], got {self.concavity}")
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")


def sdf_star(u: np.ndarray, spec: StarSpec) -> np.ndarray:
    """Star distance via angular folding into the 2*pi/n sector.

    The input is folded by the star's rotational and mirror symmetry, the
    folded point is projected onto the single representative edge segment
    (clamped to its endpoints), and the sign comes from which side of that
    edge the folded point lies on.
    """
    n = spec.arms
    an = np.pi / n
    # edge inclination: concavity 0 -> pi/2 (regular polygon edge),
    # concavity 1 -> pi/n (cusps collapse to the center)
    en = np.pi / (2.0 + spec.concavity * (n - 2.0))
    acs = (np.cos(an), np.sin(an))
    ecs = (np.cos(en), np.sin(en))

    x, y = u[..., 0], u[..., 1]
    bn = np.mod(np.arctan2(x, y), 2.0 * an) - an
    rho = np.hypot(x, y)
    qx = rho * np.cos(bn) - spec.radius * acs[0]
    qy = rho * np.abs(np.sin(bn)) - spec.radius * acs[1]

    t = np.clip(-(qx * ecs[0] + qy * ecs[1]), 0.0, spec.radius * acs[1] / ecs[1])
    qx = qx + ecs[0] * t
    qy = qy + ecs[1] * t
    return np.hypot(qx, qy) * np.sign(qx)


# ---------------------------------------------------------------------------
# 3D construction operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleProfile:
    """Height-dependent cross-section scale s(z) for extrusions.

    kinds: ``constant`` s(z)=c, ``linear`` s(z)=c*(1+a*z/h) clamped at
    ``MIN_PROFILE_SCALE``, ``smooth`` s(z)=c*(1+a*cos(pi*z/(2h))).
    """

    kind: str = "constant"
    c: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "smooth"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.c <= 0.0:
            raise ValueError(f"base scale must be positive, got {self.c}")

    def scale_at(self, z: np.ndarray, h: float) -> np.ndarray:
        if self.kind == "constant":
            return np.full_like(np.asarray(z, dtype=float), self.c)
        if self.kind == "linear":
            return np.maximum(self.c * (1.0 + self.a * z / h), MIN_PROFILE_SCALE)
        return self.c * (1.0 + self.a * np.cos(np.pi * z / (2.0 * h)))


def extrude(f2d, h: float, profile: ScaleProfile = ScaleProfile()):
    """Extrude a 2D field along z over ``[-h, h]`` with scale profile ``s(z)``.

    Combines the scaled in-plane distance with the slab distance through the
    standard exterior-corner / interior overlap, which is an exact distance
    for constant profiles of exact 2D fields.
    """
    if h <= 0.0:
        raise ValueError(f"half-height must be positive, got {h}")

    def field(p: np.ndarray) -> np.ndarray:
        z = p[..., 2]
        s = profile.scale_at(z, h)
        uv = np.stack((p[..., 0] / s, p[..., 1] / s), axis=-1)
        d_cross = s * f2d(uv)
        d_axial = np.abs(z) - h
        outside = np.hypot(np.maximum(d_cross, 0.0), np.maximum(d_axial, 0.0))
        inside = np.minimum(np.maximum(d_cross, d_axial), 0.0)
        return outside + inside

    return field


def revolve(f2d, r_major: float):
    """Sweep a 2D field around the y-axis at major radius ``r_major``.

    ``r_major > 0`` gives a torus-like solid, ``0`` a solid of revolution.
    """
    if r_major < 0.0:
        raise ValueError(f"major radius must be >= 0, got {r_major}")

    def field(p: np.ndarray) -> np.ndarray:
        rho = np.hypot(p[..., 0], p[..., 2])
        uv = np.stack((rho - r_major, p[..., 1]), axis=-1)
        return f2d(uv)

    return field


def hollow(phi, thicknesses):
    """Fold a field into concentric shells: |phi|, then |.| - t for each t."""
    ts = [float(t) for t in thicknesses]
    if not ts or any(t <= 0.0 for t in ts):
        raise ValueError(f"need a non-empty list of positive thicknesses, got {thicknesses}")

    def field(p: np.ndarray) -> np.ndarray:
        d = np.abs(phi(p))
        for t in ts:
            d = np.abs(d) - t
        return d

    return field


# ---------------------------------------------------------------------------
# Affine placement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineTransform:
    """Placement ``x = R @ S @ x' + t`` with the inverse cached at construction."""

    rotation: np.ndarray  # (3, 3), orthonormal, det +1
    shear_scale: np.ndarray  # (3, 3), upper-triangular shear times positive diagonal scale
    translation: np.ndarray  # (3,)
    inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        s = np.asarray(self.shear_scale, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if r.shape != (3, 3) or s.shape != (3, 3) or t.shape != (3,):
            raise ValueError("transform parts must be (3,3), (3,3) and (3,)")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
            raise ValueError("transform entries must be finite")
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9) or not np.isclose(np.linalg.det(r), 1.0, atol=1e-9):
            raise ValueError("rotation must be orthonormal with det +1")
        if abs(np.linalg.det(s)) < 1e-12:
            raise ValueError("shear/scale matrix is singular")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "shear_scale", s)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "inv", np.linalg.inv(r @ s))

    @staticmethod
    def identity() -> "AffineTransform":
        return AffineTransform(np.eye(3), np.eye(3), np.zeros(3))


def to_canonical(x: np.ndarray, transform: AffineTransform) -> np.ndarray:
    """Map world points into the primitive's own frame: (R S)^-1 (x - t)."""
    return (x - transform.translation) @ transform.inv.T
