"""Brute-force verification machinery for the generator's fast paths.

Everything here trades speed for independence: gradients by central
differences, boundary distances by ray casting plus bisection, labels by a
per-voxel direct rule, point-in-polygon by even-odd crossing counting.  None
of it shares logic with the code it checks; the test suite and the
``validate`` command are the only consumers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Central-difference step in normalized units.
DEFAULT_FD_STEP = 1e-4

#: Bisection tolerance for boundary localization, two orders below the
#: 1e-2 distance tolerance the tests assert.
BISECTION_TOL = 1e-6


@dataclass(frozen=True)
class GradientReport:
    """Summary of an eikonal check over a batch of sample points."""

    sample_count: int
    fraction_within: float
    worst_deviation: float
    worst_point: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.fraction_within <= 1.0:
            raise ValueError(f"fraction must be in [0, 1], got {self.fraction_within}")


def fd_gradient(phi, x: np.ndarray, step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient of ``phi`` at points ``x`` of shape (..., 3)."""
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    x = np.asarray(x, dtype=float)
    grad = np.empty(x.shape)
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        grad[..., axis] = (phi(x + offset) - phi(x - offset)) / (2.0 * step)
    return grad


def gradient_report(phi, points: np.ndarray, tol: float = 1e-2,
                    step: float = DEFAULT_FD_STEP) -> GradientReport:
    """Check |grad phi| = 1 at each point; report the fraction within ``tol``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mag = np.linalg.norm(fd_gradient(phi, points, step), axis=-1)
    dev = np.abs(mag - 1.0)
    worst = int(np.argmax(dev))
    return GradientReport(
        sample_count=len(points),
        fraction_within=float(np.mean(dev <= tol)),
        worst_deviation=float(dev[worst]),
        worst_point=points[worst].copy(),
    )


def dense_surface_distance(phi, x, boundary_samples: int = 10_000,
                           t_max: float = 4.0, tol: float = BISECTION_TOL,
                           rng: np.random.Generator | None = None) -> float:
    """Ground-truth distance from ``x`` to the zero level set of ``phi``.

    Casts ``boundary_samples`` rays from ``x`` in random directions, locates
    every sign change along each by coarse sampling plus bisection to ``tol``,
    and returns the distance to the nearest boundary point found.  The result
    converges to the true unsigned distance from above as the ray count grows.
    """
    if boundary_samples < 10_000:
        raise ValueError(f"need at least 10^4 boundary samples, got {boundary_samples}")
    if rng is None:
        rng = np.random.default_rng(0xB15EC7)
    x = np.asarray(x, dtype=float)

    coarse = 1024
    ts = np.linspace(0.0, t_max, coarse + 1)
    # enough halvings to bring the coarse step below tol
    iters = int(np.ceil(np.log2((t_max / coarse) / tol))) + 1

    best = np.inf
    remaining = boundary_samples
    while remaining > 0:
        n = min(500, remaining)
        remaining -= n
        dirs = rng.normal(size=(n, 3))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)

        vals = phi(x + ts[:, None, None] * dirs[None, :, :])  # (coarse+1, n)
        seg, ray = np.nonzero(vals[:-1] * vals[1:] <= 0.0)
        if seg.size == 0:
            continue

        lo = ts[seg]
        hi = ts[seg + 1]
        flo = vals[seg, ray]
        d_sel = dirs[ray]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            fmid = phi(x + mid[:, None] * d_sel)
            left = (flo <= 0.0) != (fmid <= 0.0)
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            flo = np.where(left, flo, fmid)
        best = min(best, float(np.min(0.5 * (lo + hi))))

    if not np.isfinite(best):
        raise ValueError("no boundary found: the field has no zero crossing "
                         f"within distance {t_max} of the probe point")
    return best


def sample_boundary_points(phi, count: int, extent: float = 1.6,
                           tol: float = BISECTION_TOL, coarse: int = 768,
                           rng: np.random.Generator | None = None) -> np.ndarray:
    """Collect ``count`` points on the zero level set of ``phi``.

    Chords are cast between random points on the sphere of radius ``extent``
    (which must enclose the shape); every sign change along a chord is
    located by bisection to ``tol``.  The coarse chord step 2*extent/coarse
    must stay below the thinnest feature or crossings are missed in pairs.
    Returns an array of shape (count, 3).  Minimum distance to this cloud
    upper-bounds the true boundary distance, so |phi| at a query point can
    be checked against it from one side.
    """
    if count < 1:
        raise ValueError(f"need a positive point count, got {count}")
    if rng is None:
        rng = np.random.default_rng(0xB0D5)

    frac = np.linspace(0.0, 1.0, coarse + 1)
    iters = int(np.ceil(np.log2((2.0 * extent / coarse) / tol))) + 1

    chunks: list[np.ndarray] = []
    got = 0
    while got < count:
        a = rng.normal(size=(2048, 3))
        a *= extent / np.linalg.norm(a, axis=-1, keepdims=True)
        b = rng.normal(size=(2048, 3))
        b *= extent / np.linalg.norm(b, axis=-1, keepdims=True)
        ab = b - a

        vals = phi(a[None, :, :] + frac[:, None, None] * ab[None, :, :])
        seg, ray = np.nonzero(vals[:-1] * vals[1:] <= 0.0)
        if seg.size == 0:
            continue

        lo = frac[seg]
        hi = frac[seg + 1]
        flo = vals[seg, ray]
        base = a[ray]
        step = ab[ray]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            fmid = phi(base + mid[:, None] * step)
            left = (flo <= 0.0) != (fmid <= 0.0)
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            flo = np.where(left, flo, fmid)
        chunks.append(base + (0.5 * (lo + hi))[:, None] * step)
        got += len(chunks[-1])
    return np.concatenate(chunks)[:count]


def count_sign_changes(phi, origin, direction, t_max: float = 2.0,
                       samples: int = 8_192) -> int:
    """Number of zero crossings of ``phi`` along a ray, by dense 1D sampling."""
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    ts = np.linspace(0.0, t_max, samples)
    vals = phi(origin + ts[:, None] * direction)
    return int(np.count_nonzero(vals[:-1] * vals[1:] < 0.0))


def winding_inside(u, poly) -> bool:
    """Even-odd crossing test for simple polygons.

    Deliberately a scalar loop with the classic horizontal-ray crossing
    count; the polygon SDF derives its sign by nonzero-winding accumulation,
    so the two agree on simple polygons without sharing a code path.
    """
    px, py = float(u[0]), float(u[1])
    verts = poly.vertices
    inside = False
    j = len(verts) - 1
    for i in range(len(verts)):
        xi, yi = verts[i]
        xj, yj = verts[j]
        if (yi > py) != (yj > py):
            x_cross = xi + (py - yi) * (xj - xi) / (yj - yi)
            if px < x_cross:
                inside = not inside
        j = i
    return inside


def brute_force_labels(prims, grid) -> np.ndarray:
    """Per-voxel direct label rule, no sorting or painting.

    For each voxel: among the primitives whose rendered mask covers it, pick
    the one with minimal mask volume; on equal volumes the larger original
    index wins.  Plain Python loops on purpose — intended for grids up to
    32^3 with at most 8 primitives.
    """
    if grid.W > 32 or grid.H > 32 or grid.D > 32:
        raise ValueError(f"oracle labeler is limited to 32^3 grids, got {grid.W}x{grid.H}x{grid.D}")
    if len(prims) > 8:
        raise ValueError(f"oracle labeler is limited to 8 primitives, got {len(prims)}")

    masks = [np.asarray(p.mask, dtype=bool) for p in prims]
    volumes = [int(p.v) for p in prims]
    classes = [int(p.class_id) for p in prims]

    labels = np.zeros((grid.D, grid.H, grid.W), dtype=np.uint16)
    for z in range(grid.D):
        for y in range(grid.H):
            for x in range(grid.W):
                best = -1
                for k in range(len(prims)):
                    if not masks[k][z, y, x]:
                        continue
                    if best < 0 or volumes[k] < volumes[best] or (
                            volumes[k] == volumes[best] and k > best):
                        best = k
                if best >= 0:
                    labels[z, y, x] = classes[best]
    return labels
