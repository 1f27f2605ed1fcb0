"""Landmark registration: find red control points, fit an affine map, resample."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._kernels import warp_nn
from .barcode import BLACK, RED, BarcodeSpec, as_labels, control_points
from .errors import CardinalityError, DegenerateError, TooFewPointsError

MIN_DET = 1e-6


@dataclass(frozen=True)
class AffineTransform:
    """p' = A p + t on (row, col) points."""

    a11: float = 1.0
    a12: float = 0.0
    a21: float = 0.0
    a22: float = 1.0
    t_row: float = 0.0
    t_col: float = 0.0

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls()

    @classmethod
    def from_matrix(cls, m) -> "AffineTransform":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], m[0, 2], m[1, 2])

    @classmethod
    def similarity(cls, rot_deg: float = 0.0, scale: float = 1.0, t_row: float = 0.0,
                   t_col: float = 0.0, center: tuple[float, float] = (0.0, 0.0)) -> "AffineTransform":
        """Rotation and isotropic scale about `center`, then translation."""
        th = np.deg2rad(rot_deg)
        a = scale * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        c = np.asarray(center, dtype=float)
        t = c - a @ c + (t_row, t_col)
        return cls.from_matrix(np.column_stack([a, t]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12, self.t_row], [self.a21, self.a22, self.t_col]])

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def is_valid(self) -> bool:
        return abs(self.det) > MIN_DET

    def apply(self, points) -> np.ndarray:
        p = as_points(points)
        m = self.matrix
        return p @ m[:, :2].T + m[:, 2]

    def inverse(self) -> "AffineTransform":
        if not self.is_valid():
            raise DegenerateError("transform is singular")
        m = self.matrix
        ainv = np.linalg.inv(m[:, :2])
        return AffineTransform.from_matrix(np.column_stack([ainv, -ainv @ m[:, 2]]))

    def compose(self, other: "AffineTransform") -> "AffineTransform":
        """self after other."""
        a, b = self.matrix, other.matrix
        lin = a[:, :2] @ b[:, :2]
        return AffineTransform.from_matrix(np.column_stack([lin, a[:, :2] @ b[:, 2] + a[:, 2]]))

    def params(self) -> np.ndarray:
        return self.matrix.reshape(-1)


@dataclass(frozen=True)
class ControlPointSet:
    points: np.ndarray  # (n, 2) float (row, col)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, 2)
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return len(self.points)


def as_points(p) -> np.ndarray:
    if isinstance(p, ControlPointSet):
        return p.points
    return np.asarray(p, dtype=float).reshape(-1, 2)


def red_mask(raster) -> np.ndarray:
    return as_labels(raster) == RED


def border_walk_order(points: np.ndarray) -> np.ndarray:
    """Indices ordering a ring of points clockwise from the top-left one."""
    if len(points) == 0:
        return np.arange(0)
    c = points.mean(axis=0)
    ang = np.arctan2(points[:, 0] - c[0], points[:, 1] - c[1])
    order = np.argsort(ang, kind="stable")
    start = int(np.argmin(points[order].sum(axis=1)))
    return np.roll(order, -start)


def detect_control_points(raster) -> ControlPointSet:
    mask = red_mask(raster)
    lab, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    if n < 3:
        raise TooFewPointsError(f"found {n} control points, need at least 3")
    cents = np.array(ndimage.center_of_mass(mask, lab, np.arange(1, n + 1)), dtype=float)
    return ControlPointSet(cents[border_walk_order(cents)])


def estimate_transform(detected, reference) -> AffineTransform:
    """Least-squares affine map taking `detected` points onto `reference` points."""
    src, dst = as_points(detected), as_points(reference)
    if len(src) != len(dst):
        raise DegenerateError(f"point counts differ: {len(src)} vs {len(dst)}")
    if len(src) < 3:
        raise DegenerateError("need at least 3 point pairs")
    design = np.column_stack([src, np.ones(len(src))])
    if np.linalg.matrix_rank(design, tol=1e-9 * max(1.0, np.abs(src).max())) < 3:
        raise DegenerateError("points are collinear")
    sol, *_ = np.linalg.lstsq(design, dst, rcond=None)
    t = AffineTransform.from_matrix(sol.T)
    if not t.is_valid():
        raise DegenerateError("fitted transform is singular")
    return t


def rectify(raster: np.ndarray, t: AffineTransform, out_dims: tuple[int, int], fill=BLACK) -> np.ndarray:
    """Resample so output pixel q shows the input at t^-1(q); nearest neighbour."""
    inv = np.ascontiguousarray(t.inverse().matrix)
    src = np.asarray(raster)
    flat = src.ndim == 2
    if flat:
        src = src[..., None]
    fills = np.broadcast_to(np.asarray(fill, dtype=src.dtype), (src.shape[2],))
    out = warp_nn(src, inv, tuple(out_dims[:2]), np.ascontiguousarray(fills))
    return out[..., 0] if flat else out


def mean_displacement(a, b) -> float:
    pa, pb = as_points(a), as_points(b)
    if len(pa) != len(pb):
        raise CardinalityError(f"point counts differ: {len(pa)} vs {len(pb)}")
    if len(pa) == 0:
        return 0.0
    return float(np.linalg.norm(pa - pb, axis=1).mean())


def displacements(a, b) -> np.ndarray:
    pa, pb = as_points(a), as_points(b)
    if len(pa) != len(pb):
        raise CardinalityError(f"point counts differ: {len(pa)} vs {len(pb)}")
    return np.linalg.norm(pa - pb, axis=1)


def register(raster, spec: BarcodeSpec, jitter: float = 0.0,
             rng: np.random.Generator | None = None) -> tuple[np.ndarray, AffineTransform]:
    """Detect, fit and rectify a captured barcode onto the display grid of `spec`.

    `jitter` adds Gaussian noise (std in pixels) to the detected centroids to
    emulate imperfect dot localisation in a real capture.
    """
    det = detect_control_points(raster).points
    ref = control_points(spec)
    if len(det) != len(ref):
        raise CardinalityError(f"detected {len(det)} control points, expected {len(ref)}")
    if jitter:
        det = det + (rng or np.random.default_rng()).normal(0.0, jitter, det.shape)
    t = estimate_transform(det, ref)
    src = raster.pixels if hasattr(raster, "pixels") else np.asarray(raster)
    return rectify(src, t, spec.display_shape), t


def landmark_grid(spec: BarcodeSpec, count: int = 24) -> np.ndarray:
    """Interior display-pixel positions for displacement landmarks, on a near-square grid."""
    h, w = spec.interior_display_shape
    off = spec.border * spec.superpixel
    nr = max(2, int(round(np.sqrt(count * h / w))))
    nc = max(2, -(-count // nr))
    rows = np.linspace(off + 2, off + h - 3, nr)
    cols = np.linspace(off + 2, off + w - 3, nc)
    return np.stack(np.meshgrid(rows, cols, indexing="ij"), axis=-1).reshape(-1, 2)


def random_similarity(rng: np.random.Generator, center, max_rot_deg: float = 5.0,
                      scale_range: tuple[float, float] = (0.9, 1.1), max_shift: float = 3.0) -> AffineTransform:
    return AffineTransform.similarity(rng.uniform(-max_rot_deg, max_rot_deg), rng.uniform(*scale_range),
                                      rng.uniform(-max_shift, max_shift), rng.uniform(-max_shift, max_shift),
                                      center)


def pad_canvas(raster: np.ndarray, margin: int, fill: int = BLACK) -> np.ndarray:
    a = np.asarray(raster)
    pad = [(margin, margin), (margin, margin)] + [(0, 0)] * (a.ndim - 2)
    return np.pad(a, pad, constant_values=fill)


BLUE_RGB = np.array([0, 0, 255], dtype=np.uint8)


def blue_mask(rgb: np.ndarray) -> np.ndarray:
    r, g, b = (rgb[..., k].astype(np.int32) for k in range(3))
    return (b >= 200) & (r <= 80) & (g <= 80)


def landmark_trial(rgb: np.ndarray, spec: BarcodeSpec, rng: np.random.Generator, *,
                   count: int = 24, max_rot_deg: float = 5.0,
                   scale_range: tuple[float, float] = (0.9, 1.1), jitter: float = 0.3) -> np.ndarray:
    """One synthetic registration run; returns per-landmark displacement in pixels.

    Blue landmark dots are drawn on the interior, the frame is warped by a
    random similarity, registered from its red control points (with centroid
    jitter), and the rectified blue centroids are compared to where they
    were drawn.
    """
    s = spec.superpixel
    cells = np.unique(np.round((landmark_grid(spec, count) - (s - 1) / 2) / s).astype(int), axis=0)
    truth = cells * s + (s - 1) / 2
    img = np.array(rgb, dtype=np.uint8, copy=True)
    for r, c in cells:
        img[r * s:(r + 1) * s, c * s:(c + 1) * s] = BLUE_RGB
    margin = max(img.shape[:2]) // 5
    canvas = pad_canvas(img, margin)
    center = (np.array(canvas.shape[:2]) - 1) / 2
    warp = random_similarity(rng, center, max_rot_deg, scale_range)
    captured = rectify(canvas, warp, canvas.shape[:2])
    rectified, _ = register(captured, spec, jitter=jitter, rng=rng)
    mask = blue_mask(rectified)
    lab, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        raise TooFewPointsError("no landmarks survived registration")
    found = np.array(ndimage.center_of_mass(mask, lab, np.arange(1, n + 1)), dtype=float)
    nearest = np.linalg.norm(truth[:, None, :] - found[None, :, :], axis=2).argmin(axis=1)
    return displacements(truth, found[nearest])
