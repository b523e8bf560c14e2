"""Per-object 3-DoF pose estimation by mask rescaling and multi-start ICP.

Alignment treats every foreground pixel as a point. The initial mask is first
rescaled so its bounding box matches the generated object's, then rigidly
registered onto the generated mask. Rotationally ambiguous shapes surface as a
SymmetryWarning instead of silently picking one of two near-equal fits.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyMask, EmptySet, SymmetryWarning
from .masks import BinaryMask, mask_bbox, mask_centroid
from .scene import ObjectInstance
from .transforms import RigidTransform2D, normalize_angle

SYMMETRY_RMS_RATIO = 1.05
SYMMETRY_RMS_SLACK = 1e-6  # px, absolute slack so exact-zero fits still compare


@dataclass(frozen=True)
class IcpConfig:
    max_iter: int = 60
    tol: float = 1e-3
    restarts: int = 8
    # evenly spaced restarts alone stall in lattice local minima a few degrees
    # off; two extra restarts at the principal-axis rotation (and its 180-deg
    # twin) carry the alignment into the right basin
    moment_guided: bool = True
    subsample_threshold: int = 5000
    subsample_target: int = 2000

    def __post_init__(self):
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class IcpResult:
    """Best restart of a multi-start alignment."""

    transform: RigidTransform2D
    rms: float
    iterations: int
    converged: bool
    runner_up_rms: float
    histories: tuple[tuple[float, ...], ...]

    @property
    def symmetry_suspect(self) -> bool:
        """True when another restart fits within 5% of the winner."""
        return self.runner_up_rms <= self.rms * SYMMETRY_RMS_RATIO + SYMMETRY_RMS_SLACK


def rescale_mask(source: BinaryMask, target_bbox: tuple[int, int, int, int]) -> BinaryMask:
    """Anisotropic rescale so the output's tight bbox equals the target dims.

    Each source pixel maps onto the block of target pixels its scaled
    footprint covers, which pins the extreme rows and columns and so
    guarantees the output bbox is exactly the requested size.
    """
    if source.is_empty:
        raise EmptyMask("cannot rescale an empty mask")
    tw, th = int(target_bbox[2]), int(target_bbox[3])
    if tw < 1 or th < 1:
        raise ValueError("target bbox dims must be >= 1")
    x0, y0, sw, sh = mask_bbox(source)
    cropped = source.array[y0:y0 + sh, x0:x0 + sw]
    out = np.zeros((th, tw), dtype=bool)
    ys, xs = np.nonzero(cropped)
    for y, x in zip(ys, xs):
        tx0 = (x * tw) // sw
        tx1 = max(tx0 + 1, -((-(x + 1) * tw) // sw))  # ceil((x+1)*tw/sw)
        ty0 = (y * th) // sh
        ty1 = max(ty0 + 1, -((-(y + 1) * th) // sh))
        out[ty0:ty1, tx0:tx1] = True
    return BinaryMask.from_array(out)


def _subsample(points: np.ndarray, config: IcpConfig) -> np.ndarray:
    n = len(points)
    if n <= config.subsample_threshold:
        return points
    stride = int(math.ceil(n / config.subsample_target))
    return points[::stride]


def _principal_angle(points: np.ndarray) -> float:
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)
    v = evecs[:, int(np.argmax(evals))]
    return math.atan2(float(v[1]), float(v[0]))


def _fit_rigid(source: np.ndarray, target: np.ndarray) -> RigidTransform2D:
    """Closed-form least-squares rotation + translation (planar Procrustes)."""
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    s = source - mu_s
    t = target - mu_t
    # cross-covariance H[a, b] = sum_i s_ia * t_ib
    h = s.T @ t
    theta = math.atan2(h[0, 1] - h[1, 0], h[0, 0] + h[1, 1])
    c, si = math.cos(theta), math.sin(theta)
    tx = mu_t[0] - (c * mu_s[0] - si * mu_s[1])
    ty = mu_t[1] - (si * mu_s[0] + c * mu_s[1])
    return RigidTransform2D(tx, ty, theta)


def icp_align(source_points: np.ndarray, target_points: np.ndarray,
              config: IcpConfig = IcpConfig()) -> IcpResult:
    """Multi-start iterative closest point over 2D point sets.

    Restarts initialize at evenly spaced rotations with centroids aligned,
    plus two moment-guided restarts at the principal-axis rotation and its
    180-degree twin. Within a restart the rms of source-to-nearest-target
    distances is non-increasing; iteration stops when the change drops below
    ``tol``. The best restart wins (ties: smaller |theta|); the runner-up rms
    is kept so downstream code can flag symmetric shapes.
    """
    source = np.asarray(source_points, dtype=float).reshape(-1, 2)
    target = np.asarray(target_points, dtype=float).reshape(-1, 2)
    if len(source) == 0 or len(target) == 0:
        raise EmptySet("ICP needs non-empty source and target point sets")
    source = _subsample(source, config)
    target = _subsample(target, config)
    tree = cKDTree(target)
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)

    initial_rotations = [2.0 * math.pi * k / config.restarts
                         for k in range(config.restarts)]
    if config.moment_guided:
        guided = _principal_angle(target) - _principal_angle(source)
        initial_rotations += [guided, guided + math.pi]

    results = []
    histories = []
    for k, theta0 in enumerate(initial_rotations):
        c, s = math.cos(theta0), math.sin(theta0)
        # rotate about the source centroid, then move centroid onto target's
        tx = mu_t[0] - (c * mu_s[0] - s * mu_s[1])
        ty = mu_t[1] - (s * mu_s[0] + c * mu_s[1])
        transform = RigidTransform2D(tx, ty, theta0)
        moved = transform.apply(source)
        dists, idx = tree.query(moved)
        rms = float(np.sqrt(np.mean(dists ** 2)))
        history = [rms]
        converged = False
        iterations = 0
        for _ in range(config.max_iter):
            transform = _fit_rigid(source, target[idx])
            moved = transform.apply(source)
            dists, idx = tree.query(moved)
            new_rms = float(np.sqrt(np.mean(dists ** 2)))
            history.append(new_rms)
            iterations += 1
            if abs(rms - new_rms) < config.tol:
                rms = new_rms
                converged = True
                break
            rms = new_rms
        results.append((rms, abs(transform.theta), k, transform, iterations, converged))
        histories.append(tuple(history))

    results.sort(key=lambda r: (r[0], r[1], r[2]))
    best = results[0]
    runner_up = results[1][0] if len(results) > 1 else math.inf
    result = IcpResult(
        transform=best[3],
        rms=best[0],
        iterations=best[4],
        converged=best[5],
        runner_up_rms=runner_up,
        histories=tuple(histories),
    )
    if result.symmetry_suspect:
        warnings.warn(
            f"alignment ambiguous: runner-up rms {runner_up:.4g} within 5% of "
            f"best {best[0]:.4g}", SymmetryWarning, stacklevel=2)
    return result


@dataclass(frozen=True)
class ObjectAlignment:
    """Transform from initial-image pixels to goal-image pixels, with stats."""

    transform: RigidTransform2D
    icp: IcpResult
    size_ratio: float  # sqrt(initial mask area / goal mask area)


def align_object_masks(initial: ObjectInstance, goal: ObjectInstance,
                       config: IcpConfig = IcpConfig()) -> ObjectAlignment:
    """Rescale the initial mask to the goal bbox and register it with ICP."""
    target_bbox = mask_bbox(goal.mask)
    rescaled = rescale_mask(initial.mask, target_bbox)
    icp = icp_align(rescaled.pixels(), goal.mask.pixels(), config)
    # the rescaled mask lives in its own local frame; compose with the
    # centroid shift so the result maps initial-image coordinates
    cix, ciy = mask_centroid(initial.mask)
    clx, cly = mask_centroid(rescaled)
    rot = icp.transform.rotation
    shift = rot @ np.array([clx - cix, cly - ciy])
    transform = RigidTransform2D(
        icp.transform.tx + float(shift[0]),
        icp.transform.ty + float(shift[1]),
        icp.transform.theta,
    )
    ratio = math.sqrt(initial.mask.area / goal.mask.area)
    return ObjectAlignment(transform=transform, icp=icp, size_ratio=ratio)


def estimate_object_transform(initial: ObjectInstance, goal: ObjectInstance,
                              config: IcpConfig = IcpConfig()) -> RigidTransform2D:
    """Pixel-space motion carrying the initial object onto its goal pose."""
    return align_object_masks(initial, goal, config).transform
