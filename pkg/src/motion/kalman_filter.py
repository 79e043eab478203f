"""Constant-velocity Kalman filter over (cx, cy, w, h) box measurements.

State is the 8-vector (cx, cy, w, h, vcx, vcy, vw, vh). Process and
measurement noise scale with the box height.
"""
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from src.config import FACT_GATE_THRESHOLD
from src.errors import InvalidArgumentError, NumericalFailureError
from src.motion.geometry import AffineTransform, BBox

logger = logging.getLogger(__name__)

NDIM = 4
STD_WEIGHT_POSITION = 1.0 / 20
STD_WEIGHT_VELOCITY = 1.0 / 160
CHI2INV95_4DOF = 9.4877
# absolute slack on the inclusive gate boundary
GATE_ROUNDOFF = 1e-9

_MOTION_MAT = np.eye(2 * NDIM)
for _i in range(NDIM):
    _MOTION_MAT[_i, NDIM + _i] = 1.0
_UPDATE_MAT = np.eye(NDIM, 2 * NDIM)


@dataclass(frozen=True, eq=False)
class KalmanState:
    mean: np.ndarray
    covariance: np.ndarray = field(repr=False)

    def to_bbox(self, confidence: float = 1.0) -> BBox:
        return BBox.from_xywh(self.mean[:4], confidence)


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def kf_init(box: BBox) -> KalmanState:
    """Start a track at ``box`` with zero velocity and a height-scaled diagonal covariance."""
    if not (box.width > 0 and box.height > 0):
        raise InvalidArgumentError("box size must be positive")
    h = box.height
    mean = np.r_[box.to_xywh(), np.zeros(NDIM)]
    std = [2 * STD_WEIGHT_POSITION * h] * NDIM + [10 * STD_WEIGHT_VELOCITY * h] * NDIM
    return KalmanState(mean=mean, covariance=np.diag(np.square(std)))


def kf_predict(s: KalmanState) -> KalmanState:
    """Advance one frame under the constant-velocity model."""
    h = abs(s.mean[3])
    std = [STD_WEIGHT_POSITION * h] * NDIM + [STD_WEIGHT_VELOCITY * h] * NDIM
    motion_cov = np.diag(np.square(std))
    mean = _MOTION_MAT @ s.mean
    covariance = np.linalg.multi_dot((_MOTION_MAT, s.covariance, _MOTION_MAT.T)) + motion_cov
    return KalmanState(mean=mean, covariance=_sym(covariance))


def project(s: KalmanState):
    """Project the state into measurement space, adding measurement noise."""
    h = abs(s.mean[3])
    innovation_cov = np.diag(np.square([STD_WEIGHT_POSITION * h] * NDIM))
    mean = _UPDATE_MAT @ s.mean
    covariance = np.linalg.multi_dot((_UPDATE_MAT, s.covariance, _UPDATE_MAT.T))
    return mean, covariance + innovation_cov


def kf_update(s: KalmanState, z: BBox) -> KalmanState:
    """
    Correct the state with a box measurement.

    Raises:
        NumericalFailureError: If the innovation covariance is not positive definite
    """
    projected_mean, projected_cov = project(s)
    try:
        chol = linalg.cho_factor(projected_cov, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise NumericalFailureError(f"innovation covariance is singular: {e}") from e
    kalman_gain = linalg.cho_solve(chol, (s.covariance @ _UPDATE_MAT.T).T, check_finite=False).T
    innovation = z.to_xywh() - projected_mean
    mean = s.mean + kalman_gain @ innovation
    covariance = s.covariance - np.linalg.multi_dot((kalman_gain, projected_cov, kalman_gain.T))
    return KalmanState(mean=mean, covariance=_sym(covariance))


def gating_distance(s: KalmanState, boxes: Sequence[BBox]) -> np.ndarray:
    """Squared Mahalanobis distance of each box's (cx, cy, w, h) to the projected state."""
    if len(boxes) == 0:
        return np.zeros(0)
    mean, covariance = project(s)
    try:
        cholesky_factor = np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(f"projected covariance is singular: {e}") from e
    d = np.array([b.to_xywh() for b in boxes]) - mean
    z = linalg.solve_triangular(cholesky_factor, d.T, lower=True, check_finite=False)
    return np.sum(z * z, axis=0)


def gate(s: KalmanState, boxes: Sequence[BBox], threshold: float = FACT_GATE_THRESHOLD) -> np.ndarray:
    """Boolean mask of boxes whose gating distance is within ``threshold`` (inclusive)."""
    return gating_distance(s, boxes) <= threshold + GATE_ROUNDOFF


def apply_cmc(s: KalmanState, t: AffineTransform) -> KalmanState:
    """
    Warp a state by a camera-motion transform.

    Position is mapped by the full affine map, velocity by its linear part;
    sizes are left alone. The covariance is conjugated by the same linear map.
    """
    if abs(np.linalg.det(t.linear)) <= 1e-9:
        raise InvalidArgumentError("camera-motion transform is not invertible")
    a = t.linear
    mean = s.mean.copy()
    mean[0:2] = a @ s.mean[0:2] + t.translation
    mean[4:6] = a @ s.mean[4:6]
    m = np.eye(2 * NDIM)
    m[0:2, 0:2] = a
    m[4:6, 4:6] = a
    covariance = np.linalg.multi_dot((m, s.covariance, m.T))
    return KalmanState(mean=mean, covariance=_sym(covariance))
