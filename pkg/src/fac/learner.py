"""Analytic continual learner for the FCN layer.

The FCN weight is the ridge solution over every training frame seen so far.
Instead of re-solving it, each frame folds its rows into the inverse
regularized autocorrelation ``r`` with the Woodbury identity and corrects the
existing weights, which reproduces the batch solution exactly (up to
round-off). Only an N x N system is factorized per frame.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.errors import InvalidArgumentError, NumericalFailureError
from src.fac.et_layer import EtLayer, transform
from src.fac.labels import LabelMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FacState:
    """FCN weights (d_et x d_T) and the autocorrelation unit r (d_et x d_et)."""
    gamma: float
    d_et: int
    w_fcn: np.ndarray
    r: np.ndarray
    frame_counter: int = 0

    @property
    def d_t(self) -> int:
        """Number of track columns learned so far."""
        return self.w_fcn.shape[1]


def _check_rows(state: FacState, x_et: np.ndarray) -> np.ndarray:
    x = np.asarray(x_et, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1) if x.size else x.reshape(0, state.d_et)
    if x.ndim != 2 or x.shape[1] != state.d_et:
        raise InvalidArgumentError(f"x_et has shape {x.shape}, expected (N, {state.d_et})")
    return x


def _symmetrize(r: np.ndarray) -> np.ndarray:
    return 0.5 * (r + r.T)


def _factor(matrix: np.ndarray, what: str, frame: Optional[int]):
    """Cholesky-factorize a small SPD system, mapping failures to NumericalFailureError."""
    if not np.all(np.isfinite(matrix)):
        raise NumericalFailureError(f"{what} contains non-finite values", frame=frame)
    try:
        return linalg.cho_factor(matrix, lower=True, check_finite=False)
    except linalg.LinAlgError as e:
        raise NumericalFailureError(f"{what} is numerically singular: {e}", frame=frame) from e


def init_fac(gamma: float, d_et: int) -> FacState:
    """
    Start an empty learner: r = I / gamma and no track columns.

    Raises:
        InvalidArgumentError: If gamma <= 0 or d_et < 1
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be > 0, got {gamma}")
    if d_et < 1:
        raise InvalidArgumentError(f"d_et must be >= 1, got {d_et}")
    return FacState(
        gamma=float(gamma),
        d_et=d_et,
        w_fcn=np.zeros((d_et, 0)),
        r=np.eye(d_et) / gamma,
        frame_counter=0,
    )


def base_learn(
    gamma: float,
    history: Sequence[Tuple[np.ndarray, LabelMatrix]],
    d_et: Optional[int] = None,
) -> FacState:
    """
    Batch ridge solution over a whole training history.

    Each frame's labels must extend the columns of all earlier frames: the
    ``old_cols`` of a frame equals the cumulative column count before it.

    Args:
        gamma: Ridge regularizer (> 0)
        history: Sequence of (x_et, labels) pairs in frame order
        d_et: Transformed dimension; required only when history is empty

    Returns:
        FacState with w_fcn = (gamma I + sum X^T X)^-1 sum X^T Y and r the inverse itself

    Raises:
        InvalidArgumentError: On inconsistent dimensions or label column ordering
        NumericalFailureError: If the regularized Gram matrix cannot be factorized
    """
    if not history:
        if d_et is None:
            raise InvalidArgumentError("d_et is required for an empty history")
        return init_fac(gamma, d_et)

    dims = {np.asarray(x).shape[-1] for x, _ in history}
    if len(dims) != 1:
        raise InvalidArgumentError(f"history frames disagree on d_et: {sorted(dims)}")
    d = dims.pop()
    if d_et is not None and d != d_et:
        raise InvalidArgumentError(f"history has d_et={d}, expected {d_et}")
    state = init_fac(gamma, d)

    total_cols = 0
    for k, (x, labels) in enumerate(history):
        if labels.old_cols != total_cols:
            raise InvalidArgumentError(
                f"frame {k}: labels reference {labels.old_cols} existing columns, "
                f"history has {total_cols}"
            )
        if _check_rows(state, x).shape[0] != labels.n_rows:
            raise InvalidArgumentError(f"frame {k}: {labels.n_rows} label rows for {len(x)} embeddings")
        total_cols += labels.new_cols

    gram = gamma * np.eye(d)
    cross = np.zeros((d, total_cols))
    for x, labels in history:
        x = _check_rows(state, x)
        gram += x.T @ x
        cross += x.T @ labels.padded(total_cols)

    factor = _factor(gram, "regularized Gram matrix", None)
    w = linalg.cho_solve(factor, cross, check_finite=False)
    r = _symmetrize(linalg.cho_solve(factor, np.eye(d), check_finite=False))
    return FacState(gamma=float(gamma), d_et=d, w_fcn=w, r=r, frame_counter=len(history))


def update_r(state: FacState, x_et: np.ndarray, frame: Optional[int] = None) -> FacState:
    """
    Fold new rows into the autocorrelation unit with the Woodbury identity.

    r <- r - r X^T (I + X r X^T)^-1 X r, then re-symmetrized. Only the N x N
    inner system is factorized. An empty X leaves the state unchanged.

    Raises:
        InvalidArgumentError: On a column-count mismatch
        NumericalFailureError: If the inner system is singular (carries ``frame``)
    """
    x = _check_rows(state, x_et)
    if x.shape[0] == 0:
        return state
    xr = x @ state.r
    inner = np.eye(x.shape[0]) + xr @ x.T
    factor = _factor(inner, "Woodbury inner matrix", frame)
    correction = xr.T @ linalg.cho_solve(factor, xr, check_finite=False)
    return replace(state, r=_symmetrize(state.r - correction))


def continual_update(
    state: FacState,
    x_et: np.ndarray,
    labels: LabelMatrix,
    frame: Optional[int] = None,
) -> FacState:
    """
    Absorb one frame of training data.

    After updating r, the existing columns are corrected and the columns of
    tracks spawned this frame are appended:
        w_old <- w + r X^T (Y_old - X w)     (equivalently V_k w + r X^T Y_old)
        w_new <- r X^T Y_new
    The result equals base_learn over the full history.

    Raises:
        InvalidArgumentError: If labels do not match the rows or current columns
        NumericalFailureError: Propagated from update_r
    """
    x = _check_rows(state, x_et)
    if labels.old_cols != state.d_t:
        raise InvalidArgumentError(
            f"labels reference {labels.old_cols} existing tracks, learner has {state.d_t}"
        )
    if labels.n_rows != x.shape[0]:
        raise InvalidArgumentError(f"{labels.n_rows} label rows for {x.shape[0]} embeddings")

    updated = update_r(state, x, frame=frame)
    if x.shape[0] == 0:
        return replace(updated, frame_counter=state.frame_counter + 1)

    rxt = updated.r @ x.T
    w_old = state.w_fcn + rxt @ (labels.y_old - x @ state.w_fcn)
    w_new = rxt @ labels.y_new
    return replace(
        updated,
        w_fcn=np.hstack([w_old, w_new]),
        frame_counter=state.frame_counter + 1,
    )


def forget(
    state: FacState,
    x_et: np.ndarray,
    y_padded: np.ndarray,
    frame: Optional[int] = None,
) -> FacState:
    """
    Remove one previously absorbed frame from the learner.

    Inverse of continual_update for a frame that is already in the history:
        r <- r + r X^T (I - X r X^T)^-1 X r
        w <- w + r X^T (X w - Y)
    with Y widened to the current column count. Column count is unchanged.

    Raises:
        InvalidArgumentError: On shape mismatches
        NumericalFailureError: If the frame was never absorbed (inner matrix not SPD)
    """
    x = _check_rows(state, x_et)
    y = np.asarray(y_padded, dtype=np.float64)
    if y.shape != (x.shape[0], state.d_t):
        raise InvalidArgumentError(f"labels have shape {y.shape}, expected {(x.shape[0], state.d_t)}")
    if x.shape[0] == 0:
        return state
    xr = x @ state.r
    inner = np.eye(x.shape[0]) - xr @ x.T
    factor = _factor(inner, "downdate inner matrix", frame)
    r = _symmetrize(state.r + xr.T @ linalg.cho_solve(factor, xr, check_finite=False))
    w = state.w_fcn + (r @ x.T) @ (x @ state.w_fcn - y)
    return replace(state, r=r, w_fcn=w)


def predict_affinity(state: FacState, layer: EtLayer, x_reid: np.ndarray) -> np.ndarray:
    """
    Raw FCN outputs for each embedding against every learned track.

    No softmax or other normalization is applied; an untrained learner
    returns an N x 0 matrix.

    Raises:
        InvalidArgumentError: If the layer and learner disagree on d_et or x_reid has the wrong width
    """
    if layer.d_et != state.d_et:
        raise InvalidArgumentError(f"ET layer outputs {layer.d_et} features, learner expects {state.d_et}")
    return transform(layer, x_reid) @ state.w_fcn
