"""Adam optimizer with per-group learning rates over scene parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backward import Gradients, NumericsError
from .scene import ParamView, Scene

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-15

# Per-group defaults; positions decay exponentially to 1/100 of the
# initial rate over the configured horizon.
DEFAULT_LR = {
    "positions": 1.6e-4,
    "quats": 1e-3,
    "log_scales": 5e-3,
    "color_sh": 2.5e-3,
    "opacity_sh": 5e-2,
    "lc_v": 5e-2,
    "sigma": 1e-3,
    "beta": 1e-3,
    "background_weight": 1e-3,
}
POSITION_LR_FINAL_RATIO = 0.01


@dataclass
class AdamState:
    """First/second moments per trainable slot plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr_table: dict = field(default_factory=lambda: dict(DEFAULT_LR))
    position_decay_horizon: int = 0  # 0 disables the positional decay

    @staticmethod
    def for_scene(scene: Scene, lr_table: dict | None = None, position_decay_horizon: int = 0):
        n = ParamView(scene).n_params
        table = dict(DEFAULT_LR)
        if lr_table:
            unknown = set(lr_table) - set(table)
            if unknown:
                raise ValueError(f"unknown learning-rate groups: {sorted(unknown)}")
            table.update(lr_table)
        return AdamState(
            m=np.zeros(n), v=np.zeros(n), lr_table=table,
            position_decay_horizon=position_decay_horizon,
        )


def _lr_vector(view: ParamView, state: AdamState) -> np.ndarray:
    lr = np.empty(view.n_params)
    pos_lr = state.lr_table["positions"]
    if state.position_decay_horizon > 0:
        t = min(state.step / state.position_decay_horizon, 1.0)
        pos_lr = pos_lr * POSITION_LR_FINAL_RATIO**t
    for name in ("positions", "quats", "log_scales", "color_sh", "opacity_sh", "lc_v"):
        size = getattr(view.scene, name).size
        value = pos_lr if name == "positions" else state.lr_table[name]
        lr[view.offset(name) : view.offset(name) + size] = value
    for name in view.globals:
        lr[view.offset(name)] = state.lr_table[name]
    return lr


def adam_step(scene: Scene, grads: Gradients, state: AdamState) -> None:
    """One in-place Adam update on every trainable slot."""
    view = ParamView(scene)
    g = grads.flat(scene)
    if g.shape != state.m.shape:
        raise ValueError(
            f"gradient size {g.shape} does not match optimizer state {state.m.shape}"
        )
    state.step += 1
    state.m = ADAM_BETA1 * state.m + (1.0 - ADAM_BETA1) * g
    state.v = ADAM_BETA2 * state.v + (1.0 - ADAM_BETA2) * g * g
    m_hat = state.m / (1.0 - ADAM_BETA1**state.step)
    v_hat = state.v / (1.0 - ADAM_BETA2**state.step)
    update = _lr_vector(view, state) * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    if not np.all(np.isfinite(update)):
        bad = int(np.flatnonzero(~np.isfinite(update))[0])
        raise NumericsError(f"non-finite Adam update at slot {view.slot_label(bad)}")
    view.set_flat(view.get_flat() - update)
