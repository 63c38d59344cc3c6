"""Scene container: splat parameters, weight-model globals, trainable-slot views.

Splats are stored structure-of-arrays for vectorized projection and
rendering; `GaussianElement` is the single-splat view used at API
boundaries and in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .sh import SH_C0, ShCoeffs, n_basis

DIR = "dir"
EXP = "exp"
LC = "lc"
WEIGHT_VARIANTS = (DIR, EXP, LC)

# Initializations reported for the exponential and linear-correction models.
EXP_SIGMA_INIT = 0.1
EXP_BETA_INIT = 0.8
LC_SIGMA_INIT = 10.0
LC_V_INIT = 0.1


@dataclass
class WeightModel:
    """Depth-weighting model: constant, exponential, or linear correction."""

    variant: str = DIR
    sigma: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.variant not in WEIGHT_VARIANTS:
            raise ValueError(f"unknown weight model {self.variant!r}")
        if self.variant == EXP and (self.sigma <= 0 or self.beta <= 0):
            raise ValueError("exp weight model requires sigma > 0 and beta > 0")
        if self.variant == LC and self.sigma <= 0:
            raise ValueError("lc weight model requires sigma > 0")

    @staticmethod
    def dir() -> "WeightModel":
        return WeightModel(DIR)

    @staticmethod
    def exp(sigma: float = EXP_SIGMA_INIT, beta: float = EXP_BETA_INIT) -> "WeightModel":
        return WeightModel(EXP, sigma=sigma, beta=beta)

    @staticmethod
    def lc(sigma: float = LC_SIGMA_INIT) -> "WeightModel":
        return WeightModel(LC, sigma=sigma)


@dataclass
class GaussianElement:
    """One splat, as seen at API boundaries."""

    position: np.ndarray
    quat: np.ndarray
    log_scale: np.ndarray
    color_sh: ShCoeffs
    opacity_sh: ShCoeffs
    lc_weight: float = LC_V_INIT


@dataclass
class Scene:
    """A full splat scene plus global weight-model and background parameters."""

    positions: np.ndarray        # (N, 3)
    quats: np.ndarray            # (N, 4), (w, x, y, z)
    log_scales: np.ndarray       # (N, 3)
    color_sh: np.ndarray         # (N, 3, (Dc+1)^2)
    opacity_sh: np.ndarray       # (N, (Do+1)^2)
    lc_v: np.ndarray             # (N,)
    weight_model: WeightModel = field(default_factory=WeightModel.dir)
    background_color: np.ndarray = field(default_factory=lambda: np.zeros(3))
    background_weight: float = 1.0
    sh_degree_color: int = 0
    sh_degree_opacity: int = 0

    def __post_init__(self) -> None:
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        self.quats = np.atleast_2d(np.asarray(self.quats, dtype=np.float64))
        self.log_scales = np.atleast_2d(np.asarray(self.log_scales, dtype=np.float64))
        self.color_sh = np.asarray(self.color_sh, dtype=np.float64)
        self.opacity_sh = np.atleast_2d(np.asarray(self.opacity_sh, dtype=np.float64))
        self.lc_v = np.atleast_1d(np.asarray(self.lc_v, dtype=np.float64))
        self.background_color = np.asarray(self.background_color, dtype=np.float64)
        self.validate()

    def validate(self) -> None:
        n = self.positions.shape[0]
        kc = n_basis(self.sh_degree_color)
        ko = n_basis(self.sh_degree_opacity)
        if self.positions.shape != (n, 3):
            raise ValueError(f"positions must be (N, 3), got {self.positions.shape}")
        if self.quats.shape != (n, 4):
            raise ValueError(f"quats must be (N, 4), got {self.quats.shape}")
        if self.log_scales.shape != (n, 3):
            raise ValueError(f"log_scales must be (N, 3), got {self.log_scales.shape}")
        if self.color_sh.shape != (n, 3, kc):
            raise ValueError(
                f"color_sh must be (N, 3, {kc}) for degree {self.sh_degree_color}, "
                f"got {self.color_sh.shape}"
            )
        if self.opacity_sh.shape != (n, ko):
            raise ValueError(
                f"opacity_sh must be (N, {ko}) for degree {self.sh_degree_opacity}, "
                f"got {self.opacity_sh.shape}"
            )
        if self.lc_v.shape != (n,):
            raise ValueError(f"lc_v must be (N,), got {self.lc_v.shape}")
        if n and np.any(np.linalg.norm(self.quats, axis=1) <= 1e-9):
            raise ValueError("scene contains a zero quaternion")
        if n and not np.all(np.isfinite(np.exp(self.log_scales))):
            raise ValueError("scene contains non-finite scales")
        if not np.isfinite(self.background_weight) or self.background_weight < 0:
            raise ValueError(f"background weight must be finite and >= 0, got {self.background_weight}")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    def element(self, i: int) -> GaussianElement:
        return GaussianElement(
            position=self.positions[i].copy(),
            quat=self.quats[i].copy(),
            log_scale=self.log_scales[i].copy(),
            color_sh=ShCoeffs(self.sh_degree_color, self.color_sh[i].copy()),
            opacity_sh=ShCoeffs(self.sh_degree_opacity, self.opacity_sh[i][None, :].copy()),
            lc_weight=float(self.lc_v[i]),
        )

    def copy(self) -> "Scene":
        return replace(
            self,
            positions=self.positions.copy(),
            quats=self.quats.copy(),
            log_scales=self.log_scales.copy(),
            color_sh=self.color_sh.copy(),
            opacity_sh=self.opacity_sh.copy(),
            lc_v=self.lc_v.copy(),
            weight_model=replace(self.weight_model),
            background_color=self.background_color.copy(),
        )

    @staticmethod
    def from_elements(
        elements: list[GaussianElement],
        weight_model: WeightModel | None = None,
        background_color=(0.0, 0.0, 0.0),
        background_weight: float = 1.0,
    ) -> "Scene":
        if not elements:
            raise ValueError("cannot build a scene from zero elements")
        deg_c = elements[0].color_sh.degree
        deg_o = elements[0].opacity_sh.degree
        return Scene(
            positions=np.stack([e.position for e in elements]),
            quats=np.stack([e.quat for e in elements]),
            log_scales=np.stack([e.log_scale for e in elements]),
            color_sh=np.stack([e.color_sh.values for e in elements]),
            opacity_sh=np.stack([e.opacity_sh.values[0] for e in elements]),
            lc_v=np.array([e.lc_weight for e in elements]),
            weight_model=weight_model or WeightModel.dir(),
            background_color=np.asarray(background_color, dtype=np.float64),
            background_weight=background_weight,
            sh_degree_color=deg_c,
            sh_degree_opacity=deg_o,
        )


# Trainable slots, in the canonical flattening order.
ELEMENT_GROUPS = ("positions", "quats", "log_scales", "color_sh", "opacity_sh", "lc_v")


def global_group_names(variant: str) -> tuple[str, ...]:
    if variant == EXP:
        return ("sigma", "beta", "background_weight")
    if variant == LC:
        return ("sigma", "background_weight")
    return ("background_weight",)


class ParamView:
    """Flat view over every trainable scalar of a scene.

    Element arrays come first (C-order within each group), then the
    weight-model globals, then the background weight. Each storage
    scalar appears exactly once.
    """

    def __init__(self, scene: Scene) -> None:
        self.scene = scene
        self.globals = global_group_names(scene.weight_model.variant)
        self._offsets: dict[str, int] = {}
        off = 0
        for name in ELEMENT_GROUPS:
            self._offsets[name] = off
            off += getattr(scene, name).size
        for name in self.globals:
            self._offsets[name] = off
            off += 1
        self.n_params = off

    def offset(self, group: str) -> int:
        return self._offsets[group]

    def _get_global(self, name: str) -> float:
        if name == "background_weight":
            return float(self.scene.background_weight)
        return float(getattr(self.scene.weight_model, name))

    def _set_global(self, name: str, value: float) -> None:
        if name == "background_weight":
            self.scene.background_weight = float(value)
        else:
            setattr(self.scene.weight_model, name, float(value))

    def get_flat(self) -> np.ndarray:
        parts = [getattr(self.scene, name).ravel() for name in ELEMENT_GROUPS]
        parts.append(np.array([self._get_global(g) for g in self.globals]))
        return np.concatenate(parts)

    def set_flat(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} values, got {values.shape}")
        for name in ELEMENT_GROUPS:
            arr = getattr(self.scene, name)
            off = self._offsets[name]
            arr.flat[:] = values[off : off + arr.size]
        for name in self.globals:
            self._set_global(name, values[self._offsets[name]])

    def get(self, i: int) -> float:
        return float(self.get_flat()[i])

    def set(self, i: int, value: float) -> None:
        flat = self.get_flat()
        flat[i] = value
        self.set_flat(flat)

    def slot_label(self, i: int) -> str:
        """Human-readable name of flat slot i, e.g. 'color_sh[2][1,3]'."""
        for name in ELEMENT_GROUPS:
            arr = getattr(self.scene, name)
            off = self._offsets[name]
            if off <= i < off + arr.size:
                idx = np.unravel_index(i - off, arr.shape)
                elem, rest = idx[0], idx[1:]
                suffix = f"[{','.join(map(str, rest))}]" if rest else ""
                return f"{name}[{elem}]{suffix}"
        for name in self.globals:
            if i == self._offsets[name]:
                return name
        raise IndexError(f"slot {i} out of range (n_params = {self.n_params})")


def scene_param_count(scene: Scene) -> int:
    """Total trainable scalars: per-element slots plus model globals plus w_B."""
    return ParamView(scene).n_params


def scene_new_random(
    n: int,
    bounds,
    seed: int,
    *,
    weight_model: WeightModel | None = None,
    sh_degree_color: int = 0,
    sh_degree_opacity: int = 0,
    background_color=(0.0, 0.0, 0.0),
    background_weight: float = 1.0,
    init_opacity: float = 0.3,
) -> Scene:
    """Deterministic random scene inside an axis-aligned box.

    Positions are uniform in `bounds` (a (2, 3) min/max pair); rotations
    are identity plus small jitter; scales start near 5% of the box
    diagonal. SH blocks are degree-0 initialized (higher bands zero).
    The exponential model starts at sigma = 0.1, beta = 0.8 and the
    linear-correction model at sigma = 10 with per-splat weight 0.1.
    """
    if n < 1:
        raise ValueError(f"need at least one element, got n = {n}")
    bounds = np.asarray(bounds, dtype=np.float64).reshape(2, 3)
    rng = np.random.default_rng(seed)
    positions = rng.uniform(bounds[0], bounds[1], size=(n, 3))
    quats = np.zeros((n, 4))
    quats[:, 0] = 1.0
    quats[:, 1:] = rng.normal(0.0, 0.1, size=(n, 3))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    diag = float(np.linalg.norm(bounds[1] - bounds[0]))
    log_scales = np.log(0.05 * diag) + rng.normal(0.0, 0.2, size=(n, 3))

    kc = n_basis(sh_degree_color)
    color_sh = np.zeros((n, 3, kc))
    color_sh[:, :, 0] = (rng.uniform(0.2, 0.8, size=(n, 3)) - 0.5) / SH_C0
    ko = n_basis(sh_degree_opacity)
    opacity_sh = np.zeros((n, ko))
    opacity_sh[:, 0] = init_opacity / SH_C0

    model = weight_model or WeightModel.lc()
    lc_v = np.full(n, LC_V_INIT)
    return Scene(
        positions=positions,
        quats=quats,
        log_scales=log_scales,
        color_sh=color_sh,
        opacity_sh=opacity_sh,
        lc_v=lc_v,
        weight_model=model,
        background_color=np.asarray(background_color, dtype=np.float64),
        background_weight=background_weight,
        sh_degree_color=sh_degree_color,
        sh_degree_opacity=sh_degree_opacity,
    )
