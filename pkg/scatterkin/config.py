from dataclasses import dataclass, field
from typing import List

import numpy as np

from ._typing import ConfigError, AngularRule, StencilMode, TransportScheme, Splitting, CollisionModel, \
    Invariants, CheckGroup, KineticError
from .grid import SpatialGrid
from .hydro import HydroState, StepControl
from .kinetic import KineticParam
from .utils import get_enum_by_name, config_hash


@dataclass
class GridParam:
    """
    :param n_per_axis: velocity nodes per axis, even, >= 8
    :param v_max: velocity truncation
    :param angular_rule: angular quadrature rule
    :param angular_order: angular exactness degree, >= 5
    :param stencil: stencil mode of the collision tables
    """
    n_per_axis: int = 12
    v_max: float = 6.5
    angular_rule: AngularRule = AngularRule.LEBEDEV
    angular_order: int = 7
    stencil: StencilMode = StencilMode.LATTICE


@dataclass
class SpatialParam:
    dim: int = 1
    n_cells: int = 64
    length: float = 1.0

    def grid(self) -> SpatialGrid:
        return SpatialGrid(self.dim, self.n_cells, self.length)


@dataclass
class InitialStateParam:
    """
    Initial hydro state as Fourier modes along the first axis,
    rho = rho0 (1 + sum a cos(2 pi k x / length)), same for T.

    :param rho0: mean density
    :param T0: mean temperature
    :param rho_modes: list of [k, amplitude]
    :param T_modes: list of [k, amplitude]
    """
    rho0: float = 1.0
    T0: float = 1.0
    rho_modes: List[List[float]] = field(default_factory=lambda: [[1, 0.1]])
    T_modes: List[List[float]] = field(default_factory=list)

    def state(self, grid: SpatialGrid, amplitude_scale: float = 1.0) -> HydroState:
        x = grid.centers()[0]

        def profile(mean, modes):
            values = np.ones(grid.shape)
            for k, a in modes:
                values = values + amplitude_scale * a * np.cos(2 * np.pi * int(k) * x / grid.length)
            return mean * values

        return HydroState(profile(self.rho0, self.rho_modes), profile(self.T0, self.T_modes), 0.0)

    def max_relative_amplitude(self) -> tuple[float, float]:
        return sum(abs(a) for _, a in self.rho_modes), sum(abs(a) for _, a in self.T_modes)


@dataclass
class TransportParam:
    """
    :param resolution: table nodes per axis
    :param margin: relative margin around the run envelope
    :param scaling: fill the table through the scaling law
    """
    resolution: int = 17
    margin: float = 0.1
    scaling: bool = True


@dataclass
class ConvergenceParam:
    """
    :param epsilons: Knudsen numbers, at least one
    :param t_end: final macroscopic time
    :param kinetic: scheme of the study
    :param dt_refinement: rerun every epsilon with half the time step
    :param amplitudes: initial amplitude scales to sweep, empty for the configured state only
    :param pseudo_inverse: cg or direct for the initial data
    """
    epsilons: List[float] = field(default_factory=lambda: [0.1, 0.05, 0.025])
    t_end: float = 0.05
    kinetic: KineticParam = field(default_factory=lambda: KineticParam(transport=TransportScheme.SPECTRAL,
                                                                       splitting=Splitting.STRANG,
                                                                       theta=0.5,
                                                                       collision_model=CollisionModel.LINEARIZED))
    dt_refinement: bool = False
    amplitudes: List[float] = field(default_factory=list)
    pseudo_inverse: str = "cg"


@dataclass
class SuiteParam:
    """
    property check campaign on small grids

    :param groups: check groups to run
    :param n_per_axis: velocity nodes per axis of the operator checks
    :param v_max: velocity truncation of the operator checks
    :param fine_n_per_axis: nodes per axis of the moment checks
    :param fine_v_max: truncation of the moment checks
    """
    groups: List[CheckGroup] = field(default_factory=lambda: [CheckGroup.ALL])
    n_per_axis: int = 8
    v_max: float = 5.5
    fine_n_per_axis: int = 24
    fine_v_max: float = 8.0


@dataclass
class RunParam:
    """
    full run configuration

    :param alpha: scatterer density, > 0
    :param output_dir: directory of every output file
    :param cache_dir: collision table cache, no cache when empty
    :param seed: seed of randomized checks
    """
    alpha: float = 1.0
    output_dir: str = "output"
    cache_dir: str = ""
    seed: int = 20240611
    grid: GridParam = field(default_factory=GridParam)
    spatial: SpatialParam = field(default_factory=SpatialParam)
    initial: InitialStateParam = field(default_factory=InitialStateParam)
    transport: TransportParam = field(default_factory=TransportParam)
    hydro: StepControl = field(default_factory=StepControl)
    kinetic: KineticParam = field(default_factory=KineticParam)
    convergence: ConvergenceParam = field(default_factory=ConvergenceParam)
    suite: SuiteParam = field(default_factory=SuiteParam)
    t_end: float = 0.05
    epsilon: float = 0.05
    config_hash: str = ""


def _copy_fields(source, target, names):
    for name in names:
        if hasattr(source, name):
            setattr(target, name, getattr(source, name))


def _convert_kinetic(config, param: KineticParam) -> KineticParam:
    if hasattr(config, "transport"):
        param.transport = get_enum_by_name(TransportScheme, config.transport)
    if hasattr(config, "splitting"):
        param.splitting = get_enum_by_name(Splitting, config.splitting)
    if hasattr(config, "collision_model"):
        param.collision_model = get_enum_by_name(CollisionModel, config.collision_model)
    if hasattr(config, "invariants"):
        param.invariants = get_enum_by_name(Invariants, config.invariants)
    _copy_fields(config, param, ["theta", "cfl", "tol", "max_iter", "clamp_tol", "n_temperatures"])
    try:
        param.__post_init__()
    except KineticError as e:
        raise ConfigError(e.message)
    return param


def convert_config(config) -> RunParam:
    """
    Fill a RunParam from a toml config converted by dict_to_object, validating as it goes.

    :param config: nested SimpleNamespace
    :return: run parameters
    :raises ConfigError: on any invalid value
    """
    param = RunParam()
    param.config_hash = config_hash(config)
    _copy_fields(config, param, ["alpha", "output_dir", "cache_dir", "seed", "t_end", "epsilon"])
    if param.alpha <= 0:
        raise ConfigError(f"alpha must be positive, got {param.alpha}")
    if hasattr(config, "grid"):
        _copy_fields(config.grid, param.grid, ["n_per_axis", "v_max", "angular_order"])
        if hasattr(config.grid, "angular_rule"):
            param.grid.angular_rule = get_enum_by_name(AngularRule, config.grid.angular_rule)
        if hasattr(config.grid, "stencil"):
            param.grid.stencil = get_enum_by_name(StencilMode, config.grid.stencil)
    if param.grid.n_per_axis < 8 or param.grid.n_per_axis % 2 != 0:
        raise ConfigError(f"n_per_axis must be even and at least 8, got {param.grid.n_per_axis}")
    if param.grid.v_max <= 0:
        raise ConfigError(f"v_max must be positive, got {param.grid.v_max}")
    if param.grid.angular_order < 5:
        raise ConfigError(f"angular_order must be at least 5, got {param.grid.angular_order}")
    if hasattr(config, "spatial"):
        _copy_fields(config.spatial, param.spatial, ["dim", "n_cells", "length"])
    try:
        param.spatial.grid()
    except KineticError as e:
        raise ConfigError(e.message)
    if hasattr(config, "initial"):
        _copy_fields(config.initial, param.initial, ["rho0", "T0", "rho_modes", "T_modes"])
    for k, _ in param.initial.rho_modes + param.initial.T_modes:
        if k != int(k) or k < 1:
            raise ConfigError(f"mode wavenumbers must be positive integers, got {k}")
    rho_amp, T_amp = param.initial.max_relative_amplitude()
    if param.initial.rho0 <= 0 or param.initial.T0 <= 0 or rho_amp >= 1 or T_amp >= 1:
        raise ConfigError("initial state must be positive: rho0, T0 > 0 and summed mode amplitudes below 1")
    if hasattr(config, "transport"):
        _copy_fields(config.transport, param.transport, ["resolution", "margin", "scaling"])
    if param.transport.resolution < 2:
        raise ConfigError(f"transport table resolution must be at least 2, got {param.transport.resolution}")
    if hasattr(config, "hydro"):
        _copy_fields(config.hydro, param.hydro, ["cfl", "max_halvings", "sample_times", "snapshot_every"])
    if hasattr(config, "kinetic"):
        _convert_kinetic(config.kinetic, param.kinetic)
    if hasattr(config, "convergence"):
        _copy_fields(config.convergence, param.convergence, ["epsilons", "t_end", "dt_refinement", "amplitudes",
                                                              "pseudo_inverse"])
        if hasattr(config.convergence, "kinetic"):
            _convert_kinetic(config.convergence.kinetic, param.convergence.kinetic)
    if len(param.convergence.epsilons) == 0 or any(e <= 0 for e in param.convergence.epsilons):
        raise ConfigError(f"epsilons must be a non empty list of positive values, got {param.convergence.epsilons}")
    if param.convergence.pseudo_inverse not in ("cg", "direct"):
        raise ConfigError(f"pseudo_inverse must be cg or direct, got {param.convergence.pseudo_inverse}")
    if param.convergence.t_end <= 0 or param.t_end <= 0:
        raise ConfigError("t_end must be positive")
    if param.epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {param.epsilon}")
    if hasattr(config, "suite"):
        _copy_fields(config.suite, param.suite, ["n_per_axis", "v_max", "fine_n_per_axis", "fine_v_max"])
        if hasattr(config.suite, "groups"):
            param.suite.groups = [get_enum_by_name(CheckGroup, name) for name in config.suite.groups]
    if param.suite.n_per_axis < 8 or param.suite.n_per_axis % 2 != 0:
        raise ConfigError(f"suite n_per_axis must be even and at least 8, got {param.suite.n_per_axis}")
    return param
