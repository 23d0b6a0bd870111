from enum import Enum
from typing import NamedTuple


class KineticError(Exception):
    """
    Error raised when a numerical precondition is violated or a computation breaks down.

    :param message: description of the problem
    :type message: str
    """

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ConvergenceError(KineticError):
    """
    An iterative solver stopped before reaching its tolerance.

    :param message: description
    :type message: str
    :param iterations: iterations done before giving up
    :type iterations: int
    :param residual: last relative residual
    :type residual: float
    """

    def __init__(self, message, iterations: int, residual: float):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class StepRejectedError(KineticError):
    """
    A time step produced a non-physical state, caller may retry with smaller dt.
    """

    def __init__(self, message, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


class ConfigError(Exception):
    """
    Invalid configuration, cli exits with code 2
    """

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class AngularRule(Enum):
    """
    quadrature rule on the unit sphere,

    * lebedev: scipy lebedev rule, 26 nodes at order 7
    * product_gauss: gauss-legendre in cos(theta) times uniform phi
    """
    LEBEDEV = 1
    PRODUCT_GAUSS = 2

    def __str__(self):
        return self.name


class StencilMode(Enum):
    """
    How post-collision velocities are placed on the grid.

    * lattice: only collisions whose images are grid nodes, reweighted per direction
    * trilinear: 8 node convex interpolation stencil
    """
    LATTICE = 1
    TRILINEAR = 2

    def __str__(self):
        return self.name


class Invariants(Enum):
    """
    moments restored by conservation projection
    """
    MASS_ENERGY = 1
    MASS_MOMENTUM_ENERGY = 2

    def __str__(self):
        return self.name


class TransportScheme(Enum):
    """
    free streaming discretization in the kinetic solver
    """
    UPWIND = 1
    SPECTRAL = 2

    def __str__(self):
        return self.name


class Splitting(Enum):
    LIE = 1
    STRANG = 2

    def __str__(self):
        return self.name


class CollisionModel(Enum):
    """
    * nonlinear: full q_b(F,F) + alpha q_d(F) in every iteration
    * linearized: local linearization around the cell Maxwellian, taken from an operator family
    """
    NONLINEAR = 1
    LINEARIZED = 2

    def __str__(self):
        return self.name


class CheckGroup(Enum):
    ALL = 0
    GRID = 1
    COLLISION = 2
    LINOPS = 3
    TRANSPORT = 4
    HYDRO = 5
    KINETIC = 6
    EXTENDED = 7

    def __str__(self):
        return self.name


class CheckResult(NamedTuple):
    """
    outcome of one property check

    :param name: check name, eg: collision.qb_equilibrium
    :type name: str
    :param group: group of the check
    :type group: CheckGroup
    :param passed: pass or not
    :type passed: bool
    :param measured: measured value
    :type measured: float
    :param tolerance: allowed value
    :type tolerance: float
    :param detail: free text
    :type detail: str
    """
    name: str
    group: CheckGroup
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
