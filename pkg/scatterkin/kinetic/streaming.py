import numpy as np

from .._typing import KineticError, TransportScheme
from ..grid import VelocityGrid, SpatialGrid


def max_speed(g: VelocityGrid, grid: SpatialGrid) -> float:
    """
    largest velocity component along the spatial axes
    """
    return float(np.max(np.abs(g.nodes[:, :grid.dim])))


def upwind_transport(values: np.ndarray, dt: float, epsilon: float, g: VelocityGrid, grid: SpatialGrid) -> np.ndarray:
    """
    First order upwind finite volume step of dt F + v.grad(F) / epsilon = 0, periodic.

    :param values: shape (*grid.shape, N)
    """
    courant_total = dt / epsilon * max_speed(g, grid) * grid.dim / grid.dx
    if courant_total > 1 + 1e-12:
        raise KineticError(f"upwind transport violates the CFL condition, courant number {courant_total:.4f}")
    out = values.copy()
    for axis in grid.axes:
        speed = g.nodes[:, axis]
        courant = dt / epsilon * speed / grid.dx
        backward = values - grid.shift(values, -1, axis)
        forward = grid.shift(values, 1, axis) - values
        out -= np.where(speed > 0, courant * backward, courant * forward)
    return out


def spectral_transport(values: np.ndarray, dt: float, epsilon: float, g: VelocityGrid, grid: SpatialGrid) -> np.ndarray:
    """
    exact periodic shift by v dt / epsilon through the discrete Fourier transform
    """
    spatial_axes = grid.axes
    transformed = np.fft.fftn(values, axes=spatial_axes)
    k = grid.wavenumbers()
    phase = sum(k[a][..., None] * g.nodes[:, a] for a in grid.axes) * (dt / epsilon)
    return np.real(np.fft.ifftn(transformed * np.exp(-1j * phase), axes=spatial_axes))


def free_streaming(values: np.ndarray,
                   dt: float,
                   epsilon: float,
                   scheme: TransportScheme,
                   g: VelocityGrid,
                   grid: SpatialGrid) -> np.ndarray:
    match scheme:
        case TransportScheme.UPWIND:
            return upwind_transport(values, dt, epsilon, g, grid)
        case TransportScheme.SPECTRAL:
            return spectral_transport(values, dt, epsilon, g, grid)
        case _:
            raise KineticError(f"unknown transport scheme {scheme}")
