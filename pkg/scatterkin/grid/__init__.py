from ._typing import VelocityGrid, SpatialGrid, MacroFields, MomentWeight, DistributionField
from .velocity import build_velocity_grid, load_grid_json, lebedev_nodes, product_gauss_nodes, \
    interpolation_stencil
from .moments import maxwellian, maxwellian_values, moment, weight_values, macro_from_distribution
