from ._typing import CollisionTable, ScatterTable, CollisionTables, gather
from .tables import build_collision_table, build_scatter_table, build_tables, load_collision_table, \
    load_scatter_table
from .operators import q_b, q_d, entropy_dissipation_b, entropy_dissipation_d, entropy
from .projection import conserve_project, invariant_basis
