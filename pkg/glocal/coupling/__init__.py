from glocal.coupling.condensation import (
    CondensedOperator,
    condense,
    condense_matrix,
    dirichlet_to_neumann,
    expand_interior,
)
from glocal.coupling.transfer import build_transfer
from glocal.coupling.topology import (
    PatchDefinition,
    PatchPair,
    ComplementDomain,
    SubdomainOperators,
    CouplingScenario,
    build_assembly_operators,
    assemble_global_schur,
    hat_fine_operator,
    hat_rhs,
    build_scenario,
    recover_fields,
)
from glocal.coupling.scenarios import (
    chain_1d,
    two_patch_2d,
    cube_grid_3d,
    imbalanced_grid,
    make_scenario,
)
