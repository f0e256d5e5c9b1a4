from glocal.fem.mesh import (
    Material,
    MeshModel,
    build_structured_mesh,
    extract_submesh,
    punch_hole,
    apply_inclusion,
    nodes_on_plane,
)
from glocal.fem.assembly import (
    AssembledSystem,
    assemble_poisson,
    assemble_elasticity,
    element_stresses,
)
