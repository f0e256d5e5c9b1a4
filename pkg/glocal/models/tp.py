import enum


class TypeProblem(enum.StrEnum):
    Thermal = "thermal"
    Elasticity = "elasticity"


class TypeGeometry(enum.StrEnum):
    Chain1D = "chain-1d"
    TwoPatch2D = "two-patch-2d"
    CubeGrid3D = "cube-grid-3d"
    ImbalancedGrid = "imbalanced-grid"


class TypeVariant(enum.StrEnum):
    SyncFixed = "sync-fixed"
    SyncAitken = "sync-aitken"
    AsyncSim = "async-sim"
    AsyncConcurrent = "async-concurrent"
    SyncConcurrent = "sync-concurrent"


class TypeRelaxation(enum.StrEnum):
    Fixed = "fixed"
    Aitken = "aitken"


class TypeSchedule(enum.StrEnum):
    AllZero = "all-zero"
    DeterministicTable = "deterministic-table"
    RandomBounded = "random-bounded"


class TypeSuite(enum.StrEnum):
    Paper2D = "paper-2d"
    WeakScaling = "weak-scaling"
    Imbalance = "imbalance"


class TypeAlteration(enum.StrEnum):
    Nothing = "none"
    Hole = "hole"
    Inclusion = "inclusion"
