"""cofill: filling and cofilling invariants of finitely presented groups.

Abelianized Dehn functions, cofilling functions, and bounded primitives of
2-cocycles, computed as exact rational linear programs on truncations of the
Cayley 2-complex.
"""

__version__ = "0.1.0"

from .presentation import Presentation, parse_presentation
from .oracles import (
    AbelianizedOracle,
    DehnSmallCancellationOracle,
    FiniteTableOracle,
    FreeGroupOracle,
    Oracle,
)
from .cayley import CayleyBall, build_ball, cycle_basis, enumerate_relations
from .foxcalc import (
    FillCertificate,
    GroupRingVec,
    GroupRingScalar,
    boundary1,
    boundary2,
    cycle_of_relation,
    fox_theta,
)
from .filling import (
    DualCheckReport,
    FillReport,
    GrowthTable,
    cof,
    decompose_cycle,
    dehn_ab,
    dual_norm_check,
    fill_int,
    fill_real,
    stable_fill,
)
from .primitive import (
    BoundFunction,
    CocycleData,
    FiniteComplex,
    check_condition_ii,
    check_thm4_equivalence,
    cocycle_norm,
    complex_primitive,
    find_primitive,
)
from .groups import builtin_group, make_oracle, octahedron_complex

__all__ = [name for name in dir() if not name.startswith("_")]
