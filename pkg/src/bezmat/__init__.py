"""Exact matrix arithmetic over rings where gcd computations are effective.

The package computes canonical diagonal and triangular forms with explicit
transforming matrices, gcds and lcms of matrices, divisor lattices of a
matrix together with their group structure, invariants attached to those
lattices, and solutions of one-sided polynomial matrix equations.  The two
supported coefficient domains are the integers and the rational-coefficient
polynomials in one variable.
"""

from .ring import (
    QQ,
    QX,
    ZZ,
    BezoutWitness,
    PolyQ,
    Ring,
    RingError,
    X,
    adequate_split,
    bezout_row,
    gcd_ext,
    normalize_assoc,
    residue_rep,
    ring_by_name,
    stable_range_coeff,
)
from .matrix import (
    ExactMatrix,
    MatrixError,
    block_diag,
    det_exact,
    hstack,
    inverse_unimodular,
    is_unimodular,
    minor_gcd,
    vstack,
)
from .normal_forms import (
    DMatrix,
    HermiteDecomposition,
    SmithDecomposition,
    complement_to_invertible,
    gcd_row,
    hermite,
    invariant_factors_oracle,
    matrix_with_prescribed_minors,
    reduce_column,
    smith,
)
from .factor import (
    factor_element,
    is_irreducible,
    multiplicities,
)
from .divisibility import (
    DivisorEnumeration,
    GenSetClassification,
    GenSetPattern,
    KazimirskiiElement,
    ReductionObstruction,
    classify_gen_set,
    divides_left,
    enumerate_divisors,
    factor_gl,
    gen_set_member,
    gen_set_pattern,
    kazimirskii_moduli,
    kazimirskii_set,
    reduce_lower_unitriangular,
    zelisko_member,
)
from .matrix_arith import (
    GcdLcmPair,
    GcdWitness,
    RightAnnihilator,
    SolutionLattice,
    StructuredGcd,
    StructuredLcm,
    Unsolvable,
    gcd_lcm_pair,
    gcd_smith_2x2,
    is_left_associate,
    is_right_associate,
    left_gcd,
    right_annihilator,
    right_gcd,
    solve_linear,
    structured_gcd,
    structured_lcm,
    unimodular_quotient,
)

__version__ = "0.1.0"
