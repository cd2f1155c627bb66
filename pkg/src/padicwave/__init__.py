"""Exact p-adic wavelet analysis: Haar systems, orthonormality checks and reduction."""

__version__ = "0.1.0"

from .padic import (
    DigitExpansion,
    InvalidInput,
    OutOfSupport,
    PAdicRational,
    character,
    coset_index,
    digit_expansion,
    frac_part,
    index_to_rep,
    padic_norm,
)
from .schwartz import (
    MixedPrimes,
    TestFunction,
    eigen_project,
    evaluate,
    fourier,
    indicator_Zp,
    inner_product,
    integral,
    inverse_fourier,
    is_periodic,
    linear_combine,
    project_V,
    scaled_translate,
    translate,
    translation_eigenvalue,
    w_part,
)
from .wavelets import (
    CheckReport,
    VectorFunction,
    WaveletIndex,
    coarse_energies,
    lemma4_energy,
    orthonormality_check,
    parseval_check,
    rank_bound_check,
    system_member,
    wpart_span_dimension,
    zero_mean_check,
)
from .linalg import dft_matrix, is_unitary
from .constructions import (
    basic_haar,
    example_3_3,
    merge,
    random_damaged,
    split,
    theorem3_counterexample,
    unitary_mix,
)
from .chain import EquivalenceChain, verify_chain
from .reduction import (
    EigenClassification,
    Refutation,
    ShapeError,
    classify_eigen,
    find_lower_combo,
    haar_coordinates,
    is_standard_haar,
    prop7_step,
    prop10_step,
    prop11_regroup,
    reduce_to_haar,
    reducibility_obstruction,
    solve_A0,
)
from .formats import FormatError, read_pwcert, read_pwf, read_pwv, write_pwcert, write_pwf, write_pwv
