from .games import AffineGame, BilinearGame, gen_bilinear_game, gen_strongly_monotone_game
from .kernel import (
    KernelLogistic,
    KernelTestSet,
    make_separable_2d,
    rbf_cross,
    rbf_gram,
    rbf_kernel_problem,
)
from .least_squares import LeastSquares, gen_least_squares_interpolated
from .libsvm import LibsvmData, LibsvmParseError, format_libsvm, parse_libsvm, read_libsvm, write_libsvm
from .matrix_factorization import MatrixFactorization, gen_matrix_factorization
from .quadratic import DiagQuadratic, diag_quadratic

__all__ = [
    "AffineGame",
    "BilinearGame",
    "DiagQuadratic",
    "KernelLogistic",
    "KernelTestSet",
    "LeastSquares",
    "LibsvmData",
    "LibsvmParseError",
    "MatrixFactorization",
    "diag_quadratic",
    "format_libsvm",
    "gen_bilinear_game",
    "gen_least_squares_interpolated",
    "gen_matrix_factorization",
    "gen_strongly_monotone_game",
    "make_separable_2d",
    "parse_libsvm",
    "rbf_cross",
    "rbf_gram",
    "rbf_kernel_problem",
    "read_libsvm",
    "write_libsvm",
]
