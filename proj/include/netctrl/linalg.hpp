#pragma once

#include <optional>

#include <Eigen/Dense>

#include "netctrl/matrix.hpp"

namespace netctrl {

using CMatrix = Eigen::MatrixXcd;

// Exact routines over Q.

// Fraction-free (Bareiss) elimination on the integer-scaled rows.
std::size_t rank(const RatMatrix& m);
Rational determinant(const RatMatrix& m);
std::optional<RatMatrix> inverse(const RatMatrix& m);
// Rows form a basis of { y : y * m = 0 }, taken from the reduced row echelon form of m^T.
RatMatrix left_nullspace(const RatMatrix& m);

CMatrix to_complex(const RatMatrix& m);

// Floating routines.

double max_singular_value(const CMatrix& m);
// Number of singular values strictly above abs_tol.
std::size_t numeric_rank(const CMatrix& m, double abs_tol);
// Rows form an orthonormal basis of { y : y * m = 0 }; singular values at or below
// rel_tol * sigma_max count as zero.
CMatrix left_nullspace(const CMatrix& m, double rel_tol);

}  // namespace netctrl
