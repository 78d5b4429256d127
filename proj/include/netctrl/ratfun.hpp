#pragma once

#include <optional>
#include <vector>

#include "netctrl/linalg.hpp"
#include "netctrl/model.hpp"
#include "netctrl/poly.hpp"

namespace netctrl {

inline constexpr double kDefaultEigTol = 1e-6;
inline constexpr double kDefaultRankTol = 1e-9;

using PolyMatrix = Matrix<Poly>;

// (lambda I - A)^{-1} = N(lambda) / d(lambda).
struct Resolvent {
  PolyMatrix N;
  Poly d;  // characteristic polynomial, monic
};

// Faddeev-LeVerrier over Q.
Resolvent resolvent(const RatMatrix& A);

// numerators / denominator + affine_part, entrywise.
struct RatFunMatrix {
  PolyMatrix numerators;
  Poly denominator;
  RatMatrix affine_part;

  [[nodiscard]] std::size_t rows() const { return affine_part.rows(); }
  [[nodiscard]] std::size_t cols() const { return affine_part.cols(); }
  [[nodiscard]] Rational eval(std::size_t r, std::size_t c, const Rational& lambda) const;
  [[nodiscard]] Complex eval(std::size_t r, std::size_t c, Complex lambda) const;
};

enum class EntryKind { Zero, Constant, LambdaDependent };

struct EntryClass {
  EntryKind kind = EntryKind::Zero;
  Rational value;  // meaningful for Constant
};

using ClassMatrix = Matrix<EntryClass>;

EntryClass classify(const Poly& strictly_proper_numerator, const Rational& affine);

struct Tfm {
  RatFunMatrix G;
  ClassMatrix classes;
};

struct SubsystemTfms {
  Tfm zv;  // m_z x m_v
  Tfm zu;  // m_z x m_u
};

// A_zx (lambda I - A_xx)^{-1} [A_xv B_xu] + [A_zv B_zu], classified entrywise.
SubsystemTfms subsystem_tfms(const AugmentedSubsystem& aug);

struct Eigenvalue {
  Complex value;
  std::optional<Rational> exact;  // set when the eigenvalue is a rational number
};

// Distinct eigenvalues of A: roots of the square-free part of the exact characteristic
// polynomial, polished by Newton steps; rational roots are recovered exactly.
std::vector<Eigenvalue> eigenvalues(const RatMatrix& A);

// |a - b| <= tol * max(1, |a|, |b|): absolute near the origin, relative elsewhere.
bool same_eigenvalue(Complex a, Complex b, double tol);
// Merges values within tolerance (an exact member wins) and sorts by (re, im).
std::vector<Eigenvalue> cluster_eigenvalues(std::vector<Eigenvalue> values, double tol);

struct Spectrum {
  std::vector<Eigenvalue> values;
  // members[j]: indices into values that are eigenvalues of subsystem j.
  std::vector<std::vector<std::size_t>> members;
  double tol = kDefaultEigTol;
};

Spectrum spectrum(const std::vector<AugmentedSubsystem>& parts, double tol = kDefaultEigTol);

// Keeps the modes with Re(lambda) >= -1e-9.
std::vector<Eigenvalue> unstable_modes(const std::vector<Eigenvalue>& values);

// [[lambda I - A_xx, B_xu], [-A_zx, B_zu]].
RatMatrix mode_matrix(const AugmentedSubsystem& part, const Rational& lambda);
CMatrix mode_matrix(const AugmentedSubsystem& part, Complex lambda);

struct ModeData {
  Eigenvalue lambda;
  bool exact = false;      // exact rational nullspaces were used
  double rank_tol = kDefaultRankTol;
  std::vector<std::size_t> m_r;  // per subsystem
  std::size_t M_r = 0;
  // Block-diagonal, columns in global (augmented) v / z / x numbering; rows grouped by subsystem.
  CMatrix T, Z, Y;
  std::optional<RatMatrix> T_exact, Z_exact, Y_exact;
};

ModeData mode_data(const std::vector<AugmentedSubsystem>& parts, const Eigenvalue& lambda,
                   double rank_tol = kDefaultRankTol);

// m_x - rank([lambda I - A, B]).
std::size_t pbh_deficiency(const RatMatrix& A, const RatMatrix& B, const Eigenvalue& lambda,
                           double rank_tol = kDefaultRankTol);

}  // namespace netctrl
