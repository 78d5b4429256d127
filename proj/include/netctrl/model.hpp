#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "netctrl/matrix.hpp"

namespace netctrl {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Position = std::pair<std::size_t, std::size_t>;  // 0-based (row, col)

// {0,*} pattern; every free entry carries its own parameter id.
class StructuredPattern {
 public:
  StructuredPattern() = default;
  StructuredPattern(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  // Every entry free, ids first_id, first_id+1, ... in row-major order.
  static StructuredPattern full(std::size_t rows, std::size_t cols, int first_id = 0);
  static StructuredPattern from_positions(std::size_t rows, std::size_t cols,
                                          const std::vector<Position>& free, int first_id = 0);

  void set_free(std::size_t r, std::size_t c, int id);
  void clear(std::size_t r, std::size_t c);

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool is_free(std::size_t r, std::size_t c) const { return entries_.count({r, c}) > 0; }
  [[nodiscard]] std::optional<int> param(std::size_t r, std::size_t c) const;
  [[nodiscard]] std::size_t free_count() const { return entries_.size(); }
  // Row-major order.
  [[nodiscard]] std::vector<Position> positions() const;
  [[nodiscard]] const std::map<Position, int>& entries() const { return entries_; }

  // Numeric matrix with values[id] substituted at each free entry.
  [[nodiscard]] RatMatrix substitute(const std::map<int, Rational>& values) const;

  friend bool operator==(const StructuredPattern& a, const StructuredPattern& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::map<Position, int> entries_;
};

// Subsystem description with its LFT parameter block. A 0x0 H means no block.
struct SubsystemModel {
  RatMatrix A_xx0, A_xv0, B_xu0, A_zx0, A_zv0, B_zu0, C_yx0, C_yv0, D_yu0;
  RatMatrix E1, E2, E3, F1, F2, F3, H;
  std::variant<StructuredPattern, RatMatrix> param_block = StructuredPattern();

  [[nodiscard]] std::size_t m_x() const { return A_xx0.rows(); }
  [[nodiscard]] std::size_t m_u() const { return B_xu0.cols(); }
  [[nodiscard]] std::size_t m_y() const { return C_yx0.rows(); }
  [[nodiscard]] std::size_t m_v0() const { return A_xv0.cols(); }
  [[nodiscard]] std::size_t m_z0() const { return A_zx0.rows(); }
  // Rows of P^(i) (= cols of H) and cols of P^(i) (= rows of H).
  [[nodiscard]] std::size_t m_vp() const { return H.cols(); }
  [[nodiscard]] std::size_t m_zp() const { return H.rows(); }
  [[nodiscard]] bool has_free_block() const;
  [[nodiscard]] bool has_fixed_block() const;

  // Zero-filled subsystem with the given dimensions and no parameter block.
  static SubsystemModel zeros(std::size_t m_x, std::size_t m_u, std::size_t m_v0, std::size_t m_z0,
                              std::size_t m_y = 0);

  // Throws ModelError naming the first inconsistent block.
  void validate() const;
};

// The six analysis matrices of one subsystem.
struct AugmentedSubsystem {
  RatMatrix A_xx, A_xv, B_xu, A_zx, A_zv, B_zu;
  // Leading part of v / z that comes from the original interconnection signals.
  std::size_t m_v0 = 0;
  std::size_t m_z0 = 0;

  [[nodiscard]] std::size_t m_x() const { return A_xx.rows(); }
  [[nodiscard]] std::size_t m_u() const { return B_xu.cols(); }
  [[nodiscard]] std::size_t m_v() const { return A_xv.cols(); }
  [[nodiscard]] std::size_t m_z() const { return A_zx.rows(); }
};

// Free block: border the original matrices with E, F, H.
AugmentedSubsystem augment_subsystem(const SubsystemModel& sub);
// Fixed block: fold P^(i) in through the lower LFT. Throws if det(I - H P^(i)) = 0.
AugmentedSubsystem close_subsystem(const SubsystemModel& sub);
// Dispatches on the parameter block (no block is treated as an empty free block).
AugmentedSubsystem analysis_form(const SubsystemModel& sub);

struct NdsModel {
  std::vector<SubsystemModel> subsystems;
  StructuredPattern scm;  // (sum m_v0) x (sum m_z0)

  [[nodiscard]] std::size_t total_v0() const;
  [[nodiscard]] std::size_t total_z0() const;
  void validate() const;
};

struct Diagonalization {
  std::size_t k = 0;
  std::vector<std::size_t> rows;  // rows[l]: row of the l-th free entry (U column l = e_rows[l])
  std::vector<std::size_t> cols;  // cols[l]: column of the l-th free entry (V row l = e_cols[l]^T)
  std::vector<int> ids;
  RatMatrix U;                    // M_v x k
  RatMatrix V;                    // k x M_z

  [[nodiscard]] StructuredPattern reconstruct(std::size_t m_v, std::size_t m_z) const;
};

Diagonalization diagonalize_parameters(const StructuredPattern& p);

// Index maps between per-subsystem signals and the global (augmented) numbering.
struct SignalLayout {
  std::vector<std::size_t> x_offset, u_offset, v_offset, z_offset;  // per subsystem
  std::vector<std::size_t> v0_offset, z0_offset;                    // offsets into the SCM
  std::size_t n_x = 0, n_u = 0, n_v = 0, n_z = 0, n_v0 = 0, n_z0 = 0;

  // Global v (resp. z) index of the SCM row (resp. column).
  [[nodiscard]] std::size_t v_of_scm_row(std::size_t row) const;
  [[nodiscard]] std::size_t z_of_scm_col(std::size_t col) const;
  // SCM row/col of a global v/z index, if that signal is an original one.
  [[nodiscard]] std::optional<std::size_t> scm_row_of_v(std::size_t v) const;
  [[nodiscard]] std::optional<std::size_t> scm_col_of_z(std::size_t z) const;
  // (subsystem, 0-based local index) of a global index.
  [[nodiscard]] std::pair<std::size_t, std::size_t> locate_v(std::size_t v) const;
  [[nodiscard]] std::pair<std::size_t, std::size_t> locate_z(std::size_t z) const;
  [[nodiscard]] std::pair<std::size_t, std::size_t> locate_u(std::size_t u) const;
};

SignalLayout signal_layout(const std::vector<AugmentedSubsystem>& parts);

struct LumpedPlant {
  std::vector<AugmentedSubsystem> parts;
  SignalLayout layout;
  RatMatrix A_xx, A_xv, B_xu, A_zx, A_zv, B_zu;
  StructuredPattern P_pattern;  // n_v x n_z, laid out by signal blocks
  std::optional<Diagonalization> diag;
};

LumpedPlant assemble_lumped(const NdsModel& nds, bool diagonalize = true);

// Lumped (A, B) for the given parameter values; nullopt if I - A_zv P is singular.
std::optional<std::pair<RatMatrix, RatMatrix>> realize(const LumpedPlant& plant,
                                                       const std::map<int, Rational>& values);

struct WellPosedness {
  bool well_posed = false;
  std::size_t trials_run = 0;
  std::uint64_t seed = 0;
  std::map<int, Rational> witness;  // parameter values of the successful trial
  std::string detail;
};

bool is_well_posed_at(const NdsModel& nds, const std::map<int, Rational>& values);
WellPosedness check_well_posedness(const NdsModel& nds, std::size_t trials, std::uint64_t seed);

// All parameter ids of the model (SCM first, then free subsystem blocks).
std::vector<int> parameter_ids(const NdsModel& nds);

}  // namespace netctrl
