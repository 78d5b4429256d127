#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "netctrl/linalg.hpp"
#include "netctrl/model.hpp"

namespace netctrl {

// Column independence tests. Ground set elements are column indices.
bool numeric_independent(const RatMatrix& m, const std::vector<std::size_t>& J);
// Singular values above abs_tol count toward the rank.
bool numeric_independent(const CMatrix& m, const std::vector<std::size_t>& J, double abs_tol);
// Structural rank: a matching of the columns J into rows along free entries.
bool generic_independent(const StructuredPattern& p, const std::vector<std::size_t>& J);
std::size_t generic_rank(const StructuredPattern& p, const std::vector<std::size_t>& J);
std::size_t generic_rank(const StructuredPattern& p);

// Maximum bipartite matching (Hopcroft-Karp); adj[l] lists right vertices of left vertex l.
std::size_t max_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t n_right);

// Q_1 = [P^T I] as a pattern over M_v + M_z columns.
StructuredPattern q1_pattern(const StructuredPattern& P);

class IndependenceOracle {
 public:
  enum class Kind { ExactColumns, FloatColumns, GenericPattern };

  static IndependenceOracle numeric(RatMatrix m);
  // abs_tol = rel_tol * max(1, sigma_max(m)).
  static IndependenceOracle numeric(CMatrix m, double rel_tol);
  static IndependenceOracle generic(StructuredPattern p);

  [[nodiscard]] std::size_t ground_size() const { return ground_; }
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool independent(const std::vector<std::size_t>& J) const;
  [[nodiscard]] std::size_t rank() const;

 private:
  IndependenceOracle() = default;
  [[nodiscard]] bool compute(const std::vector<std::size_t>& J) const;

  Kind kind_ = Kind::ExactColumns;
  std::size_t ground_ = 0;
  std::variant<RatMatrix, CMatrix, StructuredPattern> data_;
  double abs_tol_ = 0.0;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

struct CommonIndependentSet {
  std::vector<std::size_t> indices;  // sorted
  std::size_t certified_rank = 0;
};

// Exchange-graph augmenting paths (shortest paths keep every step independent in both).
CommonIndependentSet matroid_intersection_rank(const IndependenceOracle& o1, const IndependenceOracle& o2);

struct UnionOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 3;
  double rel_tol = 1e-9;  // only for floating numeric parts
};

// Rank of M(numeric) u M(generic) over the shared columns, by random substitution into
// the generic rows and rank of the stack.
std::size_t matroid_union_rank(const RatMatrix& numeric_part, const StructuredPattern& generic_part,
                               const UnionOptions& opts = {});
std::size_t matroid_union_rank(const CMatrix& numeric_part, const StructuredPattern& generic_part,
                               const UnionOptions& opts = {});

// max over numerically independent Y of |Y| + generic rank of the complement. Ground <= 20.
std::size_t matroid_union_rank_exhaustive(const RatMatrix& numeric_part, const StructuredPattern& generic_part);
std::size_t matroid_union_rank_exhaustive(const CMatrix& numeric_part, const StructuredPattern& generic_part,
                                          double rel_tol = 1e-9);

}  // namespace netctrl
