#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "netctrl/model.hpp"
#include "netctrl/structgraph.hpp"
#include "netctrl/verify.hpp"

namespace netctrl {

class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ground set indices below are 1-based: 1..M_v are internal inputs, M_v+1..M_v+M_z
// (the set B) are the identity columns of Q_1, one per internal output.

// rank of [Y_i Z_i] restricted to the columns J.
std::size_t q2_rank(const ModeData& md, const std::vector<std::size_t>& J);
// sum over modes of rank([Y_iJ Z_i]), J a subset of 1..M_v.
std::size_t g_value(const std::vector<std::size_t>& J, const std::vector<ModeData>& modes);

struct GreedyRows {
  std::vector<std::size_t> order;  // selection order
  std::vector<std::size_t> j_grd;  // sorted
  std::size_t target = 0;          // sum of M_ri
  std::size_t g_before_last = 0;   // g(J_{T-1})
};

// Throws DesignError when g saturates below the target.
GreedyRows greedy_link_rows(const std::vector<ModeData>& modes);

std::vector<std::vector<std::size_t>> extract_cover_sets(const std::vector<std::size_t>& j_grd,
                                                         const std::vector<ModeData>& modes);

struct ColoringGraph {
  std::vector<std::size_t> vertices;                       // sorted
  std::set<std::pair<std::size_t, std::size_t>> edges;     // (a, b) with a < b, before coloring
  std::set<std::pair<std::size_t, std::size_t>> removed;   // edges dropped by the saturation rule
  std::map<std::size_t, std::vector<std::size_t>> colors;  // vertex -> colors (1-based)
  std::vector<std::size_t> precolored;
  std::vector<std::size_t> order;                          // coloring order after pre-coloring
};

struct ColoringResult {
  ColoringGraph graph;
  StructuredPattern phi;                // M_v x M_z
  std::vector<Position> links;          // in coloring order
};

// cover_sets[i] must have size M_r[i].
ColoringResult greedy_color(const std::vector<std::vector<std::size_t>>& cover_sets,
                            const std::vector<std::size_t>& M_r, std::size_t M_v, std::size_t M_z);

struct PdumElimination {
  std::size_t p_ius = 0;
  std::vector<Position> links;  // SCM positions
};

// Adds one link into each unreachable_lambda_scc_roots component; g gains the link edges.
PdumElimination eliminate_pdums(StructureGraph& g, const SignalLayout& layout);

struct BoundReport {
  std::size_t M_rmax = 0;
  std::size_t M_def = 0;
  std::size_t p_ius = 0;
  std::size_t j_grd_size = 0;
  std::size_t links = 0;
  double factor = 0.0;  // 2 max(M_rmax,1) (1 + ln max(M_def,1))
  double bound = 0.0;   // factor * (p_ius + |J_grd|)
  [[nodiscard]] bool holds() const { return static_cast<double>(links) <= bound + 1e-9; }
};

struct DesignResult {
  ModeFilter mode_filter = ModeFilter::All;
  bool feasible = false;
  FeasibilityReport feasibility;
  std::vector<Eigenvalue> modes;
  std::vector<std::size_t> M_r;
  StructuredPattern phi;
  std::vector<Position> stage1_links;
  std::vector<Position> stage2_links;
  GreedyRows greedy;
  std::vector<std::vector<std::size_t>> cover_sets;
  ColoringGraph coloring;
  BoundReport bound_report;
  std::optional<Verdict> verdict;  // re-check of the designed network
};

// Subsystems may carry fixed parameter blocks; free blocks are rejected.
DesignResult design_topology(const std::vector<SubsystemModel>& subsystems, ModeFilter filter,
                             VerifyOptions opts = {});

// sum over modes and subsystems of m_x - rank([lambda I - A_xx, B_xu]).
std::size_t total_deficiency(const std::vector<AugmentedSubsystem>& parts, const std::vector<Eigenvalue>& modes,
                             double rank_tol = kDefaultRankTol);

// SCM pattern as a global pattern over the layout's v / z numbering.
StructuredPattern global_pattern(const SignalLayout& layout, const StructuredPattern& scm);

struct BruteForceResult {
  std::optional<StructuredPattern> phi;
  std::size_t positions = 0;
  std::vector<std::size_t> checked_per_level;
};

constexpr std::size_t kBruteForceMaxPositions = 36;

// Smallest structurally controllable SCM in canonical order. Without max_links the search is
// exhaustive and refuses more than kBruteForceMaxPositions candidate positions.
BruteForceResult brute_force_min_topology(const std::vector<SubsystemModel>& subsystems,
                                          std::optional<std::size_t> max_links = std::nullopt,
                                          VerifyOptions opts = {});

}  // namespace netctrl
