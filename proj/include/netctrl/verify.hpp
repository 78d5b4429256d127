#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netctrl/matroid.hpp"
#include "netctrl/model.hpp"
#include "netctrl/ratfun.hpp"
#include "netctrl/structgraph.hpp"

namespace netctrl {

enum class ModeFilter { All, Unstable };

struct VerifyOptions {
  double eig_tol = kDefaultEigTol;
  double rank_tol = kDefaultRankTol;
  std::uint64_t seed = 1;
  std::size_t wellposed_trials = 3;
  std::size_t jobs = 1;
  ModeFilter modes = ModeFilter::All;
};

// Everything about an NDS that does not depend on the SCM.
struct Analysis {
  std::vector<AugmentedSubsystem> parts;
  SignalLayout layout;
  std::vector<SubsystemTfms> tfms;
  Spectrum spec;
  std::vector<Eigenvalue> modes;     // after the mode filter
  std::vector<ModeData> mode_data;   // one per entry of modes
};

Analysis analyze_parts(std::vector<AugmentedSubsystem> parts, const VerifyOptions& opts = {});
Analysis analyze(const NdsModel& nds, const VerifyOptions& opts = {});

struct ModeCheck {
  Eigenvalue lambda;
  std::size_t M_r = 0;
  std::size_t achieved = 0;  // intersection rank (networked) or union rank - (2k+n) + M_r (lumped)
  bool exact = false;
  [[nodiscard]] bool fum() const { return achieved < M_r; }
  [[nodiscard]] std::size_t shortfall() const { return M_r - achieved; }
};

struct PdumWitness {
  Cycle cycle;
  std::vector<std::string> names;
};

std::optional<PdumWitness> check_pdum(const NdsModel& nds);
std::optional<PdumWitness> check_pdum(const Analysis& a, const StructuredPattern& P_pattern);
// Same question on the lumped ACG of the diagonalized plant (vertices indexed by parameters).
std::optional<PdumWitness> check_pdum_lumped(const Analysis& a, const StructuredPattern& P_pattern);

// Per-mode Q_1 / Q_2i intersection ranks; a mode is an FUM when its rank falls short of M_ri.
std::vector<ModeCheck> check_fum_networked(const Analysis& a, const StructuredPattern& P_pattern,
                                           std::size_t jobs = 1);
// Per-mode union-rank test on the diagonalized lumped plant. achieved is reported on the
// M_r scale: M_r - (2k + n - union rank), clamped at 0.
std::vector<ModeCheck> check_fum_lumped(const Analysis& a, const StructuredPattern& P_pattern,
                                        const UnionOptions& union_opts = {});
// Numeric part H0^T and generic part T of the lumped union test at one mode; the mode is
// an FUM when the union rank falls below full_rank = n + 2k.
struct LumpedUnionProblem {
  std::optional<RatMatrix> exact;  // set for rational modes
  CMatrix numeric;
  StructuredPattern generic;
  std::size_t full_rank = 0;
};
LumpedUnionProblem lumped_union_problem(const Analysis& a, const StructuredPattern& P_pattern,
                                        const Eigenvalue& lambda);
std::vector<ModeCheck> fums_of(const std::vector<ModeCheck>& checks);

struct Verdict {
  bool structurally_controllable = false;
  std::optional<PdumWitness> pdum;
  std::optional<std::pair<std::string, std::string>> unreachable_lambda_edge;
  std::vector<ModeCheck> fums;
  std::vector<ModeCheck> per_mode;
  std::vector<Eigenvalue> spectrum;
  WellPosedness well_posedness;
  VerifyOptions options;
};

// Throws ModelError when the model is ill-posed.
Verdict check_structural_controllability(const NdsModel& nds, const VerifyOptions& opts = {});
// Reuses a precomputed analysis; P_pattern is the global (augmented) pattern.
Verdict check_structural_controllability(const Analysis& a, const StructuredPattern& P_pattern,
                                         const VerifyOptions& opts = {});

struct FeasibilityReport {
  bool feasible = false;
  bool condition_i = false;
  bool condition_ii = false;
  bool condition_iii = false;
  std::vector<bool> controllable_with_links;  // per subsystem, condition (i)
  std::size_t M_z = 0;
  std::size_t max_M_r = 0;
  bool some_gzu_nonzero = false;
  bool some_lambda_edge = false;
};

FeasibilityReport check_feasibility(const std::vector<SubsystemModel>& subsystems,
                                    const VerifyOptions& opts = {});
FeasibilityReport check_feasibility(const Analysis& a);

enum class ControllabilityTest { Pbh, Stacked };

struct RealizationResult {
  bool witness_found = false;
  std::size_t trials_run = 0;
  std::size_t redraws = 0;
  std::size_t value_set_size = 0;
  std::uint64_t seed = 0;
  std::map<int, Rational> witness;
  // Uncontrollable eigenvalues of the last realization (empty when a witness was found).
  std::vector<Eigenvalue> uncontrollable_modes;
};

RealizationResult randomized_realization_check(const NdsModel& nds, std::uint64_t seed, std::size_t trials,
                                               ControllabilityTest test = ControllabilityTest::Pbh);

// Controllability of a numeric pair. With Pbh, the uncontrollable eigenvalues are returned.
std::vector<Eigenvalue> uncontrollable_eigenvalues(const RatMatrix& A, const RatMatrix& B,
                                                   double rank_tol = kDefaultRankTol);
bool stacked_controllable(const RatMatrix& A, const RatMatrix& B);

}  // namespace netctrl
