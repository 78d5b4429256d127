#include "netctrl/verify.hpp"

#include <algorithm>
#include <random>

#include "netctrl/parallel.hpp"

namespace netctrl {
namespace {

std::vector<AugmentedSubsystem> analysis_parts(const NdsModel& nds) {
  std::vector<AugmentedSubsystem> parts;
  for (const auto& s : nds.subsystems) parts.push_back(analysis_form(s));
  return parts;
}

std::vector<SubsystemTfms> all_tfms(const std::vector<AugmentedSubsystem>& parts) {
  std::vector<SubsystemTfms> out;
  for (const auto& p : parts) out.push_back(subsystem_tfms(p));
  return out;
}

PdumWitness witness_of(const StructureGraph& g, Cycle cycle) {
  PdumWitness w;
  for (auto v : cycle) w.names.push_back(g.name(v));
  w.cycle = std::move(cycle);
  return w;
}

// Class of the block-diagonal TFM at global (row z, col c) where c indexes v or u.
const EntryClass& global_class(const Analysis& a, bool zu, std::size_t z, std::size_t c) {
  static const EntryClass kZero{};
  auto [i, zl] = a.layout.locate_z(z);
  auto [j, cl] = zu ? a.layout.locate_u(c) : a.layout.locate_v(c);
  if (i != j) return kZero;
  return zu ? a.tfms[i].zu.classes(zl, cl) : a.tfms[i].zv.classes(zl, cl);
}

}  // namespace

Analysis analyze_parts(std::vector<AugmentedSubsystem> parts, const VerifyOptions& opts) {
  Analysis a;
  a.parts = std::move(parts);
  a.layout = signal_layout(a.parts);
  a.tfms = all_tfms(a.parts);
  a.spec = spectrum(a.parts, opts.eig_tol);
  a.modes = opts.modes == ModeFilter::Unstable ? unstable_modes(a.spec.values) : a.spec.values;
  a.mode_data.resize(a.modes.size());
  parallel_for(a.modes.size(), opts.jobs,
               [&](std::size_t i) { a.mode_data[i] = mode_data(a.parts, a.modes[i], opts.rank_tol); });
  return a;
}

Analysis analyze(const NdsModel& nds, const VerifyOptions& opts) {
  nds.validate();
  return analyze_parts(analysis_parts(nds), opts);
}

// PDUM

std::optional<PdumWitness> check_pdum(const Analysis& a, const StructuredPattern& P_pattern) {
  StructureGraph g = build_nacg(a.parts, a.tfms, P_pattern);
  auto cycle = find_input_unreachable_lambda_cycle(g);
  if (!cycle) return std::nullopt;
  return witness_of(g, std::move(*cycle));
}

std::optional<PdumWitness> check_pdum(const NdsModel& nds) {
  LumpedPlant plant = assemble_lumped(nds, false);
  StructureGraph g = build_nacg(plant.parts, all_tfms(plant.parts), plant.P_pattern);
  auto cycle = find_input_unreachable_lambda_cycle(g);
  if (!cycle) return std::nullopt;
  return witness_of(g, std::move(*cycle));
}

std::optional<PdumWitness> check_pdum_lumped(const Analysis& a, const StructuredPattern& P_pattern) {
  Diagonalization d = diagonalize_parameters(P_pattern);
  // G_zv^S = V G_zv U: entry (l1, l2) is G_zv(col of l1, row of l2). G_zu^S = V G_zu.
  ClassMatrix gzv(d.k, d.k), gzu(d.k, a.layout.n_u);
  for (std::size_t l1 = 0; l1 < d.k; ++l1) {
    for (std::size_t l2 = 0; l2 < d.k; ++l2) gzv(l1, l2) = global_class(a, false, d.cols[l1], d.rows[l2]);
    for (std::size_t u = 0; u < a.layout.n_u; ++u) gzu(l1, u) = global_class(a, true, d.cols[l1], u);
  }
  StructureGraph g = build_acg(gzv, gzu);
  auto cycle = find_input_unreachable_lambda_cycle(g);
  if (!cycle) return std::nullopt;
  return witness_of(g, std::move(*cycle));
}

// FUM

std::vector<ModeCheck> check_fum_networked(const Analysis& a, const StructuredPattern& P_pattern,
                                           std::size_t jobs) {
  const auto q1 = IndependenceOracle::generic(q1_pattern(P_pattern));
  std::vector<ModeCheck> out(a.mode_data.size());
  parallel_for(a.mode_data.size(), jobs, [&](std::size_t i) {
    const ModeData& md = a.mode_data[i];
    ModeCheck mc{md.lambda, md.M_r, 0, md.exact};
    if (md.M_r > 0) {
      if (md.exact) {
        auto q2 = IndependenceOracle::numeric(hstack(*md.Y_exact, *md.Z_exact));
        mc.achieved = matroid_intersection_rank(q1, q2).certified_rank;
      } else {
        CMatrix yz(md.Y.rows(), md.Y.cols() + md.Z.cols());
        yz << md.Y, md.Z;
        auto q2 = IndependenceOracle::numeric(std::move(yz), md.rank_tol);
        mc.achieved = matroid_intersection_rank(q1, q2).certified_rank;
      }
    }
    out[i] = mc;
  });
  return out;
}

LumpedUnionProblem lumped_union_problem(const Analysis& a, const StructuredPattern& P_pattern,
                                        const Eigenvalue& lambda) {
  Diagonalization d = diagonalize_parameters(P_pattern);
  std::vector<RatMatrix> axx, axv, bxu, azx, azv, bzu;
  for (const auto& p : a.parts) {
    axx.push_back(p.A_xx);
    axv.push_back(p.A_xv);
    bxu.push_back(p.B_xu);
    azx.push_back(p.A_zx);
    azv.push_back(p.A_zv);
    bzu.push_back(p.B_zu);
  }
  const RatMatrix A = block_diag(axx);
  const RatMatrix B = block_diag(bxu);
  const std::size_t n = A.rows(), q = B.cols(), k = d.k;

  // H0 = [[lambda I - A, B, A_xv U], [-V A_zx, V B_zu, V A_zv U], [0, 0, I_k]]
  RatMatrix H(n + 2 * k, n + q + k);
  H.set_block(0, 0, -A);
  H.set_block(0, n, B);
  H.set_block(0, n + q, block_diag(axv) * d.U);
  H.set_block(n, 0, -(d.V * block_diag(azx)));
  H.set_block(n, n, d.V * block_diag(bzu));
  H.set_block(n, n + q, d.V * block_diag(azv) * d.U);
  H.set_block(n + k, n + q, RatMatrix::identity(k));

  LumpedUnionProblem out;
  out.full_rank = n + 2 * k;
  out.generic = StructuredPattern(k, n + 2 * k);
  int id = 0;
  for (std::size_t l = 0; l < k; ++l) {
    out.generic.set_free(l, n + l, id++);
    out.generic.set_free(l, n + k + l, id++);
  }
  if (lambda.exact) {
    for (std::size_t j = 0; j < n; ++j) H(j, j) += *lambda.exact;
    out.exact = H.transpose();
    out.numeric = to_complex(*out.exact);
  } else {
    CMatrix Hc = to_complex(H);
    for (std::size_t j = 0; j < n; ++j) Hc(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += lambda.value;
    out.numeric = Hc.transpose();
  }
  return out;
}

std::vector<ModeCheck> check_fum_lumped(const Analysis& a, const StructuredPattern& P_pattern,
                                        const UnionOptions& union_opts) {
  std::vector<ModeCheck> out;
  for (std::size_t i = 0; i < a.modes.size(); ++i) {
    const Eigenvalue& lam = a.modes[i];
    const std::size_t M_r = i < a.mode_data.size() ? a.mode_data[i].M_r : 0;
    LumpedUnionProblem pr = lumped_union_problem(a, P_pattern, lam);
    const std::size_t union_rank = pr.exact ? matroid_union_rank(*pr.exact, pr.generic, union_opts)
                                            : matroid_union_rank(pr.numeric, pr.generic, union_opts);
    const std::size_t deficit = pr.full_rank - std::min(pr.full_rank, union_rank);
    out.push_back({lam, M_r, M_r >= deficit ? M_r - deficit : 0, lam.exact.has_value()});
  }
  return out;
}

std::vector<ModeCheck> fums_of(const std::vector<ModeCheck>& checks) {
  std::vector<ModeCheck> out;
  for (const auto& c : checks) {
    if (c.fum()) out.push_back(c);
  }
  return out;
}

// Verdict

Verdict check_structural_controllability(const Analysis& a, const StructuredPattern& P_pattern,
                                         const VerifyOptions& opts) {
  Verdict v;
  v.options = opts;
  v.spectrum = a.spec.values;
  StructureGraph g = build_nacg(a.parts, a.tfms, P_pattern);
  if (auto cycle = find_input_unreachable_lambda_cycle(g)) v.pdum = witness_of(g, std::move(*cycle));
  if (auto e = find_input_unreachable_lambda_edge(g)) v.unreachable_lambda_edge = {{g.name(e->src), g.name(e->dst)}};
  v.per_mode = check_fum_networked(a, P_pattern, opts.jobs);
  v.fums = fums_of(v.per_mode);
  v.structurally_controllable = !v.unreachable_lambda_edge && v.fums.empty();
  return v;
}

Verdict check_structural_controllability(const NdsModel& nds, const VerifyOptions& opts) {
  nds.validate();
  WellPosedness wp = check_well_posedness(nds, std::max<std::size_t>(1, opts.wellposed_trials), opts.seed);
  if (!wp.well_posed) throw ModelError("ill-posed model: " + wp.detail);
  Analysis a = analyze(nds, opts);
  Verdict v = check_structural_controllability(a, assemble_lumped(nds, false).P_pattern, opts);
  v.well_posedness = std::move(wp);
  return v;
}

// Feasibility

FeasibilityReport check_feasibility(const Analysis& a) {
  FeasibilityReport r;
  r.condition_i = true;
  for (const auto& p : a.parts) {
    RatMatrix B = hstack(p.B_xu, p.A_xv);
    bool ok = true;
    for (const auto& lam : a.modes) {
      if (pbh_deficiency(p.A_xx, B, lam, a.mode_data.empty() ? kDefaultRankTol : a.mode_data[0].rank_tol) > 0) {
        ok = false;
        break;
      }
    }
    r.controllable_with_links.push_back(ok);
    r.condition_i = r.condition_i && ok;
  }
  r.M_z = a.layout.n_z;
  for (const auto& md : a.mode_data) r.max_M_r = std::max(r.max_M_r, md.M_r);
  r.condition_ii = r.M_z >= r.max_M_r;
  for (const auto& t : a.tfms) {
    const auto& zu = t.zu.classes;
    for (std::size_t i = 0; i < zu.rows(); ++i)
      for (std::size_t j = 0; j < zu.cols(); ++j) r.some_gzu_nonzero |= zu(i, j).kind != EntryKind::Zero;
    const auto& zv = t.zv.classes;
    for (std::size_t i = 0; i < zv.rows(); ++i)
      for (std::size_t j = 0; j < zv.cols(); ++j) r.some_lambda_edge |= zv(i, j).kind == EntryKind::LambdaDependent;
  }
  r.condition_iii = r.some_gzu_nonzero || !r.some_lambda_edge;
  r.feasible = r.condition_i && r.condition_ii && r.condition_iii;
  return r;
}

FeasibilityReport check_feasibility(const std::vector<SubsystemModel>& subsystems, const VerifyOptions& opts) {
  std::vector<AugmentedSubsystem> parts;
  for (const auto& s : subsystems) parts.push_back(analysis_form(s));
  return check_feasibility(analyze_parts(std::move(parts), opts));
}

// Randomized realization

std::vector<Eigenvalue> uncontrollable_eigenvalues(const RatMatrix& A, const RatMatrix& B, double rank_tol) {
  std::vector<Eigenvalue> out;
  for (const auto& lam : eigenvalues(A)) {
    if (pbh_deficiency(A, B, lam, rank_tol) > 0) out.push_back(lam);
  }
  return cluster_eigenvalues(out, kDefaultEigTol);
}

bool stacked_controllable(const RatMatrix& A, const RatMatrix& B) {
  const std::size_t n = A.rows(), q = B.cols();
  if (n == 0) return true;
  // Block row i: B in B-slot i, I in X-slot i, -A in X-slot i-1.
  const std::size_t stride = q + n;
  RatMatrix C(n * n, n * (n + q - 1));
  const RatMatrix I = RatMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    C.set_block(i * n, i * stride, B);
    if (i + 1 < n) C.set_block(i * n, i * stride + q, I);
    if (i > 0) C.set_block(i * n, (i - 1) * stride + q, -A);
  }
  return rank(C) == n * n;
}

RealizationResult randomized_realization_check(const NdsModel& nds, std::uint64_t seed, std::size_t trials,
                                               ControllabilityTest test) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  LumpedPlant plant = assemble_lumped(nds, false);
  const auto ids = parameter_ids(nds);
  const std::size_t n = plant.layout.n_x, k = ids.size();
  RealizationResult r;
  r.seed = seed;
  r.value_set_size = k == 0 ? 1 : std::max<std::size_t>(2, std::min(2 * k * n, 2 * n * n));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> dist(1, static_cast<long>(r.value_set_size));
  constexpr std::size_t kMaxRedraws = 50;
  for (std::size_t t = 0; t < trials; ++t) {
    ++r.trials_run;
    std::optional<std::pair<RatMatrix, RatMatrix>> ab;
    std::map<int, Rational> values;
    for (std::size_t attempt = 0; attempt <= kMaxRedraws && !ab; ++attempt) {
      if (attempt > 0) ++r.redraws;
      values.clear();
      for (int id : ids) values[id] = Rational(dist(rng));
      ab = realize(plant, values);
    }
    if (!ab) continue;
    bool controllable = false;
    if (test == ControllabilityTest::Stacked) {
      controllable = stacked_controllable(ab->first, ab->second);
      r.uncontrollable_modes.clear();
    } else {
      r.uncontrollable_modes = uncontrollable_eigenvalues(ab->first, ab->second);
      controllable = r.uncontrollable_modes.empty();
    }
    if (controllable) {
      r.witness_found = true;
      r.witness = std::move(values);
      r.uncontrollable_modes.clear();
      break;
    }
  }
  return r;
}

}  // namespace netctrl
