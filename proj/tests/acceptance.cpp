// Runs acceptance criteria 1-8 and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "netctrl/design.hpp"
#include "netctrl/report.hpp"
#include "netctrl/verify.hpp"
#include "support/random_nds.hpp"
#include "support/worked_example.hpp"

using namespace netctrl;
using json = nlohmann::json;

namespace {

const std::string kData = NETCTRL_DATA_DIR;
constexpr std::uint64_t kInstanceSeed = 20240607;
constexpr std::size_t kInstances = 100;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string set_text(const std::vector<std::size_t>& s) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  return os.str() + "}";
}

std::string positions_text(const std::set<std::pair<std::size_t, std::size_t>>& s) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (auto [r, c] : s) {
    os << (first ? "" : ",") << "(" << r << "," << c << ")";
    first = false;
  }
  return os.str() + "}";
}

json run_json(Command cmd, const std::string& file, ModeFilter modes, int& exit_code) {
  CommandRequest req;
  req.command = cmd;
  req.path = kData + "/" + file;
  req.modes = modes;
  CommandOutput out = run_command(req);
  exit_code = out.exit_code;
  if (out.body.empty()) {
    std::string msg;
    for (const auto& d : out.diagnostics) msg += d + "; ";
    throw std::runtime_error("command failed: " + msg);
  }
  return json::parse(out.body);
}

std::set<std::pair<std::size_t, std::size_t>> phi_positions(const json& result) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& p : result["phi"]["positions"]) out.insert({p[0].get<std::size_t>(), p[1].get<std::size_t>()});
  return out;
}

// Cover set of the mode whose exact value is lam.
std::optional<std::vector<std::size_t>> cover_set_at(const json& result, int lam) {
  for (std::size_t i = 0; i < result["modes"].size(); ++i) {
    const json& l = result["modes"][i]["lambda"];
    if (l.contains("exact") && l["exact"].is_number_integer() && l["exact"].get<int>() == lam) {
      return result["cover_sets"][i].get<std::vector<std::size_t>>();
    }
  }
  return std::nullopt;
}

bool rotation_equal(const std::vector<std::string>& got, const std::vector<std::string>& want) {
  if (got.size() != want.size()) return false;
  for (std::size_t s = 0; s < got.size(); ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < got.size() && ok; ++i) ok = got[(s + i) % got.size()] == want[i];
    if (ok) return true;
  }
  return false;
}

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  json r = run_json(Command::Check, "example_phi_a.json", ModeFilter::All, code);
  const double t = seconds_since(t0);
  o.require(code == kExitNegative, "exit code 1 (got " + std::to_string(code) + ")");
  o.require(!r["result"]["structurally_controllable"].get<bool>(), "verdict uncontrollable");
  const std::vector<std::string> want = {"v12", "z11", "v32", "z32", "v21", "z21"};
  std::vector<std::string> got;
  if (!r["result"]["pdum"].is_null()) got = r["result"]["pdum"]["cycle"].get<std::vector<std::string>>();
  std::string cyc;
  for (const auto& n : got) cyc += (cyc.empty() ? "" : " ") + n;
  o.require(rotation_equal(got, want), "witness cycle v12 z11 v32 z32 v21 z21 (got " + cyc + ")");
  o.note("cycle [" + cyc + "]");
  o.require(t < 1.0, "runtime < 1 s");
  o.note("time " + std::to_string(t) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  Analysis a = analyze_parts([] {
    std::vector<AugmentedSubsystem> parts;
    for (const auto& s : testing::three_subsystems()) parts.push_back(analysis_form(s));
    return parts;
  }());
  o.require(a.spec.values.size() == 3, "m = 3 (got " + std::to_string(a.spec.values.size()) + ")");
  for (double want : {1.0, 0.0, -1.0}) {
    bool found = false;
    for (const auto& e : a.spec.values) found |= std::abs(e.value - Complex(want, 0.0)) <= 1e-6;
    o.require(found, "eigenvalue " + std::to_string(want) + " within 1e-6");
  }
  std::ostringstream os;
  for (const auto& e : a.spec.values) os << " " << e.value.real() << (e.exact ? "(exact)" : "");
  o.note("spectrum" + os.str());
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  json r = run_json(Command::Design, "example.json", ModeFilter::Unstable, code)["result"];
  const auto jgrd = r["j_grd"].get<std::vector<std::size_t>>();
  o.require(jgrd == std::vector<std::size_t>{3, 5}, "J_grd = {3,5} (got " + set_text(jgrd) + ")");
  auto j1 = cover_set_at(r, 1), j2 = cover_set_at(r, 0);
  o.require(j1 && *j1 == std::vector<std::size_t>{3, 5, 7, 11},
            "J_1 = {3,5,7,11} (got " + (j1 ? set_text(*j1) : "none") + ")");
  o.require(j2 && *j2 == std::vector<std::size_t>{3, 5, 7, 9, 11},
            "J_2 = {3,5,7,9,11} (got " + (j2 ? set_text(*j2) : "none") + ")");
  const auto phi = phi_positions(r);
  o.require(phi == std::set<std::pair<std::size_t, std::size_t>>{{3, 4}, {5, 2}},
            "Phi free at (3,4),(5,2) (got " + positions_text(phi) + ")");

  // FUM check over {1, 0} and a random realization of the designed network.
  std::vector<std::pair<std::size_t, std::size_t>> links(phi.begin(), phi.end());
  NdsModel designed = testing::with_links(links);
  VerifyOptions uo;
  uo.modes = ModeFilter::Unstable;
  Verdict v = check_structural_controllability(designed, uo);
  o.require(v.fums.empty(), "no FUM over {1,0} on the designed network");
  LumpedPlant plant = assemble_lumped(designed, false);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dist(1, 1000);
  std::map<int, Rational> values;
  for (int id : parameter_ids(designed)) values[id] = Rational(dist(rng), 100);
  auto ab = realize(plant, values);
  o.require(ab.has_value(), "realization well-posed");
  if (ab) {
    auto unc = uncontrollable_eigenvalues(ab->first, ab->second);
    bool all_at_minus_one = !unc.empty();
    std::ostringstream os;
    for (const auto& e : unc) {
      all_at_minus_one &= std::abs(e.value - Complex(-1.0, 0.0)) <= 1e-6;
      os << " " << e.value.real();
    }
    o.require(all_at_minus_one, "realization uncontrollable modes only at -1 (got" + os.str() + ")");
    o.note("realization uncontrollable modes:" + os.str());
  }
  const double t = seconds_since(t0);
  o.require(t < 5.0, "runtime < 5 s");
  o.note("time " + std::to_string(t) + " s");
  return o;
}

Outcome criterion4() {
  Outcome o;
  int code = 0;
  json r = run_json(Command::Design, "example.json", ModeFilter::All, code)["result"];
  const auto jgrd = r["j_grd"].get<std::vector<std::size_t>>();
  o.require(jgrd == std::vector<std::size_t>{1, 3, 5}, "J_grd = {1,3,5} (got " + set_text(jgrd) + ")");
  auto j3 = cover_set_at(r, -1);
  o.require(j3 && *j3 == std::vector<std::size_t>{1, 5, 7, 9, 11},
            "J_3 = {1,5,7,9,11} (got " + (j3 ? set_text(*j3) : "none") + ")");
  const auto phi = phi_positions(r);
  o.require(phi == std::set<std::pair<std::size_t, std::size_t>>{{5, 2}, {1, 4}, {3, 4}},
            "Phi free at (5,2),(1,4),(3,4) (got " + positions_text(phi) + ")");

  int check_code = 0;
  json c = run_json(Command::Check, "example_three_link.json", ModeFilter::All, check_code);
  o.require(check_code == kExitPositive && c["result"]["structurally_controllable"].get<bool>(),
            "check on the designed topology is controllable");

  const auto t0 = std::chrono::steady_clock::now();
  BruteForceResult bf = brute_force_min_topology(testing::three_subsystems());
  const double t = seconds_since(t0);
  const std::size_t found = bf.phi ? bf.phi->free_count() : 0;
  o.require(bf.phi && found == 3, "brute-force minimum = 3 (got " + (bf.phi ? std::to_string(found) : "none") + ")");
  const std::size_t full[] = {1, 30, 435};
  bool exhausted = bf.checked_per_level.size() >= 3;
  for (std::size_t l = 0; l < 3 && exhausted; ++l) exhausted = bf.checked_per_level[l] == full[l];
  o.require(exhausted, "levels 0-2 exhaustively rejected");
  o.require(t < 60.0, "brute force < 60 s");
  o.note("brute force " + std::to_string(t) + " s");
  return o;
}

std::vector<NdsModel> instances() {
  std::mt19937_64 rng(kInstanceSeed);
  std::vector<NdsModel> out;
  for (std::size_t i = 0; i < kInstances; ++i) out.push_back(testing::random_nds(rng));
  return out;
}

// rank of Y P + Z for random P on the global pattern.
std::size_t randomized_generic_rank(const ModeData& md, const StructuredPattern& P, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(1, 997);
  if (md.exact) {
    RatMatrix Pn(P.rows(), P.cols());
    for (const auto& [pos, id] : P.entries()) Pn(pos.first, pos.second) = Rational(dist(rng), 97);
    return rank(*md.Y_exact * Pn + *md.Z_exact);
  }
  CMatrix Pn = CMatrix::Zero(static_cast<Eigen::Index>(P.rows()), static_cast<Eigen::Index>(P.cols()));
  for (const auto& [pos, id] : P.entries()) {
    Pn(static_cast<Eigen::Index>(pos.first), static_cast<Eigen::Index>(pos.second)) = dist(rng) / 97.0;
  }
  CMatrix prod = md.Y * Pn + md.Z;
  return numeric_rank(prod, md.rank_tol * std::max(1.0, max_singular_value(prod)));
}

Outcome criterion5(const std::vector<NdsModel>& insts) {
  Outcome o;
  std::size_t lumped_mismatch = 0, rank_mismatch = 0, union_mismatch = 0, union_compared = 0, modes = 0;
  std::mt19937_64 rng(99);
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const NdsModel& nds = insts[i];
    Analysis a = analyze(nds);
    const StructuredPattern P = assemble_lumped(nds, false).P_pattern;
    auto net = check_fum_networked(a, P);
    auto lum = check_fum_lumped(a, P);
    for (std::size_t m = 0; m < net.size(); ++m) {
      ++modes;
      if (net[m].fum() != lum[m].fum()) {
        ++lumped_mismatch;
        o.note("instance " + std::to_string(i) + " mode " + std::to_string(m) + ": networked/lumped FUM disagree");
      }
      const ModeData& md = a.mode_data[m];
      if (md.M_r > 0) {
        bool agree = false;
        std::size_t last = 0;
        for (int t = 0; t < 3 && !agree; ++t) {
          last = randomized_generic_rank(md, P, rng);
          agree = last == net[m].achieved;
        }
        if (!agree) {
          ++rank_mismatch;
          o.note("instance " + std::to_string(i) + " mode " + std::to_string(m) + ": intersection rank " +
                 std::to_string(net[m].achieved) + " vs randomized " + std::to_string(last));
        }
      }
      LumpedUnionProblem pr = lumped_union_problem(a, P, a.modes[m]);
      if (pr.generic.cols() <= 12) {
        ++union_compared;
        const std::size_t fast = pr.exact ? matroid_union_rank(*pr.exact, pr.generic)
                                          : matroid_union_rank(pr.numeric, pr.generic);
        const std::size_t slow = pr.exact ? matroid_union_rank_exhaustive(*pr.exact, pr.generic)
                                          : matroid_union_rank_exhaustive(pr.numeric, pr.generic);
        if (fast != slow) {
          ++union_mismatch;
          o.note("instance " + std::to_string(i) + " mode " + std::to_string(m) + ": union rank " +
                 std::to_string(fast) + " vs exhaustive " + std::to_string(slow));
        }
      }
    }
  }
  o.require(lumped_mismatch == 0, "(a) lumped == networked");
  o.require(rank_mismatch == 0, "(b) intersection rank == randomized generic rank");
  o.require(union_compared > 0 && union_mismatch == 0, "(c) union randomized == exhaustive");
  o.note(std::to_string(insts.size()) + " instances, " + std::to_string(modes) + " modes, " +
         std::to_string(union_compared) + " union comparisons");
  return o;
}

Outcome criterion6(const std::vector<NdsModel>& insts) {
  Outcome o;
  std::size_t positives = 0, mismatches = 0;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    Verdict v = check_structural_controllability(insts[i]);
    RealizationResult r = randomized_realization_check(insts[i], 1000 + i, 10);
    positives += v.structurally_controllable;
    if (v.structurally_controllable != r.witness_found) {
      ++mismatches;
      o.note("instance " + std::to_string(i) + ": verdict " + (v.structurally_controllable ? "true" : "false") +
             ", witness " + (r.witness_found ? "found" : "not found"));
    }
  }
  o.require(mismatches == 0, "verdict agrees with randomized realization");
  o.note(std::to_string(positives) + " controllable of " + std::to_string(insts.size()));
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(31337);
  testing::RandomNdsOptions ro;
  ro.allow_free_blocks = false;
  std::size_t checks = 0, violations = 0, bound_cases = 0, bound_fail = 0;
  while (checks < 200 || bound_cases < 40) {
    NdsModel nds = testing::random_nds(rng, ro);
    Analysis a = analyze(nds);
    const std::size_t M_v = a.layout.n_v;
    if (M_v < 2) continue;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<std::size_t> S1, S2;
      std::size_t s = 0;
      std::vector<std::size_t> perm(M_v);
      std::iota(perm.begin(), perm.end(), 1);
      std::shuffle(perm.begin(), perm.end(), rng);
      s = perm[0];
      for (std::size_t k = 1; k < M_v; ++k) {
        const int pick = std::uniform_int_distribution<int>(0, 2)(rng);
        if (pick == 0) {
          S1.push_back(perm[k]);
          S2.push_back(perm[k]);
        } else if (pick == 1) {
          S2.push_back(perm[k]);
        }
      }
      std::sort(S1.begin(), S1.end());
      std::sort(S2.begin(), S2.end());
      auto plus = [&](std::vector<std::size_t> S) {
        S.insert(std::upper_bound(S.begin(), S.end(), s), s);
        return S;
      };
      const long g1 = static_cast<long>(g_value(plus(S1), a.mode_data)) - static_cast<long>(g_value(S1, a.mode_data));
      const long g2 = static_cast<long>(g_value(plus(S2), a.mode_data)) - static_cast<long>(g_value(S2, a.mode_data));
      ++checks;
      if (g1 < g2) ++violations;
    }

    if (M_v > 8) continue;
    GreedyRows gr;
    try {
      gr = greedy_link_rows(a.mode_data);
    } catch (const DesignError&) {
      continue;
    }
    // smallest J with g(J) = sum M_r
    std::size_t opt = M_v + 1;
    for (std::uint32_t mask = 0; mask < (1u << M_v); ++mask) {
      const std::size_t size = static_cast<std::size_t>(__builtin_popcount(mask));
      if (size >= opt) continue;
      std::vector<std::size_t> J;
      for (std::size_t b = 0; b < M_v; ++b)
        if (mask & (1u << b)) J.push_back(b + 1);
      if (g_value(J, a.mode_data) == gr.target) opt = size;
    }
    ++bound_cases;
    const double limit = (1.0 + std::log(static_cast<double>(a.layout.n_x))) * static_cast<double>(opt);
    if (static_cast<double>(gr.j_grd.size()) > limit + 1e-9) {
      ++bound_fail;
      o.note("greedy " + std::to_string(gr.j_grd.size()) + " > bound " + std::to_string(limit));
    }
  }
  o.require(violations == 0, "submodularity (" + std::to_string(violations) + " violations)");
  o.require(bound_cases > 0 && bound_fail == 0, "greedy bound");
  o.note(std::to_string(checks) + " submodularity checks, " + std::to_string(bound_cases) + " greedy-bound cases");
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::size_t runs = 0, fails = 0;
  auto record = [&](const DesignResult& d, const std::string& label) {
    if (!d.feasible) return;
    ++runs;
    if (!d.bound_report.holds()) {
      ++fails;
      o.note(label + ": " + std::to_string(d.bound_report.links) + " links > bound " + std::to_string(d.bound_report.bound));
    }
  };
  record(design_topology(testing::three_subsystems(), ModeFilter::Unstable), "worked example, unstable");
  record(design_topology(testing::three_subsystems(), ModeFilter::All), "worked example, all");
  std::mt19937_64 rng(4242);
  testing::RandomNdsOptions ro;
  ro.allow_free_blocks = false;
  for (int i = 0; i < 60; ++i) {
    NdsModel nds = testing::random_nds(rng, ro);
    for (ModeFilter f : {ModeFilter::All, ModeFilter::Unstable}) {
      try {
        record(design_topology(nds.subsystems, f), "random " + std::to_string(i));
      } catch (const DesignError&) {
      } catch (const ModelError&) {
      }
    }
  }
  o.require(runs > 2 && fails == 0, "bound holds on every design run");
  o.note(std::to_string(runs) + " design runs");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::string>> names = {
      {1, "PDUM detection on Phi_a"},        {2, "spectrum {1,0,-1}"},
      {3, "unstable-mode design"},           {4, "full design and brute-force optimum"},
      {5, "oracle equivalence"},             {6, "realization agreement"},
      {7, "submodularity and greedy bound"}, {8, "design bound report"},
  };
  std::vector<NdsModel> insts;
  bool all = true;
  for (const auto& [id, name] : names) {
    Outcome o;
    try {
      if ((id == 5 || id == 6) && insts.empty()) insts = instances();
      switch (id) {
        case 1: o = criterion1(); break;
        case 2: o = criterion2(); break;
        case 3: o = criterion3(); break;
        case 4: o = criterion4(); break;
        case 5: o = criterion5(insts); break;
        case 6: o = criterion6(insts); break;
        case 7: o = criterion7(); break;
        case 8: o = criterion8(); break;
      }
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    all &= o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << name;
    for (const auto& n : o.notes) std::cout << "; " << n;
    std::cout << std::endl;
  }
  return all ? 0 : 1;
}
