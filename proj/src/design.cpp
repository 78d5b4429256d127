#include "netctrl/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "netctrl/linalg.hpp"

namespace netctrl {
namespace {

std::size_t ground_v(const ModeData& md) { return md.Y_exact ? md.Y_exact->cols() : static_cast<std::size_t>(md.Y.cols()); }
std::size_t ground_z(const ModeData& md) { return md.Z_exact ? md.Z_exact->cols() : static_cast<std::size_t>(md.Z.cols()); }

std::vector<std::size_t> with_b(std::vector<std::size_t> J, std::size_t M_v, std::size_t M_z) {
  for (std::size_t j = 1; j <= M_z; ++j) J.push_back(M_v + j);
  return J;
}

std::string join(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

std::size_t q2_rank(const ModeData& md, const std::vector<std::size_t>& J) {
  const std::size_t M_v = ground_v(md);
  if (md.M_r == 0 || J.empty()) return 0;
  if (md.exact) {
    RatMatrix sub(md.Y_exact->rows(), J.size());
    for (std::size_t k = 0; k < J.size(); ++k) {
      const std::size_t j = J[k] - 1;
      for (std::size_t r = 0; r < sub.rows(); ++r)
        sub(r, k) = j < M_v ? (*md.Y_exact)(r, j) : (*md.Z_exact)(r, j - M_v);
    }
    return rank(sub);
  }
  CMatrix full(md.Y.rows(), md.Y.cols() + md.Z.cols());
  full << md.Y, md.Z;
  CMatrix sub(full.rows(), static_cast<Eigen::Index>(J.size()));
  for (std::size_t k = 0; k < J.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = full.col(static_cast<Eigen::Index>(J[k] - 1));
  return numeric_rank(sub, md.rank_tol * std::max(1.0, max_singular_value(full)));
}

std::size_t g_value(const std::vector<std::size_t>& J, const std::vector<ModeData>& modes) {
  std::size_t total = 0;
  for (const auto& md : modes) total += q2_rank(md, with_b(J, ground_v(md), ground_z(md)));
  return total;
}

GreedyRows greedy_link_rows(const std::vector<ModeData>& modes) {
  GreedyRows out;
  for (const auto& md : modes) out.target += md.M_r;
  if (modes.empty()) return out;
  const std::size_t M_v = ground_v(modes.front());
  std::size_t g = g_value({}, modes);
  out.g_before_last = g;
  while (g < out.target) {
    std::size_t best = 0, best_g = g;
    for (std::size_t a = 1; a <= M_v; ++a) {
      if (std::binary_search(out.j_grd.begin(), out.j_grd.end(), a)) continue;
      auto J = out.j_grd;
      J.insert(std::upper_bound(J.begin(), J.end(), a), a);
      const std::size_t ga = g_value(J, modes);
      if (ga > best_g) {
        best = a;
        best_g = ga;
      }
    }
    if (best == 0) {
      throw DesignError("infeasible: g saturates at " + std::to_string(g) + " below sum of M_r = " +
                        std::to_string(out.target) + " (some mode cannot be covered by any link set)");
    }
    out.g_before_last = g;
    out.order.push_back(best);
    out.j_grd.insert(std::upper_bound(out.j_grd.begin(), out.j_grd.end(), best), best);
    g = best_g;
  }
  return out;
}

std::vector<std::vector<std::size_t>> extract_cover_sets(const std::vector<std::size_t>& j_grd,
                                                         const std::vector<ModeData>& modes) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& md : modes) {
    const std::size_t M_v = ground_v(md), M_z = ground_z(md);
    std::vector<std::size_t> candidates;
    for (std::size_t j = 1; j <= M_z; ++j) candidates.push_back(M_v + j);
    candidates.insert(candidates.end(), j_grd.begin(), j_grd.end());
    std::vector<std::size_t> J;
    std::size_t r = 0;
    for (std::size_t s : candidates) {
      if (r == md.M_r) break;
      J.push_back(s);
      const std::size_t rs = q2_rank(md, J);
      if (rs > r) {
        r = rs;
      } else {
        J.pop_back();
      }
    }
    if (r < md.M_r) throw DesignError("cover set extraction fell short of M_r for a mode; J_grd = {" + join(j_grd) + "}");
    std::sort(J.begin(), J.end());
    out.push_back(std::move(J));
  }
  return out;
}

ColoringResult greedy_color(const std::vector<std::vector<std::size_t>>& cover_sets,
                            const std::vector<std::size_t>& M_r, std::size_t M_v, std::size_t M_z) {
  ColoringResult res;
  ColoringGraph& cg = res.graph;
  std::set<std::size_t> verts;
  for (const auto& J : cover_sets) {
    verts.insert(J.begin(), J.end());
    for (std::size_t a = 0; a < J.size(); ++a)
      for (std::size_t b = a + 1; b < J.size(); ++b) cg.edges.insert(std::minmax(J[a], J[b]));
  }
  cg.vertices.assign(verts.begin(), verts.end());

  std::map<std::size_t, std::set<std::size_t>> adj;
  for (auto [a, b] : cg.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  std::set<std::size_t> used;
  for (std::size_t v : cg.vertices) {
    if (v > M_v) {
      cg.colors[v] = {v - M_v};
      cg.precolored.push_back(v);
      used.insert(v - M_v);
    }
  }

  auto neighbour_colors = [&](std::size_t v) {
    std::set<std::size_t> c;
    for (std::size_t w : adj[v]) {
      auto it = cg.colors.find(w);
      if (it != cg.colors.end()) c.insert(it->second.begin(), it->second.end());
    }
    return c;
  };

  while (cg.colors.size() < cg.vertices.size()) {
    std::size_t pick = 0, pick_count = 0;
    bool found = false;
    for (std::size_t v : cg.vertices) {
      if (cg.colors.count(v)) continue;
      const std::size_t n = neighbour_colors(v).size();
      if (!found || n >= pick_count) {
        pick = v;
        pick_count = n;
        found = true;
      }
    }
    const auto seen = neighbour_colors(pick);
    std::vector<std::size_t> assigned;
    if (seen.size() >= M_z) {
      std::size_t k_max = 0;
      for (std::size_t i = 0; i < cover_sets.size(); ++i) {
        if (std::binary_search(cover_sets[i].begin(), cover_sets[i].end(), pick)) k_max = std::max(k_max, M_r[i]);
      }
      for (std::size_t c = 1; c <= k_max; ++c) assigned.push_back(c);
      for (std::size_t w : adj[pick]) {
        cg.removed.insert(std::minmax(pick, w));
        adj[w].erase(pick);
      }
      adj[pick].clear();
    } else {
      std::optional<std::size_t> color;
      for (std::size_t c : used) {
        if (!seen.count(c)) {
          color = c;
          break;
        }
      }
      if (!color) {
        for (std::size_t c = 1; c <= M_z; ++c) {
          if (!used.count(c) && !seen.count(c)) {
            color = c;
            break;
          }
        }
      }
      assigned.push_back(*color);
    }
    used.insert(assigned.begin(), assigned.end());
    cg.colors[pick] = assigned;
    cg.order.push_back(pick);
  }

  res.phi = StructuredPattern(M_v, M_z);
  int id = 0;
  for (std::size_t v : cg.order) {
    if (v > M_v) continue;
    for (std::size_t c : cg.colors[v]) res.links.emplace_back(v - 1, c - 1);
  }
  std::vector<Position> sorted = res.links;
  std::sort(sorted.begin(), sorted.end());
  for (auto [r, c] : sorted) res.phi.set_free(r, c, id++);
  return res;
}

PdumElimination eliminate_pdums(StructureGraph& g, const SignalLayout& layout) {
  PdumElimination out;
  {
    SccDecomposition scc = scc_decompose(g);
    out.p_ius = unreachable_lambda_scc_roots(g, scc).size();
  }
  for (;;) {
    SccDecomposition scc = scc_decompose(g);
    auto sources = unreachable_lambda_scc_roots(g, scc);
    if (sources.empty()) break;
    const auto& comp = scc.components[sources.front()];
    std::optional<std::pair<Position, std::pair<std::size_t, std::size_t>>> best;  // (z col, v row), ids
    for (std::size_t zid = 0; zid < g.size(); ++zid) {
      const Vertex& zv = g.vertex(zid);
      if (zv.kind != VertexKind::InternalOutput || !scc.input_reachable[zid]) continue;
      auto col = layout.scm_col_of_z(zv.global);
      if (!col) continue;
      for (std::size_t vid : comp) {
        const Vertex& vv = g.vertex(vid);
        if (vv.kind != VertexKind::InternalInput) continue;
        auto row = layout.scm_row_of_v(vv.global);
        if (!row) continue;
        Position key{*col, *row};
        if (!best || key < best->first) best = {{key, {zid, vid}}};
      }
    }
    if (!best) {
      throw DesignError("infeasible: no input-reachable internal output can feed the unreachable component containing " +
                        g.name(comp.front()));
    }
    g.add_edge(best->second.first, best->second.second, EdgeKind::LinkEdge);
    out.links.emplace_back(best->first.second, best->first.first);
  }
  return out;
}

std::size_t total_deficiency(const std::vector<AugmentedSubsystem>& parts, const std::vector<Eigenvalue>& modes,
                             double rank_tol) {
  std::size_t total = 0;
  for (const auto& lam : modes)
    for (const auto& p : parts) total += pbh_deficiency(p.A_xx, p.B_xu, lam, rank_tol);
  return total;
}

StructuredPattern global_pattern(const SignalLayout& layout, const StructuredPattern& scm) {
  StructuredPattern P(layout.n_v, layout.n_z);
  for (const auto& [pos, id] : scm.entries()) P.set_free(layout.v_of_scm_row(pos.first), layout.z_of_scm_col(pos.second), id);
  return P;
}

namespace {

std::vector<AugmentedSubsystem> design_parts(const std::vector<SubsystemModel>& subsystems) {
  std::vector<AugmentedSubsystem> parts;
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    subsystems[i].validate();
    if (subsystems[i].has_free_block()) {
      throw ModelError("subsystem " + std::to_string(i + 1) +
                       " has a free parameter block; topology design needs fixed or absent blocks");
    }
    parts.push_back(analysis_form(subsystems[i]));
  }
  return parts;
}

}  // namespace

DesignResult design_topology(const std::vector<SubsystemModel>& subsystems, ModeFilter filter, VerifyOptions opts) {
  opts.modes = filter;
  DesignResult res;
  res.mode_filter = filter;
  Analysis a = analyze_parts(design_parts(subsystems), opts);
  res.modes = a.modes;
  for (const auto& md : a.mode_data) res.M_r.push_back(md.M_r);
  res.feasibility = check_feasibility(a);
  res.feasible = res.feasibility.feasible;
  if (!res.feasible) return res;

  const std::size_t M_v = a.layout.n_v, M_z = a.layout.n_z;
  res.greedy = greedy_link_rows(a.mode_data);
  res.cover_sets = extract_cover_sets(res.greedy.j_grd, a.mode_data);
  ColoringResult col = greedy_color(res.cover_sets, res.M_r, M_v, M_z);
  res.coloring = col.graph;
  res.stage1_links = col.links;

  StructureGraph g = build_nacg(a.parts, a.tfms, global_pattern(a.layout, col.phi));
  PdumElimination pe = eliminate_pdums(g, a.layout);
  res.stage2_links = pe.links;

  std::vector<Position> all = res.stage1_links;
  all.insert(all.end(), res.stage2_links.begin(), res.stage2_links.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  res.phi = StructuredPattern::from_positions(a.layout.n_v0, a.layout.n_z0, all);

  BoundReport& b = res.bound_report;
  b.M_rmax = res.M_r.empty() ? 0 : *std::max_element(res.M_r.begin(), res.M_r.end());
  b.M_def = total_deficiency(a.parts, a.modes, opts.rank_tol);
  b.p_ius = pe.p_ius;
  b.j_grd_size = res.greedy.j_grd.size();
  b.links = all.size();
  b.factor = 2.0 * static_cast<double>(std::max<std::size_t>(b.M_rmax, 1)) *
             (1.0 + std::log(static_cast<double>(std::max<std::size_t>(b.M_def, 1))));
  b.bound = b.factor * static_cast<double>(b.p_ius + b.j_grd_size);

  NdsModel nds{subsystems, res.phi};
  res.verdict = check_structural_controllability(nds, opts);
  return res;
}

BruteForceResult brute_force_min_topology(const std::vector<SubsystemModel>& subsystems,
                                          std::optional<std::size_t> max_links, VerifyOptions opts) {
  Analysis a = analyze_parts(design_parts(subsystems), opts);
  const std::size_t rows = a.layout.n_v0, cols = a.layout.n_z0;
  BruteForceResult res;
  res.positions = rows * cols;
  if (!max_links && res.positions > kBruteForceMaxPositions) {
    throw DesignError("brute force refused: " + std::to_string(rows) + "x" + std::to_string(cols) + " SCM has " +
                      std::to_string(res.positions) + " candidate positions (limit " +
                      std::to_string(kBruteForceMaxPositions) + "); pass a link cap");
  }
  const std::size_t cap = std::min(max_links.value_or(res.positions), res.positions);
  std::vector<Position> all;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) all.emplace_back(r, c);

  for (std::size_t level = 0; level <= cap; ++level) {
    std::size_t checked = 0;
    std::vector<std::size_t> idx(level);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      std::vector<Position> pos;
      for (auto i : idx) pos.push_back(all[i]);
      StructuredPattern scm = StructuredPattern::from_positions(rows, cols, pos);
      ++checked;
      Verdict v = check_structural_controllability(a, global_pattern(a.layout, scm), opts);
      if (v.structurally_controllable) {
        NdsModel nds{subsystems, scm};
        if (check_well_posedness(nds, std::max<std::size_t>(1, opts.wellposed_trials), opts.seed).well_posed) {
          res.checked_per_level.push_back(checked);
          res.phi = std::move(scm);
          return res;
        }
      }
      // next combination in lexicographic order
      std::size_t i = level;
      while (i > 0 && idx[i - 1] == all.size() - level + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < level; ++j) idx[j] = idx[j - 1] + 1;
    }
    res.checked_per_level.push_back(checked);
  }
  return res;
}

}  // namespace netctrl
