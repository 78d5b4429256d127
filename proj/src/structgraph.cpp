#include "netctrl/structgraph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace netctrl {
namespace {

EdgeKind kind_of(const EntryClass& c) {
  return c.kind == EntryKind::LambdaDependent ? EdgeKind::LambdaEdge : EdgeKind::ConstantEdge;
}

char letter(VertexKind k) {
  switch (k) {
    case VertexKind::ExternalInput: return 'u';
    case VertexKind::InternalInput: return 'v';
    case VertexKind::InternalOutput: return 'z';
  }
  return '?';
}

}  // namespace

std::string vertex_name(const Vertex& v) {
  std::string out(1, letter(v.kind));
  if (v.subsystem == 0) return out + std::to_string(v.index);
  if (v.subsystem < 10 && v.index < 10) return out + std::to_string(v.subsystem) + std::to_string(v.index);
  return out + std::to_string(v.subsystem) + "_" + std::to_string(v.index);
}

std::size_t StructureGraph::add_vertex(const Vertex& v) {
  vertices_.push_back(v);
  out_.emplace_back();
  by_global_[{static_cast<int>(v.kind), v.global}] = vertices_.size() - 1;
  return vertices_.size() - 1;
}

void StructureGraph::add_edge(std::size_t src, std::size_t dst, EdgeKind kind) {
  auto key = std::make_tuple(src, dst, static_cast<int>(kind));
  if (edge_index_.count(key)) return;
  edge_index_[key] = edges_.size();
  out_[src].push_back(edges_.size());
  edges_.push_back({src, dst, kind});
}

std::optional<std::size_t> StructureGraph::find(VertexKind kind, std::size_t global) const {
  auto it = by_global_.find({static_cast<int>(kind), global});
  if (it == by_global_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeKind> StructureGraph::edge_kind(std::size_t src, std::size_t dst) const {
  for (auto e : out_[src]) {
    if (edges_[e].dst == dst) return edges_[e].kind;
  }
  return std::nullopt;
}

std::string StructureGraph::name(std::size_t id) const { return vertex_name(vertices_[id]); }

std::size_t StructureGraph::count_edges(EdgeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.kind == kind; }));
}

StructureGraph build_acg(const ClassMatrix& gzv, const ClassMatrix& gzu) {
  const std::size_t k = gzv.rows();
  if (gzv.cols() != k || gzu.rows() != k) {
    throw std::invalid_argument("ACG class matrices must be k x k and k x q");
  }
  StructureGraph g;
  std::vector<std::size_t> u(gzu.cols()), z(k);
  for (std::size_t i = 0; i < gzu.cols(); ++i) u[i] = g.add_vertex({VertexKind::ExternalInput, 0, i + 1, i});
  for (std::size_t i = 0; i < k; ++i) z[i] = g.add_vertex({VertexKind::InternalOutput, 0, i + 1, i});
  for (std::size_t i = 0; i < gzu.cols(); ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (gzu(j, i).kind != EntryKind::Zero) g.add_edge(u[i], z[j], kind_of(gzu(j, i)));
    }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (gzv(j, i).kind != EntryKind::Zero) g.add_edge(z[i], z[j], kind_of(gzv(j, i)));
    }
  return g;
}

StructureGraph build_nacg(const std::vector<AugmentedSubsystem>& parts, const std::vector<SubsystemTfms>& tfms,
                          const StructuredPattern& P_pattern) {
  if (parts.size() != tfms.size()) throw std::invalid_argument("one TFM pair per subsystem required");
  SignalLayout L = signal_layout(parts);
  if (P_pattern.rows() != L.n_v || P_pattern.cols() != L.n_z) {
    throw std::invalid_argument("parameter pattern does not match the subsystem partition");
  }
  StructureGraph g;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t p = 0; p < parts[i].m_u(); ++p)
      g.add_vertex({VertexKind::ExternalInput, i + 1, p + 1, L.u_offset[i] + p});
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t p = 0; p < parts[i].m_v(); ++p)
      g.add_vertex({VertexKind::InternalInput, i + 1, p + 1, L.v_offset[i] + p});
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t q = 0; q < parts[i].m_z(); ++q)
      g.add_vertex({VertexKind::InternalOutput, i + 1, q + 1, L.z_offset[i] + q});

  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& zv = tfms[i].zv.classes;
    const auto& zu = tfms[i].zu.classes;
    for (std::size_t q = 0; q < parts[i].m_z(); ++q) {
      std::size_t zid = *g.find(VertexKind::InternalOutput, L.z_offset[i] + q);
      for (std::size_t p = 0; p < parts[i].m_u(); ++p) {
        if (zu(q, p).kind == EntryKind::Zero) continue;
        g.add_edge(*g.find(VertexKind::ExternalInput, L.u_offset[i] + p), zid, kind_of(zu(q, p)));
      }
      for (std::size_t p = 0; p < parts[i].m_v(); ++p) {
        if (zv(q, p).kind == EntryKind::Zero) continue;
        g.add_edge(*g.find(VertexKind::InternalInput, L.v_offset[i] + p), zid, kind_of(zv(q, p)));
      }
    }
  }
  for (const auto& [pos, id] : P_pattern.entries()) {
    g.add_edge(*g.find(VertexKind::InternalOutput, pos.second), *g.find(VertexKind::InternalInput, pos.first),
               EdgeKind::LinkEdge);
  }
  return g;
}

std::vector<bool> input_reachable(const StructureGraph& g) {
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.vertex(v).kind == VertexKind::ExternalInput) {
      seen[v] = true;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (auto e : g.out_edges(v)) {
      std::size_t w = g.edges()[e].dst;
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

SccDecomposition scc_decompose(const StructureGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> raw;
  std::size_t counter = 0;

  // Iterative Tarjan: frames hold (vertex, next out-edge position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& outs = g.out_edges(v);
      if (pos < outs.size()) {
        std::size_t w = g.edges()[outs[pos++]].dst;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> members;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          members.push_back(w);
        } while (w != done);
        std::sort(members.begin(), members.end());
        raw.push_back(std::move(members));
      }
    }
  }

  SccDecomposition out;
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.components = std::move(raw);
  out.component_of.assign(n, 0);
  for (std::size_t c = 0; c < out.components.size(); ++c)
    for (auto v : out.components[c]) out.component_of[v] = c;
  out.condensation.assign(out.components.size(), {});
  out.has_incoming.assign(out.components.size(), false);
  for (const auto& e : g.edges()) {
    std::size_t a = out.component_of[e.src], b = out.component_of[e.dst];
    if (a == b) continue;
    out.condensation[a].push_back(b);
    out.has_incoming[b] = true;
  }
  for (auto& succ : out.condensation) {
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
  }
  out.input_reachable = input_reachable(g);
  return out;
}

namespace {

std::vector<Edge> sorted_edges(const StructureGraph& g) {
  std::vector<Edge> edges = g.edges();
  std::sort(edges.begin(), edges.end());
  return edges;
}

// Shortest path from `from` to `to` using only vertices of component `comp`.
std::vector<std::size_t> path_within(const StructureGraph& g, const SccDecomposition& scc, std::size_t comp,
                                     std::size_t from, std::size_t to) {
  std::vector<std::size_t> parent(g.size(), g.size());
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    if (v == to) break;
    // Visit successors in vertex order for deterministic paths.
    std::vector<std::size_t> succ;
    for (auto e : g.out_edges(v)) succ.push_back(g.edges()[e].dst);
    std::sort(succ.begin(), succ.end());
    for (auto w : succ) {
      if (seen[w] || scc.component_of[w] != comp) continue;
      seen[w] = true;
      parent[w] = v;
      queue.push_back(w);
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t v = to; v != from; v = parent[v]) path.push_back(v);
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::optional<Cycle> find_input_unreachable_lambda_cycle(const StructureGraph& g) {
  SccDecomposition scc = scc_decompose(g);
  for (const auto& e : sorted_edges(g)) {
    if (e.kind != EdgeKind::LambdaEdge) continue;
    std::size_t comp = scc.component_of[e.src];
    if (scc.component_of[e.dst] != comp || scc.input_reachable[e.src]) continue;
    Cycle cycle{e.src};
    if (e.src != e.dst) {
      auto back = path_within(g, scc, comp, e.dst, e.src);
      cycle.insert(cycle.end(), back.begin(), back.end() - 1);
    }
    auto smallest = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), smallest, cycle.end());
    return cycle;
  }
  return std::nullopt;
}

std::optional<Edge> find_input_unreachable_lambda_edge(const StructureGraph& g) {
  auto reach = input_reachable(g);
  for (const auto& e : sorted_edges(g)) {
    if (e.kind == EdgeKind::LambdaEdge && !reach[e.src] && !reach[e.dst]) return e;
  }
  return std::nullopt;
}

std::vector<std::size_t> unreachable_source_sccs_with_lambda_edge(const StructureGraph& g,
                                                                 const SccDecomposition& scc) {
  std::vector<bool> has_lambda(scc.components.size(), false);
  for (const auto& e : g.edges()) {
    if (e.kind == EdgeKind::LambdaEdge && scc.component_of[e.src] == scc.component_of[e.dst]) {
      has_lambda[scc.component_of[e.src]] = true;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < scc.components.size(); ++c) {
    if (scc.has_incoming[c] || !has_lambda[c]) continue;
    if (scc.input_reachable[scc.components[c].front()]) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<std::size_t> unreachable_lambda_scc_roots(const StructureGraph& g, const SccDecomposition& scc) {
  const std::size_t n = scc.components.size();
  std::vector<bool> lambda(n, false);
  for (const auto& e : g.edges()) {
    const std::size_t c = scc.component_of[e.src];
    if (e.kind == EdgeKind::LambdaEdge && scc.component_of[e.dst] == c && !scc.input_reachable[e.src]) {
      lambda[c] = true;
    }
  }
  std::vector<bool> below(n, false);
  for (std::size_t c = 0; c < n; ++c) {
    if (!lambda[c]) continue;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack(scc.condensation[c].begin(), scc.condensation[c].end());
    while (!stack.empty()) {
      const std::size_t d = stack.back();
      stack.pop_back();
      if (seen[d]) continue;
      seen[d] = true;
      below[d] = true;
      stack.insert(stack.end(), scc.condensation[d].begin(), scc.condensation[d].end());
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < n; ++c)
    if (lambda[c] && !below[c]) out.push_back(c);
  return out;
}

bool is_lambda_cycle(const StructureGraph& g, const Cycle& cycle) {
  if (cycle.empty()) return false;
  bool lambda = false;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    auto kind = g.edge_kind(cycle[i], cycle[(i + 1) % cycle.size()]);
    if (!kind) return false;
    lambda = lambda || *kind == EdgeKind::LambdaEdge;
  }
  return lambda;
}

std::string cycle_to_string(const StructureGraph& g, const Cycle& cycle) {
  std::string out;
  for (auto v : cycle) out += g.name(v) + " -> ";
  if (!cycle.empty()) out += g.name(cycle.front());
  return out;
}

std::string to_dot(const StructureGraph& g, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (std::size_t v = 0; v < g.size(); ++v) {
    const char* shape = "ellipse";
    if (g.vertex(v).kind == VertexKind::ExternalInput) shape = "box";
    if (g.vertex(v).kind == VertexKind::InternalOutput) shape = "diamond";
    os << "  " << g.name(v) << " [shape=" << shape << "];\n";
  }
  for (const auto& e : sorted_edges(g)) {
    os << "  " << g.name(e.src) << " -> " << g.name(e.dst);
    if (e.kind == EdgeKind::LambdaEdge) os << " [style=dashed]";
    if (e.kind == EdgeKind::LinkEdge) os << " [style=bold]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace netctrl
