#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "netctrl/model.hpp"
#include "netctrl/ratfun.hpp"

namespace netctrl {

enum class VertexKind { ExternalInput, InternalInput, InternalOutput };
enum class EdgeKind { ConstantEdge, LambdaEdge, LinkEdge };

struct Vertex {
  VertexKind kind;
  std::size_t subsystem;  // 1-based; 0 for the lumped graph
  std::size_t index;      // 1-based within the subsystem (or within the lumped signal)
  std::size_t global;     // 0-based global signal index (u, v or z numbering)
};

struct Edge {
  std::size_t src;
  std::size_t dst;
  EdgeKind kind;
  friend bool operator<(const Edge& a, const Edge& b) {
    return std::tie(a.src, a.dst, a.kind) < std::tie(b.src, b.dst, b.kind);
  }
  friend bool operator==(const Edge& a, const Edge& b) {
    return a.src == b.src && a.dst == b.dst && a.kind == b.kind;
  }
};

// Vertex ids follow the canonical order: inputs u, then internal inputs v, then
// internal outputs z, each sorted by (subsystem, index).
class StructureGraph {
 public:
  std::size_t add_vertex(const Vertex& v);
  // Duplicate edges are ignored.
  void add_edge(std::size_t src, std::size_t dst, EdgeKind kind);

  [[nodiscard]] std::size_t size() const { return vertices_.size(); }
  [[nodiscard]] const Vertex& vertex(std::size_t id) const { return vertices_[id]; }
  [[nodiscard]] const std::vector<Vertex>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<std::size_t>& out_edges(std::size_t v) const { return out_[v]; }
  [[nodiscard]] std::optional<std::size_t> find(VertexKind kind, std::size_t global) const;
  [[nodiscard]] std::optional<EdgeKind> edge_kind(std::size_t src, std::size_t dst) const;
  [[nodiscard]] std::string name(std::size_t id) const;
  [[nodiscard]] std::size_t count_edges(EdgeKind kind) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> out_;  // edge indices
  std::map<std::tuple<std::size_t, std::size_t, int>, std::size_t> edge_index_;
  std::map<std::pair<int, std::size_t>, std::size_t> by_global_;
};

std::string vertex_name(const Vertex& v);

// Lumped ACG: u_1..u_q and z_1..z_k; gzv is k x k, gzu is k x q.
StructureGraph build_acg(const ClassMatrix& gzv_classes, const ClassMatrix& gzu_classes);

// Networked ACG: per-subsystem graphs plus a link z -> v for every free entry (v, z)
// of the global parameter pattern.
StructureGraph build_nacg(const std::vector<AugmentedSubsystem>& parts,
                          const std::vector<SubsystemTfms>& tfms, const StructuredPattern& P_pattern);

struct SccDecomposition {
  std::vector<std::vector<std::size_t>> components;  // each sorted; ordered by smallest vertex
  std::vector<std::size_t> component_of;
  std::vector<std::vector<std::size_t>> condensation;  // successor components, sorted, no self-loops
  std::vector<bool> has_incoming;                      // per component
  std::vector<bool> input_reachable;                   // per vertex
};

std::vector<bool> input_reachable(const StructureGraph& g);
SccDecomposition scc_decompose(const StructureGraph& g);

// Vertex sequence c_0 .. c_{m-1}; edges c_i -> c_{i+1} and c_{m-1} -> c_0; starts at its
// smallest vertex.
using Cycle = std::vector<std::size_t>;

std::optional<Cycle> find_input_unreachable_lambda_cycle(const StructureGraph& g);
std::optional<Edge> find_input_unreachable_lambda_edge(const StructureGraph& g);
// Components (by index into scc.components) that are sources of the condensation,
// input-unreachable and contain a lambda-edge between two of their vertices.
std::vector<std::size_t> unreachable_source_sccs_with_lambda_edge(const StructureGraph& g,
                                                                 const SccDecomposition& scc);
// Input-unreachable components with an internal lambda-edge that no other such component
// reaches. Includes every component of unreachable_source_sccs_with_lambda_edge.
std::vector<std::size_t> unreachable_lambda_scc_roots(const StructureGraph& g, const SccDecomposition& scc);

// Re-walks the cycle: every hop is an edge and at least one hop is a lambda-edge.
bool is_lambda_cycle(const StructureGraph& g, const Cycle& cycle);

std::string cycle_to_string(const StructureGraph& g, const Cycle& cycle);

// Graphviz rendering: u boxes, v ellipses, z diamonds; dashed lambda-edges, bold links.
std::string to_dot(const StructureGraph& g, const std::string& name = "nacg");

}  // namespace netctrl
