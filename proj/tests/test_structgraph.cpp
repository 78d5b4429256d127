#include <doctest.h>

#include <random>
#include <set>

#include "netctrl/design.hpp"
#include "netctrl/structgraph.hpp"
#include "netctrl/verify.hpp"
#include "support/worked_example.hpp"

using namespace netctrl;

namespace {

struct RandomGraph {
  StructureGraph g;
  std::size_t inputs = 0;
};

RandomGraph random_graph(std::mt19937_64& rng, std::size_t q, std::size_t m, double density) {
  RandomGraph out;
  out.inputs = q;
  for (std::size_t i = 0; i < q; ++i) out.g.add_vertex({VertexKind::ExternalInput, 0, i + 1, i});
  for (std::size_t i = 0; i < m; ++i) out.g.add_vertex({VertexKind::InternalOutput, 0, i + 1, i});
  std::bernoulli_distribution edge(density), lambda(0.4);
  for (std::size_t a = 0; a < q + m; ++a)
    for (std::size_t b = q; b < q + m; ++b)
      if (edge(rng)) out.g.add_edge(a, b, lambda(rng) ? EdgeKind::LambdaEdge : EdgeKind::ConstantEdge);
  return out;
}

// reach[a][b]: a path of length >= 1 from a to b.
std::vector<std::vector<bool>> closure(const StructureGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges()) reach[e.src][e.dst] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  return reach;
}

std::vector<bool> reachable_oracle(const StructureGraph& g) {
  const auto reach = closure(g);
  std::vector<bool> out(g.size(), false);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (g.vertex(v).kind == VertexKind::ExternalInput) out[v] = true;
    for (std::size_t s = 0; s < g.size(); ++s)
      if (g.vertex(s).kind == VertexKind::ExternalInput && reach[s][v]) out[v] = true;
  }
  return out;
}

std::vector<AugmentedSubsystem> worked_parts() {
  std::vector<AugmentedSubsystem> out;
  for (const auto& s : netctrl::testing::three_subsystems()) out.push_back(analysis_form(s));
  return out;
}

}  // namespace

TEST_CASE("input reachability and SCCs match the transitive closure") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 300; ++t) {
    const auto rg = random_graph(rng, rng() % 3, 1 + rng() % 8, 0.15 + 0.3 * (t % 3) / 2.0);
    const auto& g = rg.g;
    const auto reach = closure(g);
    const auto oracle = reachable_oracle(g);
    CHECK(input_reachable(g) == oracle);

    const auto scc = scc_decompose(g);
    CHECK(scc.input_reachable == oracle);
    std::size_t covered = 0;
    for (std::size_t c = 0; c < scc.components.size(); ++c) {
      covered += scc.components[c].size();
      CHECK(std::is_sorted(scc.components[c].begin(), scc.components[c].end()));
      for (auto v : scc.components[c]) CHECK(scc.component_of[v] == c);
      if (c > 0) CHECK(scc.components[c - 1].front() < scc.components[c].front());
    }
    CHECK(covered == g.size());
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = 0; b < g.size(); ++b) {
        const bool same = a == b || (reach[a][b] && reach[b][a]);
        CHECK(same == (scc.component_of[a] == scc.component_of[b]));
      }
    std::vector<bool> incoming(scc.components.size(), false);
    for (const auto& e : g.edges()) {
      const auto ca = scc.component_of[e.src], cb = scc.component_of[e.dst];
      if (ca == cb) continue;
      incoming[cb] = true;
      const auto& succ = scc.condensation[ca];
      CHECK(std::binary_search(succ.begin(), succ.end(), cb));
    }
    CHECK(scc.has_incoming == incoming);
    for (std::size_t c = 0; c < scc.components.size(); ++c)
      for (auto d : scc.condensation[c]) {
        CHECK(d != c);
        // acyclic: no path back
        CHECK_FALSE(reach[scc.components[d].front()][scc.components[c].front()]);
      }
  }
}

TEST_CASE("lambda-cycle and lambda-edge queries match brute force") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 300; ++t) {
    const auto rg = random_graph(rng, rng() % 3, 1 + rng() % 7, 0.25);
    const auto& g = rg.g;
    const auto reach = closure(g);
    const auto in = reachable_oracle(g);

    bool cycle_expected = false, edge_expected = false;
    for (const auto& e : g.edges()) {
      if (e.kind != EdgeKind::LambdaEdge) continue;
      if (!in[e.src] && (e.src == e.dst || reach[e.dst][e.src])) cycle_expected = true;
      if (!in[e.src] && !in[e.dst]) edge_expected = true;
    }
    const auto cycle = find_input_unreachable_lambda_cycle(g);
    CHECK(cycle.has_value() == cycle_expected);
    if (cycle) {
      CHECK(is_lambda_cycle(g, *cycle));
      CHECK(cycle->front() == *std::min_element(cycle->begin(), cycle->end()));
      CHECK(std::set<std::size_t>(cycle->begin(), cycle->end()).size() == cycle->size());
      for (auto v : *cycle) CHECK_FALSE(in[v]);
    }
    const auto edge = find_input_unreachable_lambda_edge(g);
    CHECK(edge.has_value() == edge_expected);
    if (edge) {
      CHECK(edge->kind == EdgeKind::LambdaEdge);
      CHECK_FALSE(in[edge->src]);
      CHECK_FALSE(in[edge->dst]);
    }
    // a cycle's edges are themselves an unreachable lambda-edge
    if (cycle_expected) CHECK(edge_expected);

    const auto scc = scc_decompose(g);
    std::set<std::size_t> expected;
    for (std::size_t c = 0; c < scc.components.size(); ++c) {
      if (scc.has_incoming[c] || in[scc.components[c].front()]) continue;
      for (const auto& e : g.edges())
        if (e.kind == EdgeKind::LambdaEdge && scc.component_of[e.src] == c && scc.component_of[e.dst] == c)
          expected.insert(c);
    }
    const auto got = unreachable_source_sccs_with_lambda_edge(g, scc);
    CHECK(std::set<std::size_t>(got.begin(), got.end()) == expected);
    if (!expected.empty()) CHECK(cycle_expected);
    const auto roots = unreachable_lambda_scc_roots(g, scc);
    CHECK(roots.empty() == !cycle_expected);
    for (auto c : expected) CHECK(std::find(roots.begin(), roots.end(), c) != roots.end());
    for (auto c : roots)
      for (auto d : roots)
        if (c != d) CHECK_FALSE(reach[scc.components[c].front()][scc.components[d].front()]);
  }
}

TEST_CASE("adding an edge never shrinks the input-reachable set") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 300; ++t) {
    auto rg = random_graph(rng, 1 + rng() % 2, 1 + rng() % 7, 0.2);
    const auto before = input_reachable(rg.g);
    const std::size_t n = rg.g.size();
    const std::size_t a = rng() % n, b = rg.inputs + rng() % (n - rg.inputs);
    rg.g.add_edge(a, b, EdgeKind::LinkEdge);
    const auto after = input_reachable(rg.g);
    for (std::size_t v = 0; v < n; ++v)
      if (before[v]) CHECK(after[v]);
  }
}

TEST_CASE("graph queries on small fixed graphs") {
  SUBCASE("fully input-reachable graph has no unreachable source component") {
    StructureGraph g;
    g.add_vertex({VertexKind::ExternalInput, 0, 1, 0});
    g.add_vertex({VertexKind::InternalOutput, 0, 1, 0});
    g.add_vertex({VertexKind::InternalOutput, 0, 2, 1});
    g.add_edge(0, 1, EdgeKind::ConstantEdge);
    g.add_edge(1, 2, EdgeKind::LambdaEdge);
    g.add_edge(2, 1, EdgeKind::LambdaEdge);
    CHECK(unreachable_source_sccs_with_lambda_edge(g, scc_decompose(g)).empty());
    CHECK_FALSE(find_input_unreachable_lambda_cycle(g));
  }
  SUBCASE("two disjoint lambda-cycles without inputs") {
    StructureGraph g;
    for (std::size_t i = 0; i < 4; ++i) g.add_vertex({VertexKind::InternalOutput, 0, i + 1, i});
    g.add_edge(0, 1, EdgeKind::LambdaEdge);
    g.add_edge(1, 0, EdgeKind::ConstantEdge);
    g.add_edge(2, 2, EdgeKind::LambdaEdge);
    g.add_edge(2, 3, EdgeKind::ConstantEdge);
    CHECK(unreachable_source_sccs_with_lambda_edge(g, scc_decompose(g)).size() == 2);
    CHECK(unreachable_lambda_scc_roots(g, scc_decompose(g)).size() == 2);
    const auto c = find_input_unreachable_lambda_cycle(g);
    REQUIRE(c);
    CHECK(*c == Cycle{0, 1});
    CHECK(cycle_to_string(g, *c) == "z1 -> z2 -> z1");
  }
  SUBCASE("a lambda-cycle fed by an unreachable vertex is a root but not a source") {
    StructureGraph g;
    for (std::size_t i = 0; i < 3; ++i) g.add_vertex({VertexKind::InternalOutput, 0, i + 1, i});
    g.add_edge(0, 1, EdgeKind::ConstantEdge);
    g.add_edge(1, 2, EdgeKind::LambdaEdge);
    g.add_edge(2, 1, EdgeKind::ConstantEdge);
    const auto scc = scc_decompose(g);
    CHECK(unreachable_source_sccs_with_lambda_edge(g, scc).empty());
    const auto roots = unreachable_lambda_scc_roots(g, scc);
    REQUIRE(roots.size() == 1);
    CHECK(scc.components[roots[0]] == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("duplicate edges are ignored") {
    StructureGraph g;
    g.add_vertex({VertexKind::InternalOutput, 0, 1, 0});
    g.add_edge(0, 0, EdgeKind::LambdaEdge);
    g.add_edge(0, 0, EdgeKind::LambdaEdge);
    CHECK(g.edges().size() == 1);
  }
}

TEST_CASE("ACG edges follow the entry classes") {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 1 + rng() % 4, q = rng() % 3;
    ClassMatrix zv(k, k), zu(k, q);
    auto random_class = [&] {
      switch (rng() % 3) {
        case 0: return EntryClass{EntryKind::Zero, 0};
        case 1: return EntryClass{EntryKind::Constant, 2};
        default: return EntryClass{EntryKind::LambdaDependent, 0};
      }
    };
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) zv(i, j) = random_class();
      for (std::size_t j = 0; j < q; ++j) zu(i, j) = random_class();
    }
    const StructureGraph g = build_acg(zv, zu);
    CHECK(g.size() == k + q);
    std::size_t expected_edges = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto zi = *g.find(VertexKind::InternalOutput, i);
      for (std::size_t j = 0; j < k; ++j) {
        const auto kind = g.edge_kind(*g.find(VertexKind::InternalOutput, j), zi);
        CHECK(kind.has_value() == (zv(i, j).kind != EntryKind::Zero));
        if (kind) CHECK((*kind == EdgeKind::LambdaEdge) == (zv(i, j).kind == EntryKind::LambdaDependent));
        expected_edges += zv(i, j).kind != EntryKind::Zero;
      }
      for (std::size_t j = 0; j < q; ++j) {
        const auto kind = g.edge_kind(*g.find(VertexKind::ExternalInput, j), zi);
        CHECK(kind.has_value() == (zu(i, j).kind != EntryKind::Zero));
        expected_edges += zu(i, j).kind != EntryKind::Zero;
      }
    }
    CHECK(g.edges().size() == expected_edges);
  }
}

TEST_CASE("networked graph of the worked example") {
  const auto parts = worked_parts();
  std::vector<SubsystemTfms> tfms;
  for (const auto& p : parts) tfms.push_back(subsystem_tfms(p));
  const auto L = signal_layout(parts);

  SUBCASE("vertex naming and counts") {
    const auto g = build_nacg(parts, tfms, StructuredPattern(L.n_v, L.n_z));
    CHECK(g.size() == 3 + 6 + 5);
    CHECK(g.name(0) == "u11");
    CHECK(g.name(3) == "v11");
    CHECK(g.name(13) == "z32");
    CHECK(g.count_edges(EdgeKind::LinkEdge) == 0);
    const std::string dot = to_dot(g);
    CHECK(dot.find("style=bold") == std::string::npos);
    CHECK(dot.find("u11 [shape=box]") != std::string::npos);
  }
  SUBCASE("three links give three bold edges") {
    const auto nds = netctrl::testing::three_link_topology();
    const auto g = build_nacg(parts, tfms, global_pattern(L, nds.scm));
    CHECK(g.count_edges(EdgeKind::LinkEdge) == 3);
    const std::string dot = to_dot(g);
    std::size_t bold = 0;
    for (auto p = dot.find("style=bold"); p != std::string::npos; p = dot.find("style=bold", p + 1)) ++bold;
    CHECK(bold == 3);
  }
  SUBCASE("the star topology has an input-unreachable lambda-cycle") {
    const auto nds = netctrl::testing::star_topology();
    const auto g = build_nacg(parts, tfms, global_pattern(L, nds.scm));
    const auto c = find_input_unreachable_lambda_cycle(g);
    REQUIRE(c);
    std::set<std::string> names;
    for (auto v : *c) names.insert(g.name(v));
    CHECK(names == std::set<std::string>{"v12", "z11", "v32", "z32", "v21", "z21"});
    const std::string dot = to_dot(g);
    CHECK(dot.find("z11 -> v32 [style=bold]") != std::string::npos);
  }
}
