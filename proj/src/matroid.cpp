#include "netctrl/matroid.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <mutex>
#include <random>
#include <unordered_map>

namespace netctrl {

// Hopcroft-Karp

std::size_t max_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t n_right) {
  const std::size_t n_left = adj.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_l(n_left, kNone), match_r(n_right, kNone), dist(n_left);
  std::size_t matched = 0;

  auto bfs = [&]() {
    std::deque<std::size_t> queue;
    bool found = false;
    for (std::size_t l = 0; l < n_left; ++l) {
      if (match_l[l] == kNone) {
        dist[l] = 0;
        queue.push_back(l);
      } else {
        dist[l] = kNone;
      }
    }
    while (!queue.empty()) {
      std::size_t l = queue.front();
      queue.pop_front();
      for (auto r : adj[l]) {
        std::size_t next = match_r[r];
        if (next == kNone) {
          found = true;
        } else if (dist[next] == kNone) {
          dist[next] = dist[l] + 1;
          queue.push_back(next);
        }
      }
    }
    return found;
  };

  // Iterative layered DFS.
  auto dfs = [&](std::size_t root) {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    std::vector<std::size_t> path_r;
    while (!stack.empty()) {
      auto& [l, pos] = stack.back();
      if (pos == adj[l].size()) {
        dist[l] = kNone;
        stack.pop_back();
        if (!path_r.empty()) path_r.pop_back();
        continue;
      }
      std::size_t r = adj[l][pos++];
      std::size_t next = match_r[r];
      if (next == kNone) {
        path_r.push_back(r);
        for (std::size_t i = 0; i < stack.size(); ++i) {
          match_l[stack[i].first] = path_r[i];
          match_r[path_r[i]] = stack[i].first;
        }
        return true;
      }
      if (dist[next] == dist[l] + 1) {
        path_r.push_back(r);
        stack.push_back({next, 0});
      }
    }
    return false;
  };

  while (bfs()) {
    for (std::size_t l = 0; l < n_left; ++l) {
      if (match_l[l] == kNone && dfs(l)) ++matched;
    }
  }
  return matched;
}

// Column tests

bool numeric_independent(const RatMatrix& m, const std::vector<std::size_t>& J) {
  if (J.size() > m.rows()) return false;
  return rank(m.select_cols(J)) == J.size();
}

bool numeric_independent(const CMatrix& m, const std::vector<std::size_t>& J, double abs_tol) {
  if (J.empty()) return true;
  if (J.size() > static_cast<std::size_t>(m.rows())) return false;
  CMatrix sub(m.rows(), static_cast<Eigen::Index>(J.size()));
  for (std::size_t j = 0; j < J.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(J[j]));
  return numeric_rank(sub, abs_tol) == J.size();
}

std::size_t generic_rank(const StructuredPattern& p, const std::vector<std::size_t>& J) {
  std::vector<std::vector<std::size_t>> adj(J.size());
  std::vector<std::size_t> slot(p.cols(), std::numeric_limits<std::size_t>::max());
  for (std::size_t j = 0; j < J.size(); ++j) slot[J[j]] = j;
  for (const auto& [pos, id] : p.entries()) {
    std::size_t j = slot[pos.second];
    if (j != std::numeric_limits<std::size_t>::max()) adj[j].push_back(pos.first);
  }
  return max_matching(adj, p.rows());
}

std::size_t generic_rank(const StructuredPattern& p) {
  std::vector<std::size_t> all(p.cols());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  return generic_rank(p, all);
}

bool generic_independent(const StructuredPattern& p, const std::vector<std::size_t>& J) {
  return generic_rank(p, J) == J.size();
}

StructuredPattern q1_pattern(const StructuredPattern& P) {
  const std::size_t mv = P.rows(), mz = P.cols();
  StructuredPattern q(mz, mv + mz);
  int id = 0;
  for (const auto& [pos, pid] : P.entries()) q.set_free(pos.second, pos.first, id++);
  for (std::size_t z = 0; z < mz; ++z) q.set_free(z, mv + z, id++);
  return q;
}

// Oracle

struct IndependenceOracle::Cache {
  std::mutex mutex;
  std::unordered_map<std::uint64_t, bool> memo;
};

IndependenceOracle IndependenceOracle::numeric(RatMatrix m) {
  IndependenceOracle o;
  o.kind_ = Kind::ExactColumns;
  o.ground_ = m.cols();
  o.data_ = std::move(m);
  o.cache_ = std::make_shared<Cache>();
  return o;
}

IndependenceOracle IndependenceOracle::numeric(CMatrix m, double rel_tol) {
  IndependenceOracle o;
  o.kind_ = Kind::FloatColumns;
  o.ground_ = static_cast<std::size_t>(m.cols());
  o.abs_tol_ = rel_tol * std::max(1.0, max_singular_value(m));
  o.data_ = std::move(m);
  o.cache_ = std::make_shared<Cache>();
  return o;
}

IndependenceOracle IndependenceOracle::generic(StructuredPattern p) {
  IndependenceOracle o;
  o.kind_ = Kind::GenericPattern;
  o.ground_ = p.cols();
  o.data_ = std::move(p);
  o.cache_ = std::make_shared<Cache>();
  return o;
}

bool IndependenceOracle::compute(const std::vector<std::size_t>& J) const {
  switch (kind_) {
    case Kind::ExactColumns: return numeric_independent(std::get<RatMatrix>(data_), J);
    case Kind::FloatColumns: return numeric_independent(std::get<CMatrix>(data_), J, abs_tol_);
    case Kind::GenericPattern: return generic_independent(std::get<StructuredPattern>(data_), J);
  }
  return false;
}

bool IndependenceOracle::independent(const std::vector<std::size_t>& J) const {
  if (J.empty()) return true;
  if (ground_ > 64) return compute(J);
  std::uint64_t key = 0;
  for (auto j : J) key |= std::uint64_t{1} << j;
  {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->memo.find(key);
    if (it != cache_->memo.end()) return it->second;
  }
  bool result = compute(J);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  cache_->memo.emplace(key, result);
  return result;
}

std::size_t IndependenceOracle::rank() const {
  // Greedy basis.
  std::vector<std::size_t> basis;
  for (std::size_t j = 0; j < ground_; ++j) {
    basis.push_back(j);
    if (!independent(basis)) basis.pop_back();
  }
  return basis.size();
}

// Intersection

CommonIndependentSet matroid_intersection_rank(const IndependenceOracle& o1, const IndependenceOracle& o2) {
  if (o1.ground_size() != o2.ground_size()) throw std::invalid_argument("matroids on different ground sets");
  const std::size_t n = o1.ground_size();
  std::vector<bool> in(n, false);

  auto current = [&]() {
    std::vector<std::size_t> I;
    for (std::size_t j = 0; j < n; ++j) {
      if (in[j]) I.push_back(j);
    }
    return I;
  };
  auto with = [](std::vector<std::size_t> I, std::size_t y) {
    I.insert(std::upper_bound(I.begin(), I.end(), y), y);
    return I;
  };
  auto swap = [](const std::vector<std::size_t>& I, std::size_t x, std::size_t y) {
    std::vector<std::size_t> out;
    for (auto e : I) {
      if (e != x) out.push_back(e);
    }
    out.insert(std::upper_bound(out.begin(), out.end(), y), y);
    return out;
  };

  // Greedy start.
  for (std::size_t y = 0; y < n; ++y) {
    auto I = with(current(), y);
    if (o1.independent(I) && o2.independent(I)) in[y] = true;
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  while (true) {
    auto I = current();
    std::vector<bool> sink(n, false);
    std::vector<std::size_t> parent(n, kNone);
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue;
    for (std::size_t y = 0; y < n; ++y) {
      if (in[y]) continue;
      auto Iy = with(I, y);
      sink[y] = o2.independent(Iy);
      if (o1.independent(Iy)) {
        seen[y] = true;
        queue.push_back(y);
      }
    }
    std::size_t end = kNone;
    while (!queue.empty() && end == kNone) {
      std::size_t a = queue.front();
      queue.pop_front();
      if (!in[a] && sink[a]) {
        end = a;
        break;
      }
      for (std::size_t b = 0; b < n; ++b) {
        if (seen[b] || in[a] == in[b]) continue;
        // a in I, b not: arc a->b if I - a + b in M1. a not in I, b in I: arc a->b if I - b + a in M2.
        bool arc = in[a] ? o1.independent(swap(I, a, b)) : o2.independent(swap(I, b, a));
        if (!arc) continue;
        seen[b] = true;
        parent[b] = a;
        queue.push_back(b);
      }
    }
    if (end == kNone) break;
    for (std::size_t v = end; v != kNone; v = parent[v]) in[v] = !in[v];
  }
  CommonIndependentSet out;
  out.indices = current();
  out.certified_rank = out.indices.size();
  return out;
}

// Union

namespace {

std::size_t bounded_range(const StructuredPattern& g) {
  // Values from {1, ..., 2 * rows * k}.
  return 2 * std::max<std::size_t>(1, g.rows() * std::max<std::size_t>(1, g.free_count()));
}

}  // namespace

std::size_t matroid_union_rank(const RatMatrix& numeric_part, const StructuredPattern& generic_part,
                               const UnionOptions& opts) {
  if (numeric_part.cols() != generic_part.cols()) throw std::invalid_argument("union parts differ in columns");
  if (generic_part.free_count() == 0) return rank(numeric_part);
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<long> dist(1, static_cast<long>(bounded_range(generic_part)));
  std::size_t best = 0;
  std::size_t agree = 0;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, opts.trials); ++t) {
    std::map<int, Rational> values;
    for (const auto& [pos, id] : generic_part.entries()) values[id] = Rational(dist(rng));
    std::size_t r = rank(vstack(numeric_part, generic_part.substitute(values)));
    if (r == best) ++agree;
    if (r > best) {
      best = r;
      agree = 1;
    }
    if (best == numeric_part.cols() || agree >= 2) break;
  }
  return best;
}

std::size_t matroid_union_rank(const CMatrix& numeric_part, const StructuredPattern& generic_part,
                               const UnionOptions& opts) {
  if (static_cast<std::size_t>(numeric_part.cols()) != generic_part.cols()) {
    throw std::invalid_argument("union parts differ in columns");
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<long> dist(1, static_cast<long>(bounded_range(generic_part)));
  const auto nr = numeric_part.rows();
  const auto gr = static_cast<Eigen::Index>(generic_part.rows());
  std::size_t best = 0;
  std::size_t agree = 0;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, opts.trials); ++t) {
    CMatrix stack = CMatrix::Zero(nr + gr, numeric_part.cols());
    stack.topRows(nr) = numeric_part;
    for (const auto& [pos, id] : generic_part.entries()) {
      stack(nr + static_cast<Eigen::Index>(pos.first), static_cast<Eigen::Index>(pos.second)) =
          static_cast<double>(dist(rng));
    }
    std::size_t r = numeric_rank(stack, opts.rel_tol * std::max(1.0, max_singular_value(stack)));
    if (r == best) ++agree;
    if (r > best) {
      best = r;
      agree = 1;
    }
    if (best == static_cast<std::size_t>(numeric_part.cols()) || agree >= 2) break;
  }
  return best;
}

namespace {

template <class Independent>
std::size_t exhaustive_union(std::size_t n, const StructuredPattern& generic_part, Independent&& independent) {
  if (n > 20) throw std::invalid_argument("exhaustive union rank limited to 20 columns");
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask) {
    std::vector<std::size_t> Y, rest;
    for (std::size_t j = 0; j < n; ++j) ((mask >> j) & 1U ? Y : rest).push_back(j);
    if (!independent(Y)) continue;
    best = std::max(best, Y.size() + generic_rank(generic_part, rest));
  }
  return best;
}

}  // namespace

std::size_t matroid_union_rank_exhaustive(const RatMatrix& numeric_part, const StructuredPattern& generic_part) {
  auto oracle = IndependenceOracle::numeric(numeric_part);
  return exhaustive_union(numeric_part.cols(), generic_part,
                          [&](const std::vector<std::size_t>& Y) { return oracle.independent(Y); });
}

std::size_t matroid_union_rank_exhaustive(const CMatrix& numeric_part, const StructuredPattern& generic_part,
                                          double rel_tol) {
  auto oracle = IndependenceOracle::numeric(numeric_part, rel_tol);
  return exhaustive_union(static_cast<std::size_t>(numeric_part.cols()), generic_part,
                          [&](const std::vector<std::size_t>& Y) { return oracle.independent(Y); });
}

}  // namespace netctrl
