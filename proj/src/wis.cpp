#include <algorithm>
#include <numeric>
#include <random>

#include "irlab/wis.hpp"

namespace irlab {

TuplePolicy parse_policy(const std::string& s) {
  if (s == "sorted-lex") return TuplePolicy::SortedLex;
  if (s == "sum") return TuplePolicy::Sum;
  if (s == "min") return TuplePolicy::Min;
  if (s == "max") return TuplePolicy::Max;
  throw std::domain_error("unknown tuple policy '" + s + "'");
}

bool tuple_greater(const std::vector<Count>& a, const std::vector<Count>& b, TuplePolicy policy) {
  switch (policy) {
    case TuplePolicy::SortedLex:
      return b < a;
    case TuplePolicy::Sum:
      return std::accumulate(a.begin(), a.end(), Count(0)) > std::accumulate(b.begin(), b.end(), Count(0));
    case TuplePolicy::Min:
      return *std::min_element(a.begin(), a.end()) > *std::min_element(b.begin(), b.end());
    case TuplePolicy::Max:
      return *std::max_element(a.begin(), a.end()) > *std::max_element(b.begin(), b.end());
  }
  return false;
}

std::vector<Count> vertex_scores(const Graph& g, Index L) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  std::vector<Count> s(g.num_vertices());
  for (Index t = 0; t < s.size(); ++t) s[t] = vertex_walk_index(g, L - 1, t, {t});
  return s;
}

namespace {

void check_count(const Graph& g, Index N) {
  if (N > g.num_edges())
    throw std::domain_error("cannot remove " + std::to_string(N) + " edges from a graph with " +
                            std::to_string(g.num_edges()));
}

// Greedy loop shared by the walk-index sparsifiers. score(h) evaluates the
// tuple of a candidate graph h = g - e.
template <class Score>
SparsifyResult greedy_removal(const Graph& g0, Index N, Index batch, TuplePolicy policy, Score score) {
  check_count(g0, N);
  if (batch == 0) throw std::domain_error("batch size must be positive");
  SparsifyResult res{g0, {}};
  Graph& g = res.graph;
  while (res.removals.size() < N) {
    std::vector<std::pair<Edge, std::vector<Count>>> cand;
    for (Edge e : g.edges()) {
      g.remove_edge(e.first, e.second);
      auto s = score(g);
      g.add_edge(e.first, e.second);
      if (policy == TuplePolicy::SortedLex) std::sort(s.begin(), s.end());
      cand.push_back({e, std::move(s)});
    }
    // Stable order: preferred tuple first, smaller edge first among ties.
    std::stable_sort(cand.begin(), cand.end(),
                     [&](const auto& a, const auto& b) { return tuple_greater(a.second, b.second, policy); });
    Index take = std::min<Index>(batch, N - res.removals.size());
    for (Index k = 0; k < take; ++k) {
      g.remove_edge(cand[k].first.first, cand[k].first.second);
      res.removals.push_back({cand[k].first, std::move(cand[k].second)});
    }
  }
  return res;
}

}  // namespace

SparsifyResult wis(const Graph& g, Index L, Index N, Index batch) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  return greedy_removal(g, N, batch, TuplePolicy::SortedLex, [L](const Graph& h) { return vertex_scores(h, L); });
}

SparsifyResult one_wis(const Graph& g0, Index N) {
  check_count(g0, N);
  SparsifyResult res{g0, {}};
  Graph& g = res.graph;
  std::vector<Index> deg(g.num_vertices());
  for (Index v = 0; v < deg.size(); ++v) deg[v] = g.degree(v);
  for (Index step = 0; step < N; ++step) {
    Edge best{0, 0};
    std::pair<Index, Index> key{0, 0};
    bool found = false;
    for (Edge e : g.edges()) {
      std::pair<Index, Index> k = std::minmax(deg[e.first], deg[e.second]);
      if (!found || k > key) {
        best = e;
        key = k;
        found = true;
      }
    }
    g.remove_edge(best.first, best.second);
    --deg[best.first];
    --deg[best.second];
    // Equivalent L = 2 tuple: s_t = deg(t) when t keeps a neighbor, else 0.
    std::vector<Count> s;
    for (Index d : deg) s.push_back(d >= 2 ? Count(d) : Count(0));
    std::sort(s.begin(), s.end());
    res.removals.push_back({best, std::move(s)});
  }
  return res;
}

SparsifyResult gwis(const Graph& g, Index L, Index N, const std::vector<VertexSet>& partitions,
                    const std::vector<VertexTarget>& targets, TuplePolicy policy, Index batch) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  if (partitions.empty() && targets.empty()) throw std::domain_error("gwis needs at least one partition");
  for (const auto& t : targets)
    if (t.t >= g.num_vertices()) throw std::domain_error("target vertex out of range");
  return greedy_removal(g, N, batch, policy, [&](const Graph& h) {
    std::vector<Count> s;
    for (const auto& I : partitions) s.push_back(walk_index(h, L - 1, I));
    for (const auto& t : targets) s.push_back(vertex_walk_index(h, L - 1, t.t, t.J));
    return s;
  });
}

SparsifyResult random_prune(const Graph& g0, Index N, std::uint64_t seed) {
  check_count(g0, N);
  SparsifyResult res{g0, {}};
  auto edges = g0.edges();
  std::mt19937_64 rng(seed);
  // Uniform integer in [0, n) by rejection, so results do not depend on the
  // standard library's distribution implementation.
  auto uniform = [&](std::uint64_t n) {
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % n;
  };
  for (Index k = 0; k < N; ++k) {
    Index j = k + uniform(edges.size() - k);
    std::swap(edges[k], edges[j]);
    res.graph.remove_edge(edges[k].first, edges[k].second);
    res.removals.push_back({edges[k], {}});
  }
  return res;
}

}  // namespace irlab
