#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "irlab/graph.hpp"

using namespace irlab;

namespace {

Graph complete(Index n) {
  Graph g(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

Graph path(Index n) {
  Graph g(n);
  for (Index i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph random_graph(Index n, double p, std::mt19937_64& rng) {
  Graph g(n);
  std::bernoulli_distribution coin(p);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (coin(rng)) g.add_edge(i, j);
  return g;
}

VertexSet all(Index n) {
  VertexSet v(n);
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

VertexSet from_mask(std::uint64_t m, Index n) {
  VertexSet v;
  for (Index i = 0; i < n; ++i)
    if (m >> i & 1) v.push_back(i);
  return v;
}

bool contains(const VertexSet& s, Index v) { return std::binary_search(s.begin(), s.end(), v); }

// Depth-first enumeration of walks; neighbors include self-loops.
template <class Next>
std::uint64_t enumerate_walks(Index start, Index l, const VertexSet& T, Next next) {
  if (l == 0) return contains(T, start);
  std::uint64_t total = 0;
  for (Index u : next(start)) total += enumerate_walks(u, l - 1, T, next);
  return total;
}

std::uint64_t oracle_walks(const Graph& g, Index l, const VertexSet& S, const VertexSet& T) {
  std::uint64_t total = 0;
  for (Index s : S) total += enumerate_walks(s, l, T, [&](Index v) { return g.neighbors(v); });
  return total;
}

std::uint64_t oracle_walks(const DirectedTypedGraph& g, Index l, const VertexSet& S, const VertexSet& T) {
  std::uint64_t total = 0;
  for (Index s : S) total += enumerate_walks(s, l, T, [&](Index v) { return g.out_neighbors(v); });
  return total;
}

VertexSet oracle_boundary(const Graph& g, const VertexSet& I) {
  VertexSet out;
  for (Index v = 0; v < g.num_vertices(); ++v) {
    bool in = contains(I, v);
    for (Index u : g.neighbors(v))
      if (contains(I, u) != in) {
        out.push_back(v);
        break;
      }
  }
  return out;
}

std::set<Index> nbhd(const Graph& g, const VertexSet& S) {
  std::set<Index> out;
  for (Index v : S) out.insert(g.neighbors(v).begin(), g.neighbors(v).end());
  return out;
}

bool oracle_no_repeat(const Graph& g, const VertexSet& I1, const VertexSet& J1) {
  auto a = nbhd(g, I1), b = nbhd(g, J1);
  for (Index k : a) {
    if (!b.count(k)) continue;
    Index ci = 0, cj = 0;
    for (Index u : g.neighbors(k)) {
      ci += contains(I1, u);
      cj += contains(J1, u);
    }
    if (ci != 1 || cj != 1) return false;
  }
  return true;
}

VertexSet shared(const Graph& g, const VertexSet& I1, const VertexSet& J1) {
  auto a = nbhd(g, I1), b = nbhd(g, J1);
  VertexSet out;
  for (Index k : a)
    if (b.count(k)) out.push_back(k);
  return out;
}

// All admissible subsets by enumerating every I' within I and J' within I^c.
std::set<VertexSet> oracle_admissible(const Graph& g, const VertexSet& I) {
  Index n = g.num_vertices();
  VertexSet Ic = complement(I, n);
  std::set<VertexSet> out;
  for (std::uint64_t a = 1; a < (1ULL << I.size()); ++a)
    for (std::uint64_t b = 1; b < (1ULL << Ic.size()); ++b) {
      VertexSet I1, J1;
      for (Index k = 0; k < I.size(); ++k)
        if (a >> k & 1) I1.push_back(I[k]);
      for (Index k = 0; k < Ic.size(); ++k)
        if (b >> k & 1) J1.push_back(Ic[k]);
      if (!oracle_no_repeat(g, I1, J1)) continue;
      auto c = shared(g, I1, J1);
      if (!c.empty()) out.insert(c);
    }
  return out;
}

double oracle_lower(Index L, Index D, std::uint64_t rho, bool graph_mode) {
  if (rho == 0) return 0;
  if (L == 1) return graph_mode ? rho * std::log(std::pow(double(D), 1.0 / rho)) : rho * std::log(double(D));
  return rho * std::log((D - 1.0) / rho + 1);
}

}  // namespace

TEST(Graph, SelfLoopsImplicit) {
  Graph g(3);
  g.add_edge(0, 1);
  for (Index i = 0; i < 3; ++i) EXPECT_TRUE(g.neighbors(i).count(i));
  EXPECT_EQ(g.degree(0), 2u);
  EXPECT_EQ(g.degree(2), 1u);
  EXPECT_THROW(g.add_edge(1, 1), std::domain_error);
  EXPECT_THROW(g.remove_edge(2, 2), std::domain_error);
  EXPECT_THROW(g.add_edge(1, 0), std::domain_error);
  EXPECT_EQ(g.num_edges(), 1u);
}

TEST(Graph, EdgeListRoundTrip) {
  std::mt19937_64 rng(1);
  auto g = random_graph(9, 0.4, rng);
  std::stringstream ss;
  write_edge_list(ss, g);
  auto h = read_edge_list(ss);
  EXPECT_EQ(h.num_vertices(), g.num_vertices());
  EXPECT_EQ(h.edges(), g.edges());
}

TEST(Graph, EdgeListRejectsBadLines) {
  std::istringstream bad1("0 1\n1 x\n"), bad2("0 1 2\n"), bad3("0 0\n"), bad4("0 -1\n");
  EXPECT_THROW(read_edge_list(bad1), std::domain_error);
  EXPECT_THROW(read_edge_list(bad2), std::domain_error);
  EXPECT_THROW(read_edge_list(bad3), std::domain_error);
  EXPECT_THROW(read_edge_list(bad4), std::domain_error);
}

TEST(Graph, TypedEdgeList) {
  std::istringstream in("0 1 0\n1 2 1\n");
  auto g = read_typed_edge_list(in);
  EXPECT_EQ(g.num_vertices(), 3u);
  EXPECT_EQ(g.num_types(), 2u);
  EXPECT_EQ(g.type(1, 2), 1u);
  EXPECT_TRUE(g.out_neighbors(0).count(1));
  EXPECT_FALSE(g.out_neighbors(1).count(0));
}

TEST(Boundary, Examples) {
  auto tri = complete(3);
  EXPECT_TRUE(boundary(tri, {}).empty());
  EXPECT_TRUE(boundary(tri, all(3)).empty());
  EXPECT_EQ(boundary(tri, {0}), (VertexSet{0, 1, 2}));
  // Two 4-cliques joined by the bridge {3, 4}.
  Graph g(8);
  for (Index base : {0, 4})
    for (Index i = 0; i < 4; ++i)
      for (Index j = i + 1; j < 4; ++j) g.add_edge(base + i, base + j);
  g.add_edge(3, 4);
  EXPECT_EQ(boundary(g, {0, 1, 2, 3}), (VertexSet{3, 4}));
}

TEST(Boundary, MatchesDefinitionAndSharedNeighbors) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(8, 0.3, rng);
    for (std::uint64_t m = 0; m < 256; ++m) {
      auto I = from_mask(m, 8);
      auto Ic = complement(I, 8);
      auto b = boundary(g, I);
      ASSERT_EQ(b, oracle_boundary(g, I));
      ASSERT_EQ(b, boundary(g, Ic));
      ASSERT_EQ(b, shared(g, I, Ic));
    }
  }
}

TEST(WalkCount, Examples) {
  auto tri = complete(3);
  EXPECT_EQ(walk_count(tri, 0, {0, 1}, {1, 2}), 1);
  EXPECT_EQ(walk_count(tri, 1, {0}, all(3)), 3);
  EXPECT_EQ(walk_count(tri, 2, {0}, all(3)), 9);
  EXPECT_EQ(walk_index(tri, 1, {0}), 9);
  EXPECT_EQ(walk_index(tri, 1, {}), 0);
  // Path 0-1-2, I={0}: C_I = {0, 1}; 2-walks ending at 2 are 0-1-2, 1-1-2, 1-2-2.
  auto p = path(3);
  EXPECT_EQ(vertex_walk_index(p, 2, 2, {0}), 3);
  EXPECT_EQ(vertex_walk_index(p, 2, 2, {0}), oracle_walks(p, 2, {0, 1}, {2}));
}

TEST(WalkCount, MatchesEnumeration) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_graph(7, 0.35, rng);
    auto S = from_mask(rng() & 127, 7), T = from_mask(rng() & 127, 7);
    for (Index l = 0; l <= 5; ++l) ASSERT_EQ(walk_count(g, l, S, T), oracle_walks(g, l, S, T));
  }
}

TEST(WalkCount, LargeCountsDoNotOverflow) {
  auto g = complete(30);
  // Every step has 30 choices, so 30^l walks from each vertex.
  Count expect = 30;
  for (int k = 0; k < 20; ++k) expect *= 30;
  EXPECT_EQ(walk_count(g, 20, all(30), all(30)), expect);
  EXPECT_EQ(count_to_string(expect), count_to_string(walk_count(g, 20, all(30), all(30))));
}

TEST(WalkCount, GrowthWithSelfLoops) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = random_graph(8, 0.4, rng);
    bool isolated = false;
    for (Index v = 0; v < 8; ++v) isolated |= g.degree(v) < 2;
    auto I = from_mask(1 + rng() % 254, 8);
    auto C = boundary(g, I);
    for (Index l = 0; l < 5; ++l) {
      ASSERT_LE(walk_count(g, l, C, all(8)), walk_count(g, l + 1, C, all(8)));
      if (!isolated && !C.empty()) ASSERT_LE(2 * walk_count(g, l, C, all(8)), walk_count(g, l + 2, C, all(8)));
    }
  }
}

TEST(Admissible, CompleteGraphContainsAllVertices) {
  for (Index n : {3, 4, 6}) {
    auto g = complete(n);
    for (std::uint64_t m = 1; m + 1 < (1ULL << n); ++m) {
      auto fam = admissible_subsets(g, from_mask(m, n));
      EXPECT_TRUE(std::find(fam.subsets.begin(), fam.subsets.end(), all(n)) != fam.subsets.end());
    }
  }
}

TEST(Admissible, PairSharedNeighborsIncluded) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = random_graph(8, 0.35, rng);
    auto I = from_mask(1 + rng() % 254, 8);
    auto fam = admissible_subsets(g, I);
    for (Index i : I)
      for (Index j : complement(I, 8)) {
        auto c = shared(g, {i}, {j});
        if (c.empty()) continue;
        ASSERT_TRUE(std::find(fam.subsets.begin(), fam.subsets.end(), c) != fam.subsets.end());
      }
  }
}

TEST(Admissible, ExhaustiveMatchesOracle) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    auto g = random_graph(7, 0.4, rng);
    auto I = from_mask(1 + rng() % 126, 7);
    auto fam = admissible_subsets(g, I);
    ASSERT_TRUE(fam.exhaustive);
    auto expect = oracle_admissible(g, I);
    std::set<VertexSet> got(fam.subsets.begin(), fam.subsets.end());
    ASSERT_EQ(got, expect);
  }
}

TEST(Admissible, GreedySubsetsAreCertified) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_graph(10, 0.3, rng);
    auto I = from_mask(1 + rng() % 1022, 10);
    auto fam = admissible_subsets(g, I, /*budget=*/1);
    EXPECT_FALSE(fam.exhaustive);
    auto C = boundary(g, I);
    auto truth = oracle_admissible(g, I);
    for (const auto& s : fam.subsets) {
      ASSERT_TRUE(std::includes(C.begin(), C.end(), s.begin(), s.end()));
      ASSERT_TRUE(truth.count(s));
    }
  }
}

TEST(Admissible, ChainCoversHalfTheBoundary) {
  for (Index n : {6, 9, 12}) {
    auto g = path(n);
    for (Index k = 1; k < n; ++k) {
      VertexSet I;
      for (Index v = 0; v < n; v += 2) I.push_back(v);  // alternating partition
      auto C = boundary(g, I);
      auto fam = admissible_subsets(g, I);
      Index best = 0;
      for (const auto& s : fam.subsets) best = std::max<Index>(best, s.size());
      ASSERT_GE(2 * best, C.size()) << n;
      VertexSet prefix;
      for (Index v = 0; v < k; ++v) prefix.push_back(v);
      auto fam2 = admissible_subsets(g, prefix);
      best = 0;
      for (const auto& s : fam2.subsets) best = std::max<Index>(best, s.size());
      ASSERT_GE(2 * best, boundary(g, prefix).size());
    }
  }
}

TEST(Bounds, TriangleValues) {
  auto tri = complete(3);
  auto b = sep_rank_bounds(tri, 2, 2, 2, {0}, Prediction::graph());
  // Boundary is all of V (3 walks of length 0... 9 of length 1).
  EXPECT_EQ(b.walks, 9);
  EXPECT_NEAR(b.log_upper, std::log(2.0) * 37, 1e-12);
  EXPECT_NEAR(b.log_lower, oracle_lower(2, 2, 9, true), 1e-12);
  EXPECT_NEAR(b.log_lower, 9 * std::log1p(1.0 / 9), 1e-12);
  EXPECT_EQ(b.best_subset, (VertexSet{0, 1, 2}));
}

TEST(Bounds, EmptyPartition) {
  auto tri = complete(3);
  auto b = sep_rank_bounds(tri, 3, 4, 4, {}, Prediction::graph());
  EXPECT_EQ(b.log_lower, 0);
  EXPECT_NEAR(b.log_upper, std::log(4.0), 1e-12);
  auto v = sep_rank_bounds(tri, 3, 4, 4, {}, Prediction::vertex(1));
  EXPECT_EQ(v.log_lower, 0);
  EXPECT_EQ(v.log_upper, 0);
}

TEST(Bounds, DepthOneGraphModeIsLogD) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_graph(6, 0.5, rng);
    auto I = from_mask(1 + rng() % 62, 6);
    auto b = sep_rank_bounds(g, 1, 5, 3, I, Prediction::graph());
    double expect = boundary(g, I).empty() ? 0 : std::log(3.0);
    EXPECT_NEAR(b.log_lower, expect, 1e-12);
  }
}

TEST(Bounds, PathThreeVertices) {
  auto p = path(3);
  auto b = sep_rank_bounds(p, 2, 2, 2, {0}, Prediction::graph());
  EXPECT_TRUE(std::isfinite(b.log_lower));
  EXPECT_TRUE(std::isfinite(b.log_upper));
  EXPECT_LE(b.log_lower, b.log_upper);
  EXPECT_NEAR(b.log_upper, std::log(2.0) * (4.0 * oracle_walks(p, 1, {0, 1}, all(3)) + 1), 1e-12);
}

TEST(Bounds, MatchOracleOnRandomGraphs) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    Index n = 5 + trial % 3;
    auto g = random_graph(n, 0.4, rng);
    for (std::uint64_t m = 0; m < (1ULL << n); ++m) {
      auto I = from_mask(m, n);
      auto fam = oracle_admissible(g, I);
      auto C = oracle_boundary(g, I);
      for (Index L : {1, 2, 3}) {
        for (bool graph_mode : {true, false}) {
          Index t = m % n;
          VertexSet T = graph_mode ? all(n) : VertexSet{t};
          double lower = 0;
          for (const auto& c : fam) lower = std::max(lower, oracle_lower(L, 3, oracle_walks(g, L - 1, c, T), graph_mode));
          double w = oracle_walks(g, L - 1, C, T);
          double upper = std::log(4.0) * (graph_mode ? 4 * w + 1 : 4 * w);
          auto b = sep_rank_bounds(g, L, 3, 4, I, graph_mode ? Prediction::graph() : Prediction::vertex(t));
          ASSERT_NEAR(b.log_lower, lower, 1e-9);
          ASSERT_NEAR(b.log_upper, upper, 1e-9);
          ASSERT_LE(b.log_lower, b.log_upper + 1e-12);
        }
      }
    }
  }
}

TEST(Bounds, SandwichOnLargerGraphs) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 6; ++trial) {
    auto g = random_graph(12, 0.25, rng);
    for (int k = 0; k < 10; ++k) {
      auto I = from_mask(rng() % 4096, 12);
      for (Index L : {1, 2, 3}) {
        auto b = sep_rank_bounds(g, L, 3, 3, I, Prediction::graph());
        ASSERT_LE(b.log_lower, b.log_upper + 1e-12);
      }
    }
  }
}

TEST(Directed, SymmetricCollapsesToUndirected) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_graph(7, 0.4, rng);
    auto d = DirectedTypedGraph::symmetric(g);
    auto I = from_mask(rng() % 128, 7);
    ASSERT_EQ(directed_boundary(d, I), boundary(g, I));
    for (Index l = 0; l < 4; ++l) ASSERT_EQ(walk_count(d, l, I, all(7)), walk_count(g, l, I, all(7)));
    auto a = admissible_subsets(d, I), b = admissible_subsets(g, I);
    ASSERT_EQ(a.subsets, b.subsets);
  }
}

TEST(Directed, UpperBoundSumsWalkLengths) {
  std::mt19937_64 rng(12);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 15; ++trial) {
    Index n = 6;
    DirectedTypedGraph g(n, 2);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j && coin(rng)) g.add_edge(i, j, (i + j) % 2);
    auto I = from_mask(rng() % 64, n);
    // Oracle boundary: shared out-neighbors of I and its complement.
    auto Ic = complement(I, n);
    VertexSet C;
    for (Index k = 0; k < n; ++k) {
      bool a = false, b = false;
      for (Index u : g.in_neighbors(k)) {
        a |= contains(I, u);
        b |= contains(Ic, u);
      }
      if (a && b) C.push_back(k);
    }
    ASSERT_EQ(directed_boundary(g, I), C);
    for (Index L : {1, 2, 3}) {
      std::uint64_t graph_walks = 0, vertex_walks = 0;
      for (Index l = 1; l <= L; ++l) {
        graph_walks += oracle_walks(g, L - l, C, all(n));
        vertex_walks += oracle_walks(g, L - l, C, {2});
      }
      auto bg = directed_bounds(g, L, 3, 5, I, Prediction::graph());
      auto bv = directed_bounds(g, L, 3, 5, I, Prediction::vertex(2));
      ASSERT_NEAR(bg.log_upper, std::log(5.0) * (graph_walks + 1.0), 1e-9);
      ASSERT_NEAR(bv.log_upper, std::log(5.0) * vertex_walks, 1e-9);
      ASSERT_LE(bg.log_lower, bg.log_upper + 1e-12);
      ASSERT_LE(bv.log_lower, bv.log_upper + 1e-12);
    }
    EXPECT_EQ(directed_bounds(g, 2, 3, 3, {}, Prediction::graph()).log_lower, 0);
  }
}
