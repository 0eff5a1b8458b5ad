#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "irlab/tensor.hpp"

namespace irlab {

using Count = boost::multiprecision::cpp_int;
using VertexSet = std::vector<Index>;  // sorted, unique
using Edge = std::pair<Index, Index>;

// Undirected graph; every vertex carries an implicit self-loop.
class Graph {
 public:
  Graph() = default;
  explicit Graph(Index n);
  static Graph from_edges(Index n, const std::vector<Edge>& edges);

  Index num_vertices() const { return adj_.size(); }
  Index num_edges() const;
  // Non-self-loop edges as (min, max), ascending.
  std::vector<Edge> edges() const;
  bool has_edge(Index i, Index j) const;
  void add_edge(Index i, Index j);
  void remove_edge(Index i, Index j);
  // Neighbors of i including i itself.
  const std::set<Index>& neighbors(Index i) const { return adj_.at(i); }
  Index degree(Index i) const { return adj_.at(i).size(); }

 private:
  std::vector<std::set<Index>> adj_;
};

// Directed graph with edge types in [0, Q). Edge (j, i) runs from j to i.
// Every vertex carries an implicit typed self-loop.
class DirectedTypedGraph {
 public:
  DirectedTypedGraph() = default;
  DirectedTypedGraph(Index n, Index Q);
  static DirectedTypedGraph symmetric(const Graph& g);

  Index num_vertices() const { return out_.size(); }
  Index num_types() const { return Q_; }
  void add_edge(Index from, Index to, Index type);
  void set_self_type(Index i, Index type);
  Index type(Index from, Index to) const;
  const std::set<Index>& out_neighbors(Index i) const { return out_.at(i); }
  const std::set<Index>& in_neighbors(Index i) const { return in_.at(i); }
  std::vector<std::pair<Edge, Index>> typed_edges() const;

 private:
  std::vector<std::set<Index>> out_, in_;
  std::map<Edge, Index> types_;
  std::vector<Index> self_type_;
  Index Q_ = 1;
};

Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);
DirectedTypedGraph read_typed_edge_list(std::istream& in);

VertexSet complement(const VertexSet& I, Index n);
VertexSet neighborhood(const Graph& g, const VertexSet& S);

VertexSet boundary(const Graph& g, const VertexSet& I);
VertexSet directed_boundary(const DirectedTypedGraph& g, const VertexSet& I);

// Number of length-l walks starting in S and ending in T.
Count walk_count(const Graph& g, Index l, const VertexSet& S, const VertexSet& T);
// Directed walks follow edge orientation.
Count walk_count(const DirectedTypedGraph& g, Index l, const VertexSet& S, const VertexSet& T);

Count walk_index(const Graph& g, Index L_minus_1, const VertexSet& I);
Count vertex_walk_index(const Graph& g, Index L_minus_1, Index t, const VertexSet& I);

double count_to_double(const Count& c);
std::string count_to_string(const Count& c);

bool no_repeating_shared_neighbors(const Graph& g, const VertexSet& I1, const VertexSet& J1);
bool no_repeating_shared_neighbors(const DirectedTypedGraph& g, const VertexSet& I1, const VertexSet& J1);

struct AdmissibleFamily {
  std::vector<VertexSet> subsets;  // sorted, deduplicated, empty set excluded
  bool exhaustive = false;
};

constexpr std::uint64_t kDefaultSubsetBudget = 1ULL << 20;

AdmissibleFamily admissible_subsets(const Graph& g, const VertexSet& I,
                                    std::uint64_t budget = kDefaultSubsetBudget);
AdmissibleFamily admissible_subsets(const DirectedTypedGraph& g, const VertexSet& I,
                                    std::uint64_t budget = kDefaultSubsetBudget);

struct Prediction {
  enum class Mode { Graph, Vertex } mode = Mode::Graph;
  Index target = 0;
  static Prediction graph() { return {}; }
  static Prediction vertex(Index t) { return {Mode::Vertex, t}; }
};

struct SepRankBounds {
  double log_lower = 0;
  double log_upper = 0;
  VertexSet best_subset;
  Count walks;  // walk index entering the upper bound
  bool exhaustive = false;
};

// Lower-bound term log(alpha_C) * rho for a subset with rho walks.
double lower_bound_term(Index L, Index D, const Count& rho, Prediction mode);

SepRankBounds sep_rank_bounds(const Graph& g, Index L, Index D_x, Index D_h, const VertexSet& I,
                              Prediction mode, std::uint64_t budget = kDefaultSubsetBudget);
SepRankBounds directed_bounds(const DirectedTypedGraph& g, Index L, Index D_x, Index D_h,
                              const VertexSet& I, Prediction mode,
                              std::uint64_t budget = kDefaultSubsetBudget);

}  // namespace irlab
