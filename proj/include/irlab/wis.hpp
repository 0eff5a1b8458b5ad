#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irlab/graph.hpp"

namespace irlab {

struct Removal {
  Edge edge;
  std::vector<Count> scores;  // tuple that selected the edge, in comparison order
};

struct SparsifyResult {
  Graph graph;
  std::vector<Removal> removals;
};

enum class TuplePolicy { SortedLex, Sum, Min, Max };
TuplePolicy parse_policy(const std::string& s);

// s_t = WI_{L-1,t}({t}) for every vertex t.
std::vector<Count> vertex_scores(const Graph& g, Index L);

// Edge whose removal maximizes the sorted tuple of vertex_scores; ties go
// to the smallest (min endpoint, max endpoint) edge.
SparsifyResult wis(const Graph& g, Index L, Index N, Index batch = 1);
SparsifyResult one_wis(const Graph& g, Index N);

struct VertexTarget {
  VertexSet J;
  Index t;
};

SparsifyResult gwis(const Graph& g, Index L, Index N, const std::vector<VertexSet>& partitions,
                    const std::vector<VertexTarget>& targets, TuplePolicy policy, Index batch = 1);

SparsifyResult random_prune(const Graph& g, Index N, std::uint64_t seed);

// True if a is strictly preferred over b under the policy.
bool tuple_greater(const std::vector<Count>& a, const std::vector<Count>& b, TuplePolicy policy);

}  // namespace irlab
