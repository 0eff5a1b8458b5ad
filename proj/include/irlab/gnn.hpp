#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "irlab/graph.hpp"
#include "irlab/tensor.hpp"

namespace irlab {

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// layers[l][q] is W^(l+1, q): D_h x D_x for l = 0, D_h x D_h after.
// Undirected networks use a single type (q = 0).
struct GNNWeights {
  std::vector<std::vector<Matrix>> layers;
  Matrix out;  // 1 x D_h

  Index depth() const { return layers.size(); }
  Index num_types() const { return layers.empty() ? 0 : layers[0].size(); }
  Index input_dim() const { return layers.at(0).at(0).cols(); }
  Index hidden_dim() const { return out.cols(); }
  void validate() const;

  static GNNWeights random(Index L, Index D_x, Index D_h, std::mt19937_64& rng, Index Q = 1);
};

double forward(const Graph& g, const std::vector<Vector>& X, const GNNWeights& w, Prediction mode);
double forward(const DirectedTypedGraph& g, const std::vector<Vector>& X, const GNNWeights& w,
               Prediction mode);

struct TNResult {
  double value = 0;
  Index nodes = 0;
  std::vector<Index> leaf_counts;  // copies of each vertex's feature vector
};

constexpr Index kDefaultTNNodeCap = 1 << 20;

// Builds the unrolled tree tensor network of the product-aggregation GNN and
// contracts it leaf to root.
TNResult tn_contract(const Graph& g, const std::vector<Vector>& X, const GNNWeights& w, Prediction mode,
                     Index node_cap = kDefaultTNNodeCap);

struct GridTensor {
  std::vector<Vector> templates;
  DenseTensor values;  // order |V|, every dim M
};

constexpr Index kDefaultGridCap = 1 << 20;

GridTensor grid_tensor(const Graph& g, const GNNWeights& w, Prediction mode,
                       const std::vector<Vector>& templates, Index cap = kDefaultGridCap);
int grid_seprank_lower(const GridTensor& gt, const VertexSet& I);

Index multichoose(Index D, Index P);
// All (q_1..q_D) with q_d >= 0 summing to P, lexicographically ascending.
std::vector<std::vector<Index>> compositions(Index D, Index P);

struct LowerBoundConstruction {
  GNNWeights weights;
  std::vector<Vector> templates;
  double gamma = 0;
  Index rho = 0;
  Index target_rank = 0;    // rank the construction certifies
  int achieved_rank = 0;    // grid_seprank_lower of the construction
};

LowerBoundConstruction lower_bound_construction(const Graph& g, Index L, Index D_x, Index D_h,
                                                const VertexSet& I, const VertexSet& C, Prediction mode,
                                                Index cap = kDefaultGridCap);

nlohmann::json to_json(const GNNWeights& w);
nlohmann::json templates_json(const std::vector<Vector>& templates);

}  // namespace irlab
