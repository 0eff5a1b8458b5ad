#include <functional>

#include "irlab/gnn.hpp"
#include "irlab/factorization.hpp"

namespace irlab {

void GNNWeights::validate() const {
  if (layers.empty()) throw std::domain_error("GNN depth must be at least 1");
  Index Q = layers[0].size();
  if (Q == 0) throw std::domain_error("GNN needs at least one edge type");
  Index Dh = out.cols();
  if (out.rows() != 1) throw std::domain_error("output weights must be 1 x D_h");
  Index Dx = layers[0][0].cols();
  for (Index l = 0; l < layers.size(); ++l) {
    if (layers[l].size() != Q) throw std::domain_error("edge-type count differs across layers");
    for (const auto& W : layers[l])
      if (static_cast<Index>(W.rows()) != Dh || static_cast<Index>(W.cols()) != (l == 0 ? Dx : Dh))
        throw std::domain_error("GNN weight shape mismatch at layer " + std::to_string(l + 1));
  }
}

GNNWeights GNNWeights::random(Index L, Index D_x, Index D_h, std::mt19937_64& rng, Index Q) {
  GNNWeights w;
  for (Index l = 0; l < L; ++l) {
    std::vector<Matrix> typed;
    for (Index q = 0; q < Q; ++q) typed.push_back(gaussian_matrix(D_h, l == 0 ? D_x : D_h, 1.0, rng));
    w.layers.push_back(std::move(typed));
  }
  w.out = gaussian_matrix(1, D_h, 1.0, rng);
  return w;
}

namespace {

void check_inputs(Index n, const std::vector<Vector>& X, const GNNWeights& w, Prediction mode) {
  w.validate();
  if (X.size() != n) throw std::domain_error("one feature vector per vertex required");
  for (const auto& x : X)
    if (static_cast<Index>(x.size()) != w.input_dim()) throw std::domain_error("feature dimension mismatch");
  if (mode.mode == Prediction::Mode::Vertex && mode.target >= n)
    throw std::domain_error("target vertex out of range");
}

template <class InNeighbors, class TypeOf>
double run_forward(Index n, const std::vector<Vector>& X, const GNNWeights& w, Prediction mode,
                   InNeighbors in, TypeOf type) {
  std::vector<Vector> h = X;
  for (Index l = 0; l < w.depth(); ++l) {
    std::vector<Vector> next(n, Vector::Ones(w.hidden_dim()));
    for (Index i = 0; i < n; ++i)
      for (Index j : in(i)) next[i] = next[i].cwiseProduct(w.layers[l][type(j, i)] * h[j]);
    h = std::move(next);
  }
  if (mode.mode == Prediction::Mode::Vertex) return (w.out * h[mode.target])(0);
  Vector p = Vector::Ones(w.hidden_dim());
  for (const auto& v : h) p = p.cwiseProduct(v);
  return (w.out * p)(0);
}

}  // namespace

double forward(const Graph& g, const std::vector<Vector>& X, const GNNWeights& w, Prediction mode) {
  check_inputs(g.num_vertices(), X, w, mode);
  if (w.num_types() != 1) throw std::domain_error("undirected GNN takes a single edge type");
  return run_forward(
      g.num_vertices(), X, w, mode, [&](Index i) -> const std::set<Index>& { return g.neighbors(i); },
      [](Index, Index) { return Index(0); });
}

double forward(const DirectedTypedGraph& g, const std::vector<Vector>& X, const GNNWeights& w,
               Prediction mode) {
  check_inputs(g.num_vertices(), X, w, mode);
  if (w.num_types() != g.num_types()) throw std::domain_error("edge-type count mismatch");
  return run_forward(
      g.num_vertices(), X, w, mode, [&](Index i) -> const std::set<Index>& { return g.in_neighbors(i); },
      [&](Index j, Index i) { return g.type(j, i); });
}

namespace {

// Node of the unrolled network. Legs are ordered (children..., parent).
struct TNNode {
  DenseTensor tensor;
  std::vector<Index> children;
  int vertex = -1;  // feature leaf of this vertex
};

DenseTensor transposed(const Matrix& W) { return DenseTensor::from_matrix(W.transpose()); }

}  // namespace

TNResult tn_contract(const Graph& g, const std::vector<Vector>& X, const GNNWeights& w, Prediction mode,
                     Index node_cap) {
  check_inputs(g.num_vertices(), X, w, mode);
  if (w.num_types() != 1) throw std::domain_error("undirected GNN takes a single edge type");
  Index n = g.num_vertices(), L = w.depth(), Dh = w.hidden_dim();

  // Node counts per (layer, vertex), checked against the cap before building.
  std::vector<Count> size(n, 1);
  for (Index l = 1; l <= L; ++l) {
    std::vector<Count> next(n, 1);
    for (Index i = 0; i < n; ++i)
      for (Index j : g.neighbors(i)) next[i] += 1 + size[j];
    size = std::move(next);
  }
  Count total = 1;
  if (mode.mode == Prediction::Mode::Graph) {
    total += 1;
    for (Index i = 0; i < n; ++i) total += size[i];
  } else {
    total += size[mode.target];
  }
  if (total > node_cap) {
    VertexSet all(n);
    for (Index i = 0; i < n; ++i) all[i] = i;
    Count walks = mode.mode == Prediction::Mode::Graph ? walk_count(g, L, all, all)
                                                        : walk_count(g, L, all, {mode.target});
    throw ResourceError("tensor network needs " + count_to_string(total) + " nodes (length-" +
                        std::to_string(L) + " walk count " + count_to_string(walks) + ") above cap " +
                        std::to_string(node_cap));
  }

  std::vector<TNNode> nodes;
  std::function<Index(Index, Index)> build = [&](Index i, Index l) -> Index {
    if (l == 0) {
      nodes.push_back({DenseTensor::from_vector(X[i]), {}, static_cast<int>(i)});
      return nodes.size() - 1;
    }
    std::vector<Index> kids;
    for (Index j : g.neighbors(i)) {
      Index child = build(j, l - 1);
      nodes.push_back({transposed(w.layers[l - 1][0]), {child}, -1});
      kids.push_back(nodes.size() - 1);
    }
    nodes.push_back({delta_tensor(kids.size() + 1, Dh), kids, -1});
    return nodes.size() - 1;
  };

  std::vector<Index> tops;
  if (mode.mode == Prediction::Mode::Graph) {
    for (Index i = 0; i < n; ++i) tops.push_back(build(i, L));
    nodes.push_back({delta_tensor(n + 1, Dh), tops, -1});
    tops = {nodes.size() - 1};
  } else {
    tops.push_back(build(mode.target, L));
  }
  nodes.push_back({transposed(w.out), tops, -1});
  Index root = nodes.size() - 1;

  TNResult res;
  res.nodes = nodes.size();
  res.leaf_counts.assign(n, 0);
  for (const auto& nd : nodes)
    if (nd.vertex >= 0) ++res.leaf_counts[nd.vertex];

  // Children always precede their parent, so a forward sweep contracts
  // leaf to root.
  std::vector<DenseTensor> value(nodes.size());
  for (Index k = 0; k < nodes.size(); ++k) {
    DenseTensor t = nodes[k].tensor;
    for (Index c : nodes[k].children) t = contract(t, 0, value[c]);
    value[k] = std::move(t);
    for (Index c : nodes[k].children) value[c] = DenseTensor();
  }
  res.value = value[root][0];
  return res;
}

namespace {

nlohmann::json mat_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < static_cast<Index>(m.rows()); ++i) {
    std::vector<double> r(m.cols());
    for (Index j = 0; j < static_cast<Index>(m.cols()); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const GNNWeights& w) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& typed : w.layers) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& W : typed) t.push_back(mat_json(W));
    j["layers"].push_back(t);
  }
  j["out"] = mat_json(w.out);
  return j;
}

nlohmann::json templates_json(const std::vector<Vector>& templates) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& v : templates) j.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return j;
}

}  // namespace irlab
