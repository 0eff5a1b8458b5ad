#include <cmath>

#include "irlab/factorization.hpp"

namespace irlab {

Matrix Fixture2x2::solution(double x) const {
  Matrix W = Matrix::Zero(2, 2);
  for (const auto& o : observations) W(o.index[0], o.index[1]) = o.value;
  W(unobserved.first, unobserved.second) = x;
  return W;
}

Fixture2x2 fixture_2x2(const Fixture2x2Variant& v) {
  Fixture2x2 f;
  using K = Fixture2x2Variant::Kind;
  switch (v.kind) {
    case K::Base:
      f.unobserved = {0, 0};
      f.observations = {{{0, 1}, 1.0}, {{1, 0}, 1.0}, {{1, 1}, 0.0}};
      break;
    case K::Perturbed:
      if (v.z == 0 || v.z_prime == 0)
        throw std::domain_error("perturbed fixture needs nonzero off-diagonal observations");
      f.unobserved = {0, 0};
      f.observations = {{{0, 1}, v.z}, {{1, 0}, v.z_prime}, {{1, 1}, v.eps}};
      break;
    case K::Repositioned: {
      if (v.i > 1 || v.j > 1) throw std::domain_error("2x2 position out of range");
      f.unobserved = {v.i, v.j};
      for (Index a = 0; a < 2; ++a)
        for (Index b = 0; b < 2; ++b) {
          if (a == v.i && b == v.j) continue;
          bool opposite = (a != v.i && b != v.j);
          f.observations.push_back({{a, b}, opposite ? 0.0 : 1.0});
        }
      break;
    }
  }
  return f;
}

std::pair<double, double> sol_singular_values(double x) {
  double r = std::sqrt(x * x + 4.0);
  double a = std::abs((x + r) / 2.0), b = std::abs((x - r) / 2.0);
  return {std::max(a, b), std::min(a, b)};
}

MultipleMinimaFixture fixture_multiple_minima(const std::vector<Index>& dims) {
  Index N = dims.size();
  if (N < 3) throw std::domain_error("multiple-minima fixture needs order >= 3");
  for (Index d : dims)
    if (d < 2) throw std::domain_error("multiple-minima fixture needs dims >= 2");
  MultipleMinimaFixture f;
  f.W = DenseTensor(dims);
  f.W_prime = DenseTensor(dims);
  auto idx = [&](Index a, Index b, Index c) {
    std::vector<Index> i(N, 0);
    i[N - 3] = a;
    i[N - 2] = b;
    i[N - 1] = c;
    return i;
  };
  f.observations = {{idx(0, 0, 0), 1.0}, {idx(0, 0, 1), 0.0}, {idx(1, 1, 0), 0.0}, {idx(1, 1, 1), 1.0}};
  // W: slice 0 = [[1,0],[1,0]], slice 1 = [[0,1],[0,1]]
  f.W.at(idx(0, 0, 0)) = 1;
  f.W.at(idx(0, 1, 0)) = 1;
  f.W.at(idx(1, 0, 1)) = 1;
  f.W.at(idx(1, 1, 1)) = 1;
  // W': both slices identity
  for (Index s = 0; s < 2; ++s) {
    f.W_prime.at(idx(s, 0, 0)) = 1;
    f.W_prime.at(idx(s, 1, 1)) = 1;
  }
  return f;
}

double convac_forward(const HierarchicalFactorization& f, const std::vector<Vector>& inputs) {
  const auto& t = f.tree;
  if (inputs.size() != t.order()) throw std::domain_error("need one input per mode");
  for (Index n = 0; n < t.order(); ++n)
    if (static_cast<Index>(inputs[n].size()) != t.dims()[n])
      throw std::domain_error("input " + std::to_string(n) + " has wrong dimension");
  if (t.is_leaf(t.root())) throw std::domain_error("convac network needs at least one layer");
  Index P = t.node(t.root()).children.size();
  // Perfect P-ary: all interior nodes have P children, leaves share one depth,
  // and children cover contiguous mode ranges.
  std::vector<Index> depth(t.nodes().size(), 0);
  Index leaf_depth = 0;
  bool first = true;
  for (Index id = 0; id < t.nodes().size(); ++id) {
    int p = t.node(id).parent;
    while (p != -1) {
      ++depth[id];
      p = t.node(p).parent;
    }
    const auto& nd = t.node(id);
    if (nd.label.back() - nd.label.front() + 1 != nd.label.size())
      throw std::domain_error("convac network needs contiguous pooling windows");
    if (nd.children.empty()) {
      if (first) leaf_depth = depth[id];
      first = false;
      if (depth[id] != leaf_depth) throw std::domain_error("convac network needs a perfect tree");
    } else if (nd.children.size() != P) {
      throw std::domain_error("convac network needs a P-ary tree");
    }
  }
  std::vector<Vector> out(t.nodes().size());
  for (int id : t.postorder()) {
    const auto& nd = t.node(id);
    if (nd.children.empty()) {
      out[id] = f.weights[id].transpose() * inputs[nd.label[0]];
      continue;
    }
    Vector pooled = out[nd.children[0]];
    for (Index c = 1; c < nd.children.size(); ++c) pooled = pooled.cwiseProduct(out[nd.children[c]]);
    out[id] = f.weights[id].transpose() * pooled;
  }
  return out[t.root()](0);
}

}  // namespace irlab
