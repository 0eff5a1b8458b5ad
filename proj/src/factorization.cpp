#include "irlab/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace irlab {

std::vector<Index> CPFactorization::dims() const {
  std::vector<Index> d;
  for (const auto& f : factors) d.push_back(f.rows());
  return d;
}

// ---------------------------------------------------------------- ModeTree

int ModeTree::add(const nlohmann::json& spec, int parent, Index rank) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  nodes_[id].parent = parent;
  if (spec.is_number_integer()) {
    long long m = spec.get<long long>();
    if (m < 0 || static_cast<Index>(m) >= dims_.size())
      throw std::domain_error("mode tree leaf " + std::to_string(m) + " out of range");
    if (leaf_of_mode_[m] != -1)
      throw std::domain_error("mode " + std::to_string(m) + " appears twice in mode tree");
    leaf_of_mode_[m] = id;
    nodes_[id].label = {static_cast<Index>(m)};
    nodes_[id].rank = dims_[m];
    return id;
  }
  if (!spec.is_array() || spec.size() < 2)
    throw std::domain_error("mode tree interior node needs at least two children");
  nodes_[id].rank = rank;
  for (const auto& c : spec) {
    int cid = add(c, id, rank);
    nodes_[id].children.push_back(cid);
  }
  return id;
}

void ModeTree::finalize() {
  for (int m : leaf_of_mode_)
    if (m == -1) throw std::domain_error("mode tree must have exactly one leaf per mode");
  for (int id : postorder()) {
    auto& n = nodes_[id];
    if (n.children.empty()) continue;
    std::vector<Index> label;
    for (int c : n.children)
      label.insert(label.end(), nodes_[c].label.begin(), nodes_[c].label.end());
    std::sort(label.begin(), label.end());
    n.label = label;
    std::sort(n.children.begin(), n.children.end(),
              [&](int a, int b) { return nodes_[a].label[0] < nodes_[b].label[0]; });
  }
}

ModeTree ModeTree::from_nested(const nlohmann::json& spec, const std::vector<Index>& dims,
                               Index rank) {
  ModeTree t;
  if (dims.empty()) throw std::domain_error("mode tree over zero modes");
  for (Index d : dims)
    if (d == 0) throw std::domain_error("mode dims must be positive");
  t.dims_ = dims;
  t.leaf_of_mode_.assign(dims.size(), -1);
  t.root_ = t.add(spec, -1, rank);
  t.finalize();
  return t;
}

namespace {

nlohmann::json halves(Index lo, Index hi) {
  if (hi - lo == 1) return lo;
  Index mid = lo + (hi - lo + 1) / 2;
  return nlohmann::json::array({halves(lo, mid), halves(mid, hi)});
}

}  // namespace

ModeTree ModeTree::perfect_binary(const std::vector<Index>& dims, Index rank) {
  return from_nested(halves(0, dims.size()), dims, rank);
}

ModeTree ModeTree::shallow(const std::vector<Index>& dims, Index rank) {
  nlohmann::json spec = nlohmann::json::array();
  for (Index n = 0; n < dims.size(); ++n) spec.push_back(n);
  if (dims.size() == 1) spec = 0;
  return from_nested(spec, dims, rank);
}

ModeTree ModeTree::perfect_pary(const std::vector<Index>& dims, Index P,
                                const std::vector<Index>& level_ranks) {
  if (P < 2) throw std::domain_error("P-ary tree needs P >= 2");
  Index N = dims.size(), levels = 0, n = 1;
  while (n < N) {
    n *= P;
    ++levels;
  }
  if (n != N || levels == 0) throw std::domain_error("order must be a positive power of P");
  if (level_ranks.size() != levels)
    throw std::domain_error("need one rank per interior level");
  std::vector<nlohmann::json> layer;
  for (Index m = 0; m < N; ++m) layer.push_back(m);
  while (layer.size() > 1) {
    std::vector<nlohmann::json> next;
    for (Index k = 0; k < layer.size(); k += P) {
      nlohmann::json g = nlohmann::json::array();
      for (Index p = 0; p < P; ++p) g.push_back(layer[k + p]);
      next.push_back(g);
    }
    layer = next;
  }
  ModeTree t = from_nested(layer[0], dims, 1);
  // Depth of a node below the root decides its level.
  std::vector<Index> depth(t.nodes_.size(), 0);
  for (Index id = 0; id < t.nodes_.size(); ++id) {
    int p = t.nodes_[id].parent;
    Index d = 0;
    while (p != -1) {
      ++d;
      p = t.nodes_[p].parent;
    }
    depth[id] = d;
  }
  for (Index id = 0; id < t.nodes_.size(); ++id) {
    if (t.is_leaf(static_cast<int>(id))) continue;
    Index level = levels + 1 - depth[id];  // leaves are level 1
    t.nodes_[id].rank = level_ranks[level - 2];
  }
  return t;
}

Index ModeTree::parent_rank(int id) const {
  int p = nodes_.at(id).parent;
  return p == -1 ? 1 : nodes_[p].rank;
}

void ModeTree::set_rank(int id, Index r) {
  if (is_leaf(id)) throw std::domain_error("leaf ranks are fixed to mode dims");
  if (r == 0) throw std::domain_error("local component count must be positive");
  nodes_.at(id).rank = r;
}

std::vector<int> ModeTree::interior() const {
  std::vector<int> out;
  for (int id : postorder())
    if (!is_leaf(id)) out.push_back(id);
  return out;
}

std::vector<int> ModeTree::postorder() const {
  std::vector<int> out;
  std::function<void(int)> visit = [&](int id) {
    for (int c : nodes_[id].children) visit(c);
    out.push_back(id);
  };
  if (root_ != -1) visit(root_);
  return out;
}

int ModeTree::find(const std::vector<Index>& label) const {
  std::vector<Index> s(label);
  std::sort(s.begin(), s.end());
  for (Index id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].label == s) return static_cast<int>(id);
  return -1;
}

nlohmann::json ModeTree::nested() const {
  std::function<nlohmann::json(int)> rec = [&](int id) -> nlohmann::json {
    if (is_leaf(id)) return nodes_[id].label[0];
    nlohmann::json a = nlohmann::json::array();
    for (int c : nodes_[id].children) a.push_back(rec(c));
    return a;
  };
  return rec(root_);
}

// ---------------------------------------------------------------- end products

Matrix mf_end_matrix(const MatrixFactorization& f) {
  if (f.weights.empty()) throw std::domain_error("matrix factorization needs depth >= 1");
  Matrix W = f.weights[0];
  for (Index l = 1; l < f.weights.size(); ++l) {
    if (f.weights[l].cols() != W.rows()) throw std::domain_error("incompatible layer dims");
    W = f.weights[l] * W;
  }
  return W;
}

DenseTensor cp_end_tensor(const CPFactorization& f) {
  if (f.factors.empty()) throw std::domain_error("CP factorization needs order >= 1");
  Index R = f.components();
  DenseTensor t(f.dims());
  for (Index r = 0; r < R; ++r) {
    std::vector<Vector> vs;
    for (const auto& A : f.factors) vs.push_back(A.col(r));
    t += outer_product(vs);
  }
  return t;
}

double cp_entry(const CPFactorization& f, const std::vector<Index>& idx) {
  double s = 0;
  for (Index r = 0; r < f.components(); ++r) {
    double p = 1;
    for (Index n = 0; n < f.factors.size(); ++n) p *= f.factors[n](idx[n], r);
    s += p;
  }
  return s;
}

std::vector<Index> ht_mode_permutation(const ModeTree& tree, int node) {
  const auto& nd = tree.node(node);
  std::vector<Index> concat;
  for (int c : nd.children) {
    const auto& l = tree.node(c).label;
    concat.insert(concat.end(), l.begin(), l.end());
  }
  Index K = concat.size();
  std::vector<Index> cdims(K), pos(K), sdims(K);
  for (Index k = 0; k < K; ++k) {
    cdims[k] = tree.dims()[concat[k]];
    pos[k] = std::lower_bound(nd.label.begin(), nd.label.end(), concat[k]) - nd.label.begin();
    sdims[k] = tree.dims()[nd.label[k]];
  }
  std::vector<Index> sstride(K);
  Index s = 1;
  for (Index k = K; k-- > 0;) {
    sstride[k] = s;
    s *= sdims[k];
  }
  std::vector<Index> perm(s);
  std::vector<Index> idx(K, 0);
  for (Index u = 0; u < s; ++u) {
    Index target = 0;
    for (Index k = 0; k < K; ++k) target += idx[k] * sstride[pos[k]];
    perm[u] = target;
    for (Index k = K; k-- > 0;) {
      if (++idx[k] < cdims[k]) break;
      idx[k] = 0;
    }
  }
  return perm;
}

namespace {

void check_shapes(const HierarchicalFactorization& f) {
  const auto& t = f.tree;
  if (f.weights.size() != t.nodes().size())
    throw std::domain_error("one weight matrix per mode tree node required");
  for (Index id = 0; id < t.nodes().size(); ++id) {
    Index r = t.node(id).rank, c = t.parent_rank(id);
    if (static_cast<Index>(f.weights[id].rows()) != r ||
        static_cast<Index>(f.weights[id].cols()) != c)
      throw std::domain_error("weight shape mismatch at node " + std::to_string(id));
  }
}

}  // namespace

HTForward ht_forward(const HierarchicalFactorization& f) {
  check_shapes(f);
  const auto& t = f.tree;
  Index n = t.nodes().size();
  HTForward out;
  out.part.resize(n);
  out.local.resize(n);
  out.perm.resize(n);
  for (int id : t.postorder()) {
    if (t.is_leaf(id)) {
      out.part[id] = f.weights[id];
      continue;
    }
    const auto& nd = t.node(id);
    out.perm[id] = ht_mode_permutation(t, id);
    Index size = out.perm[id].size();
    Matrix K(size, nd.rank);
    for (Index r = 0; r < nd.rank; ++r) {
      Vector v = out.part[nd.children[0]].col(r);
      for (Index c = 1; c < nd.children.size(); ++c) {
        const Matrix& pc = out.part[nd.children[c]];
        Vector w(v.size() * pc.rows());
        for (Index i = 0; i < static_cast<Index>(v.size()); ++i)
          w.segment(i * pc.rows(), pc.rows()) = v(i) * pc.col(r);
        v = std::move(w);
      }
      for (Index u = 0; u < size; ++u) K(out.perm[id][u], r) = v(u);
    }
    out.local[id] = std::move(K);
    out.part[id] = out.local[id] * f.weights[id];
  }
  return out;
}

DenseTensor ht_end_tensor(const HierarchicalFactorization& f) {
  HTForward fw = ht_forward(f);
  const Matrix& root = fw.part[f.tree.root()];
  std::vector<double> vals(root.data(), root.data() + root.rows());
  return DenseTensor(f.tree.dims(), std::move(vals));
}

DenseTensor end_tensor(const Factorization& f) {
  if (auto* m = std::get_if<MatrixFactorization>(&f)) return DenseTensor::from_matrix(mf_end_matrix(*m));
  if (auto* c = std::get_if<CPFactorization>(&f)) return cp_end_tensor(*c);
  return ht_end_tensor(std::get<HierarchicalFactorization>(f));
}

// ---------------------------------------------------------------- local components

std::map<LocalComponentKey, double> local_component_norms(const HierarchicalFactorization& f) {
  check_shapes(f);
  std::map<LocalComponentKey, double> out;
  for (int id : f.tree.interior()) {
    const auto& nd = f.tree.node(id);
    for (Index r = 0; r < nd.rank; ++r) {
      double v = f.weights[id].row(r).norm();
      for (int c : nd.children) v *= f.weights[c].col(r).norm();
      out[{id, r}] = v;
    }
  }
  return out;
}

HierarchicalFactorization prune_local_components(const HierarchicalFactorization& f,
                                                 const std::map<int, Index>& keep) {
  check_shapes(f);
  HierarchicalFactorization g = f;
  for (auto [id, k] : keep) {
    if (id < 0 || static_cast<Index>(id) >= f.tree.nodes().size() || f.tree.is_leaf(id))
      throw std::domain_error("pruning applies to interior nodes only");
    const auto& nd = f.tree.node(id);
    if (k > nd.rank)
      throw std::domain_error("keep count " + std::to_string(k) + " exceeds R_nu = " +
                              std::to_string(nd.rank));
    for (Index r = k; r < nd.rank; ++r) {
      g.weights[id].row(r).setZero();
      for (int c : nd.children) g.weights[c].col(r).setZero();
    }
  }
  return g;
}

HierarchicalFactorization sort_local_components(const HierarchicalFactorization& f) {
  auto norms = local_component_norms(f);
  HierarchicalFactorization g = f;
  for (int id : f.tree.interior()) {
    const auto& nd = f.tree.node(id);
    std::vector<Index> order(nd.rank);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return norms.at({id, a}) > norms.at({id, b});
    });
    for (Index k = 0; k < nd.rank; ++k) {
      g.weights[id].row(k) = f.weights[id].row(order[k]);
      for (int c : nd.children) g.weights[c].col(k) = f.weights[c].col(order[k]);
    }
  }
  return g;
}

double pruning_distance_bound(const HierarchicalFactorization& f,
                              const std::map<int, Index>& keep) {
  auto norms = local_component_norms(f);
  double total = 0;
  for (auto [id, k] : keep) {
    const auto& nd = f.tree.node(id);
    std::set<int> excluded(nd.children.begin(), nd.children.end());
    excluded.insert(id);
    double others = 1;
    for (Index v = 0; v < f.tree.nodes().size(); ++v)
      if (!excluded.count(static_cast<int>(v))) others *= f.weights[v].norm();
    for (Index r = k; r < nd.rank; ++r) total += norms.at({id, r}) * others;
  }
  return total;
}

DenseTensor ht_component_direction(const HierarchicalFactorization& f, int node, Index r) {
  const auto& nd = f.tree.node(node);
  double n = f.weights[node].row(r).norm();
  for (int c : nd.children) n *= f.weights[c].col(r).norm();
  if (n == 0) return DenseTensor(f.tree.dims());
  HierarchicalFactorization g = f;
  for (Index k = 0; k < nd.rank; ++k)
    if (k != r) g.weights[node].row(k).setZero();
  DenseTensor t = ht_end_tensor(g);
  t *= 1.0 / n;
  return t;
}

}  // namespace irlab
