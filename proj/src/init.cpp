#include <cmath>

#include "irlab/factorization.hpp"

namespace irlab {

Matrix gaussian_matrix(Index rows, Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> nd(0.0, stddev);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

Vector gaussian_vector(Index n, double stddev, Rng& rng) {
  std::normal_distribution<double> nd(0.0, stddev);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

MatrixFactorization balanced_factorization(const Matrix& end, Index depth,
                                           const std::vector<Index>& hidden) {
  if (depth == 0) throw std::domain_error("depth must be at least 1");
  if (hidden.size() != depth - 1) throw std::domain_error("need depth-1 hidden widths");
  MatrixFactorization f;
  if (depth == 1) {
    f.weights = {end};
    return f;
  }
  Index m = end.rows(), n = end.cols(), k = std::min(m, n);
  for (Index h : hidden)
    if (h < k) throw std::domain_error("hidden width below min(rows, cols) breaks balance");
  auto s = spectral(end);
  Vector root = s.singular_values.array().pow(1.0 / depth).matrix();
  f.weights.resize(depth);
  Matrix bottom = Matrix::Zero(hidden[0], n);
  bottom.topRows(k) = root.asDiagonal() * s.right_vectors.transpose();
  f.weights[0] = bottom;
  for (Index l = 1; l + 1 < depth; ++l) {
    Matrix mid = Matrix::Zero(hidden[l], hidden[l - 1]);
    mid.topLeftCorner(k, k) = root.asDiagonal();
    f.weights[l] = mid;
  }
  Matrix top = Matrix::Zero(m, hidden[depth - 2]);
  top.leftCols(k) = s.left_vectors * root.asDiagonal();
  f.weights[depth - 1] = top;
  return f;
}

namespace {

// Rescales squared magnitudes so every row sums to a and every column to b.
Matrix sinkhorn_balance(const Matrix& w, double a, double b) {
  Matrix s = w.array().square();
  for (int it = 0; it < 20000; ++it) {
    for (Index i = 0; i < static_cast<Index>(s.rows()); ++i) s.row(i) *= a / s.row(i).sum();
    double worst = 0;
    for (Index j = 0; j < static_cast<Index>(s.cols()); ++j) {
      double cs = s.col(j).sum();
      s.col(j) *= b / cs;
    }
    for (Index i = 0; i < static_cast<Index>(s.rows()); ++i)
      worst = std::max(worst, std::abs(s.row(i).sum() - a) / a);
    if (worst < 1e-15) break;
  }
  Matrix out(w.rows(), w.cols());
  for (Index i = 0; i < static_cast<Index>(w.rows()); ++i)
    for (Index j = 0; j < static_cast<Index>(w.cols()); ++j)
      out(i, j) = (w(i, j) < 0 ? -1.0 : 1.0) * std::sqrt(s(i, j));
  return out;
}

}  // namespace

HierarchicalFactorization init_ht_balanced(const ModeTree& tree, double scale, Rng& rng) {
  HierarchicalFactorization f;
  f.tree = tree;
  Index n = tree.nodes().size();
  f.weights.resize(n);
  int root = tree.root();
  double c = scale * scale * static_cast<double>(tree.node(root).rank);
  // Squared norm of each vector in the local components at an interior node.
  auto share = [&](int id) { return c / static_cast<double>(tree.node(id).rank); };
  for (Index id = 0; id < n; ++id) {
    int v = static_cast<int>(id);
    Index rows = tree.node(v).rank, cols = tree.parent_rank(v);
    Matrix g = gaussian_matrix(rows, cols, scale, rng);
    int p = tree.node(v).parent;
    if (tree.is_leaf(v)) {
      for (Index j = 0; j < cols; ++j) g.col(j) *= std::sqrt(share(p)) / g.col(j).norm();
    } else if (p == -1) {
      for (Index i = 0; i < rows; ++i) g(i, 0) = (g(i, 0) < 0 ? -1.0 : 1.0) * std::sqrt(share(v));
    } else {
      g = sinkhorn_balance(g, share(v), share(p));
    }
    f.weights[id] = g;
  }
  return f;
}

Factorization init_balanced(const InitSpec& spec, Rng& rng) {
  if (!(spec.scale > 0)) throw std::domain_error("init scale must be positive");
  switch (spec.kind) {
    case FactorizationKind::Matrix: {
      if (spec.dims.size() != 2) throw std::domain_error("matrix init needs dims {rows, cols}");
      Index m = spec.dims[0], n = spec.dims[1];
      if (spec.det_sign && m != n) throw std::domain_error("det sign requires a square matrix");
      std::vector<Index> hidden = spec.hidden;
      if (hidden.empty()) hidden.assign(spec.depth - 1, std::min(m, n));
      Matrix end;
      for (int attempt = 0;; ++attempt) {
        if (attempt > 10000) throw std::runtime_error("could not sample requested det sign");
        end = gaussian_matrix(m, n, spec.scale, rng);
        if (!spec.det_sign) break;
        double d = end.determinant();
        if ((*spec.det_sign > 0 && d > 0) || (*spec.det_sign < 0 && d < 0)) break;
      }
      return balanced_factorization(end, spec.depth, hidden);
    }
    case FactorizationKind::CP: {
      CPFactorization f;
      Index R = spec.components, N = spec.dims.size();
      for (Index d : spec.dims) f.factors.push_back(gaussian_matrix(d, R, spec.scale, rng));
      for (Index r = 0; r < R; ++r) {
        double logsum = 0;
        for (Index k = 0; k < N; ++k) logsum += std::log(f.factors[k].col(r).norm());
        double target = std::exp(logsum / static_cast<double>(N));
        for (Index k = 0; k < N; ++k) f.factors[k].col(r) *= target / f.factors[k].col(r).norm();
      }
      return f;
    }
    case FactorizationKind::Hierarchical: {
      HierarchicalFactorization f;
      f.tree = spec.tree ? *spec.tree : ModeTree::perfect_binary(spec.dims, spec.components);
      for (Index id = 0; id < f.tree.nodes().size(); ++id) {
        int v = static_cast<int>(id);
        f.weights.push_back(gaussian_matrix(f.tree.node(v).rank, f.tree.parent_rank(v), spec.scale, rng));
      }
      return f;
    }
  }
  throw std::domain_error("unknown factorization kind");
}

Factorization init_gaussian(const InitSpec& spec, Rng& rng) {
  if (!(spec.scale > 0)) throw std::domain_error("init scale must be positive");
  switch (spec.kind) {
    case FactorizationKind::Matrix: {
      if (spec.dims.size() != 2) throw std::domain_error("matrix init needs dims {rows, cols}");
      if (spec.depth == 0) throw std::domain_error("depth must be at least 1");
      std::vector<Index> widths{spec.dims[1]};
      std::vector<Index> hidden = spec.hidden;
      if (hidden.empty()) hidden.assign(spec.depth - 1, std::min(spec.dims[0], spec.dims[1]));
      if (hidden.size() != spec.depth - 1) throw std::domain_error("need depth-1 hidden widths");
      widths.insert(widths.end(), hidden.begin(), hidden.end());
      widths.push_back(spec.dims[0]);
      MatrixFactorization f;
      for (Index l = 0; l < spec.depth; ++l) f.weights.push_back(gaussian_matrix(widths[l + 1], widths[l], spec.scale, rng));
      return f;
    }
    case FactorizationKind::CP: {
      CPFactorization f;
      for (Index d : spec.dims) f.factors.push_back(gaussian_matrix(d, spec.components, spec.scale, rng));
      return f;
    }
    case FactorizationKind::Hierarchical:
      return init_balanced(spec, rng);
  }
  throw std::domain_error("unknown factorization kind");
}

}  // namespace irlab
