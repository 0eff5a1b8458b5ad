#include <cmath>
#include <functional>
#include <limits>

#include "irlab/gnn.hpp"

namespace irlab {

GridTensor grid_tensor(const Graph& g, const GNNWeights& w, Prediction mode,
                       const std::vector<Vector>& templates, Index cap) {
  Index n = g.num_vertices(), M = templates.size();
  if (M == 0) throw std::domain_error("at least one template required");
  double entries = std::pow(static_cast<double>(M), static_cast<double>(n));
  if (entries > static_cast<double>(cap))
    throw ResourceError("grid tensor of " + std::to_string(M) + "^" + std::to_string(n) +
                        " entries exceeds cap " + std::to_string(cap));
  GridTensor gt{templates, DenseTensor(std::vector<Index>(n, M))};
  std::vector<Vector> X(n);
  for (Index k = 0; k < gt.values.size(); ++k) {
    auto idx = gt.values.multi_index(k);
    for (Index i = 0; i < n; ++i) X[i] = templates[idx[i]];
    gt.values[k] = forward(g, X, w, mode);
  }
  return gt;
}

int grid_seprank_lower(const GridTensor& gt, const VertexSet& I) {
  return numerical_rank(matricize(gt.values, I));
}

Index multichoose(Index D, Index P) {
  // C(D + P - 1, P), built incrementally so every intermediate is exact.
  if (D == 0) return P == 0 ? 1 : 0;
  unsigned __int128 c = 1;
  for (Index k = 1; k <= P; ++k) {
    c = c * (D - 1 + k) / k;
    if (c > std::numeric_limits<Index>::max()) throw std::overflow_error("multiset coefficient overflows");
  }
  return static_cast<Index>(c);
}

std::vector<std::vector<Index>> compositions(Index D, Index P) {
  std::vector<std::vector<Index>> out;
  if (D == 0) {
    if (P == 0) out.push_back({});
    return out;
  }
  std::vector<Index> q(D, 0);
  std::function<void(Index, Index)> rec = [&](Index d, Index left) {
    if (d + 1 == D) {
      q[d] = left;
      out.push_back(q);
      return;
    }
    for (Index v = 0; v <= left; ++v) {
      q[d] = v;
      rec(d + 1, left - v);
    }
  };
  rec(0, P);
  return out;
}

namespace {

Matrix padded_identity(Index rows, Index cols) {
  Matrix m = Matrix::Zero(rows, cols);
  for (Index k = 0; k < std::min(rows, cols); ++k) m(k, k) = 1;
  return m;
}

Matrix unit(Index rows, Index cols) {
  Matrix m = Matrix::Zero(rows, cols);
  m(0, 0) = 1;
  return m;
}

}  // namespace

LowerBoundConstruction lower_bound_construction(const Graph& g, Index L, Index D_x, Index D_h,
                                                const VertexSet& I, const VertexSet& C, Prediction mode,
                                                Index cap) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  if (D_x == 0 || D_h == 0) throw std::domain_error("widths must be positive");
  Index n = g.num_vertices(), D = std::min(D_x, D_h);
  VertexSet target;
  if (mode.mode == Prediction::Mode::Graph)
    for (Index v = 0; v < n; ++v) target.push_back(v);
  else
    target = {mode.target};
  Count rho_c = walk_count(g, L - 1, C, target);
  if (rho_c > 64) throw ConstructionError("walk count " + count_to_string(rho_c) + " too large for a grid construction");
  LowerBoundConstruction out;
  out.rho = static_cast<Index>(rho_c);

  auto finish = [&](LowerBoundConstruction& c) {
    c.achieved_rank = grid_seprank_lower(grid_tensor(g, c.weights, mode, c.templates, cap), I);
    return c.achieved_rank >= static_cast<int>(c.target_rank);
  };

  if (out.rho == 0) {
    // Any non-zero function certifies rank 1.
    for (Index l = 0; l < L; ++l) out.weights.layers.push_back({padded_identity(D_h, l == 0 ? D_x : D_h)});
    out.weights.out = unit(1, D_h);
    out.templates = {Vector::Unit(D_x, 0)};
    out.target_rank = 1;
    if (!finish(out)) throw ConstructionError("rank-one construction failed");
    return out;
  }
  if (L == 1) {
    out.weights.layers = {{padded_identity(D_h, D_x)}};
    out.weights.out = Matrix::Ones(1, D_h);
    for (Index m = 0; m < D; ++m) out.templates.push_back(Vector::Unit(D_x, m));
    out.target_rank = D;
    if (!finish(out)) throw ConstructionError("standard-basis construction reached rank " +
                                              std::to_string(out.achieved_rank) + " < " + std::to_string(D));
    return out;
  }

  out.weights.layers.push_back({padded_identity(D_h, D_x)});
  Matrix W2 = Matrix::Zero(D_h, D_h);
  W2.row(0).setOnes();
  out.weights.layers.push_back({W2});
  for (Index l = 2; l < L; ++l) out.weights.layers.push_back({unit(D_h, D_h)});
  out.weights.out = unit(1, D_h);

  auto qs = compositions(D, out.rho);
  Index M = qs.size();
  out.target_rank = M;
  int best = 0;
  for (int k = 1; k <= 64; ++k) {
    double gamma = std::pow(1.1, k);
    Matrix A(M, M);
    for (Index a = 0; a < M; ++a)
      for (Index b = 0; b < M; ++b) {
        double e = 0;
        for (Index d = 0; d < D; ++d) e += static_cast<double>(qs[a][d] * qs[b][d]);
        A(a, b) = std::pow(gamma, e);
      }
    if (numerical_rank(A) < static_cast<int>(M)) continue;
    out.gamma = gamma;
    out.templates.clear();
    for (Index m = 0; m < M; ++m) {
      Vector v = Vector::Zero(D_x);
      for (Index d = 0; d < D; ++d) v(d) = std::pow(gamma, static_cast<double>(qs[m][d]));
      out.templates.push_back(v);
    }
    out.templates.push_back(Vector::Ones(D_x));
    if (finish(out)) return out;
    best = std::max(best, out.achieved_rank);
  }
  throw ConstructionError("no gamma in 1.1^1..1.1^64 gave grid rank " + std::to_string(M) +
                          " (best " + std::to_string(best) + ")");
}

}  // namespace irlab
