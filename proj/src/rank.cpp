#include "irlab/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace irlab {

double effective_rank(const Vector& sv) {
  double total = sv.sum();
  if (!(total > 0)) throw std::domain_error("effective rank of a zero matrix is undefined");
  double h = 0;
  for (Index i = 0; i < static_cast<Index>(sv.size()); ++i) {
    double p = sv(i) / total;
    if (p > 0) h -= p * std::log(p);
  }
  return std::exp(h);
}

double effective_rank(const Matrix& m) { return effective_rank(spectral(m).singular_values); }

double tensor_effective_rank(const DenseTensor& t) {
  double best = 1;
  for (Index n = 0; n < t.order(); ++n) best = std::max(best, effective_rank(matricize(t, {n})));
  return best;
}

double distance_from_rank(const Matrix& m, Index R) {
  Index k = std::min(m.rows(), m.cols());
  if (R > k) throw std::domain_error("rank exceeds min dimension");
  auto sv = spectral(m).singular_values;
  double s = 0;
  for (Index r = R; r < k; ++r) s += sv(r) * sv(r);
  return std::sqrt(s);
}

namespace {

// Khatri-Rao product of all factors except mode n, rows ordered to match
// the columns of matricize(t, {n}).
Matrix khatri_rao_except(const std::vector<Matrix>& A, Index n) {
  Index R = A[0].cols(), rows = 1;
  for (Index m = 0; m < A.size(); ++m)
    if (m != n) rows *= A[m].rows();
  Matrix K(rows, R);
  std::vector<Index> idx(A.size(), 0);
  for (Index row = 0; row < rows; ++row) {
    for (Index r = 0; r < R; ++r) {
      double p = 1;
      for (Index m = 0; m < A.size(); ++m)
        if (m != n) p *= A[m](idx[m], r);
      K(row, r) = p;
    }
    for (Index m = 0; m < A.size(); ++m) {
      if (m == n) continue;
      if (++idx[m] < static_cast<Index>(A[m].rows())) break;
      idx[m] = 0;
    }
  }
  return K;
}

}  // namespace

AlsFit cp_als(const DenseTensor& t, Index R, const AlsOptions& opt, std::uint64_t seed) {
  Rng rng(seed);
  Index N = t.order();
  std::vector<Matrix> A;
  for (Index n = 0; n < N; ++n) A.push_back(gaussian_matrix(t.dim(n), R, 1.0, rng));
  std::vector<Matrix> unfold;
  for (Index n = 0; n < N; ++n) unfold.push_back(matricize(t, {n}));
  double size = static_cast<double>(t.size());
  double prev = std::numeric_limits<double>::infinity(), mse = prev;
  for (Index sweep = 0; sweep < opt.sweeps; ++sweep) {
    for (Index n = 0; n < N; ++n) {
      Matrix K = khatri_rao_except(A, n);
      Matrix G = Matrix::Ones(R, R);
      for (Index m = 0; m < N; ++m)
        if (m != n) G = G.cwiseProduct(A[m].transpose() * A[m]);
      Matrix rhs = unfold[n] * K;
      A[n] = G.completeOrthogonalDecomposition().solve(rhs.transpose()).transpose();
    }
    Matrix K = khatri_rao_except(A, 0);
    mse = (unfold[0] - A[0] * K.transpose()).squaredNorm() / size;
    if (!std::isfinite(mse)) break;
    if (prev - mse < opt.min_improvement * std::max(1.0, prev) && sweep > 10) break;
    prev = mse;
  }
  AlsFit fit;
  fit.factors.factors = A;
  fit.mse = mse;
  return fit;
}

Index tensor_rank_estimate(const DenseTensor& t, double threshold, const AlsOptions& opt) {
  if (!(threshold > 0)) throw std::domain_error("threshold must be positive");
  if (t.norm() == 0) return 0;
  Index max_rank = opt.max_rank;
  if (max_rank == 0) {
    Index mx = *std::max_element(t.dims().begin(), t.dims().end());
    max_rank = product(t.dims()) / mx;
  }
  for (Index R = 1; R <= max_rank; ++R) {
    for (Index k = 0; k < opt.restarts; ++k) {
      auto fit = cp_als(t, R, opt, opt.seed * 1000003ULL + R * 101ULL + k);
      if (fit.mse < threshold) return R;
    }
  }
  return max_rank + 1;
}

std::map<int, int> hierarchical_tensor_rank(const DenseTensor& t, const ModeTree& tree, double tol) {
  if (tree.dims() != t.dims()) throw std::domain_error("tree dims do not match tensor");
  std::map<int, int> out;
  for (Index id = 0; id < tree.nodes().size(); ++id) {
    int v = static_cast<int>(id);
    if (v == tree.root()) continue;
    out[v] = numerical_rank(matricize(t, tree.node(v).label), tol);
  }
  return out;
}

double unbalancedness(const Factorization& f) {
  double worst = 0;
  if (auto* m = std::get_if<MatrixFactorization>(&f)) {
    for (Index l = 0; l + 1 < m->weights.size(); ++l) {
      const Matrix& a = m->weights[l];
      const Matrix& b = m->weights[l + 1];
      worst = std::max(worst, (a * a.transpose() - b.transpose() * b).norm());
    }
    return worst;
  }
  if (auto* c = std::get_if<CPFactorization>(&f)) {
    for (Index r = 0; r < c->components(); ++r) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (const auto& A : c->factors) {
        double s = A.col(r).squaredNorm();
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      worst = std::max(worst, hi - lo);
    }
    return worst;
  }
  const auto& h = std::get<HierarchicalFactorization>(f);
  for (int id : h.tree.interior()) {
    const auto& nd = h.tree.node(id);
    for (Index r = 0; r < nd.rank; ++r) {
      double lo = h.weights[id].row(r).squaredNorm(), hi = lo;
      for (int c : nd.children) {
        double s = h.weights[c].col(r).squaredNorm();
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      worst = std::max(worst, hi - lo);
    }
  }
  return worst;
}

}  // namespace irlab
