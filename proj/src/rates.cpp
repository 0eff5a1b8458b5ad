#include <cmath>

#include "irlab/dynamics.hpp"
#include "irlab/rank.hpp"

namespace irlab {

namespace {

RatePrediction make_rate(std::string name, Index index, double n, double L, double g, double eps,
                         double balance_tol) {
  RatePrediction p{std::move(name), index, 0, 0, 0, n, true};
  if (!(n > 0)) return p;
  p.value = std::pow(n, 2 - 2 / L) * L * g;
  if (eps <= balance_tol) {
    p.lower = p.upper = p.value;
    return p;
  }
  double a = std::pow(n, 2 / L) + eps;
  double hi = std::pow(a, L - 1) * L * g;
  double lo = n * n / a * L * g;
  p.lower = g >= 0 ? lo : hi;
  p.upper = g >= 0 ? hi : lo;
  return p;
}

}  // namespace

std::vector<RatePrediction> predicted_rates(const Factorization& f, const Loss& loss, double balance_tol) {
  DenseTensor G = loss_value_and_grad(loss, end_tensor(f)).second;
  double eps = unbalancedness(f);
  std::vector<RatePrediction> out;
  if (auto* m = std::get_if<MatrixFactorization>(&f)) {
    auto s = spectral(mf_end_matrix(*m));
    Matrix Gm = G.as_matrix();
    double L = static_cast<double>(m->depth());
    Index k = s.singular_values.size();
    double s1 = k > 0 ? s.singular_values(0) : 0;
    for (Index r = 0; r < k; ++r) {
      double sv = s.singular_values(r);
      double g = -s.left_vectors.col(r).dot(Gm * s.right_vectors.col(r));
      RatePrediction p{"sv", r, sv > 0 ? std::pow(sv, 2 - 2 / L) * L * g : (L == 1 ? g : 0), 0, 0, sv, true};
      p.lower = p.upper = p.value;
      double gap_tol = 1e-6 * std::max(s1, 1e-300);
      if ((r > 0 && s.singular_values(r - 1) - sv <= gap_tol) ||
          (r + 1 < k && sv - s.singular_values(r + 1) <= gap_tol))
        p.trusted = false;
      if (eps > balance_tol) p.trusted = false;
      out.push_back(p);
    }
    return out;
  }
  if (auto* c = std::get_if<CPFactorization>(&f)) {
    Index N = c->order();
    for (Index r = 0; r < c->components(); ++r) {
      std::vector<Vector> dirs;
      double n = 1;
      for (const auto& A : c->factors) {
        double a = A.col(r).norm();
        n *= a;
        dirs.push_back(a > 0 ? Vector(A.col(r) / a) : Vector(A.col(r)));
      }
      double g = n > 0 ? -inner(G, outer_product(dirs)) : 0;
      out.push_back(make_rate("comp_norm", r, n, static_cast<double>(N), g, eps, balance_tol));
    }
    return out;
  }
  const auto& h = std::get<HierarchicalFactorization>(f);
  for (auto [key, n] : local_component_norms(h)) {
    double L = static_cast<double>(h.tree.node(key.node).children.size() + 1);
    double g = n > 0 ? -inner(G, ht_component_direction(h, key.node, key.r)) : 0;
    out.push_back(make_rate("lc_norm:" + std::to_string(key.node), key.r, n, L, g, eps, balance_tol));
  }
  return out;
}

Matrix psd_power(const Matrix& S, double p) {
  if (p == 0) return Matrix::Identity(S.rows(), S.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
  Vector ev = es.eigenvalues().cwiseMax(0.0);
  for (Index i = 0; i < static_cast<Index>(ev.size()); ++i) ev(i) = ev(i) > 0 ? std::pow(ev(i), p) : 0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix end_matrix_flow_rate(const MatrixFactorization& f, const Loss& loss) {
  Matrix W = mf_end_matrix(f);
  Matrix G = loss_value_and_grad(loss, DenseTensor::from_matrix(W)).second.as_matrix();
  Index L = f.depth();
  Matrix left = W * W.transpose(), right = W.transpose() * W;
  Matrix out = Matrix::Zero(W.rows(), W.cols());
  for (Index l = 1; l <= L; ++l)
    out -= psd_power(left, double(l - 1) / L) * G * psd_power(right, double(L - l) / L);
  return out;
}

}  // namespace irlab
