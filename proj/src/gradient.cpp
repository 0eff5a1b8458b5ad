#include <cmath>

#include "irlab/dynamics.hpp"

namespace irlab {

namespace {

MatrixFactorization mf_grad(const MatrixFactorization& f, const Matrix& G) {
  Index L = f.depth();
  // prefix[l] = W_l ... W_1 (prefix[0] = I), suffix[l] = W_L ... W_{l+1}.
  std::vector<Matrix> prefix(L + 1), suffix(L + 1);
  prefix[0] = Matrix::Identity(f.weights[0].cols(), f.weights[0].cols());
  for (Index l = 0; l < L; ++l) prefix[l + 1] = f.weights[l] * prefix[l];
  suffix[L] = Matrix::Identity(f.weights[L - 1].rows(), f.weights[L - 1].rows());
  for (Index l = L; l-- > 0;) suffix[l] = suffix[l + 1] * f.weights[l];
  MatrixFactorization g;
  g.weights.resize(L);
  for (Index l = 0; l < L; ++l) g.weights[l] = suffix[l + 1].transpose() * G * prefix[l].transpose();
  return g;
}

CPFactorization cp_grad(const CPFactorization& f, const DenseTensor& G) {
  CPFactorization g;
  Index N = f.order(), R = f.components();
  for (const auto& A : f.factors) g.factors.push_back(Matrix::Zero(A.rows(), A.cols()));
  std::vector<Index> idx(N, 0);
  for (Index k = 0; k < G.size(); ++k) {
    double c = G[k];
    if (c != 0) {
      idx = G.multi_index(k);
      for (Index r = 0; r < R; ++r) {
        for (Index n = 0; n < N; ++n) {
          double p = c;
          for (Index m = 0; m < N; ++m)
            if (m != n) p *= f.factors[m](idx[m], r);
          g.factors[n](idx[n], r) += p;
        }
      }
    }
  }
  return g;
}

HierarchicalFactorization ht_grad(const HierarchicalFactorization& f, const DenseTensor& G) {
  const auto& t = f.tree;
  HTForward fw = ht_forward(f);
  Index n = t.nodes().size();
  std::vector<Matrix> dpart(n);
  dpart[t.root()] = Eigen::Map<const Vector>(G.data(), G.size());
  HierarchicalFactorization g = f;
  auto order = t.postorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int id = *it;
    if (t.is_leaf(id)) {
      g.weights[id] = dpart[id];
      continue;
    }
    const auto& nd = t.node(id);
    g.weights[id] = fw.local[id].transpose() * dpart[id];
    Matrix dK = dpart[id] * f.weights[id].transpose();
    Index C = nd.children.size();
    std::vector<Index> csize(C);
    for (Index c = 0; c < C; ++c) {
      csize[c] = fw.part[nd.children[c]].rows();
      dpart[nd.children[c]] = Matrix::Zero(csize[c], nd.rank);
    }
    const auto& perm = fw.perm[id];
    std::vector<Index> ci(C);
    for (Index r = 0; r < nd.rank; ++r) {
      std::fill(ci.begin(), ci.end(), 0);
      for (Index u = 0; u < perm.size(); ++u) {
        double d = dK(perm[u], r);
        if (d != 0) {
          for (Index c = 0; c < C; ++c) {
            double p = d;
            for (Index o = 0; o < C; ++o)
              if (o != c) p *= fw.part[nd.children[o]](ci[o], r);
            dpart[nd.children[c]](ci[c], r) += p;
          }
        }
        for (Index c = C; c-- > 0;) {
          if (++ci[c] < csize[c]) break;
          ci[c] = 0;
        }
      }
    }
  }
  return g;
}

}  // namespace

Factorization param_grad(const Factorization& f, const Loss& loss) {
  return param_grad_from_end(f, loss_value_and_grad(loss, end_tensor(f)).second);
}

Factorization param_grad_from_end(const Factorization& f, const DenseTensor& G) {
  if (auto* m = std::get_if<MatrixFactorization>(&f)) return mf_grad(*m, G.as_matrix());
  if (auto* c = std::get_if<CPFactorization>(&f)) return cp_grad(*c, G);
  return ht_grad(std::get<HierarchicalFactorization>(f), G);
}

double loss_value(const Factorization& f, const Loss& loss) {
  return loss_value_and_grad(loss, end_tensor(f)).first;
}

namespace {

std::vector<Matrix>& mats(Factorization& f) {
  if (auto* m = std::get_if<MatrixFactorization>(&f)) return m->weights;
  if (auto* c = std::get_if<CPFactorization>(&f)) return c->factors;
  return std::get<HierarchicalFactorization>(f).weights;
}

const std::vector<Matrix>& mats(const Factorization& f) {
  return mats(const_cast<Factorization&>(f));
}

}  // namespace

double param_norm(const Factorization& f) {
  double s = 0;
  for (const auto& m : mats(f)) s += m.squaredNorm();
  return std::sqrt(s);
}

Factorization axpy(const Factorization& f, double c, const Factorization& g) {
  if (f.index() != g.index()) throw std::domain_error("factorization kinds differ");
  Factorization out = f;
  auto& a = mats(out);
  const auto& b = mats(g);
  if (a.size() != b.size()) throw std::domain_error("factorization shapes differ");
  for (Index k = 0; k < a.size(); ++k) {
    if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols())
      throw std::domain_error("factorization shapes differ");
    a[k] += c * b[k];
  }
  return out;
}

}  // namespace irlab
