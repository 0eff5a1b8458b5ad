#include "irlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace irlab {

Index product(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

std::string dims_string(const std::vector<Index>& dims) {
  std::ostringstream os;
  os << "(";
  for (Index i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ")";
  return os.str();
}

DenseTensor::DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::domain_error("tensor order must be at least 1");
  for (Index d : dims_)
    if (d == 0) throw std::domain_error("tensor dims must be positive");
  values_.assign(product(dims_), 0.0);
}

DenseTensor::DenseTensor(std::vector<Index> dims, std::vector<double> values)
    : DenseTensor(std::move(dims)) {
  if (values.size() != values_.size())
    throw std::domain_error("value count " + std::to_string(values.size()) +
                            " does not match dims " + dims_string(dims_));
  values_ = std::move(values);
}

DenseTensor DenseTensor::from_matrix(const Matrix& m) {
  DenseTensor t({static_cast<Index>(m.rows()), static_cast<Index>(m.cols())});
  for (Index i = 0; i < t.dims_[0]; ++i)
    for (Index j = 0; j < t.dims_[1]; ++j) t.values_[i * t.dims_[1] + j] = m(i, j);
  return t;
}

DenseTensor DenseTensor::from_vector(const Vector& v) {
  DenseTensor t({static_cast<Index>(v.size())});
  for (Index i = 0; i < t.size(); ++i) t.values_[i] = v(i);
  return t;
}

Index DenseTensor::linear_index(const std::vector<Index>& idx) const {
  if (idx.size() != dims_.size()) throw std::domain_error("index order mismatch");
  Index lin = 0;
  for (Index n = 0; n < dims_.size(); ++n) {
    if (idx[n] >= dims_[n]) throw std::domain_error("index out of range");
    lin = lin * dims_[n] + idx[n];
  }
  return lin;
}

std::vector<Index> DenseTensor::multi_index(Index linear) const {
  std::vector<Index> idx(dims_.size());
  for (Index n = dims_.size(); n-- > 0;) {
    idx[n] = linear % dims_[n];
    linear /= dims_[n];
  }
  return idx;
}

double DenseTensor::norm() const {
  double s = 0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

Matrix DenseTensor::as_matrix() const {
  if (order() != 2) throw std::domain_error("as_matrix requires an order-2 tensor");
  Matrix m(dims_[0], dims_[1]);
  for (Index i = 0; i < dims_[0]; ++i)
    for (Index j = 0; j < dims_[1]; ++j) m(i, j) = values_[i * dims_[1] + j];
  return m;
}

Vector DenseTensor::as_vector() const {
  Vector v(values_.size());
  for (Index i = 0; i < values_.size(); ++i) v(i) = values_[i];
  return v;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& o) {
  if (o.dims_ != dims_) throw std::domain_error("dims mismatch in +=");
  for (Index i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& o) {
  if (o.dims_ != dims_) throw std::domain_error("dims mismatch in -=");
  for (Index i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double c, DenseTensor a) { return a *= c; }

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw std::domain_error("dims mismatch in inner product");
  double s = 0;
  for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

std::vector<Index> checked_modes(const std::vector<Index>& I, Index order) {
  std::vector<Index> s(I);
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::domain_error("repeated mode in index subset");
  for (Index i : s)
    if (i >= order) throw std::domain_error("mode " + std::to_string(i) + " out of range");
  return s;
}

// Per-mode strides for row and column placement.
void placement_strides(const std::vector<Index>& dims, const std::vector<Index>& rows,
                       std::vector<Index>& stride, std::vector<bool>& is_row,
                       Index& nrows, Index& ncols) {
  Index N = dims.size();
  is_row.assign(N, false);
  for (Index i : rows) is_row[i] = true;
  stride.assign(N, 0);
  nrows = 1;
  ncols = 1;
  for (Index n = 0; n < N; ++n) {
    if (is_row[n]) {
      stride[n] = nrows;
      nrows *= dims[n];
    } else {
      stride[n] = ncols;
      ncols *= dims[n];
    }
  }
}

}  // namespace

Matrix matricize(const DenseTensor& t, const std::vector<Index>& I) {
  auto rows = checked_modes(I, t.order());
  std::vector<Index> stride;
  std::vector<bool> is_row;
  Index nr, nc;
  placement_strides(t.dims(), rows, stride, is_row, nr, nc);
  Matrix m(nr, nc);
  std::vector<Index> idx(t.order(), 0);
  for (Index lin = 0; lin < t.size(); ++lin) {
    Index r = 0, c = 0;
    for (Index n = 0; n < t.order(); ++n) (is_row[n] ? r : c) += idx[n] * stride[n];
    m(r, c) = t[lin];
    for (Index n = t.order(); n-- > 0;) {
      if (++idx[n] < t.dim(n)) break;
      idx[n] = 0;
    }
  }
  return m;
}

DenseTensor unmatricize(const Matrix& m, const std::vector<Index>& dims,
                        const std::vector<Index>& I) {
  DenseTensor t(dims);
  auto rows = checked_modes(I, t.order());
  std::vector<Index> stride;
  std::vector<bool> is_row;
  Index nr, nc;
  placement_strides(dims, rows, stride, is_row, nr, nc);
  if (static_cast<Index>(m.rows()) != nr || static_cast<Index>(m.cols()) != nc)
    throw std::domain_error("matrix shape does not match matricization shape");
  std::vector<Index> idx(t.order(), 0);
  for (Index lin = 0; lin < t.size(); ++lin) {
    Index r = 0, c = 0;
    for (Index n = 0; n < t.order(); ++n) (is_row[n] ? r : c) += idx[n] * stride[n];
    t[lin] = m(r, c);
    for (Index n = t.order(); n-- > 0;) {
      if (++idx[n] < t.dim(n)) break;
      idx[n] = 0;
    }
  }
  return t;
}

DenseTensor outer_product(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw std::domain_error("outer product of no vectors");
  DenseTensor t = DenseTensor::from_vector(vectors[0]);
  if (vectors[0].size() == 0) throw std::domain_error("empty vector in outer product");
  for (Index k = 1; k < vectors.size(); ++k) {
    if (vectors[k].size() == 0) throw std::domain_error("empty vector in outer product");
    t = outer(t, DenseTensor::from_vector(vectors[k]));
  }
  return t;
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
  std::vector<Index> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  DenseTensor t(dims);
  Index nb = b.size();
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < nb; ++j) t[i * nb + j] = a[i] * b[j];
  return t;
}

DenseTensor permute(const DenseTensor& t, const std::vector<Index>& perm) {
  Index N = t.order();
  if (perm.size() != N) throw std::domain_error("permutation length mismatch");
  std::vector<Index> check(perm);
  std::sort(check.begin(), check.end());
  for (Index k = 0; k < N; ++k)
    if (check[k] != k) throw std::domain_error("not a permutation");
  std::vector<Index> out_dims(N);
  for (Index k = 0; k < N; ++k) out_dims[k] = t.dim(perm[k]);
  std::vector<Index> in_stride(N);
  Index s = 1;
  for (Index n = N; n-- > 0;) {
    in_stride[n] = s;
    s *= t.dim(n);
  }
  DenseTensor out(out_dims);
  std::vector<Index> idx(N, 0);
  for (Index lin = 0; lin < out.size(); ++lin) {
    Index src = 0;
    for (Index k = 0; k < N; ++k) src += idx[k] * in_stride[perm[k]];
    out[lin] = t[src];
    for (Index k = N; k-- > 0;) {
      if (++idx[k] < out_dims[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

DenseTensor contract(const DenseTensor& a, Index n, const DenseTensor& b) {
  if (n >= a.order()) throw std::domain_error("contraction mode out of range");
  Index dn = a.dim(n);
  if (dn != b.dims().back())
    throw std::domain_error("contraction dims mismatch: " + std::to_string(dn) + " vs " +
                            std::to_string(b.dims().back()));
  Index pre = 1, post = 1;
  for (Index k = 0; k < n; ++k) pre *= a.dim(k);
  for (Index k = n + 1; k < a.order(); ++k) post *= a.dim(k);
  Index mid = b.size() / dn;

  std::vector<Index> dims;
  for (Index k = 0; k < n; ++k) dims.push_back(a.dim(k));
  for (Index k = 0; k + 1 < b.order(); ++k) dims.push_back(b.dim(k));
  for (Index k = n + 1; k < a.order(); ++k) dims.push_back(a.dim(k));
  if (dims.empty()) dims.push_back(1);

  DenseTensor out(dims);
  for (Index p = 0; p < pre; ++p)
    for (Index m = 0; m < mid; ++m)
      for (Index q = 0; q < post; ++q) {
        double s = 0;
        for (Index d = 0; d < dn; ++d) s += a[(p * dn + d) * post + q] * b[m * dn + d];
        out[(p * mid + m) * post + q] = s;
      }
  return out;
}

DenseTensor delta_tensor(Index order, Index dim) {
  DenseTensor t(std::vector<Index>(order, dim));
  Index step = 0, s = 1;
  for (Index k = 0; k < order; ++k) {
    step += s;
    s *= dim;
  }
  for (Index d = 0; d < dim; ++d) t[d * step] = 1.0;
  return t;
}

SpectralDecomposition spectral(const Matrix& m) {
  if (!m.allFinite()) throw std::domain_error("spectral: non-finite input");
  SpectralDecomposition s;
  if (m.size() == 0) return s;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  s.singular_values = svd.singularValues();
  s.left_vectors = svd.matrixU();
  s.right_vectors = svd.matrixV();
  return s;
}

Matrix reconstruct(const SpectralDecomposition& s) {
  return s.left_vectors * s.singular_values.asDiagonal() * s.right_vectors.transpose();
}

int numerical_rank(const Vector& sv, double tol) {
  if (sv.size() == 0 || sv(0) <= 0) return 0;
  double cut = tol * sv(0);
  int r = 0;
  for (Index i = 0; i < static_cast<Index>(sv.size()); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

int numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  return numerical_rank(spectral(m).singular_values, tol);
}

}  // namespace irlab
