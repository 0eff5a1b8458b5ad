#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irlab {

using Index = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Raised when a computation would exceed a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Order-N array of doubles, row-major (last index fastest).
// Mode indices are 0-based throughout the library.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> dims);
  DenseTensor(std::vector<Index> dims, std::vector<double> values);

  static DenseTensor from_matrix(const Matrix& m);
  static DenseTensor from_vector(const Vector& v);

  Index order() const { return dims_.size(); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index n) const { return dims_.at(n); }
  Index size() const { return values_.size(); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](Index linear) { return values_[linear]; }
  double operator[](Index linear) const { return values_[linear]; }
  double& at(const std::vector<Index>& idx) { return values_[linear_index(idx)]; }
  double at(const std::vector<Index>& idx) const { return values_[linear_index(idx)]; }

  Index linear_index(const std::vector<Index>& idx) const;
  std::vector<Index> multi_index(Index linear) const;

  double norm() const;
  Matrix as_matrix() const;
  Vector as_vector() const;

  DenseTensor& operator+=(const DenseTensor& o);
  DenseTensor& operator-=(const DenseTensor& o);
  DenseTensor& operator*=(double c);

 private:
  std::vector<Index> dims_;
  std::vector<double> values_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double c, DenseTensor a);

Index product(const std::vector<Index>& dims);
double inner(const DenseTensor& a, const DenseTensor& b);

// Rows index the modes in I, columns the rest; within each side the
// lowest-numbered mode varies fastest.
Matrix matricize(const DenseTensor& t, const std::vector<Index>& I);
DenseTensor unmatricize(const Matrix& m, const std::vector<Index>& dims,
                        const std::vector<Index>& I);

DenseTensor outer_product(const std::vector<Vector>& vectors);
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

// Output mode k holds input mode perm[k].
DenseTensor permute(const DenseTensor& t, const std::vector<Index>& perm);

// Sums mode n of A against the last mode of B. Output modes: A's modes
// before n, B's modes except its last, A's modes after n.
DenseTensor contract(const DenseTensor& a, Index n, const DenseTensor& b);

DenseTensor delta_tensor(Index order, Index dim);

struct SpectralDecomposition {
  Vector singular_values;
  Matrix left_vectors;
  Matrix right_vectors;
};

SpectralDecomposition spectral(const Matrix& m);
Matrix reconstruct(const SpectralDecomposition& s);

constexpr double kRankTolerance = 1e-8;

int numerical_rank(const Matrix& m, double tol = kRankTolerance);
int numerical_rank(const Vector& singular_values, double tol);

std::string dims_string(const std::vector<Index>& dims);

}  // namespace irlab
