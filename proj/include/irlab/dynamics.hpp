#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irlab/factorization.hpp"
#include "irlab/tensor.hpp"

namespace irlab {

enum class EntryLoss { Squared, Huber };
enum class Normalization { Mean, Sum };

// Completion: (1/|Omega|) sum l(W_idx - y) over observed entries.
// Sensing:    (1/M) sum l(<A_i, W> - y_i) over measurements.
// l(z) = z^2/2 (squared) or the Huber loss with transition point delta.
// Sum normalization drops the 1/|Omega| (1/M) factor.
struct Loss {
  enum class Kind { Completion, Sensing } kind = Kind::Completion;
  std::vector<Index> dims;
  std::vector<Observed> observations;
  std::vector<DenseTensor> measurements;
  std::vector<double> targets;
  EntryLoss entry = EntryLoss::Squared;
  double huber_delta = 0;
  Normalization normalization = Normalization::Mean;

  static Loss completion(std::vector<Index> dims, std::vector<Observed> obs,
                         EntryLoss entry = EntryLoss::Squared, double delta = 0,
                         Normalization norm = Normalization::Mean);
  static Loss sensing(std::vector<DenseTensor> A, std::vector<double> y,
                      EntryLoss entry = EntryLoss::Squared, double delta = 0);

  // Warnings about the configuration (e.g. Huber delta not below min |y|).
  std::vector<std::string> warnings() const;
  double scale() const;
  double entry_value(double z) const;
  double entry_derivative(double z) const;
};

std::pair<double, DenseTensor> loss_value_and_grad(const Loss& loss, const DenseTensor& endT);

// Gradient of the composite objective with respect to the parameters.
Factorization param_grad(const Factorization& f, const Loss& loss);
// Same, given the gradient of the loss at the current end tensor.
Factorization param_grad_from_end(const Factorization& f, const DenseTensor& G);
double loss_value(const Factorization& f, const Loss& loss);
double param_norm(const Factorization& f);
// f + c * g, both of the same kind and shape.
Factorization axpy(const Factorization& f, double c, const Factorization& g);

struct Diagnostic {
  std::string name;
  Index index;
  double value;
};

struct TrajectoryRecord {
  std::size_t iter;
  double loss;
  double lr;
  std::vector<Diagnostic> diagnostics;
  double find(const std::string& name, Index index = 0) const;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  bool diverged = false;
  std::size_t iterations = 0;
  std::string stop_reason;
};

struct TrainConfig {
  enum class Step { Fixed, Adaptive } step = Step::Adaptive;
  double eta = 1e-2;
  double beta = 0.99;
  double epsilon = 1e-6;
  double loss_threshold = 1e-8;
  double plateau_threshold = 5e-5;
  std::size_t patience = 100;  // 0 disables the plateau rule
  std::size_t max_iters = 1000000;
  std::size_t record_stride = 100;
  std::uint64_t seed = 0;
  std::optional<DenseTensor> ground_truth;
  void validate() const;
};

std::pair<Factorization, Trajectory> train(const Factorization& f, const Loss& loss,
                                           const TrainConfig& cfg);

std::vector<Diagnostic> diagnostics(const Factorization& f, const std::optional<DenseTensor>& gt);

struct RatePrediction {
  std::string name;  // "sv", "comp_norm", "lc_norm:<node>"
  Index index;
  double value;   // balanced prediction
  double lower;   // equal to value when the factorization is balanced
  double upper;
  double current; // quantity whose rate is predicted
  bool trusted = true;
};

// Balanced predictions are exact when unbalancedness <= balance_tol;
// otherwise intervals from the epsilon-bounds are returned.
std::vector<RatePrediction> predicted_rates(const Factorization& f, const Loss& loss,
                                            double balance_tol = 1e-8);

Matrix end_matrix_flow_rate(const MatrixFactorization& f, const Loss& loss);
Matrix psd_power(const Matrix& S, double p);

struct NormDivergenceReport {
  bool valid = false;
  bool holds = true;
  double min_slack = 0;
  std::size_t checked = 0;
  std::string reason;
};

double w11_lower_bound(double loss);
NormDivergenceReport norm_divergence_check(const Trajectory& t);

}  // namespace irlab
