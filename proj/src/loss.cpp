#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "irlab/dynamics.hpp"

namespace irlab {

Loss Loss::completion(std::vector<Index> dims, std::vector<Observed> obs, EntryLoss entry,
                      double delta, Normalization norm) {
  if (obs.empty()) throw std::domain_error("completion loss needs at least one observation");
  std::set<std::vector<Index>> seen;
  for (const auto& o : obs) {
    if (o.index.size() != dims.size()) throw std::domain_error("observation order mismatch");
    for (Index n = 0; n < dims.size(); ++n)
      if (o.index[n] >= dims[n]) throw std::domain_error("observation index out of range");
    if (!seen.insert(o.index).second) throw std::domain_error("duplicate observation index");
  }
  if (entry == EntryLoss::Huber && !(delta > 0)) throw std::domain_error("huber delta must be positive");
  Loss l;
  l.kind = Kind::Completion;
  l.dims = std::move(dims);
  l.observations = std::move(obs);
  l.entry = entry;
  l.huber_delta = delta;
  l.normalization = norm;
  return l;
}

Loss Loss::sensing(std::vector<DenseTensor> A, std::vector<double> y, EntryLoss entry, double delta) {
  if (A.empty() || A.size() != y.size()) throw std::domain_error("sensing needs matching measurements and targets");
  for (const auto& a : A)
    if (a.dims() != A[0].dims()) throw std::domain_error("measurement shapes differ");
  if (entry == EntryLoss::Huber && !(delta > 0)) throw std::domain_error("huber delta must be positive");
  Loss l;
  l.kind = Kind::Sensing;
  l.dims = A[0].dims();
  l.measurements = std::move(A);
  l.targets = std::move(y);
  l.entry = entry;
  l.huber_delta = delta;
  return l;
}

std::vector<std::string> Loss::warnings() const {
  std::vector<std::string> out;
  if (entry != EntryLoss::Huber) return out;
  double m = std::numeric_limits<double>::infinity();
  if (kind == Kind::Completion)
    for (const auto& o : observations) m = std::min(m, std::abs(o.value));
  else
    for (double y : targets) m = std::min(m, std::abs(y));
  if (huber_delta >= m) {
    std::ostringstream s;
    s << "huber delta " << huber_delta << " is not below min |y| = " << m;
    out.push_back(s.str());
  }
  return out;
}

double Loss::scale() const {
  if (normalization == Normalization::Sum) return 1.0;
  Index n = kind == Kind::Completion ? observations.size() : targets.size();
  return 1.0 / static_cast<double>(n);
}

double Loss::entry_value(double z) const {
  if (entry == EntryLoss::Squared || std::abs(z) < huber_delta) return 0.5 * z * z;
  return huber_delta * (std::abs(z) - 0.5 * huber_delta);
}

double Loss::entry_derivative(double z) const {
  if (entry == EntryLoss::Squared) return z;
  return std::clamp(z, -huber_delta, huber_delta);
}

std::pair<double, DenseTensor> loss_value_and_grad(const Loss& loss, const DenseTensor& endT) {
  if (endT.dims() != loss.dims)
    throw std::domain_error("end tensor shape " + dims_string(endT.dims()) + " does not match loss " +
                            dims_string(loss.dims));
  DenseTensor g(loss.dims);
  double s = loss.scale(), value = 0;
  if (loss.kind == Loss::Kind::Completion) {
    for (const auto& o : loss.observations) {
      Index k = endT.linear_index(o.index);
      double z = endT[k] - o.value;
      value += loss.entry_value(z);
      g[k] += s * loss.entry_derivative(z);
    }
  } else {
    for (Index i = 0; i < loss.targets.size(); ++i) {
      double z = inner(loss.measurements[i], endT) - loss.targets[i];
      value += loss.entry_value(z);
      g += (s * loss.entry_derivative(z)) * loss.measurements[i];
    }
  }
  return {s * value, g};
}

}  // namespace irlab
