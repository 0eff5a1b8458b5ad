#include <cmath>

#include "irlab/dynamics.hpp"
#include "irlab/rank.hpp"

namespace irlab {

double TrajectoryRecord::find(const std::string& name, Index index) const {
  for (const auto& d : diagnostics)
    if (d.name == name && d.index == index) return d.value;
  throw std::out_of_range("no diagnostic '" + name + "' at index " + std::to_string(index));
}

void TrainConfig::validate() const {
  if (!(eta > 0)) throw std::domain_error("learning rate must be positive");
  if (step == Step::Adaptive && !(beta > 0 && beta < 1)) throw std::domain_error("beta must lie in (0, 1)");
  if (record_stride == 0) throw std::domain_error("record stride must be positive");
}

std::vector<Diagnostic> diagnostics(const Factorization& f, const std::optional<DenseTensor>& gt) {
  std::vector<Diagnostic> out;
  DenseTensor end = end_tensor(f);
  if (auto* m = std::get_if<MatrixFactorization>(&f)) {
    Matrix W = end.as_matrix();
    Vector sv = spectral(W).singular_values;
    for (Index r = 0; r < static_cast<Index>(sv.size()); ++r) out.push_back({"sv", r, sv(r)});
    if (sv.sum() > 0) out.push_back({"erank", 0, effective_rank(sv)});
    out.push_back({"w11", 0, W(0, 0)});
    if (W.rows() == W.cols()) out.push_back({"det", 0, W.determinant()});
    (void)m;
  } else if (auto* c = std::get_if<CPFactorization>(&f)) {
    for (Index r = 0; r < c->components(); ++r) {
      double n = 1;
      for (const auto& A : c->factors) n *= A.col(r).norm();
      out.push_back({"comp_norm", r, n});
    }
    if (end.norm() > 0) out.push_back({"erank", 0, tensor_effective_rank(end)});
  } else {
    const auto& h = std::get<HierarchicalFactorization>(f);
    for (auto [key, n] : local_component_norms(h))
      out.push_back({"lc_norm:" + std::to_string(key.node), key.r, n});
    if (end.norm() > 0) out.push_back({"erank", 0, tensor_effective_rank(end)});
  }
  out.push_back({"unbalancedness", 0, unbalancedness(f)});
  out.push_back({"end_norm", 0, end.norm()});
  if (gt) {
    if (gt->dims() != end.dims()) throw std::domain_error("ground truth shape mismatch");
    double g = gt->norm();
    double e = (end - *gt).norm();
    out.push_back({"recon_error", 0, g > 0 ? e / g : e});
  }
  return out;
}

std::pair<Factorization, Trajectory> train(const Factorization& f0, const Loss& loss,
                                           const TrainConfig& cfg) {
  cfg.validate();
  Factorization f = f0;
  Trajectory tr;
  double gamma = 0, beta_pow = 1, lr = cfg.eta;
  std::size_t below = 0;
  for (std::size_t t = 0;; ++t) {
    auto [value, G] = loss_value_and_grad(loss, end_tensor(f));
    bool diverged = !std::isfinite(value) || value > 1e12;
    if (diverged) {
      tr.diverged = true;
      tr.stop_reason = "diverged";
    } else if (value < cfg.loss_threshold) {
      tr.stop_reason = "loss_threshold";
    } else if (cfg.patience > 0 && (below = value < cfg.plateau_threshold ? below + 1 : 0) >= cfg.patience) {
      tr.stop_reason = "plateau";
    } else if (t >= cfg.max_iters) {
      tr.stop_reason = "max_iters";
    }
    bool stop = !tr.stop_reason.empty();
    if (t % cfg.record_stride == 0 || stop) {
      TrajectoryRecord rec{t, value, lr, {}};
      if (!diverged) rec.diagnostics = diagnostics(f, cfg.ground_truth);
      tr.records.push_back(std::move(rec));
    }
    if (stop) {
      tr.iterations = t;
      break;
    }
    Factorization g = param_grad_from_end(f, G);
    if (cfg.step == TrainConfig::Step::Adaptive) {
      double gn = param_norm(g);
      gamma = cfg.beta * gamma + (1 - cfg.beta) * gn * gn;
      beta_pow *= cfg.beta;
      lr = cfg.eta / (std::sqrt(gamma / (1 - beta_pow)) + cfg.epsilon);
    }
    f = axpy(f, -lr, g);
  }
  return {std::move(f), std::move(tr)};
}

double w11_lower_bound(double loss) {
  if (!(loss > 0) || loss >= 0.5) return 0;
  double s = std::sqrt(2 * loss);
  return 1 / s - 2 + s;
}

NormDivergenceReport norm_divergence_check(const Trajectory& t) {
  NormDivergenceReport rep;
  if (t.records.empty()) {
    rep.reason = "empty trajectory";
    return rep;
  }
  double det0;
  try {
    det0 = t.records.front().find("det");
  } catch (const std::out_of_range&) {
    rep.reason = "trajectory has no determinant diagnostic";
    return rep;
  }
  if (!(det0 > 0)) {
    rep.reason = "initial determinant is not positive";
    return rep;
  }
  rep.valid = true;
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : t.records) {
    if (r.diagnostics.empty() || !(r.loss < 0.5)) continue;
    double slack = std::abs(r.find("w11")) - w11_lower_bound(r.loss);
    rep.min_slack = std::min(rep.min_slack, slack);
    ++rep.checked;
    if (!(slack > 0)) rep.holds = false;
  }
  if (rep.checked == 0) rep.min_slack = 0;
  return rep;
}

}  // namespace irlab
