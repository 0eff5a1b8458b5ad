#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "irlab/cli.hpp"
#include "irlab/rank.hpp"

namespace irlab::cli {

using nlohmann::json;

std::vector<std::string> preset_names() {
  return {"mf-2x2-divergence", "mf-rank3", "cp-order3-rank2", "ht-order4"};
}

json preset(const std::string& name) {
  if (name == "mf-2x2-divergence")
    return {{"model", {{"kind", "mf"}, {"dims", {2, 2}}, {"depth", 3}, {"init", "balanced"},
                       {"init_scale", 1e-3}, {"det_sign", 1}}},
            {"ground_truth", {{"kind", "fixture-2x2"}}},
            {"loss", {{"normalization", "sum"}}},
            {"train", {{"step", "adaptive"}, {"eta", 1e-3}, {"loss_threshold", 1e-4}, {"patience", 0},
                       {"max_iters", 4000000}, {"record_stride", 100}}}};
  if (name == "mf-rank3")
    return {{"model", {{"kind", "mf"}, {"dims", {32, 32}}, {"depth", 3}, {"init", "gaussian"},
                       {"init_scale", 1e-3}}},
            {"ground_truth", {{"kind", "low-rank"}, {"rank", 3}}},
            {"observations", 512},
            {"train", {{"step", "adaptive"}, {"eta", 1e-3}, {"loss_threshold", 1e-7}, {"patience", 0},
                       {"max_iters", 200000}, {"record_stride", 100}}}};
  if (name == "cp-order3-rank2")
    return {{"model", {{"kind", "cp"}, {"dims", {10, 10, 10}}, {"components", 10}, {"init", "gaussian"},
                       {"init_scale", 1e-3}}},
            {"ground_truth", {{"kind", "low-rank"}, {"rank", 2}}},
            {"observations", 300},
            {"train", {{"step", "adaptive"}, {"eta", 1e-3}, {"loss_threshold", 1e-7}, {"patience", 0},
                       {"max_iters", 300000}, {"record_stride", 100}}}};
  if (name == "ht-order4")
    return {{"model", {{"kind", "ht"}, {"dims", {6, 6, 6, 6}}, {"components", 6}, {"init", "gaussian"},
                       {"init_scale", 0.1}}},
            {"ground_truth", {{"kind", "low-rank"}, {"rank", 2}}},
            {"observations", 500},
            {"train", {{"step", "adaptive"}, {"eta", 1e-3}, {"loss_threshold", 1e-7}, {"patience", 0},
                       {"max_iters", 100000}, {"record_stride", 100}}}};
  throw ConfigError("unknown preset '" + name + "'");
}

namespace {

// Line of the first `"key":` in the text, or 0 if absent.
int line_of_key(const std::string& text, const std::string& key) {
  std::string pat = "\"" + key + "\"";
  for (std::size_t pos = text.find(pat); pos != std::string::npos; pos = text.find(pat, pos + 1)) {
    std::size_t k = pos + pat.size();
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    if (k < text.size() && text[k] == ':') return 1 + std::count(text.begin(), text.begin() + pos, '\n');
  }
  return 0;
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    int line = line_of_key(text_, key);
    throw ConfigError("config:" + (line > 0 ? std::to_string(line) : std::string("preset")) + ": " + msg);
  }

  void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(where, "'" + where + "' must be an object");
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) fail(k, "unknown key '" + k + "' in '" + where + "'");
  }

  template <class T>
  T get(const json& obj, const std::string& key, T fallback) const {
    if (!obj.contains(key)) return fallback;
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, "bad value for '" + key + "'");
    }
  }

  Index positive(const json& obj, const std::string& key, Index fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) fail(key, "'" + key + "' must be a positive integer");
    return v.get<Index>();
  }

  std::string choice(const json& obj, const std::string& key, const std::string& fallback,
                     const std::set<std::string>& options) const {
    auto s = get<std::string>(obj, key, fallback);
    if (!options.count(s)) fail(key, "invalid value '" + s + "' for '" + key + "'");
    return s;
  }

 private:
  const std::string& text_;
};

}  // namespace

SimulateConfig parse_simulate_config(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1 + std::count(text.begin(), text.begin() + byte - (byte > 0 ? 1 : 0), '\n');
    throw ConfigError("config:" + std::to_string(line) + ": invalid JSON");
  }
  Reader rd(text);
  rd.check_keys(user, "config",
                {"preset", "seed", "model", "ground_truth", "observations", "loss", "train", "output"});

  json cfg = json::object();
  if (user.contains("preset")) {
    if (!user["preset"].is_string()) rd.fail("preset", "'preset' must be a string");
    try {
      cfg = preset(user["preset"].get<std::string>());
    } catch (const ConfigError& e) {
      rd.fail("preset", e.what());
    }
  }
  cfg.merge_patch(user);

  SimulateConfig c;
  c.expanded = cfg;
  c.seed = rd.get<std::uint64_t>(cfg, "seed", 0);

  json model = cfg.value("model", json::object());
  rd.check_keys(model, "model",
                {"kind", "dims", "depth", "hidden", "components", "tree", "init", "init_scale", "det_sign"});
  auto kind = rd.choice(model, "kind", "mf", {"mf", "cp", "ht"});
  c.kind = kind == "mf" ? FactorizationKind::Matrix
           : kind == "cp" ? FactorizationKind::CP
                          : FactorizationKind::Hierarchical;
  c.dims = rd.get<std::vector<Index>>(model, "dims", {});
  if (c.dims.empty()) rd.fail("model", "'model.dims' is required");
  for (Index d : c.dims)
    if (d == 0) rd.fail("dims", "dimensions must be positive");
  if (c.kind == FactorizationKind::Matrix && c.dims.size() != 2) rd.fail("dims", "matrix model needs two dims");
  if (c.kind != FactorizationKind::Matrix && c.dims.size() < 2) rd.fail("dims", "tensor model needs order >= 2");
  c.depth = rd.positive(model, "depth", 2);
  c.hidden = rd.get<std::vector<Index>>(model, "hidden", {});
  if (!c.hidden.empty() && c.hidden.size() + 1 != c.depth) rd.fail("hidden", "'hidden' needs depth-1 widths");
  c.components = rd.positive(model, "components", 1);
  if (model.contains("tree")) c.tree = model["tree"];
  c.balanced_init = rd.choice(model, "init", "gaussian", {"gaussian", "balanced"}) == "balanced";
  c.init_scale = rd.get<double>(model, "init_scale", 1e-3);
  if (!(c.init_scale > 0)) rd.fail("init_scale", "'init_scale' must be positive");
  if (model.contains("det_sign")) {
    int s = rd.get<int>(model, "det_sign", 1);
    if (s != 1 && s != -1) rd.fail("det_sign", "'det_sign' must be 1 or -1");
    c.det_sign = s;
  }

  json gt = cfg.value("ground_truth", json::object());
  rd.check_keys(gt, "ground_truth", {"kind", "rank", "path"});
  auto truth = rd.choice(gt, "kind", "low-rank", {"low-rank", "fixture-2x2", "file"});
  c.truth = truth == "low-rank" ? SimulateConfig::Truth::LowRank
            : truth == "file"   ? SimulateConfig::Truth::File
                                : SimulateConfig::Truth::Fixture2x2;
  c.truth_rank = rd.positive(gt, "rank", 1);
  c.truth_path = rd.get<std::string>(gt, "path", "");
  if (c.truth == SimulateConfig::Truth::File && c.truth_path.empty()) rd.fail("ground_truth", "'path' is required");
  if (c.truth == SimulateConfig::Truth::Fixture2x2 &&
      (c.kind != FactorizationKind::Matrix || c.dims != std::vector<Index>{2, 2}))
    rd.fail("ground_truth", "the 2x2 fixture needs a 2x2 matrix model");

  if (cfg.contains("observations")) {
    const json& o = cfg["observations"];
    if (o.is_string() && o.get<std::string>() == "all") {
    } else if (o.is_number_integer() && o.get<long long>() >= 0) {
      c.observations = o.get<Index>();
      if (*c.observations == 0) rd.fail("observations", "observation set is empty");
      if (*c.observations > product(c.dims)) rd.fail("observations", "more observations than entries");
    } else {
      rd.fail("observations", "'observations' must be a count or \"all\"");
    }
  }

  json loss = cfg.value("loss", json::object());
  rd.check_keys(loss, "loss", {"entry", "huber_delta", "normalization"});
  c.entry = rd.choice(loss, "entry", "squared", {"squared", "huber"}) == "huber" ? EntryLoss::Huber
                                                                               : EntryLoss::Squared;
  c.huber_delta = rd.get<double>(loss, "huber_delta", 0);
  if (c.entry == EntryLoss::Huber && !(c.huber_delta > 0)) rd.fail("huber_delta", "'huber_delta' must be positive");
  c.normalization =
      rd.choice(loss, "normalization", "mean", {"mean", "sum"}) == "sum" ? Normalization::Sum : Normalization::Mean;

  json tr = cfg.value("train", json::object());
  rd.check_keys(tr, "train",
                {"step", "eta", "beta", "epsilon", "loss_threshold", "plateau_threshold", "patience", "max_iters",
                 "record_stride"});
  TrainConfig& t = c.train;
  t.step = rd.choice(tr, "step", "adaptive", {"adaptive", "fixed"}) == "fixed" ? TrainConfig::Step::Fixed
                                                                             : TrainConfig::Step::Adaptive;
  t.eta = rd.get<double>(tr, "eta", t.eta);
  t.beta = rd.get<double>(tr, "beta", t.beta);
  t.epsilon = rd.get<double>(tr, "epsilon", t.epsilon);
  t.loss_threshold = rd.get<double>(tr, "loss_threshold", t.loss_threshold);
  t.plateau_threshold = rd.get<double>(tr, "plateau_threshold", t.plateau_threshold);
  t.patience = rd.get<std::size_t>(tr, "patience", t.patience);
  t.max_iters = rd.get<std::size_t>(tr, "max_iters", t.max_iters);
  t.record_stride = rd.get<std::size_t>(tr, "record_stride", t.record_stride);
  t.seed = c.seed;
  try {
    t.validate();
  } catch (const std::exception& e) {
    rd.fail("train", e.what());
  }

  json out = cfg.value("output", json::object());
  rd.check_keys(out, "output", {"dir", "prefix"});
  c.out_dir = rd.get<std::string>(out, "dir", c.out_dir);
  c.prefix = rd.get<std::string>(out, "prefix", c.prefix);
  return c;
}

DenseTensor normalize_truth(DenseTensor t) {
  double nrm = t.norm();
  if (!(nrm > 0)) throw std::domain_error("ground truth is zero");
  t *= std::sqrt(static_cast<double>(t.size())) / nrm;
  return t;
}

std::vector<Observed> sample_observations(const DenseTensor& t, Index count, Rng& rng) {
  if (count > t.size()) throw std::domain_error("more observations than entries");
  std::vector<Index> idx(t.size());
  for (Index k = 0; k < idx.size(); ++k) idx[k] = k;
  // Partial Fisher-Yates with a rejection-sampled uniform draw.
  for (Index k = 0; k < count; ++k) {
    std::uint64_t n = idx.size() - k;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    std::swap(idx[k], idx[k + x % n]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<Observed> obs;
  for (Index k : idx) obs.push_back({t.multi_index(k), t[k]});
  return obs;
}

namespace {

ModeTree model_tree(const SimulateConfig& c, Index rank) {
  if (c.tree) return ModeTree::from_nested(*c.tree, c.dims, rank);
  return ModeTree::perfect_binary(c.dims, rank);
}

DenseTensor low_rank_truth(const SimulateConfig& c, Rng& rng) {
  switch (c.kind) {
    case FactorizationKind::Matrix:
      return DenseTensor::from_matrix(gaussian_matrix(c.dims[0], c.truth_rank, 1, rng) *
                                      gaussian_matrix(c.truth_rank, c.dims[1], 1, rng));
    case FactorizationKind::CP: {
      CPFactorization f;
      for (Index d : c.dims) f.factors.push_back(gaussian_matrix(d, c.truth_rank, 1, rng));
      return cp_end_tensor(f);
    }
    case FactorizationKind::Hierarchical: {
      HierarchicalFactorization f;
      f.tree = model_tree(c, c.truth_rank);
      for (Index id = 0; id < f.tree.nodes().size(); ++id) {
        int v = static_cast<int>(id);
        f.weights.push_back(gaussian_matrix(f.tree.node(v).rank, f.tree.parent_rank(v), 1, rng));
      }
      return ht_end_tensor(f);
    }
  }
  throw std::domain_error("unknown factorization kind");
}

}  // namespace

Experiment build_experiment(const SimulateConfig& c) {
  Rng rng(c.seed);
  Experiment ex;
  std::vector<Observed> obs;
  if (c.truth == SimulateConfig::Truth::Fixture2x2) {
    obs = fixture_2x2({}).observations;
  } else {
    DenseTensor gt;
    if (c.truth == SimulateConfig::Truth::File) {
      gt = tensor_from_json(read_json_file(c.truth_path));
      if (gt.dims() != c.dims) throw ConfigError("ground truth dims " + dims_string(gt.dims()) +
                                                 " differ from model dims " + dims_string(c.dims));
    } else {
      gt = normalize_truth(low_rank_truth(c, rng));
    }
    obs = sample_observations(gt, c.observations.value_or(gt.size()), rng);
    ex.ground_truth = std::move(gt);
  }
  ex.loss = Loss::completion(c.dims, std::move(obs), c.entry, c.huber_delta, c.normalization);

  InitSpec spec;
  spec.kind = c.kind;
  spec.dims = c.dims;
  spec.depth = c.depth;
  spec.hidden = c.hidden;
  spec.components = c.components;
  if (c.kind == FactorizationKind::Hierarchical) spec.tree = model_tree(c, c.components);
  spec.scale = c.init_scale;
  spec.det_sign = c.det_sign;
  ex.init = c.balanced_init ? init_balanced(spec, rng) : init_gaussian(spec, rng);

  ex.fixture_2x2 = c.truth == SimulateConfig::Truth::Fixture2x2;
  ex.train = c.train;
  ex.train.ground_truth = ex.ground_truth;
  return ex;
}

namespace {

// Number of values above 0.1 of the largest.
Index significant(const std::vector<double>& v) {
  double mx = v.empty() ? 0 : *std::max_element(v.begin(), v.end());
  return std::count_if(v.begin(), v.end(), [&](double x) { return mx > 0 && x > 0.1 * mx; });
}

}  // namespace

json summarize(const Factorization& f, const Trajectory& t, const Experiment& ex) {
  json s;
  s["iterations"] = t.iterations;
  s["stop_reason"] = t.stop_reason;
  s["diverged"] = t.diverged;
  if (!t.records.empty()) s["final_loss"] = t.records.back().loss;
  if (t.diverged) return s;
  DenseTensor W = end_tensor(f);
  if (ex.ground_truth) s["reconstruction_error"] = (W - *ex.ground_truth).norm() / ex.ground_truth->norm();

  std::map<std::string, std::vector<double>> groups;
  for (const auto& d : diagnostics(f, std::nullopt))
    if (d.name == "sv" || d.name == "comp_norm" || d.name.rfind("lc_norm:", 0) == 0) groups[d.name].push_back(d.value);
  json ranks = json::object();
  for (const auto& [name, v] : groups) ranks[name] = significant(v);
  s["significant_components"] = ranks;
  if (W.norm() > 0) s["effective_rank"] = W.order() == 2 ? effective_rank(W.as_matrix()) : tensor_effective_rank(W);

  if (const auto* mf = std::get_if<MatrixFactorization>(&f)) {
    if (ex.fixture_2x2) {
      Matrix E = mf_end_matrix(*mf);
      auto r = norm_divergence_check(t);
      s["norm_divergence"] = {{"valid", r.valid}, {"holds", r.holds}, {"min_slack", r.min_slack},
                              {"checked", r.checked}, {"reason", r.reason}, {"final_w11", E(0, 0)}};
    }
  }
  return s;
}

}  // namespace irlab::cli
