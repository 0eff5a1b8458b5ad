#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "irlab/cli.hpp"
#include "irlab/gnn.hpp"
#include "irlab/rank.hpp"
#include "irlab/wis.hpp"

namespace irlab::cli {

using nlohmann::json;

namespace {

// Thrown for failures that map to exit code 2.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string with_header(std::uint64_t hash, const std::string& body) {
  return provenance_header(hash) + "\n" + body;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

void emit(const std::string& out_path, std::uint64_t hash, const json& report) {
  if (out_path.empty())
    std::cout << report.dump(2) << "\n";
  else
    write_atomic(out_path, with_header(hash, report.dump(2) + "\n"));
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read graph '" + path + "'");
  try {
    return read_edge_list(in);
  } catch (const std::exception& e) {
    throw ConfigError("bad edge list '" + path + "': " + e.what());
  }
}

std::string canonical_edges(const Graph& g) {
  std::ostringstream ss;
  write_edge_list(ss, g);
  return ss.str();
}

// ---- simulate ----

int cmd_simulate(const std::string& config_path) {
  SimulateConfig cfg = parse_simulate_config(read_file(config_path));
  std::uint64_t hash = fnv1a(cfg.expanded.dump());
  Experiment ex = build_experiment(cfg);
  for (const auto& w : ex.loss.warnings()) std::cerr << "warning: " << w << "\n";

  auto [f, traj] = train(ex.init, ex.loss, ex.train);

  std::ostringstream csv, jsonl;
  csv << "iter,loss,lr,diag_name,diag_index,value\n";
  for (const auto& r : traj.records) {
    json row = {{"iter", r.iter}, {"loss", r.loss}, {"lr", r.lr}};
    json diags = json::array();
    for (const auto& d : r.diagnostics) {
      csv << r.iter << ',' << fmt(r.loss) << ',' << fmt(r.lr) << ',' << d.name << ',' << d.index << ','
          << fmt(d.value) << '\n';
      diags.push_back({{"name", d.name}, {"index", d.index}, {"value", d.value}});
    }
    if (r.diagnostics.empty()) csv << r.iter << ',' << fmt(r.loss) << ',' << fmt(r.lr) << ",,,\n";
    row["diagnostics"] = diags;
    jsonl << row.dump() << '\n';
  }

  json summary = summarize(f, traj, ex);
  summary["config_hash"] = hash_hex(hash);
  json final_state = {{"factorization", to_json(f)}};
  if (!traj.diverged) final_state["end_tensor"] = tensor_to_json(end_tensor(f));

  std::string base = cfg.out_dir + "/" + cfg.prefix;
  write_atomic(base + ".csv", with_header(hash, csv.str()));
  write_atomic(base + ".jsonl", with_header(hash, jsonl.str()));
  write_atomic(base + "_final.json", with_header(hash, final_state.dump(2) + "\n"));
  write_atomic(base + "_summary.json", with_header(hash, summary.dump(2) + "\n"));
  std::cout << summary.dump(2) << "\n";
  return traj.diverged ? 2 : 0;
}

// ---- sparsify ----

struct SparsifyArgs {
  std::string graph, algo, out;
  Index L = 2, N = 0, batch = 1;
  std::uint64_t seed = 0;
  std::string policy = "sorted-lex";
  std::vector<std::string> partitions, targets;
};

int cmd_sparsify(const SparsifyArgs& a) {
  Graph g = load_graph(a.graph);
  if (a.N > g.num_edges())
    throw ConfigError("cannot remove " + std::to_string(a.N) + " edges from a graph with " +
                      std::to_string(g.num_edges()));
  if (a.L == 0) throw ConfigError("--L must be at least 1");
  if (a.batch == 0) throw ConfigError("--batch must be positive");

  // Settings that determine the output. wis at L = 2 with unit batches is
  // the same algorithm as one-wis and shares its descriptor.
  json desc = {{"graph", canonical_edges(g)}, {"N", a.N}};
  SparsifyResult res;
  if (a.algo == "one-wis" || (a.algo == "wis" && a.L == 2 && a.batch == 1)) {
    desc["algo"] = "one-wis";
    res = a.algo == "one-wis" ? one_wis(g, a.N) : wis(g, a.L, a.N, a.batch);
  } else if (a.algo == "wis") {
    desc.update({{"algo", "wis"}, {"L", a.L}, {"batch", a.batch}});
    res = wis(g, a.L, a.N, a.batch);
  } else if (a.algo == "gwis") {
    TuplePolicy policy;
    try {
      policy = parse_policy(a.policy);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
    std::vector<VertexSet> parts;
    std::vector<VertexTarget> targets;
    for (const auto& p : a.partitions) parts.push_back(parse_vertex_set(p, g.num_vertices()));
    for (const auto& t : a.targets) {
      auto colon = t.find(':');
      if (colon == std::string::npos) throw ConfigError("target must be '<t>:<vertex set>', got '" + t + "'");
      auto tv = parse_vertex_set(t.substr(0, colon), g.num_vertices());
      if (tv.size() != 1) throw ConfigError("target must name one vertex");
      targets.push_back({parse_vertex_set(t.substr(colon + 1), g.num_vertices()), tv[0]});
    }
    if (parts.empty() && targets.empty()) throw ConfigError("gwis needs --partition or --target");
    desc.update({{"algo", "gwis"}, {"L", a.L}, {"batch", a.batch}, {"policy", a.policy},
                 {"partitions", a.partitions}, {"targets", a.targets}});
    res = gwis(g, a.L, a.N, parts, targets, policy, a.batch);
  } else if (a.algo == "random") {
    desc.update({{"algo", "random"}, {"seed", a.seed}});
    res = random_prune(g, a.N, a.seed);
  } else {
    throw ConfigError("unknown algorithm '" + a.algo + "'");
  }

  std::uint64_t hash = fnv1a(desc.dump());
  std::ostringstream csv;
  csv << "step,u,v,score\n";
  for (Index k = 0; k < res.removals.size(); ++k) {
    const auto& r = res.removals[k];
    csv << k + 1 << ',' << r.edge.first << ',' << r.edge.second << ',';
    for (Index i = 0; i < r.scores.size(); ++i) csv << (i ? ";" : "") << count_to_string(r.scores[i]);
    csv << '\n';
  }
  write_atomic(a.out + ".edges", with_header(hash, canonical_edges(res.graph)));
  write_atomic(a.out + "_removals.csv", with_header(hash, csv.str()));
  return 0;
}

// ---- bounds ----

struct BoundsArgs {
  std::string graph, typed_graph, I, mode = "graph", out;
  Index L = 2, Dx = 2, Dh = 2;
  std::uint64_t budget = kDefaultSubsetBudget;
};

int cmd_bounds(const BoundsArgs& a) {
  if (a.graph.empty() == a.typed_graph.empty()) throw ConfigError("give exactly one of --graph, --typed-graph");
  if (a.L == 0 || a.Dx == 0 || a.Dh == 0) throw ConfigError("L, D_x and D_h must be positive");
  json report;
  json desc = {{"L", a.L}, {"D_x", a.Dx}, {"D_h", a.Dh}, {"I", a.I}, {"mode", a.mode}};
  if (!a.graph.empty()) {
    Graph g = load_graph(a.graph);
    Index n = g.num_vertices();
    VertexSet I = parse_vertex_set(a.I, n);
    Prediction mode = parse_mode(a.mode, n);
    desc["graph"] = canonical_edges(g);
    VertexSet C = boundary(g, I);
    VertexSet T;
    if (mode.mode == Prediction::Mode::Graph)
      T = parse_vertex_set("all", n);
    else
      T = {mode.target};
    json wi = json::array();
    for (Index l = 0; l < a.L; ++l) wi.push_back(count_json(walk_count(g, l, C, T)));
    auto b = sep_rank_bounds(g, a.L, a.Dx, a.Dh, I, mode, a.budget);
    report = {{"vertices", n}, {"edges", g.num_edges()}, {"directed", false}, {"I", I}, {"boundary", C},
              {"walk_index_by_length", wi}, {"walk_index", count_json(b.walks)}};
    report.update({{"best_subset", b.best_subset},
                   {"best_subset_walks", count_json(walk_count(g, a.L - 1, b.best_subset, T))},
                   {"log_lower", b.log_lower}, {"log_upper", b.log_upper}, {"exhaustive", b.exhaustive}});
  } else {
    std::ifstream in(a.typed_graph);
    if (!in) throw ConfigError("cannot read graph '" + a.typed_graph + "'");
    DirectedTypedGraph g;
    try {
      g = read_typed_edge_list(in);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad typed edge list: ") + e.what());
    }
    Index n = g.num_vertices();
    VertexSet I = parse_vertex_set(a.I, n);
    Prediction mode = parse_mode(a.mode, n);
    std::ostringstream te;
    for (const auto& [e, q] : g.typed_edges()) te << e.first << ' ' << e.second << ' ' << q << '\n';
    desc["typed_graph"] = te.str();
    auto b = directed_bounds(g, a.L, a.Dx, a.Dh, I, mode, a.budget);
    report = {{"vertices", n}, {"directed", true}, {"I", I}, {"boundary", directed_boundary(g, I)},
              {"walk_index", count_json(b.walks)}, {"best_subset", b.best_subset}, {"log_lower", b.log_lower},
              {"log_upper", b.log_upper}, {"exhaustive", b.exhaustive}};
  }
  report.update({{"L", a.L}, {"D_x", a.Dx}, {"D_h", a.Dh}, {"mode", a.mode}});
  emit(a.out, fnv1a(desc.dump()), report);
  return 0;
}

// ---- gridrank ----

struct GridArgs {
  std::string graph, I, mode = "graph", out;
  Index L = 2, Dx = 2, Dh = 2, M = 3, seeds = 3;
  std::uint64_t seed = 0;
  bool construction = false;
};

int cmd_gridrank(const GridArgs& a) {
  Graph g = load_graph(a.graph);
  Index n = g.num_vertices();
  VertexSet I = parse_vertex_set(a.I, n);
  Prediction mode = parse_mode(a.mode, n);
  if (a.L == 0 || a.Dx == 0 || a.Dh == 0 || a.M == 0) throw ConfigError("L, D_x, D_h and M must be positive");
  auto b = sep_rank_bounds(g, a.L, a.Dx, a.Dh, I, mode);
  json runs = json::array();
  int max_rank = 0;
  for (Index s = 0; s < a.seeds; ++s) {
    Rng rng(a.seed + s);
    GNNWeights w = GNNWeights::random(a.L, a.Dx, a.Dh, rng);
    std::vector<Vector> templates;
    for (Index m = 0; m < a.M; ++m) templates.push_back(gaussian_vector(a.Dx, 1, rng));
    int r = grid_seprank_lower(grid_tensor(g, w, mode, templates), I);
    max_rank = std::max(max_rank, r);
    runs.push_back({{"seed", a.seed + s}, {"rank", r}});
  }
  json report = {{"I", I}, {"mode", a.mode}, {"L", a.L}, {"D_x", a.Dx}, {"D_h", a.Dh}, {"templates", a.M},
                 {"runs", runs}, {"max_rank", max_rank}, {"log_upper", b.log_upper},
                 {"within_upper", std::log(static_cast<double>(max_rank)) <= b.log_upper + 1e-9}};
  if (a.construction) {
    try {
      auto c = lower_bound_construction(g, a.L, a.Dx, a.Dh, I, b.best_subset, mode);
      report["construction"] = {{"subset", b.best_subset}, {"rho", c.rho}, {"gamma", c.gamma},
                                {"target_rank", c.target_rank}, {"achieved_rank", c.achieved_rank},
                                {"weights", to_json(c.weights)}, {"templates", templates_json(c.templates)}};
    } catch (const ConstructionError& e) {
      report["construction"] = {{"subset", b.best_subset}, {"error", e.what()}};
    }
  }
  json desc = {{"graph", canonical_edges(g)}, {"args", report["I"]}, {"mode", a.mode}, {"L", a.L},
               {"D_x", a.Dx}, {"D_h", a.Dh}, {"M", a.M}, {"seeds", a.seeds}, {"seed", a.seed},
               {"construction", a.construction}};
  emit(a.out, fnv1a(desc.dump()), report);
  return 0;
}

// ---- rank ----

struct RankArgs {
  std::string tensor, tree, out;
  double threshold = 1e-6;
  Index cp_max = 0;
  bool cp = false;
};

int cmd_rank(const RankArgs& a) {
  DenseTensor t = tensor_from_json(read_json_file(a.tensor));
  json report = {{"dims", t.dims()}, {"norm", t.norm()}};
  for (double v : t.values())
    if (!std::isfinite(v)) throw NumericalFailure("tensor has non-finite entries");
  json modes = json::array();
  for (Index n = 0; n < t.order(); ++n) {
    Matrix m = matricize(t, {n});
    json e = {{"mode", n}, {"rank", numerical_rank(m)}};
    if (t.norm() > 0) e["effective_rank"] = effective_rank(m);
    modes.push_back(e);
  }
  report["modes"] = modes;
  if (t.norm() > 0) report["effective_rank"] = tensor_effective_rank(t);
  if (t.order() >= 2) {
    ModeTree tree;
    try {
      tree = a.tree.empty() ? ModeTree::perfect_binary(t.dims(), 1)
                            : ModeTree::from_nested(json::parse(a.tree), t.dims(), 1);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad tree: ") + e.what());
    }
    json ht = json::array();
    for (const auto& [node, r] : hierarchical_tensor_rank(t, tree))
      ht.push_back({{"modes", tree.node(node).label}, {"rank", r}});
    report["tree"] = tree.nested();
    report["hierarchical_rank"] = ht;
  }
  if (a.cp) {
    AlsOptions opt;
    opt.max_rank = a.cp_max;
    report["cp_rank_estimate"] = tensor_rank_estimate(t, a.threshold, opt);
    report["cp_threshold"] = a.threshold;
  }
  json desc = {{"tensor", tensor_to_json(t)}, {"tree", a.tree}, {"cp", a.cp}, {"threshold", a.threshold},
               {"cp_max", a.cp_max}};
  emit(a.out, fnv1a(desc.dump()), report);
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Implicit-regularization lab: factorization dynamics, walk-index bounds and sparsification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(IRLAB_VERSION));

  std::string config;
  auto* sim = app.add_subcommand("simulate", "Train a factorization from a JSON config and log its trajectory");
  sim->add_option("config", config, "Config file")->required();

  SparsifyArgs sp;
  auto* spc = app.add_subcommand("sparsify", "Remove edges with wis, one-wis, gwis or random pruning");
  spc->add_option("--graph", sp.graph, "Edge-list file")->required();
  spc->add_option("--algo", sp.algo, "wis | one-wis | gwis | random")->required();
  spc->add_option("--L", sp.L, "GNN depth");
  spc->add_option("--N", sp.N, "Edges to remove")->required();
  spc->add_option("--batch", sp.batch, "Edges removed per scoring round");
  spc->add_option("--seed", sp.seed, "Seed for random pruning");
  spc->add_option("--policy", sp.policy, "gwis tuple policy: sorted-lex | sum | min | max");
  spc->add_option("--partition", sp.partitions, "gwis vertex set I (repeatable)");
  spc->add_option("--target", sp.targets, "gwis vertex target t:J (repeatable)");
  spc->add_option("--out", sp.out, "Output prefix")->required();

  BoundsArgs bd;
  auto* bdc = app.add_subcommand("bounds", "Separation-rank bounds for a vertex partition");
  bdc->add_option("--graph", bd.graph, "Edge-list file");
  bdc->add_option("--typed-graph", bd.typed_graph, "Directed typed edge-list file");
  bdc->add_option("--L", bd.L, "GNN depth");
  bdc->add_option("--Dx", bd.Dx, "Input width");
  bdc->add_option("--Dh", bd.Dh, "Hidden width");
  bdc->add_option("--I", bd.I, "Vertex set: ids, all, or @file")->required();
  bdc->add_option("--mode", bd.mode, "graph | vertex:<t>");
  bdc->add_option("--budget", bd.budget, "Exhaustive admissible-subset search budget");
  bdc->add_option("--out", bd.out, "Write the report here instead of stdout");

  GridArgs gr;
  auto* grc = app.add_subcommand("gridrank", "Grid-tensor separation-rank estimates for random GNN weights");
  grc->add_option("--graph", gr.graph, "Edge-list file")->required();
  grc->add_option("--L", gr.L, "GNN depth");
  grc->add_option("--Dx", gr.Dx, "Input width");
  grc->add_option("--Dh", gr.Dh, "Hidden width");
  grc->add_option("--I", gr.I, "Vertex set: ids, all, or @file")->required();
  grc->add_option("--mode", gr.mode, "graph | vertex:<t>");
  grc->add_option("--templates", gr.M, "Number of random templates");
  grc->add_option("--seeds", gr.seeds, "Number of weight seeds");
  grc->add_option("--seed", gr.seed, "First seed");
  grc->add_flag("--construction", gr.construction, "Also build the lower-bound construction");
  grc->add_option("--out", gr.out, "Write the report here instead of stdout");

  RankArgs rk;
  auto* rkc = app.add_subcommand("rank", "Rank diagnostics of a tensor file");
  rkc->add_option("tensor", rk.tensor, "Tensor JSON file {dims, values}")->required();
  rkc->add_option("--tree", rk.tree, "Mode tree as nested JSON, default perfect binary");
  rkc->add_flag("--cp", rk.cp, "Estimate the CP rank by ALS");
  rkc->add_option("--threshold", rk.threshold, "ALS mean squared error threshold");
  rkc->add_option("--cp-max", rk.cp_max, "Largest CP rank tried");
  rkc->add_option("--out", rk.out, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(config);
    if (*spc) return cmd_sparsify(sp);
    if (*bdc) return cmd_bounds(bd);
    if (*grc) return cmd_gridrank(gr);
    if (*rkc) return cmd_rank(rk);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace irlab::cli
