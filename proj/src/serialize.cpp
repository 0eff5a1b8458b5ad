#include "irlab/factorization.hpp"

namespace irlab {

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  std::vector<double> v;
  for (Index i = 0; i < static_cast<Index>(m.rows()); ++i)
    for (Index j = 0; j < static_cast<Index>(m.cols()); ++j) v.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", v}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  auto v = j.at("values").get<std::vector<double>>();
  if (v.size() != r * c) throw std::domain_error("matrix value count mismatch");
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index k = 0; k < c; ++k) m(i, k) = v[i * c + k];
  return m;
}

}  // namespace

nlohmann::json to_json(const Factorization& f) {
  nlohmann::json j;
  if (auto* m = std::get_if<MatrixFactorization>(&f)) {
    j["kind"] = "mf";
    j["weights"] = nlohmann::json::array();
    for (const auto& w : m->weights) j["weights"].push_back(matrix_json(w));
  } else if (auto* c = std::get_if<CPFactorization>(&f)) {
    j["kind"] = "cp";
    j["dims"] = c->dims();
    j["factors"] = nlohmann::json::array();
    for (const auto& w : c->factors) j["factors"].push_back(matrix_json(w));
  } else {
    const auto& h = std::get<HierarchicalFactorization>(f);
    j["kind"] = "ht";
    j["dims"] = h.tree.dims();
    j["tree"] = h.tree.nested();
    j["weights"] = nlohmann::json::array();
    for (Index id = 0; id < h.weights.size(); ++id) {
      auto w = matrix_json(h.weights[id]);
      w["label"] = h.tree.node(static_cast<int>(id)).label;
      j["weights"].push_back(w);
    }
  }
  return j;
}

Factorization factorization_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "mf") {
    MatrixFactorization f;
    for (const auto& w : j.at("weights")) f.weights.push_back(matrix_from_json(w));
    mf_end_matrix(f);
    return f;
  }
  if (kind == "cp") {
    CPFactorization f;
    for (const auto& w : j.at("factors")) f.factors.push_back(matrix_from_json(w));
    for (const auto& w : f.factors)
      if (w.cols() != f.factors[0].cols()) throw std::domain_error("CP factor column mismatch");
    return f;
  }
  if (kind == "ht") {
    HierarchicalFactorization f;
    auto dims = j.at("dims").get<std::vector<Index>>();
    f.tree = ModeTree::from_nested(j.at("tree"), dims, 1);
    f.weights.resize(f.tree.nodes().size());
    for (const auto& w : j.at("weights")) {
      int id = f.tree.find(w.at("label").get<std::vector<Index>>());
      if (id < 0) throw std::domain_error("weight label not in tree");
      f.weights[id] = matrix_from_json(w);
      if (!f.tree.is_leaf(id)) f.tree.set_rank(id, f.weights[id].rows());
    }
    HierarchicalFactorization check = f;
    ht_forward(check);
    return f;
  }
  throw std::domain_error("unknown factorization kind '" + kind + "'");
}

}  // namespace irlab
