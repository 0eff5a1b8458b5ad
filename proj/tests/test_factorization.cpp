#include <gtest/gtest.h>

#include <cmath>

#include "irlab/factorization.hpp"
#include "irlab/rank.hpp"

using namespace irlab;

namespace {

HierarchicalFactorization random_ht(const ModeTree& tree, Rng& rng, double std = 1) {
  HierarchicalFactorization f{tree, {}};
  for (Index id = 0; id < tree.nodes().size(); ++id) {
    int v = static_cast<int>(id);
    f.weights.push_back(gaussian_matrix(tree.node(v).rank, tree.parent_rank(v), std, rng));
  }
  return f;
}

CPFactorization random_cp(const std::vector<Index>& dims, Index R, Rng& rng) {
  CPFactorization f;
  for (Index d : dims) f.factors.push_back(gaussian_matrix(d, R, 1, rng));
  return f;
}

// Order-4 HT end tensor for a root with two pair children {p0, p1}, {q0, q1},
// written out as explicit sums.
DenseTensor pair_tree_oracle(const HierarchicalFactorization& f, Index p0, Index p1, Index q0, Index q1) {
  const auto& t = f.tree;
  const Matrix& Wr = f.weights[t.root()];
  const Matrix& Wp = f.weights[t.find({std::min(p0, p1), std::max(p0, p1)})];
  const Matrix& Wq = f.weights[t.find({std::min(q0, q1), std::max(q0, q1)})];
  const Matrix &A = f.weights[t.leaf(p0)], &B = f.weights[t.leaf(p1)];
  const Matrix &C = f.weights[t.leaf(q0)], &D = f.weights[t.leaf(q1)];
  DenseTensor out(t.dims());
  for (Index k = 0; k < out.size(); ++k) {
    auto i = out.multi_index(k);
    double s = 0;
    for (Index a = 0; a < static_cast<Index>(Wr.rows()); ++a) {
      double left = 0, right = 0;
      for (Index b = 0; b < static_cast<Index>(Wp.rows()); ++b) left += Wp(b, a) * A(i[p0], b) * B(i[p1], b);
      for (Index c = 0; c < static_cast<Index>(Wq.rows()); ++c) right += Wq(c, a) * C(i[q0], c) * D(i[q1], c);
      s += Wr(a, 0) * left * right;
    }
    out[k] = s;
  }
  return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  EXPECT_EQ(a.dims(), b.dims());
  double m = 0;
  for (Index k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(MatrixFactorization, EndMatrixExamples) {
  MatrixFactorization f;
  f.weights = {Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
  EXPECT_TRUE(mf_end_matrix(f).isApprox(Matrix::Identity(3, 3)));
  f.weights = {Matrix::Constant(1, 1, 3), Matrix::Constant(1, 1, 2)};
  EXPECT_DOUBLE_EQ(mf_end_matrix(f)(0, 0), 6);
}

TEST(MatrixFactorization, ProductOrderIndependent) {
  Rng rng(1);
  MatrixFactorization f;
  f.weights = {gaussian_matrix(4, 3, 1, rng), gaussian_matrix(5, 4, 1, rng), gaussian_matrix(2, 5, 1, rng)};
  Matrix left = (f.weights[2] * f.weights[1]) * f.weights[0];
  Matrix right = f.weights[2] * (f.weights[1] * f.weights[0]);
  EXPECT_TRUE(mf_end_matrix(f).isApprox(left, 1e-12));
  EXPECT_TRUE(mf_end_matrix(f).isApprox(right, 1e-12));
}

TEST(CPFactorization, EndTensorExamples) {
  Rng rng(2);
  auto f = random_cp({2, 3, 4}, 1, rng);
  auto t = cp_end_tensor(f);
  auto o = outer_product({f.factors[0].col(0), f.factors[1].col(0), f.factors[2].col(0)});
  EXPECT_LE(max_abs_diff(t, o), 1e-14);
  CPFactorization g;
  for (const auto& A : f.factors) {
    Matrix B(A.rows(), 2);
    B << A, A;
    g.factors.push_back(B);
  }
  g.factors[0].col(1) *= -1;
  EXPECT_LE(cp_end_tensor(g).norm(), 1e-14);
}

TEST(CPFactorization, EntrywiseTripleLoop) {
  Rng rng(3);
  auto f = random_cp({3, 4, 2}, 3, rng);
  auto t = cp_end_tensor(f);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j)
      for (Index k = 0; k < 2; ++k) {
        double s = 0;
        for (Index r = 0; r < 3; ++r) s += f.factors[0](i, r) * f.factors[1](j, r) * f.factors[2](k, r);
        EXPECT_NEAR(t.at({i, j, k}), s, 1e-12);
        EXPECT_NEAR(cp_entry(f, {i, j, k}), s, 1e-12);
      }
}

TEST(ModeTree, Structure) {
  auto t = ModeTree::perfect_binary({2, 3, 4, 5}, 3);
  EXPECT_EQ(t.node(t.root()).label, (std::vector<Index>{0, 1, 2, 3}));
  EXPECT_EQ(t.interior().size(), 3u);
  for (Index n = 0; n < 4; ++n) EXPECT_EQ(t.node(t.leaf(n)).rank, t.dims()[n]);
  EXPECT_EQ(t.parent_rank(t.root()), 1u);
  EXPECT_THROW(ModeTree::from_nested(nlohmann::json::parse("[[0,1],[1,2]]"), {2, 2, 2}, 1), std::domain_error);
  EXPECT_THROW(ModeTree::from_nested(nlohmann::json::parse("[[0,1],2]"), {2, 2, 2, 2}, 1), std::domain_error);
  for (int v : t.postorder())
    for (int c : t.node(v).children) EXPECT_EQ(t.node(c).parent, v);
}

TEST(HierarchicalFactorization, ShallowTreeReducesToCP) {
  Rng rng(4);
  auto cp = random_cp({2, 3, 4}, 3, rng);
  HierarchicalFactorization f{ModeTree::shallow({2, 3, 4}, 3), {}};
  f.weights.resize(f.tree.nodes().size());
  for (Index n = 0; n < 3; ++n) f.weights[f.tree.leaf(n)] = cp.factors[n];
  f.weights[f.tree.root()] = Matrix::Ones(3, 1);
  EXPECT_LE(max_abs_diff(ht_end_tensor(f), cp_end_tensor(cp)), 1e-13);
}

TEST(HierarchicalFactorization, OrderTwoEntrywise) {
  Rng rng(5);
  auto f = random_ht(ModeTree::perfect_binary({3, 4}, 2), rng);
  auto t = ht_end_tensor(f);
  const Matrix& A = f.weights[f.tree.leaf(0)];
  const Matrix& B = f.weights[f.tree.leaf(1)];
  const Matrix& r = f.weights[f.tree.root()];
  Matrix expect = A * r.col(0).asDiagonal() * B.transpose();
  EXPECT_TRUE(t.as_matrix().isApprox(expect, 1e-12));
}

TEST(HierarchicalFactorization, PerfectBinaryOrderFour) {
  Rng rng(6);
  auto tree = ModeTree::perfect_binary({2, 3, 2, 3}, 3);
  auto f = random_ht(tree, rng);
  EXPECT_LE(max_abs_diff(ht_end_tensor(f), pair_tree_oracle(f, 0, 1, 2, 3)), 1e-12);
}

TEST(HierarchicalFactorization, InterleavedTreeSortsModes) {
  Rng rng(7);
  auto tree = ModeTree::from_nested(nlohmann::json::parse("[[0,2],[3,1]]"), {2, 3, 4, 5}, 2);
  auto f = random_ht(tree, rng);
  EXPECT_LE(max_abs_diff(ht_end_tensor(f), pair_tree_oracle(f, 0, 2, 1, 3)), 1e-12);
}

TEST(HierarchicalFactorization, Multilinear) {
  Rng rng(8);
  auto tree = ModeTree::perfect_binary({2, 2, 3, 2}, 2);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(tree.nodes().size()) - 1);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_ht(tree, rng), g = f, h = f;
    int v = pick(rng);
    double c = std::normal_distribution<double>()(rng);
    Matrix other = gaussian_matrix(f.weights[v].rows(), f.weights[v].cols(), 1, rng);
    g.weights[v] = other;
    h.weights[v] = c * f.weights[v] + other;
    auto lhs = ht_end_tensor(h);
    auto rhs = c * ht_end_tensor(f) + ht_end_tensor(g);
    ASSERT_LE(max_abs_diff(lhs, rhs), 1e-10 * (1 + rhs.norm()));
  }
}

TEST(LocalComponents, NormsMatchOuterProduct) {
  Rng rng(9);
  auto f = random_ht(ModeTree::perfect_binary({2, 3, 2, 2}, 3), rng);
  auto norms = local_component_norms(f);
  for (int v : f.tree.interior())
    for (Index r = 0; r < f.tree.node(v).rank; ++r) {
      std::vector<Vector> vs{f.weights[v].row(r).transpose()};
      for (int c : f.tree.node(v).children) vs.push_back(f.weights[c].col(r));
      EXPECT_NEAR(norms.at({v, r}), outer_product(vs).norm(), 1e-12);
    }
  int root = f.tree.root();
  f.weights[root].row(1).setZero();
  EXPECT_EQ(local_component_norms(f).at({root, 1}), 0);
}

TEST(LocalComponents, UnitVectorsGiveOne) {
  auto tree = ModeTree::perfect_binary({2, 2}, 1);
  HierarchicalFactorization f{tree, {}};
  f.weights.resize(tree.nodes().size());
  f.weights[tree.leaf(0)] = Vector::Unit(2, 0);
  f.weights[tree.leaf(1)] = Vector::Unit(2, 1);
  f.weights[tree.root()] = Matrix::Ones(1, 1);
  EXPECT_DOUBLE_EQ(local_component_norms(f).at({tree.root(), 0}), 1);
}

TEST(Pruning, KeepAllAndKeepNone) {
  Rng rng(10);
  auto f = random_ht(ModeTree::perfect_binary({2, 2, 2, 2}, 2), rng);
  std::map<int, Index> all, none;
  for (int v : f.tree.interior()) all[v] = f.tree.node(v).rank;
  EXPECT_EQ(ht_end_tensor(prune_local_components(f, all)).values(), ht_end_tensor(f).values());
  int inner = f.tree.find({0, 1});
  none[inner] = 0;
  EXPECT_EQ(ht_end_tensor(prune_local_components(f, none)).norm(), 0);
  std::map<int, Index> bad{{inner, 3}};
  EXPECT_THROW(prune_local_components(f, bad), std::domain_error);
}

TEST(Pruning, DistanceBoundAndRank) {
  Rng rng(11);
  auto tree = ModeTree::perfect_binary({2, 3, 2, 3}, 3);
  std::uniform_int_distribution<Index> k(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_ht(tree, rng);
    std::map<int, Index> keep;
    for (int v : tree.interior()) keep[v] = k(rng);
    auto g = prune_local_components(f, keep);
    double dist = (ht_end_tensor(f) - ht_end_tensor(g)).norm();
    ASSERT_LE(dist, pruning_distance_bound(f, keep) * (1 + 1e-12) + 1e-12);
    auto ranks = hierarchical_tensor_rank(ht_end_tensor(g), tree);
    for (int v : tree.interior())
      if (v != tree.root()) ASSERT_LE(ranks.at(v), static_cast<int>(keep[v]));
  }
}

TEST(Pruning, ComponentDirectionIsSingleComponentEndTensor) {
  Rng rng(12);
  auto f = random_ht(ModeTree::perfect_binary({2, 2, 3, 2}, 2), rng);
  auto norms = local_component_norms(f);
  for (int v : f.tree.interior())
    for (Index r = 0; r < f.tree.node(v).rank; ++r) {
      auto g = f;
      for (Index k = 0; k < f.tree.node(v).rank; ++k) {
        if (k == r) continue;
        g.weights[v].row(k).setZero();
        for (int c : f.tree.node(v).children) g.weights[c].col(k).setZero();
      }
      auto expect = (1.0 / norms.at({v, r})) * ht_end_tensor(g);
      EXPECT_LE(max_abs_diff(ht_component_direction(f, v, r), expect), 1e-12);
    }
}

TEST(Init, BalancedMatrix) {
  Rng rng(13);
  InitSpec spec;
  spec.dims = {60, 50};
  spec.depth = 3;
  spec.scale = 1e-2;
  auto f = std::get<MatrixFactorization>(init_balanced(spec, rng));
  EXPECT_LE(unbalancedness(Factorization(f)), 1e-10);
  Matrix E = mf_end_matrix(f);
  double sd = std::sqrt(E.squaredNorm() / static_cast<double>(E.size()));
  EXPECT_NEAR(sd, 1e-2, 1e-3);
}

TEST(Init, DetSign) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    InitSpec spec;
    spec.dims = {2, 2};
    spec.det_sign = 1;
    auto f = std::get<MatrixFactorization>(init_balanced(spec, rng));
    EXPECT_GT(mf_end_matrix(f).determinant(), 0);
    spec.det_sign = -1;
    f = std::get<MatrixFactorization>(init_balanced(spec, rng));
    EXPECT_LT(mf_end_matrix(f).determinant(), 0);
  }
  Rng rng(0);
  InitSpec spec;
  spec.dims = {2, 3};
  spec.det_sign = 1;
  EXPECT_THROW(init_balanced(spec, rng), std::domain_error);
}

TEST(Init, BalancedCP) {
  Rng rng(14);
  InitSpec spec;
  spec.kind = FactorizationKind::CP;
  spec.dims = {3, 4, 5};
  spec.components = 4;
  spec.scale = 1;
  auto f = init_balanced(spec, rng);
  EXPECT_LE(unbalancedness(f), 1e-12);
}

TEST(Init, GaussianHTScale) {
  Rng rng(15);
  InitSpec spec;
  spec.kind = FactorizationKind::Hierarchical;
  spec.dims = {8, 8, 8, 8};
  spec.components = 8;
  spec.scale = 0.1;
  auto f = std::get<HierarchicalFactorization>(init_gaussian(spec, rng));
  double ss = 0, n = 0;
  for (const auto& W : f.weights) {
    ss += W.squaredNorm();
    n += W.size();
  }
  EXPECT_NEAR(std::sqrt(ss / n), 0.1, 0.01);
}

TEST(Init, BalancedHTComponents) {
  Rng rng(16);
  auto f = init_ht_balanced(ModeTree::perfect_binary({2, 3, 2, 3}, 2), 0.5, rng);
  EXPECT_LE(unbalancedness(Factorization(f)), 1e-12);
}

TEST(Fixture2x2, Base) {
  auto fx = fixture_2x2({});
  ASSERT_EQ(fx.observations.size(), 3u);
  EXPECT_EQ(fx.observations[0].index, (std::vector<Index>{0, 1}));
  EXPECT_EQ(fx.observations[0].value, 1);
  EXPECT_EQ(fx.observations[1].index, (std::vector<Index>{1, 0}));
  EXPECT_EQ(fx.observations[1].value, 1);
  EXPECT_EQ(fx.observations[2].index, (std::vector<Index>{1, 1}));
  EXPECT_EQ(fx.observations[2].value, 0);
  EXPECT_EQ(fx.unobserved, (std::pair<Index, Index>{0, 0}));
}

TEST(Fixture2x2, SingularValues) {
  auto [a, b] = sol_singular_values(0);
  EXPECT_NEAR(a, 1, 1e-15);
  EXPECT_NEAR(b, 1, 1e-15);
  std::tie(a, b) = sol_singular_values(1.5);
  EXPECT_NEAR(a, 2, 1e-15);
  EXPECT_NEAR(b, 0.5, 1e-15);
  auto fx = fixture_2x2({});
  for (double x : {-4.0, -0.3, 0.0, 2.5, 9.0}) {
    auto s = spectral(fx.solution(x)).singular_values;
    std::tie(a, b) = sol_singular_values(x);
    EXPECT_NEAR(s(0), a, 1e-12);
    EXPECT_NEAR(s(1), b, 1e-12);
  }
}

TEST(Fixture2x2, EffectiveRankDecreasesWithAbsX) {
  auto fx = fixture_2x2({});
  double prev = effective_rank(fx.solution(0));
  for (int k = 1; k <= 20; ++k) {
    double e = effective_rank(fx.solution(0.5 * k));
    EXPECT_LT(e, prev);
    EXPECT_NEAR(effective_rank(fx.solution(-0.5 * k)), e, 1e-12);
    prev = e;
  }
}

TEST(Fixture2x2, Variants) {
  Fixture2x2Variant v;
  v.kind = Fixture2x2Variant::Kind::Perturbed;
  v.z = 2;
  v.z_prime = 3;
  v.eps = 0.1;
  auto fx = fixture_2x2(v);
  EXPECT_EQ(fx.observations[2].value, 0.1);
  v.z = 0;
  EXPECT_THROW(fixture_2x2(v), std::domain_error);
  v = {};
  v.kind = Fixture2x2Variant::Kind::Repositioned;
  v.i = 1;
  v.j = 0;
  fx = fixture_2x2(v);
  EXPECT_EQ(fx.unobserved, (std::pair<Index, Index>{1, 0}));
  EXPECT_EQ(fx.observations.size(), 3u);
}

TEST(MultipleMinima, BothFitObservations) {
  for (Index N : {3, 4}) {
    auto fx = fixture_multiple_minima(std::vector<Index>(N, 3));
    EXPECT_EQ(fx.observations.size(), 4u);
    for (const auto& o : fx.observations) {
      EXPECT_EQ(fx.W.at(o.index), o.value);
      EXPECT_EQ(fx.W_prime.at(o.index), o.value);
    }
  }
  EXPECT_THROW(fixture_multiple_minima({2, 2}), std::domain_error);
}

TEST(Convac, MatchesInnerProduct) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto tree = ModeTree::perfect_pary({2, 3, 2, 2}, 2, {3, 2});
    auto f = random_ht(tree, rng);
    std::vector<Vector> x;
    for (Index d : tree.dims()) x.push_back(gaussian_vector(d, 1, rng));
    double expect = inner(outer_product(x), ht_end_tensor(f));
    ASSERT_NEAR(convac_forward(f, x), expect, 1e-9 * (1 + std::abs(expect)));
  }
}

TEST(Convac, ShallowOnesAndZeroInput) {
  auto tree = ModeTree::perfect_pary({2, 2, 2}, 3, {2});
  HierarchicalFactorization f{tree, {}};
  for (Index id = 0; id < tree.nodes().size(); ++id)
    f.weights.push_back(Matrix::Ones(tree.node(id).rank, tree.parent_rank(id)));
  std::vector<Vector> x(3, Vector::Ones(2));
  // Two components, each a product of three sums of two ones.
  EXPECT_DOUBLE_EQ(convac_forward(f, x), 16);
  EXPECT_DOUBLE_EQ(convac_forward(f, x), inner(outer_product(x), ht_end_tensor(f)));
  x[1].setZero();
  EXPECT_EQ(convac_forward(f, x), 0);
  x.pop_back();
  EXPECT_THROW(convac_forward(f, x), std::domain_error);
}

TEST(Serialization, RoundTrip) {
  Rng rng(18);
  MatrixFactorization m;
  m.weights = {gaussian_matrix(3, 2, 1, rng), gaussian_matrix(4, 3, 1, rng)};
  std::vector<Factorization> fs{m, random_cp({2, 3}, 2, rng),
                                random_ht(ModeTree::from_nested(nlohmann::json::parse("[[0,2],1]"), {2, 3, 2}, 2), rng)};
  for (const auto& f : fs) {
    auto j = nlohmann::json::parse(to_json(f).dump());
    auto g = factorization_from_json(j);
    EXPECT_EQ(g.index(), f.index());
    EXPECT_EQ(end_tensor(g).values(), end_tensor(f).values());
  }
}
