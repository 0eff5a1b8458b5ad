#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "irlab/tensor.hpp"

namespace irlab {

using Rng = std::mt19937_64;

// End matrix W_L ... W_1; weights[0] is W_1.
struct MatrixFactorization {
  std::vector<Matrix> weights;
  Index depth() const { return weights.size(); }
};

// factors[n] is D_n x R; column r holds w_r^n.
struct CPFactorization {
  std::vector<Matrix> factors;
  Index order() const { return factors.size(); }
  Index components() const { return factors.empty() ? 0 : factors[0].cols(); }
  std::vector<Index> dims() const;
};

struct ModeTreeNode {
  std::vector<Index> label;  // sorted, 0-based modes
  int parent = -1;
  std::vector<int> children;  // sorted by smallest label element
  Index rank = 0;             // R_nu for interior nodes, D_n for leaves
};

class ModeTree {
 public:
  ModeTree() = default;
  // Build from nested groups of modes: a leaf is an integer, an interior
  // node an array. Every interior node gets `rank` local components.
  static ModeTree from_nested(const nlohmann::json& spec, const std::vector<Index>& dims,
                              Index rank);
  static ModeTree perfect_binary(const std::vector<Index>& dims, Index rank);
  static ModeTree perfect_pary(const std::vector<Index>& dims, Index P,
                               const std::vector<Index>& level_ranks);
  static ModeTree shallow(const std::vector<Index>& dims, Index rank);

  const std::vector<ModeTreeNode>& nodes() const { return nodes_; }
  const ModeTreeNode& node(int id) const { return nodes_.at(id); }
  int root() const { return root_; }
  Index order() const { return dims_.size(); }
  const std::vector<Index>& dims() const { return dims_; }
  int leaf(Index mode) const { return leaf_of_mode_.at(mode); }
  bool is_leaf(int id) const { return nodes_.at(id).children.empty(); }
  Index parent_rank(int id) const;
  void set_rank(int id, Index r);

  std::vector<int> interior() const;
  std::vector<int> postorder() const;
  int find(const std::vector<Index>& label) const;
  nlohmann::json nested() const;

 private:
  int add(const nlohmann::json& spec, int parent, Index rank);
  void finalize();

  std::vector<ModeTreeNode> nodes_;
  std::vector<int> leaf_of_mode_;
  std::vector<Index> dims_;
  int root_ = -1;
};

// weights[nu] has shape R_nu x R_{Pa(nu)}.
struct HierarchicalFactorization {
  ModeTree tree;
  std::vector<Matrix> weights;
};

using Factorization = std::variant<MatrixFactorization, CPFactorization, HierarchicalFactorization>;

Matrix mf_end_matrix(const MatrixFactorization& f);
DenseTensor cp_end_tensor(const CPFactorization& f);
DenseTensor ht_end_tensor(const HierarchicalFactorization& f);
DenseTensor end_tensor(const Factorization& f);

// Value of the CP end tensor at one entry.
double cp_entry(const CPFactorization& f, const std::vector<Index>& idx);

// Intermediate quantities of the end-tensor recursion, indexed by node.
// part[nu]: (prod of nu's dims) x R_{Pa(nu)}; column r is the row-major
//   vectorization of the intermediate tensor for index r.
// local[nu]: (prod of nu's dims) x R_nu; column r' is the mode-sorted outer
//   product of the children's columns r' (empty for leaves).
struct HTForward {
  std::vector<Matrix> part;
  std::vector<Matrix> local;
  std::vector<std::vector<Index>> perm;
};
HTForward ht_forward(const HierarchicalFactorization& f);

// Maps the row-major index of the children's concatenated modes to the row-major
// index of the sorted modes.
std::vector<Index> ht_mode_permutation(const ModeTree& tree, int node);

struct LocalComponentKey {
  int node;
  Index r;
  auto operator<=>(const LocalComponentKey&) const = default;
};

std::map<LocalComponentKey, double> local_component_norms(const HierarchicalFactorization& f);

// Keeps the first keep[nu] local components at each listed interior node.
HierarchicalFactorization prune_local_components(const HierarchicalFactorization& f,
                                                 const std::map<int, Index>& keep);

// Reorders local components at every interior node by decreasing norm.
HierarchicalFactorization sort_local_components(const HierarchicalFactorization& f);

// Bound on the end-tensor change from pruning: sum over pruned (nu, r) of the
// local component norm times the product of Frobenius norms of all weight matrices
// outside nu and its children.
double pruning_distance_bound(const HierarchicalFactorization& f, const std::map<int, Index>& keep);

// Direction tensor of local component (nu, r): the end tensor with only that
// component kept at nu, divided by its norm. Zero if the norm is zero.
DenseTensor ht_component_direction(const HierarchicalFactorization& f, int node, Index r);

enum class FactorizationKind { Matrix, CP, Hierarchical };

struct InitSpec {
  FactorizationKind kind = FactorizationKind::Matrix;
  std::vector<Index> dims;        // MF: {rows, cols}; CP/HT: mode dims
  Index depth = 2;                // MF depth
  std::vector<Index> hidden;      // MF hidden widths (depth-1 entries); default min dim
  Index components = 1;           // CP: R; HT: R_nu at interior nodes
  std::optional<ModeTree> tree;   // HT tree; default perfect binary
  double scale = 1e-3;
  std::optional<int> det_sign;    // square MF only
};

Factorization init_balanced(const InitSpec& spec, Rng& rng);
// Every weight i.i.d. N(0, scale^2).
Factorization init_gaussian(const InitSpec& spec, Rng& rng);

// Exactly balanced MF from a given end matrix.
MatrixFactorization balanced_factorization(const Matrix& end, Index depth,
                                           const std::vector<Index>& hidden);
// HT weights with every local component's vectors of equal squared norm.
HierarchicalFactorization init_ht_balanced(const ModeTree& tree, double scale, Rng& rng);

Matrix gaussian_matrix(Index rows, Index cols, double stddev, Rng& rng);
Vector gaussian_vector(Index n, double stddev, Rng& rng);

// 2x2 completion fixtures.
struct Observed {
  std::vector<Index> index;
  double value;
};

struct Fixture2x2 {
  std::vector<Observed> observations;
  std::pair<Index, Index> unobserved;
  // Solution matrix with the unobserved entry set to x.
  Matrix solution(double x) const;
};

struct Fixture2x2Variant {
  enum class Kind { Base, Perturbed, Repositioned } kind = Kind::Base;
  double z = 1, z_prime = 1, eps = 0;
  Index i = 0, j = 0;
};

Fixture2x2 fixture_2x2(const Fixture2x2Variant& v);
// Singular values of the base solution matrix with unobserved entry x.
std::pair<double, double> sol_singular_values(double x);

struct MultipleMinimaFixture {
  std::vector<Observed> observations;
  DenseTensor W;
  DenseTensor W_prime;
};

MultipleMinimaFixture fixture_multiple_minima(const std::vector<Index>& dims);

// Forward pass of the convolutional network equivalent to a hierarchical
// factorization over a perfect P-ary tree.
double convac_forward(const HierarchicalFactorization& f, const std::vector<Vector>& inputs);

nlohmann::json to_json(const Factorization& f);
Factorization factorization_from_json(const nlohmann::json& j);

}  // namespace irlab
