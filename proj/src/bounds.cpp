#include <algorithm>
#include <bit>
#include <cmath>

#include "irlab/graph.hpp"

namespace irlab {

namespace {

// Neighborhood access shared by the undirected and directed cases.
struct Adjacency {
  Index n;
  std::vector<const std::set<Index>*> out, in;
};

Adjacency adjacency(const Graph& g) {
  Adjacency a{g.num_vertices(), {}, {}};
  for (Index v = 0; v < a.n; ++v) {
    a.out.push_back(&g.neighbors(v));
    a.in.push_back(&g.neighbors(v));
  }
  return a;
}

Adjacency adjacency(const DirectedTypedGraph& g) {
  Adjacency a{g.num_vertices(), {}, {}};
  for (Index v = 0; v < a.n; ++v) {
    a.out.push_back(&g.out_neighbors(v));
    a.in.push_back(&g.in_neighbors(v));
  }
  return a;
}

VertexSet out_union(const Adjacency& a, const VertexSet& S) {
  std::vector<bool> mark(a.n, false);
  for (Index v : S)
    for (Index u : *a.out[v]) mark[u] = true;
  VertexSet r;
  for (Index v = 0; v < a.n; ++v)
    if (mark[v]) r.push_back(v);
  return r;
}

VertexSet shared(const Adjacency& a, const VertexSet& I1, const VertexSet& J1) {
  VertexSet x = out_union(a, I1), y = out_union(a, J1), r;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(r));
  return r;
}

Index count_in(const std::set<Index>& s, const VertexSet& S) {
  Index c = 0;
  for (Index v : S) c += s.count(v);
  return c;
}

bool no_repeat(const Adjacency& a, const VertexSet& I1, const VertexSet& J1) {
  for (Index k : shared(a, I1, J1))
    if (count_in(*a.in[k], I1) != 1 || count_in(*a.in[k], J1) != 1) return false;
  return true;
}

void check_subset(const VertexSet& I, Index n) {
  for (Index k = 0; k < I.size(); ++k)
    if (I[k] >= n || (k > 0 && I[k] <= I[k - 1])) throw std::domain_error("invalid vertex subset");
}

AdmissibleFamily exhaustive(const Adjacency& a, const VertexSet& I, const VertexSet& Ic) {
  using Mask = std::uint64_t;
  std::vector<Mask> nout(a.n, 0), nin(a.n, 0);
  for (Index v = 0; v < a.n; ++v) {
    for (Index u : *a.out[v]) nout[v] |= Mask(1) << u;
    for (Index u : *a.in[v]) nin[v] |= Mask(1) << u;
  }
  auto expand = [&](const VertexSet& base, Mask sub) {
    Mask m = 0, nb = 0;
    for (Index k = 0; k < base.size(); ++k)
      if (sub >> k & 1) {
        m |= Mask(1) << base[k];
        nb |= nout[base[k]];
      }
    return std::pair{m, nb};
  };
  std::vector<std::pair<Mask, Mask>> left, right;
  for (Mask s = 1; s < (Mask(1) << I.size()); ++s) left.push_back(expand(I, s));
  for (Mask s = 1; s < (Mask(1) << Ic.size()); ++s) right.push_back(expand(Ic, s));
  std::set<Mask> found;
  for (auto [mi, ni] : left) {
    for (auto [mj, nj] : right) {
      Mask c = ni & nj;
      if (!c || found.count(c)) continue;
      bool ok = true;
      for (Mask r = c; r && ok; r &= r - 1) {
        Index k = std::countr_zero(r);
        ok = std::popcount(nin[k] & mi) == 1 && std::popcount(nin[k] & mj) == 1;
      }
      if (ok) found.insert(c);
    }
  }
  AdmissibleFamily fam;
  fam.exhaustive = true;
  for (Mask c : found) {
    VertexSet s;
    for (Index v = 0; v < a.n; ++v)
      if (c >> v & 1) s.push_back(v);
    fam.subsets.push_back(s);
  }
  std::sort(fam.subsets.begin(), fam.subsets.end());
  return fam;
}

// Pair-based construction: single pairs, then greedy accumulation of further
// pairs from several starting pairs, keeping the no-repeat property.
AdmissibleFamily greedy(const Adjacency& a, const VertexSet& I, const VertexSet& Ic) {
  std::vector<Edge> pairs;
  for (Index i : I)
    for (Index j : Ic)
      if (!shared(a, {i}, {j}).empty()) pairs.push_back({i, j});
  std::sort(pairs.begin(), pairs.end(), [](Edge x, Edge y) {
    return std::minmax(x.first, x.second) < std::minmax(y.first, y.second);
  });
  std::set<VertexSet> found;
  for (auto [i, j] : pairs) found.insert(shared(a, {i}, {j}));
  Index starts = std::min<Index>(pairs.size(), 16);
  for (Index s = 0; s < starts; ++s) {
    VertexSet I1{pairs[s].first}, J1{pairs[s].second};
    for (auto [i, j] : pairs) {
      VertexSet I2 = I1, J2 = J1;
      if (!std::binary_search(I2.begin(), I2.end(), i)) I2.insert(std::upper_bound(I2.begin(), I2.end(), i), i);
      if (!std::binary_search(J2.begin(), J2.end(), j)) J2.insert(std::upper_bound(J2.begin(), J2.end(), j), j);
      if (no_repeat(a, I2, J2)) {
        I1 = std::move(I2);
        J1 = std::move(J2);
      }
    }
    found.insert(shared(a, I1, J1));
  }
  AdmissibleFamily fam;
  for (const auto& c : found)
    if (!c.empty()) fam.subsets.push_back(c);
  return fam;
}

AdmissibleFamily admissible(const Adjacency& a, const VertexSet& I, std::uint64_t budget) {
  check_subset(I, a.n);
  VertexSet Ic = complement(I, a.n);
  if (I.empty() || Ic.empty()) return {{}, true};
  bool fits = a.n <= 64 && I.size() < 40 && Ic.size() < 40 &&
              ((std::uint64_t(1) << I.size()) - 1) * ((std::uint64_t(1) << Ic.size()) - 1) <= budget;
  return fits ? exhaustive(a, I, Ic) : greedy(a, I, Ic);
}

VertexSet all_vertices(Index n) {
  VertexSet v(n);
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

bool no_repeating_shared_neighbors(const Graph& g, const VertexSet& I1, const VertexSet& J1) {
  return no_repeat(adjacency(g), I1, J1);
}

bool no_repeating_shared_neighbors(const DirectedTypedGraph& g, const VertexSet& I1, const VertexSet& J1) {
  return no_repeat(adjacency(g), I1, J1);
}

AdmissibleFamily admissible_subsets(const Graph& g, const VertexSet& I, std::uint64_t budget) {
  return admissible(adjacency(g), I, budget);
}

AdmissibleFamily admissible_subsets(const DirectedTypedGraph& g, const VertexSet& I, std::uint64_t budget) {
  return admissible(adjacency(g), I, budget);
}

double lower_bound_term(Index L, Index D, const Count& rho, Prediction mode) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  if (rho == 0 || D == 0) return 0;
  double logD = std::log(static_cast<double>(D));
  if (L == 1) return logD;  // graph: |C| * log(D^{1/|C|}); vertex: [t in C] * log D
  (void)mode;
  double r = count_to_double(rho);
  return r * std::log1p((static_cast<double>(D) - 1) / r);
}

namespace {

template <class G>
SepRankBounds lower_part(const G& g, Index L, Index D, const VertexSet& I, Prediction mode,
                         std::uint64_t budget) {
  SepRankBounds b;
  VertexSet target = mode.mode == Prediction::Mode::Graph ? all_vertices(g.num_vertices()) : VertexSet{mode.target};
  auto fam = admissible_subsets(g, I, budget);
  b.exhaustive = fam.exhaustive;
  for (const auto& C : fam.subsets) {
    double v = lower_bound_term(L, D, walk_count(g, L - 1, C, target), mode);
    if (v > b.log_lower) {
      b.log_lower = v;
      b.best_subset = C;
    }
  }
  return b;
}

}  // namespace

SepRankBounds sep_rank_bounds(const Graph& g, Index L, Index D_x, Index D_h, const VertexSet& I,
                              Prediction mode, std::uint64_t budget) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  if (mode.mode == Prediction::Mode::Vertex && mode.target >= g.num_vertices())
    throw std::domain_error("target vertex out of range");
  SepRankBounds b = lower_part(g, L, std::min(D_x, D_h), I, mode, budget);
  double logDh = std::log(static_cast<double>(D_h));
  if (mode.mode == Prediction::Mode::Graph) {
    b.walks = walk_index(g, L - 1, I);
    b.log_upper = logDh * (4 * count_to_double(b.walks) + 1);
  } else {
    b.walks = vertex_walk_index(g, L - 1, mode.target, I);
    b.log_upper = logDh * 4 * count_to_double(b.walks);
  }
  return b;
}

SepRankBounds directed_bounds(const DirectedTypedGraph& g, Index L, Index D_x, Index D_h,
                              const VertexSet& I, Prediction mode, std::uint64_t budget) {
  if (L == 0) throw std::domain_error("depth must be at least 1");
  if (mode.mode == Prediction::Mode::Vertex && mode.target >= g.num_vertices())
    throw std::domain_error("target vertex out of range");
  SepRankBounds b = lower_part(g, L, std::min(D_x, D_h), I, mode, budget);
  VertexSet C = directed_boundary(g, I);
  VertexSet target = mode.mode == Prediction::Mode::Graph ? all_vertices(g.num_vertices()) : VertexSet{mode.target};
  b.walks = 0;
  for (Index l = 1; l <= L; ++l) b.walks += walk_count(g, L - l, C, target);
  double w = count_to_double(b.walks) + (mode.mode == Prediction::Mode::Graph ? 1 : 0);
  b.log_upper = std::log(static_cast<double>(D_h)) * w;
  return b;
}

}  // namespace irlab
