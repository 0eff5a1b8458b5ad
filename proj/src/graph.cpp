#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "irlab/graph.hpp"

namespace irlab {

Graph::Graph(Index n) : adj_(n) {
  for (Index i = 0; i < n; ++i) adj_[i].insert(i);
}

Graph Graph::from_edges(Index n, const std::vector<Edge>& edges) {
  Graph g(n);
  for (auto [i, j] : edges) g.add_edge(i, j);
  return g;
}

Index Graph::num_edges() const {
  Index s = 0;
  for (const auto& a : adj_) s += a.size() - 1;
  return s / 2;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (Index i = 0; i < adj_.size(); ++i)
    for (Index j : adj_[i])
      if (j > i) out.push_back({i, j});
  return out;
}

bool Graph::has_edge(Index i, Index j) const { return adj_.at(i).count(j) > 0; }

void Graph::add_edge(Index i, Index j) {
  if (i >= adj_.size() || j >= adj_.size()) throw std::domain_error("edge endpoint out of range");
  if (i == j) throw std::domain_error("self-loops are implicit");
  if (has_edge(i, j))
    throw std::domain_error("duplicate edge {" + std::to_string(i) + ", " + std::to_string(j) + "}");
  adj_[i].insert(j);
  adj_[j].insert(i);
}

void Graph::remove_edge(Index i, Index j) {
  if (i == j) throw std::domain_error("self-loops cannot be removed");
  if (!has_edge(i, j)) throw std::domain_error("edge not present");
  adj_[i].erase(j);
  adj_[j].erase(i);
}

DirectedTypedGraph::DirectedTypedGraph(Index n, Index Q) : out_(n), in_(n), self_type_(n, 0), Q_(Q) {
  if (Q == 0) throw std::domain_error("at least one edge type required");
  for (Index i = 0; i < n; ++i) {
    out_[i].insert(i);
    in_[i].insert(i);
  }
}

DirectedTypedGraph DirectedTypedGraph::symmetric(const Graph& g) {
  DirectedTypedGraph d(g.num_vertices(), 1);
  for (auto [i, j] : g.edges()) {
    d.add_edge(i, j, 0);
    d.add_edge(j, i, 0);
  }
  return d;
}

void DirectedTypedGraph::add_edge(Index from, Index to, Index type) {
  if (from >= out_.size() || to >= out_.size()) throw std::domain_error("edge endpoint out of range");
  if (from == to) throw std::domain_error("self-loops are implicit");
  if (type >= Q_) throw std::domain_error("edge type out of range");
  if (out_[from].count(to)) throw std::domain_error("duplicate directed edge");
  out_[from].insert(to);
  in_[to].insert(from);
  types_[{from, to}] = type;
}

void DirectedTypedGraph::set_self_type(Index i, Index type) {
  if (type >= Q_) throw std::domain_error("edge type out of range");
  self_type_.at(i) = type;
}

Index DirectedTypedGraph::type(Index from, Index to) const {
  if (from == to) return self_type_.at(from);
  auto it = types_.find({from, to});
  if (it == types_.end()) throw std::domain_error("edge not present");
  return it->second;
}

std::vector<std::pair<Edge, Index>> DirectedTypedGraph::typed_edges() const {
  return {types_.begin(), types_.end()};
}

namespace {

std::vector<std::vector<Index>> parse_rows(std::istream& in, Index columns, Index& n) {
  std::vector<std::vector<Index>> rows;
  std::string line;
  Index lineno = 0;
  n = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string body = line.substr(0, hash);
    if (hash != std::string::npos) {
      std::istringstream c(line.substr(hash + 1));
      std::string key;
      Index v;
      if (c >> key && key == "vertices" && c >> v) n = std::max(n, v);
    }
    std::istringstream s(body);
    std::vector<Index> row;
    long long v;
    while (s >> v) {
      if (v < 0) throw std::domain_error("line " + std::to_string(lineno) + ": negative vertex id");
      row.push_back(static_cast<Index>(v));
    }
    if (!s.eof()) throw std::domain_error("line " + std::to_string(lineno) + ": malformed entry");
    if (row.empty()) continue;
    if (row.size() != columns)
      throw std::domain_error("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                              " columns");
    n = std::max({n, row[0] + 1, row[1] + 1});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  Index n;
  auto rows = parse_rows(in, 2, n);
  Graph g(n);
  for (const auto& r : rows) g.add_edge(r[0], r[1]);
  return g;
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_edge_list(f);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# vertices " << g.num_vertices() << "\n";
  for (auto [i, j] : g.edges()) out << i << " " << j << "\n";
}

DirectedTypedGraph read_typed_edge_list(std::istream& in) {
  Index n;
  auto rows = parse_rows(in, 3, n);
  Index Q = 1;
  for (const auto& r : rows) Q = std::max(Q, r[2] + 1);
  DirectedTypedGraph g(n, Q);
  for (const auto& r : rows) g.add_edge(r[0], r[1], r[2]);
  return g;
}

VertexSet complement(const VertexSet& I, Index n) {
  VertexSet out;
  Index k = 0;
  for (Index v = 0; v < n; ++v) {
    while (k < I.size() && I[k] < v) ++k;
    if (k == I.size() || I[k] != v) out.push_back(v);
  }
  return out;
}

namespace {

template <class Neigh>
VertexSet union_neighbors(Index n, const VertexSet& S, Neigh neigh) {
  std::vector<bool> mark(n, false);
  for (Index v : S)
    for (Index u : neigh(v)) mark[u] = true;
  VertexSet out;
  for (Index v = 0; v < n; ++v)
    if (mark[v]) out.push_back(v);
  return out;
}

VertexSet intersect(const VertexSet& a, const VertexSet& b) {
  VertexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void check_subset(const VertexSet& I, Index n) {
  for (Index k = 0; k < I.size(); ++k) {
    if (I[k] >= n) throw std::domain_error("vertex " + std::to_string(I[k]) + " out of range");
    if (k > 0 && I[k] <= I[k - 1]) throw std::domain_error("vertex subset must be sorted and unique");
  }
}

// Vector propagation v <- A v, counting walks that end in T.
template <class Neigh, class Int>
std::vector<Int> propagate(Index n, Index l, const VertexSet& T, Neigh out, bool& overflow) {
  std::vector<Int> v(n, 0);
  for (Index t : T) v[t] = 1;
  for (Index step = 0; step < l; ++step) {
    std::vector<Int> w(n, 0);
    for (Index i = 0; i < n; ++i) {
      for (Index j : out(i)) {
        if constexpr (std::is_same_v<Int, std::int64_t>) {
          if (__builtin_add_overflow(w[i], v[j], &w[i])) {
            overflow = true;
            return {};
          }
        } else {
          w[i] += v[j];
        }
      }
    }
    v = std::move(w);
  }
  return v;
}

template <class Neigh>
Count count_walks(Index n, Index l, const VertexSet& S, const VertexSet& T, Neigh out) {
  check_subset(S, n);
  check_subset(T, n);
  bool overflow = false;
  auto v = propagate<Neigh, std::int64_t>(n, l, T, out, overflow);
  if (!overflow) {
    Count total = 0;
    for (Index s : S) total += v[s];
    return total;
  }
  auto big = propagate<Neigh, Count>(n, l, T, out, overflow);
  Count total = 0;
  for (Index s : S) total += big[s];
  return total;
}

}  // namespace

VertexSet neighborhood(const Graph& g, const VertexSet& S) {
  return union_neighbors(g.num_vertices(), S, [&](Index v) -> const std::set<Index>& { return g.neighbors(v); });
}

VertexSet boundary(const Graph& g, const VertexSet& I) {
  check_subset(I, g.num_vertices());
  return intersect(neighborhood(g, I), neighborhood(g, complement(I, g.num_vertices())));
}

VertexSet directed_boundary(const DirectedTypedGraph& g, const VertexSet& I) {
  Index n = g.num_vertices();
  check_subset(I, n);
  auto out = [&](Index v) -> const std::set<Index>& { return g.out_neighbors(v); };
  return intersect(union_neighbors(n, I, out), union_neighbors(n, complement(I, n), out));
}

Count walk_count(const Graph& g, Index l, const VertexSet& S, const VertexSet& T) {
  return count_walks(g.num_vertices(), l, S, T, [&](Index v) -> const std::set<Index>& { return g.neighbors(v); });
}

Count walk_count(const DirectedTypedGraph& g, Index l, const VertexSet& S, const VertexSet& T) {
  return count_walks(g.num_vertices(), l, S, T,
                     [&](Index v) -> const std::set<Index>& { return g.out_neighbors(v); });
}

Count walk_index(const Graph& g, Index L_minus_1, const VertexSet& I) {
  VertexSet all(g.num_vertices());
  for (Index v = 0; v < all.size(); ++v) all[v] = v;
  return walk_count(g, L_minus_1, boundary(g, I), all);
}

Count vertex_walk_index(const Graph& g, Index L_minus_1, Index t, const VertexSet& I) {
  if (t >= g.num_vertices()) throw std::domain_error("target vertex out of range");
  return walk_count(g, L_minus_1, boundary(g, I), {t});
}

double count_to_double(const Count& c) { return c.convert_to<double>(); }
std::string count_to_string(const Count& c) { return c.str(); }

}  // namespace irlab
