#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "irlab/cli.hpp"

namespace irlab::cli {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance_header(std::uint64_t config_hash) {
  return std::string("# irlab ") + IRLAB_VERSION + " config=" + hash_hex(config_hash);
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json_file(const std::string& path) {
  std::string text = read_file(path);
  std::size_t start = 0;
  while (start < text.size() && text[start] == '#') {
    std::size_t nl = text.find('\n', start);
    start = nl == std::string::npos ? text.size() : nl + 1;
  }
  try {
    return nlohmann::json::parse(text.begin() + start, text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON");
  }
}

VertexSet parse_vertex_set(const std::string& spec, Index n) {
  if (spec == "all") {
    VertexSet all(n);
    for (Index v = 0; v < n; ++v) all[v] = v;
    return all;
  }
  std::string body = spec;
  if (!spec.empty() && spec[0] == '@') body = read_file(spec.substr(1));
  std::replace_if(body.begin(), body.end(), [](char c) { return c == ',' || std::isspace(static_cast<unsigned char>(c)); }, ' ');
  // Commas must separate ids; reject empty fields in the inline form.
  if (spec.empty() || spec[0] != '@') {
    if (spec.empty() || spec.front() == ',' || spec.back() == ',' || spec.find(",,") != std::string::npos)
      throw ConfigError("malformed vertex set '" + spec + "'");
  }
  std::istringstream in(body);
  std::string tok;
  VertexSet out;
  while (in >> tok) {
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        tok.size() > 18)
      throw ConfigError("malformed vertex id '" + tok + "' in '" + spec + "'");
    Index v = std::stoull(tok);
    if (v >= n) throw ConfigError("vertex " + tok + " out of range (graph has " + std::to_string(n) + ")");
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw ConfigError("duplicate vertex in '" + spec + "'");
  if (out.empty()) throw ConfigError("empty vertex set '" + spec + "'");
  return out;
}

Prediction parse_mode(const std::string& spec, Index n) {
  if (spec == "graph") return Prediction::graph();
  if (spec.rfind("vertex:", 0) == 0) {
    auto v = parse_vertex_set(spec.substr(7), n);
    if (v.size() == 1) return Prediction::vertex(v[0]);
  }
  throw ConfigError("mode must be 'graph' or 'vertex:<t>', got '" + spec + "'");
}

nlohmann::json tensor_to_json(const DenseTensor& t) { return {{"dims", t.dims()}, {"values", t.values()}}; }

DenseTensor tensor_from_json(const nlohmann::json& j) {
  try {
    return DenseTensor(j.at("dims").get<std::vector<Index>>(), j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad tensor file: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("bad tensor file: ") + e.what());
  }
}

nlohmann::json count_json(const Count& c) {
  if (c <= std::numeric_limits<std::uint64_t>::max()) return static_cast<std::uint64_t>(c);
  return count_to_string(c);
}

}  // namespace irlab::cli
