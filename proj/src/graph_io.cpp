#include "igt/graph_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "igt/errors.hpp"

namespace igt {

using nlohmann::json;

namespace {

json matrix_rows(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    out.push_back(std::vector<double>(values.begin() + r * cols, values.begin() + (r + 1) * cols));
  }
  return out;
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

// Returns (rows, cols) and fills values; an empty array yields cols = 0.
std::size_t read_matrix(const json& j, const char* name, std::size_t rows,
                        std::vector<double>& values) {
  if (!j.is_array()) throw ParseError(std::string("field '") + name + "' must be an array");
  if (j.empty()) return 0;
  if (j.size() != rows) {
    throw ParseError(std::string("field '") + name + "' has " + std::to_string(j.size()) +
                     " rows, expected " + std::to_string(rows));
  }
  const std::size_t cols = j[0].size();
  values.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(std::string("field '") + name + "' is ragged");
    }
    for (const auto& v : row) values.push_back(v.get<double>());
  }
  return cols;
}

}  // namespace

json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (auto [u, v] : g.edges) edges.push_back({u, v});
  return json{
      {"n_nodes", g.n_nodes},
      {"edges", std::move(edges)},
      {"node_features", matrix_rows(g.node_features, g.n_nodes, g.feature_dim)},
      {"label", g.label},
      {"invariant_edge_mask", g.invariant_edge_mask},
      {"handcrafted_pse", g.pse_dim ? matrix_rows(g.handcrafted_pse, g.n_nodes, g.pse_dim)
                                    : json::array()},
      {"meta",
       {{"id", g.meta.id},
        {"base_type", to_string(g.meta.base_type)},
        {"motif_type", to_string(g.meta.motif_type)},
        {"split", g.meta.split}}},
  };
}

Graph graph_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("graph record must be a JSON object");
  Graph g;
  try {
    g.n_nodes = field(j, "n_nodes").get<std::size_t>();
    for (const auto& e : field(j, "edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("field 'edges' needs [u, v] pairs");
      g.edges.emplace_back(e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>());
    }
    g.feature_dim = read_matrix(field(j, "node_features"), "node_features", g.n_nodes,
                                g.node_features);
    g.label = field(j, "label").get<std::size_t>();
    g.invariant_edge_mask = field(j, "invariant_edge_mask").get<std::vector<bool>>();
    g.pse_dim = read_matrix(field(j, "handcrafted_pse"), "handcrafted_pse", g.n_nodes,
                            g.handcrafted_pse);
    const auto& meta = field(j, "meta");
    g.meta.id = field(meta, "id").get<std::string>();
    g.meta.base_type = base_type_from_string(field(meta, "base_type").get<std::string>());
    g.meta.motif_type = motif_type_from_string(field(meta, "motif_type").get<std::string>());
    g.meta.split = field(meta, "split").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field type: ") + e.what());
  }
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw ParseError(e.what());
  }
  return g;
}

void write_graphs(const std::filesystem::path& path, const std::vector<Graph>& graphs) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const auto& g : graphs) os << graph_to_json(g).dump() << '\n';
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::vector<Graph> read_graphs(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<Graph> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(graph_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (is) {
    is.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

}  // namespace igt
