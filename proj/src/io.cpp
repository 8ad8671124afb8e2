#include <oqw/io.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace oqw {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw StructuralError(origin + ": " + what);
}

const std::vector<std::string>& required_names(const std::string& kind, const std::string& origin) {
  static const std::vector<std::string> oqw1d{"L", "R"};
  static const std::vector<std::string> oqw2d{"D1", "D2", "D3", "D4"};
  static const std::vector<std::string> ctoqw2d{"A1", "A2", "A3", "A4", "H"};
  if (kind == "oqw1d") return oqw1d;
  if (kind == "oqw2d") return oqw2d;
  if (kind == "ctoqw2d") return ctoqw2d;
  fail(origin, "unknown kind \"" + kind + "\" (expected oqw1d, oqw2d or ctoqw2d)");
}

bool name_allowed(const std::string& kind, const std::string& name) {
  if (kind == "oqw1d") return name == "L" || name == "B" || name == "R";
  if (kind == "oqw2d") return name == "D1" || name == "D2" || name == "D3" || name == "D4";
  return name == "A1" || name == "A2" || name == "A3" || name == "A4" || name == "H";
}

CMat parse_matrix(const json& arr, Eigen::Index d, const std::string& origin,
                  const std::string& name) {
  const std::string where = "matrix \"" + name + "\"";
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != d)
    fail(origin, where + " must be an array of " + std::to_string(d) + " rows");
  CMat M(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const json& row = arr[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
      fail(origin, where + " row " + std::to_string(i) + " must have " + std::to_string(d) +
                       " entries");
    for (Eigen::Index j = 0; j < d; ++j) {
      const json& ent = row[static_cast<std::size_t>(j)];
      if (!ent.is_array() || ent.size() != 2 || !ent[0].is_number() || !ent[1].is_number())
        fail(origin, where + " entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") must be a two-element [re, im] array of numbers");
      const double re = ent[0].get<double>(), im = ent[1].get<double>();
      if (!std::isfinite(re) || !std::isfinite(im))
        fail(origin, where + " entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") is not finite");
      M(i, j) = Complex(re, im);
    }
  }
  return M;
}

json dump_matrix(const CMat& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      row.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

CoinSpecFile parse_coin_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(origin, std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) fail(origin, "top-level value must be an object");

  CoinSpecFile spec;
  if (!doc.contains("kind") || !doc["kind"].is_string())
    fail(origin, "field \"kind\" must be a string");
  spec.kind = doc["kind"].get<std::string>();
  const auto& names = required_names(spec.kind, origin);

  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer())
    fail(origin, "field \"dimension\" must be an integer");
  const long d = doc["dimension"].get<long>();
  if (d < 1 || d > 64) fail(origin, "dimension must be between 1 and 64");
  spec.dimension = d;

  if (!doc.contains("matrices") || !doc["matrices"].is_object())
    fail(origin, "field \"matrices\" must be an object");
  for (const auto& [name, value] : doc["matrices"].items()) {
    if (!name_allowed(spec.kind, name))
      fail(origin, "matrix \"" + name + "\" is not valid for kind " + spec.kind);
    spec.matrices[name] = parse_matrix(value, spec.dimension, origin, name);
  }
  for (const std::string& name : names)
    if (!spec.matrices.count(name)) fail(origin, "missing required matrix \"" + name + "\"");

  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) fail(origin, "field \"metadata\" must be an object");
    for (const auto& [key, value] : doc["metadata"].items()) {
      if (!value.is_string()) fail(origin, "metadata value \"" + key + "\" must be a string");
      spec.metadata[key] = value.get<std::string>();
    }
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "kind" && key != "dimension" && key != "matrices" && key != "metadata")
      fail(origin, "unknown top-level field \"" + key + "\"");
    (void)value;
  }
  return spec;
}

CoinSpecFile load_coin_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_coin_json(buf.str(), path);
}

std::string coin_json(const CoinSpecFile& spec) {
  json doc;
  doc["kind"] = spec.kind;
  doc["dimension"] = static_cast<long>(spec.dimension);
  json mats;
  // Fixed name order keeps serialized fixtures diff-friendly.
  static const char* order[] = {"L", "B", "R", "D1", "D2", "D3", "D4", "A1", "A2", "A3", "A4", "H"};
  for (const char* name : order) {
    const auto it = spec.matrices.find(name);
    if (it != spec.matrices.end()) mats[name] = dump_matrix(it->second);
  }
  doc["matrices"] = std::move(mats);
  if (!spec.metadata.empty()) {
    json meta;
    for (const auto& [key, value] : spec.metadata) meta[key] = value;
    doc["metadata"] = std::move(meta);
  }
  return doc.dump(2) + "\n";
}

void save_coin_file(const CoinSpecFile& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StructuralError(path + ": cannot open file for writing");
  out << coin_json(spec);
  if (!out) throw StructuralError(path + ": write failed");
}

Coin1D to_coin_1d(const CoinSpecFile& spec) {
  if (spec.kind != "oqw1d")
    throw StructuralError("coin file has kind " + spec.kind + ", expected oqw1d");
  Coin1D c;
  c.L = spec.matrices.at("L");
  c.R = spec.matrices.at("R");
  const auto itB = spec.matrices.find("B");
  if (itB != spec.matrices.end() && itB->second.norm() > 0.0) {
    c.B = itB->second;
    c.lazy = true;
  } else {
    c.B = CMat::Zero(spec.dimension, spec.dimension);
    c.lazy = false;
  }
  return c;
}

Coin2D to_coin_2d(const CoinSpecFile& spec) {
  if (spec.kind != "oqw2d")
    throw StructuralError("coin file has kind " + spec.kind + ", expected oqw2d");
  return {spec.matrices.at("D1"), spec.matrices.at("D2"), spec.matrices.at("D3"),
          spec.matrices.at("D4")};
}

CoinCT to_coin_ct(const CoinSpecFile& spec) {
  if (spec.kind != "ctoqw2d")
    throw StructuralError("coin file has kind " + spec.kind + ", expected ctoqw2d");
  return make_coin_ct(spec.matrices.at("A1"), spec.matrices.at("A2"), spec.matrices.at("A3"),
                      spec.matrices.at("A4"), spec.matrices.at("H"));
}

}  // namespace oqw
