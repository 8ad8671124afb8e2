// Coin-spec JSON files: one document per coin, complex entries as [re, im]
// pairs, matrices row-major.  Parsing reports structural problems with file
// and field context; numeric validity is a separate concern (validate_coin).
#pragma once

#include <oqw/qcore.hpp>

#include <map>
#include <string>

namespace oqw {

struct CoinSpecFile {
  std::string kind;  // "oqw1d" | "oqw2d" | "ctoqw2d"
  Eigen::Index dimension = 0;
  std::map<std::string, CMat> matrices;                // named, validated shape
  std::map<std::string, std::string> metadata;         // free-form labels
};

// Throws StructuralError with path/field context on any malformed input.
CoinSpecFile load_coin_file(const std::string& path);
CoinSpecFile parse_coin_json(const std::string& text, const std::string& origin);

std::string coin_json(const CoinSpecFile& spec);  // serialized document
void save_coin_file(const CoinSpecFile& spec, const std::string& path);

// Kind-checked conversions.  A missing B defaults to the zero matrix and
// marks the 1D coin non-lazy; an explicitly zero B does the same.
Coin1D to_coin_1d(const CoinSpecFile& spec);
Coin2D to_coin_2d(const CoinSpecFile& spec);
CoinCT to_coin_ct(const CoinSpecFile& spec);

}  // namespace oqw
