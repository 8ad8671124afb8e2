// Built-in example registry: the reference coins, their expected verdicts,
// and (for splits) the expected transient projector.  The registry is the
// single source for the shipped fixture files and the reproduce command.
#pragma once

#include <oqw/classify.hpp>
#include <oqw/io.hpp>

#include <optional>
#include <vector>

namespace oqw {

struct RegistryCase {
  std::string id;       // registry key, e.g. "ex5_1b"
  std::string variant;  // sub-case tag; empty for single-case ids
  std::string description;
  VerdictKind expected = VerdictKind::Recurrent;
  std::optional<CMat> expected_transient;  // P_T to match (within 1e-8) when present
  CoinSpecFile spec;

  std::string fixture_name() const {  // e.g. "ex5_1b_case3"
    return variant.empty() ? id : id + "_" + variant;
  }
};

// All cases, in stable registry order.
const std::vector<RegistryCase>& registry();

// All cases for one id; empty if the id is unknown.
std::vector<const RegistryCase*> registry_find(const std::string& id);

// Runs the dispatcher matching the case's coin kind.
Verdict classify_case(const RegistryCase& c, const NumericPolicy& pol = default_policy());

}  // namespace oqw
