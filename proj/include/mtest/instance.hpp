#pragma once

#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtest/matrix.hpp"

namespace mtest {

enum class Provenance {
  behrend,
  twin_good,
  twin_bad,
  sample_lb,
  query_lb,
  random_metric,
  random_ultra,
  random_tree,
  corrupted
};

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

/// A generated matrix plus how it was made. `permutation[i]` is the final
/// index of construction point i, so matrix(perm[i], perm[j]) is the
/// construction-order entry (i, j).
struct GeneratedInstance {
  DistanceMatrix matrix;
  Provenance provenance = Provenance::random_metric;
  nlohmann::json params = nlohmann::json::object();
  std::vector<Index> permutation;

  /// Inverse of `permutation`: construction index of final point k.
  std::vector<Index> inverse_permutation() const;
};

nlohmann::json provenance_json(const GeneratedInstance& inst);

}  // namespace mtest
