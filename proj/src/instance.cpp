#include "mtest/instance.hpp"

#include <array>

namespace mtest {

namespace {
constexpr std::array<std::pair<Provenance, std::string_view>, 9> kNames{{
    {Provenance::behrend, "behrend"},
    {Provenance::twin_good, "twin_good"},
    {Provenance::twin_bad, "twin_bad"},
    {Provenance::sample_lb, "sample_lb"},
    {Provenance::query_lb, "query_lb"},
    {Provenance::random_metric, "random_metric"},
    {Provenance::random_ultra, "random_ultra"},
    {Provenance::random_tree, "random_tree"},
    {Provenance::corrupted, "corrupted"},
}};
}  // namespace

std::string_view to_string(Provenance p) {
  for (const auto& [k, name] : kNames)
    if (k == p) return name;
  return "unknown";
}

Provenance parse_provenance(std::string_view s) {
  for (const auto& [k, name] : kNames)
    if (name == s) return k;
  throw InvalidArgument("unknown provenance: " + std::string(s));
}

std::vector<Index> GeneratedInstance::inverse_permutation() const {
  std::vector<Index> inv(permutation.size());
  for (std::size_t i = 0; i < permutation.size(); ++i) inv[permutation[i]] = Index(i);
  return inv;
}

nlohmann::json provenance_json(const GeneratedInstance& inst) {
  return nlohmann::json{{"provenance", to_string(inst.provenance)},
                        {"n", inst.matrix.size()},
                        {"params", inst.params},
                        {"permutation", inst.permutation}};
}

}  // namespace mtest
