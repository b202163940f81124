#include "mtest/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "mtest/parallel.hpp"

namespace mtest {

std::string_view to_string(SkeletonKind k) { return k == SkeletonKind::ultra ? "ultra" : "tree"; }

SkeletonKind parse_skeleton_kind(std::string_view s) {
  if (s == "ultra") return SkeletonKind::ultra;
  if (s == "tree") return SkeletonKind::tree;
  throw InvalidArgument("unknown skeleton kind: " + std::string(s));
}

std::string_view to_string(PartClass c) {
  switch (c) {
    case PartClass::easy: return "easy";
    case PartClass::versatile_proxy: return "versatile_proxy";
    case PartClass::active: return "active";
  }
  return "unknown";
}

std::string_view to_string(CorruptionClass c) {
  switch (c) {
    case CorruptionClass::none: return "none";
    case CorruptionClass::separator_corruption: return "separator_corruption";
    case CorruptionClass::easy_to_detect: return "easy_to_detect";
  }
  return "unknown";
}

nlohmann::json to_json(const SkeletonState& s) {
  nlohmann::json parts = nlohmann::json::array();
  for (std::size_t p = 0; p < s.parts.size(); ++p)
    parts.push_back({{"members", s.parts[p]}, {"class", to_string(s.part_classes[p])}});
  nlohmann::json j{{"S", s.S},
                   {"kind", to_string(s.kind)},
                   {"consistent", s.consistent},
                   {"inconsistent_points", s.inconsistent_points},
                   {"parts", parts},
                   {"pivot", s.pivot ? nlohmann::json(*s.pivot) : nlohmann::json(nullptr)},
                   {"sc_count", s.sc_counted ? nlohmann::json(s.sc_count) : nlohmann::json(nullptr)},
                   {"ec_count", s.ec_count},
                   {"active_entries", s.active_entries},
                   {"active_mass", s.active_mass}};
  return j;
}

namespace {

bool ultra_violates(const DistanceMatrix& m, Index a, Index b, Index c) {
  return is_violating_ultra_triple(m(a, b), m(a, c), m(b, c));
}

bool tree_violates(const DistanceMatrix& m, Index a, Index b, Index c, Index d) {
  return is_violating_tree_quadruple(m(a, b), m(a, c), m(a, d), m(b, c), m(b, d), m(c, d));
}

// Shared part classification. `ec(j,k)` is the ordered easy-to-detect test;
// tree kind reads values through the pivot mask when S is non-empty.
template <class Ec>
PartClass classify_with(const DistanceMatrix& m, std::span<const Index> part, double eps,
                        SkeletonKind kind, std::optional<Index> pivot, Ec ec,
                        std::uint64_t* ec_out) {
  const std::size_t p = part.size();
  std::uint64_t ec_count = 0;
  std::unordered_map<double, std::uint64_t> freq;
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b) {
      const Index j = part[a], k = part[b];
      if (ec(j, k)) {
        ec_count += 2;
        continue;
      }
      double v = m(j, k);
      if (kind == SkeletonKind::tree && pivot) v = v - m(*pivot, j) - m(*pivot, k);
      freq[v] += 2;
    }
  if (ec_out) *ec_out = ec_count;
  const std::uint64_t off = std::uint64_t(p) * (p - 1);
  if (off > 0 && 2 * ec_count >= off) return PartClass::easy;
  std::uint64_t r1 = 0;
  for (const auto& [v, c] : freq) r1 = std::max(r1, c);
  const double deficit = double(std::uint64_t(p) * p - r1);
  const double threshold = double(p) * eps * double(m.size()) / 2.0;
  return deficit < threshold ? PartClass::versatile_proxy : PartClass::active;
}

}  // namespace

// ---------------------------------------------------------------------------
// SkeletonBuilder

SkeletonBuilder::SkeletonBuilder(const DistanceMatrix& m, SkeletonKind kind)
    : m_(m),
      kind_(kind),
      n_(m.size()),
      in_s_(m.size(), false),
      consistent_(m.size(), true),
      part_(m.size(), 0),
      ec_bound_(m.size(), 0.0) {}

void SkeletonBuilder::add(Index i) {
  if (i >= n_) throw std::out_of_range("SkeletonBuilder::add");
  if (in_s_[i]) return;
  const std::vector<Index>& S = order_;
  const std::size_t s = S.size();

  if (s_consistent_) {
    if (kind_ == SkeletonKind::ultra) {
      for (std::size_t a = 0; a < s && s_consistent_; ++a)
        for (std::size_t b = a + 1; b < s; ++b)
          if (ultra_violates(m_, i, S[a], S[b])) {
            s_consistent_ = false;
            break;
          }
    } else {
      for (std::size_t a = 0; a < s && s_consistent_; ++a)
        for (std::size_t b = a + 1; b < s && s_consistent_; ++b)
          for (std::size_t c = b + 1; c < s; ++c)
            if (tree_violates(m_, i, S[a], S[b], S[c])) {
              s_consistent_ = false;
              break;
            }
    }
  }

  std::map<std::pair<std::uint32_t, double>, std::uint32_t> relabel;
  for (Index j = 0; j < n_; ++j) {
    if (in_s_[j] || j == i) continue;
    const double dji = m_(j, i);
    if (consistent_[j]) {
      if (kind_ == SkeletonKind::ultra) {
        for (std::size_t a = 0; a < s; ++a)
          if (ultra_violates(m_, j, i, S[a])) {
            consistent_[j] = false;
            break;
          }
      } else {
        for (std::size_t a = 0; a < s && consistent_[j]; ++a)
          for (std::size_t b = a + 1; b < s; ++b)
            if (tree_violates(m_, j, i, S[a], S[b])) {
              consistent_[j] = false;
              break;
            }
      }
    }

    // Refine the partition by the new probe coordinate.
    if (kind_ == SkeletonKind::ultra || s > 0) {
      const double key = kind_ == SkeletonKind::ultra ? dji : dji - m_(j, pivot_);
      auto [it, fresh] = relabel.try_emplace({part_[j], key}, next_label_);
      if (fresh) ++next_label_;
      part_[j] = it->second;
    }

    if (kind_ == SkeletonKind::ultra) {
      ec_bound_[j] = s == 0 ? dji : std::min(ec_bound_[j], dji);
    } else {
      for (std::size_t a = 0; a < s; ++a) {
        const Index v = S[a];
        const double val = m_(i, v) - dji - m_(j, v);
        ec_bound_[j] = (s == 1 && a == 0) ? val : std::max(ec_bound_[j], val);
      }
    }
  }

  in_s_[i] = true;
  order_.push_back(i);
  pivot_ = s == 0 ? i : std::min(pivot_, i);
  ec_bound_valid_ = kind_ == SkeletonKind::ultra ? order_.size() >= 1 : order_.size() >= 2;
}

bool SkeletonBuilder::easy_to_detect(Index j, Index k) const {
  if (!ec_bound_valid_) return false;
  if (kind_ == SkeletonKind::ultra) return m_(j, k) > ec_bound_[j];
  return m_(j, k) + ec_bound_[j] > m_(k, pivot_) - m_(j, pivot_);
}

std::vector<std::vector<Index>> SkeletonBuilder::current_parts() const {
  std::unordered_map<std::uint32_t, std::size_t> slot;
  std::vector<std::vector<Index>> parts;
  for (Index j = 0; j < n_; ++j) {
    if (in_s_[j] || !consistent_[j]) continue;
    auto [it, fresh] = slot.try_emplace(part_[j], parts.size());
    if (fresh) parts.emplace_back();
    parts[it->second].push_back(j);
  }
  return parts;  // members ascending, parts ordered by first member
}

PartClass SkeletonBuilder::classify(std::span<const Index> part, double eps,
                                    std::uint64_t* ec_out) const {
  std::optional<Index> pivot;
  if (!order_.empty()) pivot = pivot_;
  return classify_with(
      m_, part, eps, kind_, pivot, [this](Index j, Index k) { return easy_to_detect(j, k); },
      ec_out);
}

SkeletonState SkeletonBuilder::state(const SkeletonOptions& opt) const {
  SkeletonState st;
  st.S = order_;
  std::sort(st.S.begin(), st.S.end());
  st.kind = kind_;
  st.consistent = s_consistent_;
  for (Index j = 0; j < n_; ++j)
    if (!in_s_[j] && !consistent_[j]) st.inconsistent_points.push_back(j);
  st.parts = current_parts();
  if (kind_ == SkeletonKind::tree && !order_.empty()) st.pivot = pivot_;
  std::uint64_t active_points = 0;
  for (const auto& part : st.parts) {
    std::uint64_t ec = 0;
    const PartClass c = classify(part, opt.eps, &ec);
    st.part_classes.push_back(c);
    st.ec_count += ec;
    if (c == PartClass::active) {
      st.active_entries += std::uint64_t(part.size()) * part.size();
      active_points += part.size();
    }
  }
  st.active_mass = n_ ? double(active_points) / double(n_) : 0.0;

  if (opt.count_sc) {
    st.sc_counted = true;
    for (Index j = 0; j < n_; ++j) {
      if (in_s_[j] || !consistent_[j]) continue;
      for (Index k = j + 1; k < n_; ++k) {
        if (in_s_[k] || !consistent_[k] || part_[j] == part_[k]) continue;
        if (classify_corruption_pair(m_, order_, j, k, kind_) ==
            CorruptionClass::separator_corruption)
          st.sc_count += 2;
      }
    }
  }
  return st;
}

std::uint64_t SkeletonBuilder::active_entries(double eps) const {
  std::uint64_t total = 0;
  for (const auto& part : current_parts())
    if (classify(part, eps, nullptr) == PartClass::active)
      total += std::uint64_t(part.size()) * part.size();
  return total;
}

SkeletonState build_skeleton(const DistanceMatrix& m, std::span<const Index> S,
                             SkeletonKind kind, const SkeletonOptions& opt) {
  SkeletonBuilder b(m, kind);
  for (Index i : S) b.add(i);
  return b.state(opt);
}

// ---------------------------------------------------------------------------
// Direct reference scans

bool is_consistent_set(const DistanceMatrix& m, std::span<const Index> S, SkeletonKind kind) {
  const std::size_t s = S.size();
  if (kind == SkeletonKind::ultra) {
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = a + 1; b < s; ++b)
        for (std::size_t c = b + 1; c < s; ++c)
          if (ultra_violates(m, S[a], S[b], S[c])) return false;
    return true;
  }
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a + 1; b < s; ++b)
      for (std::size_t c = b + 1; c < s; ++c)
        for (std::size_t d = c + 1; d < s; ++d)
          if (tree_violates(m, S[a], S[b], S[c], S[d])) return false;
  return true;
}

namespace {

bool point_consistent_direct(const DistanceMatrix& m, std::span<const Index> S, Index j,
                             SkeletonKind kind) {
  const std::size_t s = S.size();
  if (kind == SkeletonKind::ultra) {
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = a + 1; b < s; ++b)
        if (ultra_violates(m, j, S[a], S[b])) return false;
    return true;
  }
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a + 1; b < s; ++b)
      for (std::size_t c = b + 1; c < s; ++c)
        if (tree_violates(m, j, S[a], S[b], S[c])) return false;
  return true;
}

bool same_part_direct(const DistanceMatrix& m, std::span<const Index> S, Index j, Index k,
                      SkeletonKind kind) {
  if (kind == SkeletonKind::ultra) {
    for (Index i : S)
      if (m(j, i) != m(k, i)) return false;
    return true;
  }
  for (Index u : S)
    for (Index v : S)
      if (m(j, u) - m(j, v) != m(k, u) - m(k, v)) return false;
  return true;
}

// Scans for a witness; returns the class and fills `witness` with the S
// indices involved.
CorruptionClass scan_pair(const DistanceMatrix& m, std::span<const Index> S, Index j, Index k,
                          SkeletonKind kind, std::vector<Index>& witness) {
  const bool same = same_part_direct(m, S, j, k, kind);
  const double djk = m(j, k);
  if (kind == SkeletonKind::ultra) {
    for (Index i : S) {
      const double a = m(i, j), b = m(i, k);
      if (!same && a != b && djk != std::max(a, b)) {
        witness = {i};
        return CorruptionClass::separator_corruption;
      }
      if (same && djk > a && a == b) {
        witness = {i};
        return CorruptionClass::easy_to_detect;
      }
    }
    return CorruptionClass::none;
  }
  for (std::size_t x = 0; x < S.size(); ++x)
    for (std::size_t y = 0; y < S.size(); ++y) {
      if (x == y) continue;
      const Index u = S[x], v = S[y];
      const double juv = m(j, u) + m(k, v);
      const double jvu = m(j, v) + m(k, u);
      if (!same && m(j, u) - m(j, v) != m(k, u) - m(k, v) && djk + m(u, v) != std::max(juv, jvu)) {
        witness = {u, v};
        return CorruptionClass::separator_corruption;
      }
      if (same && djk + m(u, v) > juv && juv == jvu) {
        witness = {u, v};
        return CorruptionClass::easy_to_detect;
      }
    }
  return CorruptionClass::none;
}

void require_pair(const DistanceMatrix& m, std::span<const Index> S, Index j, Index k,
                  SkeletonKind kind) {
  if (j == k) throw InvalidArgument("corruption pair needs j != k");
  for (Index i : S)
    if (i == j || i == k) throw InvalidArgument("corruption pair must lie outside S");
  if (!point_consistent_direct(m, S, j, kind) || !point_consistent_direct(m, S, k, kind))
    throw InvalidArgument("corruption pair contains an inconsistent point");
}

}  // namespace

CorruptionClass classify_corruption_pair(const DistanceMatrix& m, std::span<const Index> S,
                                         Index j, Index k, SkeletonKind kind) {
  require_pair(m, S, j, k, kind);
  std::vector<Index> w;
  return scan_pair(m, S, j, k, kind, w);
}

std::optional<Violation> corruption_witness(const DistanceMatrix& m, std::span<const Index> S,
                                            Index j, Index k, SkeletonKind kind) {
  require_pair(m, S, j, k, kind);
  std::vector<Index> w;
  if (scan_pair(m, S, j, k, kind, w) == CorruptionClass::none) return std::nullopt;
  w.push_back(j);
  w.push_back(k);
  return make_violation(m, kind == SkeletonKind::ultra ? ViolationKind::ultra : ViolationKind::tree,
                        w);
}

PartClass classify_part(const DistanceMatrix& m, std::span<const Index> S,
                        std::span<const Index> part, double eps, SkeletonKind kind) {
  std::optional<Index> pivot;
  if (!S.empty()) pivot = *std::min_element(S.begin(), S.end());
  auto ec = [&](Index j, Index k) {
    std::vector<Index> w;
    return scan_pair(m, S, j, k, kind, w) == CorruptionClass::easy_to_detect;
  };
  return classify_with(m, part, eps, kind, pivot, ec, nullptr);
}

// ---------------------------------------------------------------------------
// Decay

std::vector<std::vector<std::uint64_t>> decay_trajectories(const DistanceMatrix& m,
                                                           SkeletonKind kind,
                                                           const DecayOptions& opt) {
  if (opt.trials == 0) throw InvalidArgument("decay needs at least one trial");
  std::vector<std::vector<std::uint64_t>> out(opt.trials);
  parallel_for(opt.trials, opt.threads, [&](std::size_t t) {
    Rng rng(derive_seed(opt.seed, t));
    SkeletonBuilder b(m, kind);
    auto& row = out[t];
    row.push_back(b.active_entries(opt.eps));
    for (std::size_t step = 1; step <= opt.steps; ++step) {
      b.add(rng.index(m.size()));
      row.push_back(b.active_entries(opt.eps));
    }
  });
  return out;
}

std::vector<DecayRow> decay_experiment(const DistanceMatrix& m, SkeletonKind kind,
                                       const DecayOptions& opt) {
  const auto traj = decay_trajectories(m, kind, opt);
  std::vector<DecayRow> rows;
  const double r = double(traj.size());
  for (std::size_t step = 0; step <= opt.steps; ++step) {
    double sum = 0;
    for (const auto& t : traj) sum += double(t[step]);
    const double mean = sum / r;
    double ss = 0;
    for (const auto& t : traj) ss += (double(t[step]) - mean) * (double(t[step]) - mean);
    const double sd = traj.size() > 1 ? std::sqrt(ss / (r - 1)) : 0.0;
    DecayRow row;
    row.step = step;
    row.mean = mean;
    row.stderr_ = sd / std::sqrt(r);
    row.half_width = 1.96 * row.stderr_;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mtest
