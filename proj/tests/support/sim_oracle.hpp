// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Compares fused trunks with the simulator's record of which detection came
// from which generated trunk component.

#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "trunkfuse/simulate.hpp"

namespace trunkfuse::testing {

struct GroupingScore {
  std::size_t correct = 0;
  std::size_t fused = 0;
  std::size_t expected = 0;  // generated trunks with at least one detection

  double precision() const { return fused ? double(correct) / fused : 1.0; }
  double recall() const { return expected ? double(correct) / expected : 1.0; }
  // Exact trunks over every trunk on either side.
  double accuracy() const {
    const std::size_t denom = fused + expected - correct;
    return denom ? double(correct) / denom : 1.0;
  }
};

// A fused trunk is correct when its components are exactly the detections
// generated for one trunk: same classes, same OOD and ISEG detection indices.
inline GroupingScore score_grouping(const PerturbedDetections& dets,
                                    const std::vector<UnifiedTrunk>& fused) {
  using Key = std::pair<std::optional<std::size_t>, std::optional<std::size_t>>;
  std::map<std::int64_t, std::map<ComponentClass, Key>> expected;
  for (const Correspondence& c : dets.correspondences) {
    if (!c.ood_index && !c.iseg_index) continue;
    expected[c.trunk_id][c.cls] = {c.ood_index, c.iseg_index};
  }
  std::map<std::size_t, std::int64_t> ood_owner;
  std::map<std::size_t, std::int64_t> iseg_owner;
  for (const Correspondence& c : dets.correspondences) {
    if (c.ood_index) ood_owner[*c.ood_index] = c.trunk_id;
    if (c.iseg_index) iseg_owner[*c.iseg_index] = c.trunk_id;
  }

  GroupingScore s;
  s.fused = fused.size();
  s.expected = expected.size();
  std::set<std::int64_t> claimed;
  for (const UnifiedTrunk& t : fused) {
    std::map<ComponentClass, Key> got;
    std::set<std::int64_t> owners;
    bool clutter = false;
    for (ComponentClass cls : kComponentClasses) {
      const auto& c = t.component(cls);
      if (!c) continue;
      got[cls] = {c->ood_index, c->iseg_index};
      if (c->ood_index) {
        auto it = ood_owner.find(*c->ood_index);
        if (it == ood_owner.end()) clutter = true; else owners.insert(it->second);
      }
      if (c->iseg_index) {
        auto it = iseg_owner.find(*c->iseg_index);
        if (it == iseg_owner.end()) clutter = true; else owners.insert(it->second);
      }
    }
    if (clutter || owners.size() != 1) continue;
    const std::int64_t id = *owners.begin();
    if (got == expected[id] && claimed.insert(id).second) ++s.correct;
  }
  return s;
}

}  // namespace trunkfuse::testing
