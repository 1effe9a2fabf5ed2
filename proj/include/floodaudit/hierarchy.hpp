#pragma once

// Child -> parent region mapping for nested census geographies.
// Primary strategy: census id convention, where a child GEOID extends
// its parent's GEOID by a suffix. Fallback: assign the child to the
// parent containing its representative interior point.

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "floodaudit/error.hpp"
#include "floodaudit/region.hpp"

namespace floodaudit {

enum class HierarchyMethod { prefix, containment };

struct Hierarchy {
  // child index (in the child RegionSet) -> parent index
  std::vector<std::size_t> parent_of;
  std::vector<HierarchyMethod> method;

  // per parent: sum of child areas / parent polygon area; geometry-noise
  // diagnostic, not an error (indexed like the parent RegionSet,
  // ratio 0 for childless parents)
  std::vector<double> child_area_ratio;
};

inline Hierarchy build_hierarchy(const RegionSet& children, const RegionSet& parents) {
  Hierarchy h;
  h.parent_of.assign(children.size(), SIZE_MAX);
  h.method.assign(children.size(), HierarchyMethod::prefix);

  // longest parent id that is a proper prefix of the child id wins
  std::vector<std::size_t> order(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return parents[a].id.size() > parents[b].id.size();
  });

  std::vector<std::string> unmapped;
  for (std::size_t c = 0; c < children.size(); ++c) {
    const std::string& cid = children[c].id;
    for (std::size_t p : order) {
      const std::string& pid = parents[p].id;
      if (cid.size() > pid.size() && cid.compare(0, pid.size(), pid) == 0) {
        h.parent_of[c] = p;
        h.method[c] = HierarchyMethod::prefix;
        break;
      }
    }
    if (h.parent_of[c] != SIZE_MAX) continue;

    Point rep = representative_point(children[c].geometry);
    for (std::size_t p = 0; p < parents.size(); ++p) {
      if (point_in_multipolygon(rep, parents[p].geometry)) {
        h.parent_of[c] = p;
        h.method[c] = HierarchyMethod::containment;
        break;
      }
    }
    if (h.parent_of[c] == SIZE_MAX) unmapped.push_back(cid);
  }

  if (!unmapped.empty()) {
    std::ostringstream msg;
    msg << unmapped.size() << " child region(s) match no parent by prefix or containment:";
    for (std::size_t i = 0; i < unmapped.size() && i < 8; ++i) msg << ' ' << unmapped[i];
    throw DataError(msg.str());
  }

  std::vector<double> child_area_sum(parents.size(), 0.0);
  for (std::size_t c = 0; c < children.size(); ++c) {
    child_area_sum[h.parent_of[c]] += children[c].area;
  }
  h.child_area_ratio.assign(parents.size(), 0.0);
  for (std::size_t p = 0; p < parents.size(); ++p) {
    h.child_area_ratio[p] = parents[p].area > 0.0 ? child_area_sum[p] / parents[p].area : 0.0;
  }
  return h;
}

}  // namespace floodaudit
