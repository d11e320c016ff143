#include "regcot/region.hpp"

#include "regcot/errors.hpp"

#include <algorithm>

namespace regcot {

Mask Component::mask() const {
  Mask out = Mask::Zero(height, width);
  for (Eigen::Index p : pixels) out.data()[p] = 1;
  return out;
}

Mask threshold_map(const ActivationMap& map, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0,1)");
  return (map.grid.values() >= tau).cast<std::uint8_t>();
}

std::vector<Component> extract_components(const Mask& mask) {
  const Eigen::Index h = mask.rows();
  const Eigen::Index w = mask.cols();
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(mask.size()), 0);
  std::vector<Component> components;
  std::vector<Eigen::Index> stack;

  // Row-major scan: each component is discovered at its top-left anchor.
  for (Eigen::Index start = 0; start < mask.size(); ++start) {
    if (!mask.data()[start] || seen[static_cast<std::size_t>(start)]) continue;
    Component comp{{}, h, w};
    seen[static_cast<std::size_t>(start)] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const Eigen::Index p = stack.back();
      stack.pop_back();
      comp.pixels.push_back(p);
      const Eigen::Index r = p / w;
      const Eigen::Index c = p % w;
      const auto visit = [&](Eigen::Index q) {
        if (mask.data()[q] && !seen[static_cast<std::size_t>(q)]) {
          seen[static_cast<std::size_t>(q)] = 1;
          stack.push_back(q);
        }
      };
      if (r > 0) visit(p - w);
      if (r + 1 < h) visit(p + w);
      if (c > 0) visit(p - 1);
      if (c + 1 < w) visit(p + 1);
    }
    std::sort(comp.pixels.begin(), comp.pixels.end());
    components.push_back(std::move(comp));
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const Component& a, const Component& b) { return a.area() > b.area(); });
  return components;
}

RegionProposal propose_region(const ImageGrid& image, const ActivationMap& map, const RegionParams& params) {
  if (!image.same_shape(map.grid)) {
    throw ShapeError("image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                     " vs activation map '" + map.hypothesis_id + "' " + std::to_string(map.grid.height()) + "x" +
                     std::to_string(map.grid.width()));
  }
  if (params.min_area < 1) throw ConfigError("min_area must be positive");
  const auto components = extract_components(threshold_map(map, params.tau));
  // Sorted by area, so the first one either qualifies or nothing does.
  if (components.empty() || components.front().area() < params.min_area) throw NoRegionError(map.hypothesis_id);
  const Component& best = components.front();
  RegionProposal proposal;
  proposal.hypothesis_id = map.hypothesis_id;
  proposal.mask = best.mask();
  proposal.masked_image = apply_mask(image, proposal.mask);
  proposal.component_area = best.area();
  return proposal;
}

}  // namespace regcot
