#pragma once

#include "regcot/grid.hpp"

#include <vector>

namespace regcot {

struct RegionParams {
  double tau = 0.5;
  int min_area = 1;
};

/// One maximal 4-connected set of mask pixels. `pixels` holds row-major
/// linear indices in increasing order, so pixels.front() is the top-left
/// anchor used for tie-breaking.
struct Component {
  std::vector<Eigen::Index> pixels;
  Eigen::Index height = 0;
  Eigen::Index width = 0;

  Eigen::Index area() const noexcept { return static_cast<Eigen::Index>(pixels.size()); }
  Eigen::Index anchor() const { return pixels.front(); }
  Mask mask() const;
};

struct RegionProposal {
  std::string hypothesis_id;
  Mask mask;
  ImageGrid masked_image;
  Eigen::Index component_area = 0;
};

/// output(p) = 1 iff map(p) >= tau.
Mask threshold_map(const ActivationMap& map, double tau);

/// 4-connected components sorted by area (descending), ties broken by the
/// smaller row-major anchor.
std::vector<Component> extract_components(const Mask& mask);

/// Masks `image` with the largest component of the thresholded map whose
/// area is at least min_area. Throws NoRegionError when none qualifies.
RegionProposal propose_region(const ImageGrid& image, const ActivationMap& map, const RegionParams& params = {});

}  // namespace regcot
