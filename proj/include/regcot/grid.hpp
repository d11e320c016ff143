#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>

namespace regcot {

template <typename Scalar>
using GridArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary mask, 1 = inside.
using Mask = GridArray<std::uint8_t>;

/// H x W grid of values in [0,1]. Construction validates the range.
class ImageGrid {
 public:
  using Values = GridArray<double>;

  ImageGrid() = default;
  explicit ImageGrid(Values values);
  ImageGrid(Eigen::Index height, Eigen::Index width, double fill = 0.0);

  Eigen::Index height() const noexcept { return values_.rows(); }
  Eigen::Index width() const noexcept { return values_.cols(); }
  Eigen::Index size() const noexcept { return values_.size(); }
  const Values& values() const noexcept { return values_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return values_(r, c); }

  bool same_shape(const ImageGrid& other) const noexcept {
    return height() == other.height() && width() == other.width();
  }
  friend bool operator==(const ImageGrid& a, const ImageGrid& b) {
    return a.same_shape(b) && (a.values_ == b.values_).all();
  }

 private:
  Values values_;
};

/// Activation map bound to exactly one clinical hypothesis.
struct ActivationMap {
  std::string hypothesis_id;
  ImageGrid grid;
};

/// Element-wise masking: image where mask is 1, zero elsewhere.
ImageGrid apply_mask(const ImageGrid& image, const Mask& mask);

// Matrix text format: "H W" header, then H rows of W space-separated reals.
ImageGrid read_grid(const std::filesystem::path& path);
ImageGrid parse_grid(const std::string& text, const std::string& source = "<memory>");
std::string format_grid(const ImageGrid& grid);
std::string format_mask(const Mask& mask);
Mask parse_mask(const std::string& text, const std::string& source = "<memory>");

}  // namespace regcot
