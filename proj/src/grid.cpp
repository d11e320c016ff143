#include "regcot/grid.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string_view>
#include <vector>

namespace regcot {

namespace {

void check_range(const ImageGrid::Values& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DataError("grid value " + std::to_string(v) + " at index " + std::to_string(i) + " outside [0,1]");
    }
  }
}

std::vector<std::string_view> split_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    lines.push_back(rest.substr(0, nl));
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  return lines;
}

// Splits on single spaces; empty fields are a format error.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto sp = line.find(' ', start);
    fields.push_back(line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  if (field.empty()) return false;
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

GridArray<double> parse_values(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "missing \"H W\" header");
  const auto header = split_fields(lines[0]);
  long h = 0;
  long w = 0;
  if (header.size() != 2 || !parse_number(header[0], h) || !parse_number(header[1], w) || h <= 0 || w <= 0) {
    throw ParseError(source, 1, "header must be two positive integers \"H W\"");
  }
  if (static_cast<long>(lines.size()) < h + 1) {
    throw ParseError(source, lines.size() + 1, "expected " + std::to_string(h) + " rows");
  }
  for (std::size_t extra = static_cast<std::size_t>(h) + 1; extra < lines.size(); ++extra) {
    if (!lines[extra].empty()) throw ParseError(source, extra + 1, "unexpected content after last row");
  }
  GridArray<double> values(h, w);
  for (long r = 0; r < h; ++r) {
    const auto line_no = static_cast<std::size_t>(r) + 2;
    const auto fields = split_fields(lines[static_cast<std::size_t>(r) + 1]);
    if (static_cast<long>(fields.size()) != w) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(w) + " values, found " + std::to_string(fields.size()));
    }
    for (long c = 0; c < w; ++c) {
      double v = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(c)], v)) {
        throw ParseError(source, line_no, "bad number '" + std::string(fields[static_cast<std::size_t>(c)]) + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) throw ParseError(source, line_no, "value outside [0,1]");
      values(r, c) = v;
    }
  }
  return values;
}

}  // namespace

ImageGrid::ImageGrid(Values values) : values_(std::move(values)) {
  if (values_.rows() <= 0 || values_.cols() <= 0) throw ShapeError("grid must be non-empty");
  check_range(values_);
}

ImageGrid::ImageGrid(Eigen::Index height, Eigen::Index width, double fill) {
  if (height <= 0 || width <= 0) throw ShapeError("grid must be non-empty");
  values_ = Values::Constant(height, width, fill);
  check_range(values_);
}

ImageGrid apply_mask(const ImageGrid& image, const Mask& mask) {
  if (mask.rows() != image.height() || mask.cols() != image.width()) {
    throw ShapeError("mask " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) + " vs image " +
                     std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
  return ImageGrid(ImageGrid::Values((mask != 0).select(image.values(), 0.0)));
}

ImageGrid parse_grid(const std::string& text, const std::string& source) {
  return ImageGrid(parse_values(text, source));
}

ImageGrid read_grid(const std::filesystem::path& path) { return parse_grid(read_text_file(path), path.string()); }

std::string format_grid(const ImageGrid& grid) {
  std::string out = std::to_string(grid.height()) + " " + std::to_string(grid.width()) + "\n";
  for (Eigen::Index r = 0; r < grid.height(); ++r) {
    for (Eigen::Index c = 0; c < grid.width(); ++c) {
      if (c > 0) out += ' ';
      out += format_double(grid(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string format_mask(const Mask& mask) {
  std::string out = std::to_string(mask.rows()) + " " + std::to_string(mask.cols()) + "\n";
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) {
      if (c > 0) out += ' ';
      out += mask(r, c) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

Mask parse_mask(const std::string& text, const std::string& source) {
  const auto values = parse_values(text, source);
  if (((values != 0.0) && (values != 1.0)).any()) throw ParseError(source, 1, "mask values must be 0 or 1");
  return values.cast<std::uint8_t>();
}

}  // namespace regcot
