#include "regcot/fsio.hpp"

#include "regcot/digest.hpp"
#include "regcot/errors.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace regcot {

namespace fs = std::filesystem;

std::string to_hex(std::uint64_t v) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf.data());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("read failed for '" + path.string() + "'");
  return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string file_checksum(const fs::path& path) { return to_hex(fnv1a(read_text_file(path))); }

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_significant(double v, int digits) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*g", digits, v);
  return std::string(buf.data());
}

double round_significant(double v, int digits) { return std::stod(format_significant(v, digits)); }

}  // namespace regcot
