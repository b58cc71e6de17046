#ifndef RENORMLAB_IO_HPP
#define RENORMLAB_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace renormlab {

/// 17 significant digits, '.' separator, locale independent.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
}

}  // namespace renormlab

#endif  // RENORMLAB_IO_HPP
