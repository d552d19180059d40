// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace matwalk::io {

// Locale-independent shortest-round-trip formatting; identical bytes for
// identical doubles on every thread count.
std::string format_double(double x);

// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  [[nodiscard]] const std::string& content() const { return buf_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::string buf_;
  std::size_t n_cols_ = 0;
};

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace matwalk::io
