#pragma once

#include <string>
#include <vector>

namespace rle {

/// Minimal deterministic CSV assembler: '#'-prefixed comment lines, one
/// column-header line, data rows. Numbers print with 17 significant digits
/// so repeated runs are byte-identical.
class CsvWriter {
 public:
  void comment(const std::string& text);
  void columns(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& cells);

  static std::string num(double v);
  static std::string num(int v);
  static std::string num(long v);

  const std::string& str() const { return buf_; }
  void write_file(const std::string& path) const;

 private:
  std::string buf_;
};

}  // namespace rle
