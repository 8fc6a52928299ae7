#include "rle/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rle {

void CsvWriter::comment(const std::string& text) {
  buf_ += "# ";
  buf_ += text;
  buf_ += '\n';
}

void CsvWriter::columns(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += cells[i];
  }
  buf_ += '\n';
}

std::string CsvWriter::num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char tmp[40];
  std::snprintf(tmp, sizeof tmp, "%.17g", v);
  return tmp;
}

std::string CsvWriter::num(int v) { return std::to_string(v); }
std::string CsvWriter::num(long v) { return std::to_string(v); }

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  out << buf_;
}

}  // namespace rle
