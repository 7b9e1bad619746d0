#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfsgd {

// Shortest decimal form that round-trips a double exactly. Candidates at
// every precision compete on string length, so 100.0 prints as "100" rather
// than the fewer-significant-digits "1e+02".
inline std::string format_double(double v) {
  char best[32];
  std::snprintf(best, sizeof(best), "%.17g", v);
  for (int prec = 1; prec < 17; ++prec) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v && std::strlen(buf) < std::strlen(best)) {
      std::memcpy(best, buf, sizeof(buf));
    }
  }
  return best;
}

// Row-oriented CSV writer: header written once, cells joined with commas.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void header(const std::vector<std::string>& names) {
    write_row_(names);
  }

  void row(const std::vector<std::string>& cells) { write_row_(cells); }

 private:
  void write_row_(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file; no quoting dialect (none of our emitters quote).
CsvTable read_csv_table(const std::string& path, bool has_header);

}  // namespace rfsgd
