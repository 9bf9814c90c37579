#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace cbl {

/// Floats are printed with 12 significant digits; the CSV schema of every
/// subcommand is stable (header row always emitted).
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) {
        write_row_(cols);
    }
    void row(const std::vector<std::string>& cells) { write_row_(cells); }

  private:
    void write_row_(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }
    std::ostream& os_;
};

}  // namespace cbl
