#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "roughtail/common.hpp"

namespace roughtail {

/// CSV emitter with deterministic numeric formatting (%.17g round-trips
/// doubles exactly), so identical runs produce byte-identical files.
class CsvWriter {
 public:
  using Field = std::variant<double, std::int64_t, std::string>;

  CsvWriter(const std::string& path, const std::string& provenance_comment,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw Error("cannot open CSV output file: " + path);
    if (!provenance_comment.empty()) out_ << "# " << provenance_comment << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out_ << (i ? "," : "") << columns[i];
    }
    out_ << "\n";
    n_columns_ = columns.size();
  }

  void row(const std::vector<Field>& fields) {
    if (fields.size() != n_columns_) {
      throw Error("CSV row arity mismatch: got " + std::to_string(fields.size()) + ", want " +
                  std::to_string(n_columns_));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      if (const auto* d = std::get_if<double>(&fields[i])) {
        out_ << format_double(*d);
      } else if (const auto* n = std::get_if<std::int64_t>(&fields[i])) {
        out_ << *n;
      } else {
        out_ << std::get<std::string>(fields[i]);
      }
    }
    out_ << "\n";
  }

  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

 private:
  std::ofstream out_;
  std::size_t n_columns_ = 0;
};

}  // namespace roughtail
