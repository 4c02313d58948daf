#pragma once

#include <string>
#include <vector>

namespace ceo_rd::cli {

/// RFC 4180 table: CRLF line endings, fields quoted only when they contain a
/// comma, a double quote or a line break.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  [[nodiscard]] std::size_t columns() const { return header_.size(); }
  [[nodiscard]] std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// 12 significant digits; NaN becomes an empty field.
[[nodiscard]] std::string csv_number(double value);
[[nodiscard]] std::string csv_escape(const std::string& field);

}  // namespace ceo_rd::cli
