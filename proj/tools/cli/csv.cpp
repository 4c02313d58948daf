#include "csv.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ceo_rd::cli {

std::string csv_number(double value) {
  if (std::isnan(value)) return "";
  return fmt::format("{:.12g}", value);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (const char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string CsvTable::str() const {
  std::string text;
  auto emit = [&text](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) text += ',';
      text += csv_escape(row[i]);
    }
    text += "\r\n";
  };
  emit(header_);
  for (const auto& row : rows_) {
    if (row.size() != header_.size()) {
      throw std::logic_error("CSV row has " + std::to_string(row.size()) + " fields, header has " +
                             std::to_string(header_.size()));
    }
    emit(row);
  }
  return text;
}

}  // namespace ceo_rd::cli
