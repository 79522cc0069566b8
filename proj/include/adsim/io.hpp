#pragma once

#include <concepts>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adsim {

/// File-system failures (missing input, unwritable output).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

/// Comma-separated, '.' decimal, LF line endings, header row first.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            std::initializer_list<std::string_view> header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double x);
  template <std::integral T>
  CsvWriter& cell(T x) {
    return cell(std::string_view(std::to_string(x)));
  }
  void end_row();
  void close();

 private:
  void separator();

  std::filesystem::path path_;
  std::ofstream out_;
  bool row_started_ = false;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws IoError if absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a headered CSV file written in the dialect above.
CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

/// Strict numeric parsers; throw std::invalid_argument on junk.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

void ensure_directory(const std::filesystem::path& dir);

}  // namespace adsim
