#include "adsim/io.hpp"

#include <charconv>
#include <system_error>

namespace adsim {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open for writing: " + path.string());
  for (auto h : header) cell(h);
  end_row();
}

void CsvWriter::separator() {
  if (row_started_) out_.put(',');
  row_started_ = true;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  separator();
  out_.write(text.data(), static_cast<std::streamsize>(text.size()));
  return *this;
}

CsvWriter& CsvWriter::cell(double x) {
  return cell(std::string_view(format_double(x)));
}

void CsvWriter::end_row() {
  out_.put('\n');
  row_started_ = false;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("write failed: " + path_.string());
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw IoError("missing CSV column: " + std::string(name));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split_csv_line(line);
      first = false;
    } else {
      table.rows.push_back(split_csv_line(line));
    }
  }
  return table;
}

namespace {

template <typename T>
T parse_number(std::string_view text, const char* what) {
  T value{};
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw std::invalid_argument(std::string("not a valid ") + what + ": '" +
                                std::string(text) + "'");
  }
  return value;
}

}  // namespace

double parse_double(std::string_view text) {
  return parse_number<double>(text, "number");
}

std::int64_t parse_int(std::string_view text) {
  return parse_number<std::int64_t>(text, "integer");
}

std::uint64_t parse_uint(std::string_view text) {
  return parse_number<std::uint64_t>(text, "unsigned integer");
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory: " + dir.string());
  }
}

}  // namespace adsim
