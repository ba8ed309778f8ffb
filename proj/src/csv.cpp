#include "laprep/csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "laprep/error.hpp"

namespace laprep::csv {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string hash_hex(std::uint64_t hash) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf.data());
}

std::filesystem::path versioned_path(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return path;
  const auto parent = path.parent_path();
  const auto stem = path.stem().string();
  const auto ext = path.extension().string();
  for (int version = 1;; ++version) {
    auto candidate = parent / (stem + "." + std::to_string(version) + ext);
    if (!std::filesystem::exists(candidate)) return candidate;
  }
}

Writer::Writer(const std::filesystem::path& path, std::string_view config_hash)
    : out_(path, std::ios::out | std::ios::trunc), path_(path) {
  if (!out_) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  if (!config_hash.empty()) out_ << "# config_hash=" << config_hash << '\n';
}

void Writer::header(const std::vector<std::string>& columns) { row(columns); }

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i != 0) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) fail(ErrorCode::Io, "write failed on " + path_.string());
}

void Writer::row_values(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void append_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::string joined;
  for (std::size_t i = 0; i < header.size(); ++i) joined += (i ? "," : "") + header[i];
  const bool fresh = !std::filesystem::exists(path);
  if (!fresh) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (first != joined) fail(ErrorCode::Io, "header mismatch appending to " + path.string());
  }
  std::ofstream out(path, std::ios::out | std::ios::app);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for appending");
  if (fresh) out << joined << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed on " + path.string());
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix,
                  const std::vector<std::string>& header, std::string_view config_hash) {
  Writer w(path, config_hash);
  if (!header.empty()) w.header(header);
  std::vector<double> row(static_cast<std::size_t>(matrix.cols()));
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) row[static_cast<std::size_t>(c)] = matrix(r, c);
    w.row_values(row);
  }
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    std::vector<double> values;
    bool numeric = true;
    for (const auto& cell : cells) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header
      fail(ErrorCode::Io, "non-numeric row in " + path.string());
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      fail(ErrorCode::Io, "ragged rows in " + path.string());
    }
    rows.push_back(std::move(values));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

}  // namespace laprep::csv
