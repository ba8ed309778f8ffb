#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace laprep::csv {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string hash_hex(std::uint64_t hash);

/// `path` itself if free, otherwise the first free `stem.N.ext`.
std::filesystem::path versioned_path(const std::filesystem::path& path);

class Writer {
 public:
  /// Opens (truncating) `path`; writes `# config_hash=<hash>` first when hash
  /// is non-empty.
  Writer(const std::filesystem::path& path, std::string_view config_hash);

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

/// Appends rows to `path`, writing the header only when the file is new.
/// The header of an existing file must match.
void append_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix,
                  const std::vector<std::string>& header, std::string_view config_hash);

/// Reads a numeric CSV written by write_matrix (comment and header lines skipped).
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace laprep::csv
