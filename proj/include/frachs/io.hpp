#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "frachs/efgrid.hpp"

namespace frachs {

/// Locale-independent decimal with 17 significant digits; "nan", "inf", "-inf"
/// for non-finite values.
std::string format_double(double x);

/// Writes content to path.tmp and renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Builds a CSV document row by row with fixed numeric formatting.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header);
    CsvWriter& cell(double x);
    CsvWriter& cell(long long x);
    CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
    CsvWriter& cell(bool x);
    CsvWriter& cell(const std::string& x);
    void end_row();
    const std::string& str() const { return text_; }

private:
    void separator();
    std::string text_;
    bool fresh_row_ = true;
};

/// header `zeta,value`, one row per node.
std::string profile_csv(const Profile& f);

/// Two numeric columns after a one-line header.
/// Throws std::runtime_error on unreadable files or malformed rows.
std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(
    const std::filesystem::path& path);

/// Samples (zeta, k) resampled onto the grid: linear interpolation, constant
/// extrapolation. zeta must be strictly increasing.
Profile resample_onto(const EFGrid& grid, const std::vector<double>& zeta,
                      const std::vector<double>& values);

}  // namespace frachs
