#include "frachs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace frachs {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
    }
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
    for (const auto& h : header) cell(h);
    end_row();
}

void CsvWriter::separator() {
    if (!fresh_row_) text_ += ',';
    fresh_row_ = false;
}

CsvWriter& CsvWriter::cell(double x) {
    separator();
    text_ += format_double(x);
    return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
    separator();
    text_ += std::to_string(x);
    return *this;
}

CsvWriter& CsvWriter::cell(bool x) {
    separator();
    text_ += x ? "true" : "false";
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& x) {
    separator();
    text_ += x;
    return *this;
}

void CsvWriter::end_row() {
    text_ += '\n';
    fresh_row_ = true;
}

std::string profile_csv(const Profile& f) {
    CsvWriter csv({"zeta", "value"});
    for (int j = 0; j < f.grid().size(); ++j) {
        csv.cell(f.grid().node(j)).cell(f[j]);
        csv.end_row();
    }
    return csv.str();
}

namespace {

double parse_number(const std::string& token, const std::string& where) {
    std::string t = token;
    t.erase(0, t.find_first_not_of(" \t\r"));
    t.erase(t.find_last_not_of(" \t\r") + 1);
    double x = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
        throw std::runtime_error("malformed number '" + token + "' " + where);
    return x;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
    std::vector<double> a, b;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        const std::string where = "at " + path.string() + ":" + std::to_string(lineno);
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw std::runtime_error("expected two columns " + where);
        a.push_back(parse_number(line.substr(0, comma), where));
        b.push_back(parse_number(line.substr(comma + 1), where));
    }
    if (a.empty()) throw std::runtime_error(path.string() + " has no data rows");
    return {a, b};
}

Profile resample_onto(const EFGrid& grid, const std::vector<double>& zeta,
                      const std::vector<double>& values) {
    if (zeta.size() != values.size() || zeta.empty())
        throw std::invalid_argument("resample_onto: sample sizes differ or are empty");
    for (std::size_t i = 0; i + 1 < zeta.size(); ++i)
        if (!(zeta[i + 1] > zeta[i]))
            throw std::invalid_argument("resample_onto: zeta must be strictly increasing");
    Profile out(grid);
    for (int j = 0; j < grid.size(); ++j) {
        const double z = grid.node(j);
        if (z <= zeta.front()) {
            out[j] = values.front();
        } else if (z >= zeta.back()) {
            out[j] = values.back();
        } else {
            const auto hi = static_cast<std::size_t>(
                std::upper_bound(zeta.begin(), zeta.end(), z) - zeta.begin());
            const double w = (z - zeta[hi - 1]) / (zeta[hi] - zeta[hi - 1]);
            out[j] = (1.0 - w) * values[hi - 1] + w * values[hi];
        }
    }
    return out;
}

}  // namespace frachs
