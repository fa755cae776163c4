#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qnd {

// RFC 4180 table: CRLF line endings, fields quoted when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    CsvTable& row(std::vector<std::string> fields);
    std::string str() const;
    void write(const std::filesystem::path& path) const;
    std::size_t rows() const { return rows_.size(); }

    static std::string escape(const std::string& field);

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_number(double v);

struct SvgSeries {
    std::string name;
    std::vector<double> x, y;
    bool markers = true;  // false draws a line
};

// Minimal SVG 1.1 x/y plot.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series);
void write_text(const std::filesystem::path& path, const std::string& text);

struct Manifest {
    std::string command;
    std::string version;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string config_ini;
    std::map<std::string, std::string> args;     // subcommand-specific flags
    std::vector<std::string> outputs;

    std::string str() const;
};

std::string hex64(std::uint64_t v);

}  // namespace qnd
