#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nhsta/matrix2.hpp"

namespace nhsta::cli {

// Shortest round-trip decimal form; identical inputs give identical bytes.
std::string fmt(double x);

// RFC 4180 writer (CRLF records, quoting only where needed).
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(int x);
    CsvWriter& operator<<(std::size_t x);
    CsvWriter& operator<<(const std::string& s);
    CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
    CsvWriter& operator<<(cplx z);  // two columns: re, im
    void end_row();

    const std::filesystem::path& path() const { return path_; }

private:
    void field(const std::string& s);

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index or -1.
    int column(const std::string& name) const;
    double number(std::size_t row, int col) const;
};

CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace nhsta::cli
