#include "output.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "nhsta/errors.hpp"

namespace nhsta::cli {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) x = 0.0;  // drop the sign of zero
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    for (const auto& h : header) *this << h;
    end_row();
}

void CsvWriter::field(const std::string& s) {
    if (in_row_ > 0) out_ << ',';
    if (s.find_first_of(",\"\r\n") != std::string::npos) {
        out_ << '"';
        for (char c : s) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << s;
    }
    ++in_row_;
}

CsvWriter& CsvWriter::operator<<(double x) {
    field(fmt(x));
    return *this;
}
CsvWriter& CsvWriter::operator<<(int x) {
    field(std::to_string(x));
    return *this;
}
CsvWriter& CsvWriter::operator<<(std::size_t x) {
    field(std::to_string(x));
    return *this;
}
CsvWriter& CsvWriter::operator<<(const std::string& s) {
    field(s);
    return *this;
}
CsvWriter& CsvWriter::operator<<(cplx z) {
    field(fmt(z.real()));
    field(fmt(z.imag()));
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        std::ostringstream os;
        os << path_.string() << ": row has " << in_row_ << " fields, header has " << columns_;
        throw std::logic_error(os.str());
    }
    out_ << "\r\n";
    in_row_ = 0;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

double CsvTable::number(std::size_t row, int col) const {
    const std::string& s = rows.at(row).at(static_cast<std::size_t>(col));
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("csv: column '" + header[col] + "' row " + std::to_string(row + 1) + ": not a number: " + s);
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string cur;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(cur);
            cur.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !cur.empty()) {
                rec.push_back(cur);
                records.push_back(rec);
            }
            rec.clear();
            cur.clear();
            any = false;
        } else {
            cur += c;
            any = true;
        }
    }
    if (quoted) throw ConfigError("csv: " + path.string() + ": unterminated quote");
    if (any || !cur.empty()) {
        rec.push_back(cur);
        records.push_back(rec);
    }
    if (records.empty()) throw ConfigError("csv: " + path.string() + " is empty");
    CsvTable t;
    t.header = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            throw ConfigError("csv: " + path.string() + ": record " + std::to_string(r + 1) + " has " +
                              std::to_string(records[r].size()) + " fields, expected " +
                              std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace nhsta::cli
