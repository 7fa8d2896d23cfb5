#include "skycast/io/csv.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "skycast/core/error.hpp"
#include "skycast/io/container.hpp"

namespace skycast::io {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw RuntimeFailure("cannot format double");
    return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::comment(const std::string& line) { comments_.push_back(line); }

void CsvWriter::row(std::vector<std::string> fields) {
    if (fields.size() != header_.size())
        throw RuntimeFailure("csv row has " + std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(header_.size()));
    rows_.push_back(std::move(fields));
}

std::string CsvWriter::str() const {
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
        out << '\n';
    };
    for (const auto& c : comments_) out << "# " << c << '\n';
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out.str();
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, str()); }

CsvTable CsvTable::parse(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string field;
        std::istringstream ls(s);
        while (std::getline(ls, field, ',')) out.push_back(field);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (t.header_.empty()) {
            t.header_ = split(line);
            continue;
        }
        auto fields = split(line);
        if (fields.size() != t.header_.size()) throw InputError("csv row width mismatch: " + line);
        t.rows_.push_back(std::move(fields));
    }
    if (t.header_.empty()) throw InputError("csv has no header");
    return t;
}

CsvTable CsvTable::load(const std::filesystem::path& path) { return parse(read_text(path)); }

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    throw InputError("csv column '" + name + "' missing");
}

const std::string& CsvTable::get(std::size_t row, const std::string& column_name) const {
    return rows_.at(row).at(column(column_name));
}

}  // namespace skycast::io
