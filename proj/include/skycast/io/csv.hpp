#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace skycast::io {

/// Shortest decimal text that round-trips a double exactly.
std::string format_double(double value);
/// Fixed-precision rendering for human-facing report columns.
std::string format_fixed(double value, int digits);

/// Minimal CSV writer; fields are never quoted, so they must not contain commas.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    /// Lines emitted before the header, each prefixed with "# ".
    void comment(const std::string& line);
    void row(std::vector<std::string> fields);

    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::string> comments_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

class CsvTable {
public:
    static CsvTable parse(const std::string& text);
    static CsvTable load(const std::filesystem::path& path);

    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    const std::string& get(std::size_t row, const std::string& column) const;
    std::size_t column(const std::string& name) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace skycast::io
