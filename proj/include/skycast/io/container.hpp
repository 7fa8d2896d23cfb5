#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace skycast::io {

/// Named segment of a record file: a row-major float32 array.
struct Segment {
    std::string name;
    std::vector<int> shape;
    std::vector<std::string> axes;

    std::size_t elements() const;
};

/// Sidecar text descriptor for one or more float32 little-endian arrays laid
/// out back to back in a single file.
struct Descriptor {
    std::vector<Segment> segments;

    std::size_t elements() const;
    std::string to_text() const;
    static Descriptor parse(const std::string& text);
};

void write_f32(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f32(const std::filesystem::path& path, std::size_t expected_elements);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// 64-bit FNV-1a of a file's bytes, hex-encoded.
std::string file_hash(const std::filesystem::path& path);
std::string bytes_hash(std::string_view bytes);

}  // namespace skycast::io
