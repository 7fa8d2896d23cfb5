#include "skycast/io/container.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "skycast/core/error.hpp"
#include "skycast/core/hash.hpp"

namespace skycast::io {

static_assert(std::endian::native == std::endian::little, "container assumes a little-endian host");

std::size_t Segment::elements() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

std::size_t Descriptor::elements() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.elements();
    return n;
}

std::string Descriptor::to_text() const {
    std::ostringstream out;
    out << "format: skycast-f32\n"
        << "dtype: float32\n"
        << "byte_order: little\n"
        << "order: row-major\n";
    for (const auto& s : segments) {
        out << "segment: " << s.name << "\n  shape:";
        for (int d : s.shape) out << ' ' << d;
        out << "\n  axes:";
        for (const auto& a : s.axes) out << ' ' << a;
        out << '\n';
    }
    return out.str();
}

Descriptor Descriptor::parse(const std::string& text) {
    Descriptor desc;
    std::istringstream in(text);
    std::string line;
    bool seen_format = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "format:") {
            std::string v;
            ls >> v;
            if (v != "skycast-f32") throw InputError("unsupported container format '" + v + "'");
            seen_format = true;
        } else if (key == "segment:") {
            Segment s;
            ls >> s.name;
            desc.segments.push_back(std::move(s));
        } else if (key == "shape:") {
            if (desc.segments.empty()) throw InputError("descriptor shape before segment");
            int d;
            while (ls >> d) desc.segments.back().shape.push_back(d);
        } else if (key == "axes:") {
            if (desc.segments.empty()) throw InputError("descriptor axes before segment");
            std::string a;
            while (ls >> a) desc.segments.back().axes.push_back(a);
        }
    }
    if (!seen_format) throw InputError("descriptor missing format line");
    return desc;
}

void write_f32(const std::filesystem::path& path, std::span<const double> values) {
    std::vector<float> buf(values.begin(), values.end());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw RuntimeFailure("short write to " + path.string());
}

std::vector<double> read_f32(const std::filesystem::path& path, std::size_t expected_elements) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != expected_elements * sizeof(float))
        throw InputError(path.string() + ": expected " + std::to_string(expected_elements * sizeof(float)) +
                         " bytes, found " + std::to_string(bytes));
    in.seekg(0);
    std::vector<float> buf(expected_elements);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    return {buf.begin(), buf.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string bytes_hash(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(bytes)));
    return buf;
}

std::string file_hash(const std::filesystem::path& path) { return bytes_hash(read_text(path)); }

}  // namespace skycast::io
