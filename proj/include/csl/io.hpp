#pragma once

// Small file helpers: atomic writes (temp file + rename) and round-trip-exact
// number formatting for CSV output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "csl/errors.hpp"

namespace csl {

// 17 significant digits: shortest representation that round-trips a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Write content to path via a sibling temp file and rename, so readers never
// observe a half-written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);  // best effort
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("rename to " + path.string() + " failed: " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace csl
