#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace okbc {

// Error taxonomy: InputError covers bad files/arguments (CLI exit code 1),
// ComputeError covers numeric or internal failures (CLI exit code 2).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

class ComputeError : public Error {
public:
    explicit ComputeError(const std::string& msg) : Error(msg) {}
};

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// All CLI outputs go through here: write to a sibling temp file, then rename.
// A failed run never leaves a partially written artifact behind.
inline void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open file for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw InputError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("rename failed for: " + path);
    }
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return s.substr(b, e - b);
}

// Collapses internal whitespace runs to single spaces and trims the ends.
// Used for duplicate detection, where formatting differences should not count.
inline std::string normalize_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // leading spaces dropped
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            in_space = false;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace okbc
