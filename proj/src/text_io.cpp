#include "text_io.hpp"

#include "gembed/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace gembed::text {

std::string format_double(double v) {
    char buf[64];
    const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_skippable(std::string_view line) {
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

void fail(const std::string& path, std::size_t line_no, const std::string& msg) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + msg);
}

double parse_double(std::string_view tok, const std::string& path, std::size_t line_no) {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    const char* begin = tok.data();
    if (begin != end && *begin == '+') {
        ++begin;
    }
    auto res = std::from_chars(begin, end, v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != end) {
        fail(path, line_no, "cannot parse number '" + std::string(tok) + "'");
    }
    if (!std::isfinite(v)) {
        fail(path, line_no, "non-finite value '" + std::string(tok) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view tok, const std::string& path, std::size_t line_no) {
    std::int64_t v = 0;
    const char* end = tok.data() + tok.size();
    auto res = std::from_chars(tok.data(), end, v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != end) {
        fail(path, line_no, "cannot parse integer '" + std::string(tok) + "'");
    }
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

}  // namespace gembed::text
