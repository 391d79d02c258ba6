#include "sigabc/util.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "sigabc/error.hpp"
#include "sigabc/parallel.hpp"

namespace sigabc {

static_assert(std::endian::native == std::endian::little,
              "base-64 matrix blobs are little-endian IEEE-754");

int apply_thread_env() {
    if (const char* env = std::getenv("SIGABC_NUM_THREADS")) {
        int n = std::atoi(env);
        set_thread_count(n);
    }
    return thread_count();
}

double median(std::vector<double> values) {
    detail::require(!values.empty(), "median of an empty set");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::string fingerprint(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_exact(double v) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string format_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_double(std::string_view token) {
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
        token.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ValidationError("not a number: '" + std::string(token) + "'");
    return v;
}

std::string base64_encode_doubles(std::span<const double> values) {
    using namespace boost::archive::iterators;
    using Encoder = base64_from_binary<transform_width<const char*, 6, 8>>;
    const char* begin = reinterpret_cast<const char*>(values.data());
    const char* end = begin + values.size_bytes();
    std::string out((Encoder(begin)), Encoder(end));
    out.append((4 - out.size() % 4) % 4, '=');
    return out;
}

std::vector<double> base64_decode_doubles(const std::string& text) {
    using namespace boost::archive::iterators;
    using Decoder = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::string padded = text;
    std::size_t pad = 0;
    while (pad < padded.size() && padded[padded.size() - 1 - pad] == '=') {
        padded[padded.size() - 1 - pad] = 'A';
        ++pad;
    }
    std::string bytes((Decoder(padded.cbegin())), Decoder(padded.cend()));
    const std::size_t expected = padded.size() / 4 * 3 - std::min(pad, padded.size() / 4 * 3);
    if (padded.size() % 4 != 0 || bytes.size() < expected)
        throw ValidationError("base-64 blob has a malformed length");
    bytes.resize(expected);
    if (bytes.size() % sizeof(double) != 0)
        throw ValidationError("base-64 blob is not a whole number of doubles");
    std::vector<double> out(bytes.size() / sizeof(double));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace sigabc
