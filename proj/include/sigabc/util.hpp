#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sigabc {

/// Median of a copy of the data; even counts average the two central values.
double median(std::vector<double> values);

/// 64-bit FNV-1a digest rendered as 16 lowercase hex digits.
std::string fingerprint(std::string_view bytes);

/// Shortest decimal that round-trips to the same double.
std::string format_exact(double v);

/// Fixed 12-significant-digit rendering used by result tables.
std::string format_g12(double v);

/// Parses a full decimal token; throws ValidationError on junk.
double parse_double(std::string_view token);

std::string base64_encode_doubles(std::span<const double> values);
std::vector<double> base64_decode_doubles(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace sigabc
