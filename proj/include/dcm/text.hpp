#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dcm::text {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Locale-independent parse of a whole field; nullopt unless every character is consumed.
std::optional<double> parse_double(std::string_view s);

/// Shortest decimal text that round-trips to the same double.
std::string shortest(double v);

/// Fixed-point text with the given decimals, no grouping, locale-independent.
std::string fixed(double v, int decimals);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Hex-encoded SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace dcm::text
