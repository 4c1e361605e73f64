#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace monah {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
/// Fixed-point with `decimals` digits; "-0.0000" is normalised to "0.0000".
std::string format_fixed(double v, int decimals);
std::optional<double> parse_double(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
/// ASCII lowercase; bytes >= 0x80 are left untouched so UTF-8 survives.
std::string to_lower_ascii(std::string_view s);

/// Worker count: MONAH_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Results must be
/// written to per-index slots; the first exception is rethrown after joining.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace monah
