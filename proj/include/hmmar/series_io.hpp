#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hmmar {

/// "%.17g" rendering used by every output file.
std::string format_double(double value);

/// Series CSV: header `y` (optionally `y,z`), one observation per line.
std::string series_to_csv(const std::vector<double>& y,
                          const std::optional<std::vector<std::size_t>>& z = std::nullopt);

/// Reads the `y` column of a series CSV. Throws hmmar::Error on malformed input.
std::vector<double> parse_series_csv(const std::string& text);
std::vector<double> load_series(const std::string& path);

std::string read_file(const std::string& path);

/// Writes to `<path>.tmp` then renames over `path`. Throws IoError on failure.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace hmmar
