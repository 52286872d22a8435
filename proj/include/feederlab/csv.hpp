#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace feederlab::csv {

/// Significant digits used for every floating-point value written to CSV.
inline constexpr int kPrecision = 12;

std::string format(double value);

/// Value as it reads back after a CSV round trip.
double quantize(double value);

double parse_double(std::string_view field, std::size_t line);

struct Table {
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;
	std::vector<std::size_t> line_numbers; // 1-based source line per row

	/// Index of a named column; throws InputError if absent.
	std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file. Lines starting with '#' are comments.
Table read(const std::filesystem::path& path);

/// Writes the '# scenario <hash>' provenance line when the hash is non-empty.
void write_provenance(std::ostream& os, std::string_view scenario_hash);

} // namespace feederlab::csv
