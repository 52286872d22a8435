#include "feederlab/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "feederlab/error.hpp"

namespace feederlab::csv {

std::string format(double value) {
	char buf[64];
	auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, kPrecision);
	return std::string(buf, res.ptr);
}

double quantize(double value) {
	const std::string s = format(value);
	return parse_double(s, 0);
}

double parse_double(std::string_view field, std::size_t line) {
	while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
		field.remove_prefix(1);
	while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
		field.remove_suffix(1);
	if (!field.empty() && field.front() == '+')
		field.remove_prefix(1);
	double v = 0.0;
	auto res = std::from_chars(field.data(), field.data() + field.size(), v);
	if (res.ec != std::errc() || res.ptr != field.data() + field.size())
		throw InputError("line " + std::to_string(line) + ": cannot parse number '" + std::string(field) + "'");
	return v;
}

std::size_t Table::column(std::string_view name) const {
	for (std::size_t i = 0; i < header.size(); ++i)
		if (header[i] == name)
			return i;
	throw InputError("missing CSV column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
	std::vector<std::string> out;
	std::string cur;
	for (char c : line) {
		if (c == ',') {
			out.push_back(cur);
			cur.clear();
		} else if (c != '\r') {
			cur.push_back(c);
		}
	}
	out.push_back(cur);
	return out;
}

} // namespace

Table read(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open '" + path.string() + "'");
	Table t;
	std::string line;
	std::size_t n = 0;
	while (std::getline(in, line)) {
		++n;
		if (n == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
			line.erase(0, 3);
		if (line.empty() || line == "\r" || line.front() == '#')
			continue;
		auto fields = split(line);
		if (t.header.empty()) {
			t.header = std::move(fields);
			continue;
		}
		if (fields.size() != t.header.size())
			throw InputError("line " + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
			                 " fields, got " + std::to_string(fields.size()));
		t.rows.push_back(std::move(fields));
		t.line_numbers.push_back(n);
	}
	if (t.header.empty())
		throw InputError("'" + path.string() + "' is empty");
	return t;
}

void write_provenance(std::ostream& os, std::string_view scenario_hash) {
	if (!scenario_hash.empty())
		os << "# scenario " << scenario_hash << '\n';
}

} // namespace feederlab::csv
