#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sgmm::csv {

/// Shortest round-trip decimal form, independent of the global locale.
/// Non-finite values are written as "NA".
std::string format_double(double value);

/// Parses a decimal number; "NA", "nan", "inf" and "-inf" are accepted.
/// Throws ParseError naming line on malformed input.
double parse_double(std::string_view text, std::size_t line);
long long parse_int(std::string_view text, std::size_t line);

/// Splits on commas; no quoting support. Trailing '\r' is dropped.
std::vector<std::string_view> split(std::string_view line);

/// Dense matrix as rows of comma-separated values, no header.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);

}  // namespace sgmm::csv
