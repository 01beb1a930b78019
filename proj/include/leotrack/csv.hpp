#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "leotrack/experiment.hpp"

namespace leotrack {

/// Header line of the metric CSV, without the trailing newline.
const std::string& csv_header();

/// Writes the header and one line per row; reals use 9 significant digits.
void emit_csv(const std::vector<MetricRow>& rows, std::ostream& out);

/// Same, to a file. I/O failures raise std::runtime_error with the OS message.
void emit_csv(const std::vector<MetricRow>& rows, const std::string& path);

/// Inverse of emit_csv.
std::vector<MetricRow> parse_csv(std::istream& in);

}  // namespace leotrack
