#pragma once

#include <string>

#include "hetfx/types.hpp"

namespace hetfx {

enum class OutputFormat : std::uint8_t { json, csv, text };

// Parses "json" | "csv" | "text" (case-sensitive). Throws ParseError.
OutputFormat parse_output_format(const std::string& name);

// Reads an RFC-4180-style CSV (header row required, UTF-8, quoted fields
// with "" escapes, LF or CRLF endings) and assembles the mapped columns
// into a validated Dataset, preserving row order. Throws MissingColumn
// when a mapped name is absent from the header, ParseError naming the
// 1-based data row and column for malformed cells, IoError on unreadable
// files, and propagates dataset validation errors.
Dataset read_csv(const std::string& path, const ColumnMap& map);

// Writes a dataset as CSV with header Y,D,Z,X (or X1..Xk for multiple
// covariate coordinates). Doubles are written round-trip exact.
void write_dataset_csv(const Dataset& data, const std::string& path);

// Report serialization. JSON embeds the full resolved configuration and
// seed and round-trips to identical values; text mode prints the
// statistic, p-value, critical values, n and seed.
std::string serialize_report(const TestReport& report, OutputFormat format);
TestReport parse_report_json(const std::string& text);

// Rejection-rate table serialization. The CSV layout pivots to one row
// per (n, pz) and one column per (alpha, rho) pair; when the table mixes
// several designs or gamma values those appear as extra row keys.
std::string serialize_table(const RejectionTable& table, OutputFormat format);

// Writes `content` to `path` ("-" for stdout). Throws IoError.
void write_output(const std::string& path, const std::string& content);

}  // namespace hetfx
