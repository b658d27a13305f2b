/**
 * @file io.hpp
 * @brief Small CSV/text helpers shared by ingest and the CLI writers.
 */
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "streamgov/types.hpp"

namespace streamgov::io {

/// 17 significant digits: round-trips exactly and prints equal doubles identically.
std::string format_double(double value);

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_field(std::string_view field);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// n x n matrix with a header row of labels (one column per label, no row label column).
void write_labeled_matrix(const std::filesystem::path& path, std::span<const std::string> labels, const Matrix& m);

}  // namespace streamgov::io
