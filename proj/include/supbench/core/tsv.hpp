#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace supbench::tsv {

std::vector<std::string> split(std::string_view line, char sep = '\t');

// Fixed 6-decimal formatting; the single format keeps emitted files
// byte-stable across runs.
std::string format_number(double v);

// Round-trippable formatting for sidecar min/max files.
std::string format_exact(double v);

std::string format_optional(const std::optional<double>& v);

double parse_number(const std::string& s, const std::string& context);

// Reads a TSV file; lines starting with '#' are returned separately.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::filesystem::path& path);

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);

std::string join(const std::vector<std::string>& fields, char sep = '\t');

}  // namespace supbench::tsv
