#include "supbench/core/tsv.hpp"

#include <cstdio>
#include <fstream>

#include "supbench/core/errors.hpp"

namespace supbench::tsv {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("-");
}

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("expected a number for " + context + ", got '" + s +
                          "'");
  }
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ExecutionError("cannot open table: " + path.string());
  Table table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
    } else {
      table.rows.push_back(split(line));
    }
  }
  return table;
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExecutionError("cannot open for writing: " + path.string());
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw ExecutionError("short write: " + path.string());
}

std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(sep);
    out += fields[i];
  }
  return out;
}

}  // namespace supbench::tsv
