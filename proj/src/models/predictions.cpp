#include "supbench/models/predictions.hpp"

#include <string>

#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"

namespace supbench::models {

namespace {

std::string encode_detections(const std::vector<Detection>& detections) {
  if (detections.empty()) return "-";
  std::string out;
  for (const Detection& d : detections) {
    if (!out.empty()) out += ';';
    out += tsv::format_exact(d.box.x1) + ',' + tsv::format_exact(d.box.y1) +
           ',' + tsv::format_exact(d.box.x2) + ',' +
           tsv::format_exact(d.box.y2) + ',' + tsv::format_exact(d.score);
  }
  return out;
}

std::vector<Detection> decode_detections(const std::string& field,
                                         const std::string& context) {
  std::vector<Detection> out;
  if (field == "-") return out;
  for (const std::string& group : tsv::split(field, ';')) {
    const std::vector<std::string> parts = tsv::split(group, ',');
    if (parts.size() != 5) {
      throw ExecutionError(context + ": detection group '" + group +
                           "' does not have 5 comma-separated fields");
    }
    Detection d;
    d.box.x1 = tsv::parse_number(parts[0], context);
    d.box.y1 = tsv::parse_number(parts[1], context);
    d.box.x2 = tsv::parse_number(parts[2], context);
    d.box.y2 = tsv::parse_number(parts[3], context);
    d.score = tsv::parse_number(parts[4], context);
    out.push_back(d);
  }
  return out;
}

}  // namespace

void write_predictions(const std::filesystem::path& path,
                       const std::vector<PredictionRecord>& records) {
  std::vector<std::string> lines;
  lines.reserve(records.size() + 1);
  lines.push_back("# tile_id\tmethod\trun_id\tpresence_score\tdetections\theatmap");
  for (const PredictionRecord& r : records) {
    lines.push_back(tsv::join(
        {r.tile_id, method_name(r.method), std::to_string(r.run_id),
         tsv::format_exact(r.presence_score), encode_detections(r.detections),
         r.heatmap_path.empty() ? "-" : r.heatmap_path}));
  }
  tsv::write_lines(path, lines);
}

std::vector<PredictionRecord> read_predictions(
    const std::filesystem::path& path) {
  const tsv::Table table = tsv::read_table(path);
  std::vector<PredictionRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::vector<std::string>& row = table.rows[i];
    const std::string context =
        path.string() + " row " + std::to_string(i + 1);
    if (row.size() != 6) {
      throw ExecutionError(context + ": expected 6 columns, found " +
                           std::to_string(row.size()));
    }
    PredictionRecord r;
    r.tile_id = row[0];
    r.method = method_from_name(row[1]);
    r.run_id = static_cast<int>(tsv::parse_number(row[2], context));
    r.presence_score = tsv::parse_number(row[3], context);
    r.detections = decode_detections(row[4], context);
    r.heatmap_path = row[5] == "-" ? std::string() : row[5];
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace supbench::models
