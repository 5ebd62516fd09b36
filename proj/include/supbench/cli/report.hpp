#pragma once

#include <filesystem>

namespace supbench::cli {

// Renders report.md (plus ablation chart images) from the metric files under
// `results_dir`. Every number in the report is copied from a TSV cell; the
// mu (+- sigma) rendering follows the std < 0.03 suppression rule. A results
// directory with no recognized experiment files still yields a report with an
// explicit "no experiments found" section.
void emit_report(const std::filesystem::path& results_dir);

}  // namespace supbench::cli
