#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace frnet {

// Results layout read by report_tables:
//   <dir>/<variant>/seed<k>/result.txt   key=value: dice, acc, params, split
//   <dir>/<variant>/bench.txt            BenchReport::to_text() output
// `variant` is an arch name or a block-family name for ablation runs.
struct RunResult {
  double dice = 0.0;
  double acc = 0.0;
  std::int64_t params = 0;
  std::string split;
};

void write_run_result(const RunResult& result, const std::filesystem::path& path);
RunResult read_run_result(const std::filesystem::path& path);

struct ReportRow {
  std::string variant;
  int seeds = 0;
  std::optional<double> dice_mean, dice_std, acc_mean, acc_std;
  std::optional<std::int64_t> params;
  std::optional<double> time_ms;
};

struct ReportTables {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;

  std::string to_markdown() const;
  std::string to_csv() const;
};

// `mm.dd±s.ss` in percent; the std part is omitted when std is unset.
std::string format_mean_std(double mean, std::optional<double> std);

// Rows for every expected variant (missing ones rendered as "—" with a
// warning) followed by any other variants found, in name order.
ReportTables report_tables(const std::filesystem::path& results_dir,
                           const std::vector<std::string>& expected = {
                               "frnet_base", "frnet", "unet_baseline"});

}  // namespace frnet
