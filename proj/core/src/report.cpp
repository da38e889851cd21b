#include "frnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <set>

#include "frnet/error.hpp"

namespace frnet {
namespace fs = std::filesystem;

namespace {

constexpr const char* kMissing = "—";

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read '" + path.string() + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string(), lineno, "expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double parse_double(const std::map<std::string, std::string>& kv,
                    const std::string& key, const fs::path& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError(path.string() + ": missing '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::logic_error&) {
    throw DataError(path.string() + ": bad value for '" + key + "'");
  }
}

std::pair<double, std::optional<double>> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, std::nullopt};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

ReportRow collect(const fs::path& dir, const std::string& variant,
                  std::vector<std::string>& warnings) {
  ReportRow row;
  row.variant = variant;
  std::vector<double> dice, acc;
  if (fs::is_directory(dir)) {
    std::vector<fs::path> runs;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "result.txt")) {
        runs.push_back(e.path() / "result.txt");
      }
    }
    std::sort(runs.begin(), runs.end());
    for (const auto& p : runs) {
      const RunResult r = read_run_result(p);
      dice.push_back(r.dice);
      acc.push_back(r.acc);
      row.params = r.params;
    }
    if (fs::exists(dir / "bench.txt")) {
      row.time_ms = parse_double(read_key_values(dir / "bench.txt"), "mean_ms",
                                 dir / "bench.txt");
    }
  }
  row.seeds = static_cast<int>(dice.size());
  if (dice.empty()) {
    warnings.push_back("no completed runs for '" + variant + "'");
  } else {
    std::tie(row.dice_mean, row.dice_std) = mean_std(dice);
    std::tie(row.acc_mean, row.acc_std) = mean_std(acc);
  }
  return row;
}

std::string cell(const std::optional<double>& mean, const std::optional<double>& sd) {
  return mean ? format_mean_std(*mean, sd) : kMissing;
}

}  // namespace

void write_run_result(const RunResult& result, const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write '" + path.string() + "'");
  os << fmt::format("dice={:.17g}\nacc={:.17g}\nparams={}\nsplit={}\n", result.dice,
                    result.acc, result.params, result.split);
}

RunResult read_run_result(const fs::path& path) {
  const auto kv = read_key_values(path);
  RunResult r;
  r.dice = parse_double(kv, "dice", path);
  r.acc = parse_double(kv, "acc", path);
  r.params = static_cast<std::int64_t>(parse_double(kv, "params", path));
  if (auto it = kv.find("split"); it != kv.end()) r.split = it->second;
  return r;
}

std::string format_mean_std(double mean, std::optional<double> std) {
  if (!std) return fmt::format("{:.2f}", mean * 100.0);
  return fmt::format("{:.2f}±{:.2f}", mean * 100.0, *std * 100.0);
}

ReportTables report_tables(const fs::path& results_dir,
                           const std::vector<std::string>& expected) {
  ReportTables t;
  if (!fs::is_directory(results_dir)) {
    throw DataError("results directory '" + results_dir.string() + "' not found");
  }
  std::set<std::string> seen(expected.begin(), expected.end());
  for (const auto& v : expected) {
    t.rows.push_back(collect(results_dir / v, v, t.warnings));
  }
  std::vector<std::string> extra;
  for (const auto& e : fs::directory_iterator(results_dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_directory() && !seen.count(name)) extra.push_back(name);
  }
  std::sort(extra.begin(), extra.end());
  for (const auto& v : extra) t.rows.push_back(collect(results_dir / v, v, t.warnings));
  return t;
}

std::string ReportTables::to_markdown() const {
  std::string out = "| Method | Dice(%) | Acc(%) | Param | Time(ms) |\n"
                    "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {} | {} | {} |\n", r.variant,
                       cell(r.dice_mean, r.dice_std), cell(r.acc_mean, r.acc_std),
                       r.params ? std::to_string(*r.params) : kMissing,
                       r.time_ms ? fmt::format("{:.2f}", *r.time_ms) : kMissing);
  }
  return out;
}

std::string ReportTables::to_csv() const {
  std::string out = "method,seeds,dice_mean,dice_std,acc_mean,acc_std,params,time_ms\n";
  auto num = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.6f}", *v) : std::string();
  };
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.variant, r.seeds,
                       num(r.dice_mean), num(r.dice_std), num(r.acc_mean),
                       num(r.acc_std), r.params ? std::to_string(*r.params) : "",
                       num(r.time_ms));
  }
  return out;
}

}  // namespace frnet
