#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "frnet/bench.hpp"
#include "frnet/error.hpp"
#include "frnet/report.hpp"
#include "test_support.hpp"

namespace frnet {
namespace {

namespace fs = std::filesystem;

TEST(Percentile, Interpolates) {
  EXPECT_EQ(percentile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(percentile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(percentile({5}, 0.95), 5.0);
  EXPECT_THROW(percentile({}, 0.5), ContractError);
}

TEST(Bench, ReportInvariants) {
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  const BenchReport r = bench_inference(*m, {1, 1, 16, 16});
  EXPECT_EQ(r.arch, "frnet_base");
  EXPECT_EQ(r.timed_runs, 10);
  EXPECT_EQ(r.warmup_runs, 3);
  EXPECT_GT(r.mean_ms, 0.0);
  EXPECT_GT(r.p50_ms, 0.0);
  EXPECT_LE(r.p50_ms, r.p95_ms);
  EXPECT_GE(r.std_ms, 0.0);
  EXPECT_EQ(r.thread_mode, ThreadMode::Single);
  EXPECT_TRUE(m->is_training());
  EXPECT_NE(r.to_text().find("thread_mode=single"), std::string::npos);
}

TEST(Bench, RejectsBadArguments) {
  auto unet = build_model(ModelConfig::for_arch(Arch::UNetBaseline), 0);
  EXPECT_THROW(bench_inference(*unet, {1, 1, 20, 32}), ConfigError);
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  BenchOptions o;
  o.warmup = 2;
  EXPECT_THROW(bench_inference(*m, {1, 1, 8, 8}, o), ConfigError);
  o = {};
  o.runs = 9;
  EXPECT_THROW(bench_inference(*m, {1, 1, 8, 8}, o), ConfigError);
}

// A model whose construction is slow; the timed region must not see it.
class SlowToBuild : public FRNetModel {
 public:
  SlowToBuild() : FRNetModel(ModelConfig::for_arch(Arch::FRNetBase), 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
  }
};

TEST(Bench, ExcludesConstruction) {
  SlowToBuild m;
  const BenchReport r = bench_inference(m, {1, 1, 8, 8});
  EXPECT_LT(r.p95_ms, 200.0);
}

void write_run(const fs::path& dir, double dice, double acc, std::int64_t params) {
  fs::create_directories(dir);
  write_run_result({dice, acc, params, "test"}, dir / "result.txt");
}

TEST(Report, MeanStdCellsAndMissingRows) {
  testing::TempDir dir("report");
  const double d[] = {0.90, 0.91, 0.92, 0.93, 0.94};
  for (int s = 0; s < 5; ++s) write_run(dir.path() / "frnet" / ("seed" + std::to_string(s)), d[s], 0.95, 121377);
  write_run(dir.path() / "frnet_base" / "seed0", 0.8765, 0.9, 112161);
  std::ofstream(dir.path() / "frnet" / "bench.txt") << "arch=frnet\nmean_ms=12.5\n";
  write_run(dir.path() / "convnext_3x3" / "seed0", 0.5, 0.5, 121377);

  const ReportTables t = report_tables(dir.path());
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].variant, "frnet_base");
  EXPECT_EQ(t.rows[1].variant, "frnet");
  EXPECT_EQ(t.rows[2].variant, "unet_baseline");
  EXPECT_EQ(t.rows[3].variant, "convnext_3x3");
  EXPECT_EQ(t.rows[1].seeds, 5);
  ASSERT_EQ(t.warnings.size(), 1u);
  EXPECT_NE(t.warnings[0].find("unet_baseline"), std::string::npos);

  const std::string md = t.to_markdown();
  EXPECT_NE(md.find("| frnet | 92.00±1.58 | 95.00±0.00 | 121377 | 12.50 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| frnet_base | 87.65 | 90.00 | 112161 | — |"), std::string::npos) << md;
  EXPECT_NE(md.find("| unet_baseline | — | — | — | — |"), std::string::npos) << md;
  EXPECT_NE(t.to_csv().find("frnet,5,0.920000"), std::string::npos);
}

TEST(Report, FormatMeanStd) {
  EXPECT_EQ(format_mean_std(0.91234, 0.00456), "91.23±0.46");
  EXPECT_EQ(format_mean_std(0.5, std::nullopt), "50.00");
}

TEST(Report, MissingDirectoryIsError) {
  EXPECT_THROW(report_tables("/nonexistent/frnet/results"), DataError);
}

}  // namespace
}  // namespace frnet
