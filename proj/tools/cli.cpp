#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "frnet/bench.hpp"
#include "frnet/checkpoint.hpp"
#include "frnet/data.hpp"
#include "frnet/error.hpp"
#include "frnet/models.hpp"
#include "frnet/parallel.hpp"
#include "frnet/report.hpp"
#include "frnet/synth.hpp"
#include "frnet/trainer.hpp"

namespace frnet::cli {
namespace {

namespace fs = std::filesystem;

using Size = std::pair<std::int64_t, std::int64_t>;

std::optional<Size> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) return std::nullopt;
  try {
    std::size_t a = 0, b = 0;
    const long long h = std::stoll(text.substr(0, x), &a);
    const long long w = std::stoll(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1 || h < 1 || w < 1) return std::nullopt;
    return Size{h, w};
  } catch (const std::logic_error&) {
    return std::nullopt;
  }
}

const CLI::Validator kSize(
    [](std::string& s) {
      return parse_size(s) ? std::string() : "expected HxW with positive extents, got '" + s + "'";
    },
    "HxW");

const std::vector<std::string> kArchs = {"frnet_base", "frnet", "unet_baseline"};
const std::vector<std::string> kFamilies = {"residual", "convnext", "convnext_3x3",
                                            "recurrent_convnext"};

struct ModelArgs {
  std::string arch = "frnet";
  std::string family;
  int recurrence = 2;

  void add_to(CLI::App& app) {
    app.add_option("--arch", arch, "Network architecture")
        ->check(CLI::IsMember(kArchs))
        ->capture_default_str();
    app.add_option("--family", family, "Block family override (frnet archs)")
        ->check(CLI::IsMember(kFamilies));
    app.add_option("--recurrence", recurrence, "Recurrence steps R")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  ModelConfig config() const {
    ModelConfig c = ModelConfig::for_arch(parse_arch(arch));
    c.recurrence_steps = recurrence;
    if (!family.empty()) c.block_family = parse_family(family);
    c.validate();
    return c;
  }

  std::string variant() const { return family.empty() ? arch : family; }
};

struct DataArgs {
  std::string data_dir;
  std::string split = "rossa";
  bool synthetic = false;
  int synth_train = 24;
  int synth_val = 8;
  int synth_test = 0;
  std::string synth_size = "64x64";
  std::uint64_t data_seed = 1234;

  void add_to(CLI::App& app) {
    auto* data = app.add_option("--data", data_dir, "Dataset root (images/, masks/)");
    app.add_option("--split", split,
                   "rossa, octa6m, octa3m, or a split manifest path")
        ->capture_default_str();
    auto* synth = app.add_flag("--synthetic", synthetic, "Use generated vessel images");
    data->excludes(synth);
    app.add_option("--synth-train", synth_train, "Synthetic training images")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--synth-val", synth_val, "Synthetic validation images")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--synth-test", synth_test, "Synthetic test images")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--synth-size", synth_size, "Synthetic image size")
        ->check(kSize)
        ->capture_default_str();
    app.add_option("--data-seed", data_seed, "Synthetic data seed")->capture_default_str();
  }

  DatasetSplits load() const {
    if (synthetic) {
      SynthOptions opts;
      std::tie(opts.height, opts.width) = *parse_size(synth_size);
      DatasetSplits d;
      d.train = synth_dataset(data_seed, synth_train, opts);
      d.val = synth_dataset(data_seed + 1, synth_val, opts);
      d.test = synth_dataset(data_seed + 2, synth_test, opts);
      return d;
    }
    if (data_dir.empty()) throw ConfigError("one of --data or --synthetic is required");
    return load_dataset(data_dir, split_spec());
  }

  SplitSpec split_spec() const {
    if (split == "rossa") return rossa_split();
    if (split == "octa6m") return octa500_split(Octa500Subset::Fov6mm, data_dir);
    if (split == "octa3m") return octa500_split(Octa500Subset::Fov3mm, data_dir);
    return parse_split_manifest(split);
  }
};

void train_command(const ModelArgs& margs, const DataArgs& dargs, TrainConfig cfg,
                   int seeds, const std::string& crop, const std::string& out_dir,
                   std::ostream& out) {
  if (!crop.empty()) cfg.crop = parse_size(crop);
  cfg.validate();
  const ModelConfig mc = margs.config();
  const DatasetSplits data = dargs.load();
  fmt::print(out, "data: {}\n", describe_splits(data));
  const std::uint64_t base_seed = cfg.seed;
  for (int k = 0; k < seeds; ++k) {
    cfg.seed = base_seed + static_cast<std::uint64_t>(k);
    const fs::path run_dir =
        fs::path(out_dir) / margs.variant() / fmt::format("seed{}", cfg.seed);
    fs::create_directories(run_dir);
    auto model = build_model(mc, cfg.seed);
    TrainResult result = train(*model, data.train, data.val, cfg);
    write_history_csv(result.history, run_dir / "history.csv");
    write_checkpoint(result.best, run_dir / "best.ckpt");

    auto best = result.best.instantiate();
    const bool on_test = !data.test.empty();
    const EvalResult ev = evaluate(*best, on_test ? data.test : data.val, cfg.threshold);
    RunResult rr{ev.dice_mean, ev.acc_mean, param_count(*best), on_test ? "test" : "val"};
    write_run_result(rr, run_dir / "result.txt");
    fmt::print(out, "seed={} best_epoch={} best_val_dice={:.6f} {}_dice={:.6f} {}_acc={:.6f} dir={}\n",
               cfg.seed, result.best_epoch, result.best_val_dice, rr.split, rr.dice,
               rr.split, rr.acc, run_dir.string());
  }
}

// Flat key=value files apply to the invoked subcommand.
class SubcommandConfig : public CLI::ConfigBase {
 public:
  explicit SubcommandConfig(std::string section) : section_(std::move(section)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigBase::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty()) item.parents = {section_};
    }
    return items;
  }

 private:
  std::string section_;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FRNet vessel segmentation engine", "frnet"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  int threads = 1;
  app.add_option("--threads", threads, "Kernel worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.set_config("--config", "", "key=value configuration file for the subcommand");
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train models and write history/checkpoints");
  ModelArgs train_model;
  DataArgs train_data;
  TrainConfig tcfg;
  int seeds = 1;
  std::string crop, out_dir = "runs";
  train_model.add_to(*train_cmd);
  train_data.add_to(*train_cmd);
  train_cmd->add_option("--epochs", tcfg.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--batch-size", tcfg.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lr", tcfg.learning_rate)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--seed", tcfg.seed, "First seed")->capture_default_str();
  train_cmd->add_option("--seeds", seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--eval-every", tcfg.eval_every)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--smooth-eps", tcfg.smooth_eps)->capture_default_str();
  train_cmd->add_option("--threshold", tcfg.threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  train_cmd->add_option("--crop", crop, "Random training crop")->check(kSize);
  train_cmd->add_option("--out", out_dir, "Results directory")->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ckpt;
  std::string eval_on = "test";
  double eval_threshold = 0.5;
  DataArgs eval_data;
  eval_cmd->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  eval_data.add_to(*eval_cmd);
  eval_cmd->add_option("--on", eval_on, "Split to evaluate")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  eval_cmd->add_option("--threshold", eval_threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();

  // params
  auto* params_cmd = app.add_subcommand("params", "Print the exact parameter count");
  ModelArgs params_model;
  params_model.add_to(*params_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Time inference forward passes");
  ModelArgs bench_model;
  bench_model.add_to(*bench_cmd);
  std::string bench_size = "256x256", thread_mode = "single", bench_out;
  BenchOptions bopts;
  std::int64_t bench_batch = 1;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--size", bench_size, "Input size")->check(kSize)->capture_default_str();
  bench_cmd->add_option("--batch", bench_batch)->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--warmup", bopts.warmup)->capture_default_str();
  bench_cmd->add_option("--runs", bopts.runs)->capture_default_str();
  bench_cmd->add_option("--thread-mode", thread_mode)
      ->check(CLI::IsMember({"single", "parallel"}))
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "Model init seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Also write the report to this file");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic image/mask PNG pairs");
  std::string synth_out, synth_size = "64x64";
  int synth_count = 8;
  std::uint64_t synth_seed = 0;
  SynthOptions sopts;
  synth_cmd->add_option("--out", synth_out, "Output root")->required();
  synth_cmd->add_option("--count", synth_count)->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed)->capture_default_str();
  synth_cmd->add_option("--size", synth_size)->check(kSize)->capture_default_str();
  synth_cmd->add_option("--vessels", sopts.n_vessels)->capture_default_str();
  synth_cmd->add_option("--min-width", sopts.min_width)->capture_default_str();
  synth_cmd->add_option("--max-width", sopts.max_width)->capture_default_str();

  // report
  auto* report_cmd = app.add_subcommand("report", "Summarize result directories as a table");
  std::string results_dir, report_format = "md";
  report_cmd->add_option("--results", results_dir, "Results directory")->required();
  report_cmd->add_option("--format", report_format)
      ->check(CLI::IsMember({"md", "csv"}))
      ->capture_default_str();

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.starts_with('-')) continue;
    if (const auto subs = app.get_subcommands([&](CLI::App* a) { return a->check_name(arg); });
        !subs.empty()) {
      app.config_formatter(std::make_shared<SubcommandConfig>(subs.front()->get_name()));
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    set_num_threads(threads);
    if (*train_cmd) {
      train_command(train_model, train_data, tcfg, seeds, crop, out_dir, out);
    } else if (*eval_cmd) {
      auto model = load_checkpoint(ckpt);
      const DatasetSplits data = eval_data.load();
      const auto& set = eval_on == "train" ? data.train : eval_on == "val" ? data.val : data.test;
      if (set.empty()) throw ConfigError("split '" + eval_on + "' is empty");
      const EvalResult ev = evaluate(*model, set, eval_threshold);
      fmt::print(out, "images={}\ndice={:.6f}\nacc={:.6f}\n", set.size(), ev.dice_mean,
                 ev.acc_mean);
    } else if (*params_cmd) {
      const ModelConfig mc = params_model.config();
      fmt::print(out, "{}\n", param_count(*build_model(mc, 0)));
    } else if (*bench_cmd) {
      const auto [h, w] = *parse_size(bench_size);
      bopts.thread_mode = thread_mode == "single" ? ThreadMode::Single : ThreadMode::Parallel;
      auto model = build_model(bench_model.config(), bench_seed);
      const BenchReport r = bench_inference(*model, {bench_batch, 1, h, w}, bopts);
      out << r.to_text();
      if (!bench_out.empty()) {
        std::ofstream os(bench_out, std::ios::trunc);
        if (!os) throw DataError("cannot write '" + bench_out + "'");
        os << r.to_text();
      }
    } else if (*synth_cmd) {
      std::tie(sopts.height, sopts.width) = *parse_size(synth_size);
      const fs::path root(synth_out);
      fs::create_directories(root / "images");
      fs::create_directories(root / "masks");
      for (const Sample& s : synth_dataset(synth_seed, synth_count, sopts)) {
        save_gray_png(root / "images" / (s.id + ".png"), s.image);
        save_gray_png(root / "masks" / (s.id + ".png"), s.mask);
      }
      fmt::print(out, "wrote {} pairs to {}\n", synth_count, root.string());
    } else if (*report_cmd) {
      const ReportTables t = report_tables(results_dir);
      for (const auto& w : t.warnings) err << "warning: " << w << "\n";
      out << (report_format == "csv" ? t.to_csv() : t.to_markdown());
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace frnet::cli
