#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rachpred/cli/pipeline.hpp"
#include "rachpred/common/errors.hpp"

namespace {

using namespace rachpred;
namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> lbuff, lp, lf;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--config", c.config, "experiment configuration or run manifest (JSON)");
  cmd->add_option("--seed", c.seed, "root seed");
  cmd->add_option("--lbuff", c.lbuff, "rolling buffer, slots");
  cmd->add_option("--lp", c.lp, "prediction horizon, slots");
  cmd->add_option("--lf", c.lf, "fresh slots per step");
  if (with_out) cmd->add_option("--out", c.out, "output directory");
}

io::ExperimentConfig resolve(const Common& c) {
  auto cfg = c.config.empty() ? io::ExperimentConfig{} : io::load_config(c.config);
  auto j = io::to_json(cfg);
  if (c.seed) j["seed"] = *c.seed;
  if (c.lbuff) j["streaming"]["l_buff"] = *c.lbuff;
  if (c.lp) j["streaming"]["l_p"] = *c.lp;
  if (c.lf) j["streaming"]["l_f"] = *c.lf;
  return io::config_from_json(j);
}

std::vector<fs::path> paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

void report(const io::RunManifest& m, const fs::path& out) {
  for (const auto& a : m.artifacts) std::cout << a.role << ": " << (out / a.path).string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RACH traffic prediction and burst detection"};
  app.require_subcommand(1);

  Common common;
  int count = 1;
  std::vector<std::string> traces;
  std::string model, burst_path, predictions, arch_path, driver = "flsp", format = "table";
  std::vector<int> buffers{100, 200, 400, 800};

  auto* simulate = app.add_subcommand("simulate", "simulate RACH traces");
  add_common(simulate, common);
  simulate->add_option("--count", count, "number of traces (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "train the traffic model");
  add_common(train, common);
  train->add_option("--trace", traces, "training trace CSV")->required();

  auto* train_burst = app.add_subcommand("train-burst", "train the burst detector on FLSP chunks");
  add_common(train_burst, common);
  train_burst->add_option("--model", model, "traffic model checkpoint")->required();
  train_burst->add_option("--trace", traces, "training trace CSV")->required();

  auto* pred = app.add_subcommand("predict", "run a streaming driver over a trace");
  add_common(pred, common);
  pred->add_option("--model", model, "traffic model checkpoint")->required();
  pred->add_option("--trace", traces, "trace CSV")->required()->expected(1);
  pred->add_option("--driver", driver, "flsp or rolling");

  auto* eval = app.add_subcommand("evaluate", "score predictions and burst decisions");
  add_common(eval, common);
  eval->add_option("--predictions", predictions, "prediction CSV")->required();
  eval->add_option("--trace", traces, "trace CSV")->required()->expected(1);
  eval->add_option("--burst", burst_path, "burst detector checkpoint");

  auto* flops = app.add_subcommand("flops", "parameter and FLOP counts");
  add_common(flops, common, false);
  flops->add_option("--arch", arch_path, "architecture descriptor JSON (defaults to the configured model)");
  flops->add_option("--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));

  auto* compare = app.add_subcommand("compare-drivers", "FLSP against rolling buffers");
  add_common(compare, common);
  compare->add_option("--model", model, "traffic model checkpoint")->required();
  compare->add_option("--trace", traces, "trace CSV")->required();
  compare->add_option("--buffers", buffers, "rolling buffer sizes");
  compare->add_option("--burst", burst_path, "burst detector checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = resolve(common);
    const fs::path out = common.out;
    const std::optional<fs::path> detector =
        burst_path.empty() ? std::nullopt : std::optional<fs::path>(burst_path);

    if (*simulate) {
      report(cli::cmd_simulate(cfg, out, count), out);
    } else if (*train) {
      const auto m = cli::cmd_train(cfg, paths(traces), out, [](int epoch, double loss) {
        std::fprintf(stderr, "epoch %d loss %.6f\n", epoch, loss);
      });
      report(m, out);
    } else if (*train_burst) {
      report(cli::cmd_train_burst(cfg, model, paths(traces), out), out);
    } else if (*pred) {
      report(cli::cmd_predict(cfg, model, traces.front(), predict::parse_driver(driver), out), out);
    } else if (*eval) {
      report(cli::cmd_evaluate(cfg, predictions, traces.front(), detector, out), out);
    } else if (*flops) {
      analysis::ArchDescriptor arch;
      if (arch_path.empty()) {
        arch = analysis::describe(cfg.model);
      } else {
        std::ifstream in(arch_path);
        if (!in) throw ConfigError("cannot read " + arch_path);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(arch_path + ": " + e.what());
        }
        arch = analysis::arch_from_json(j);
      }
      const auto r = cli::cmd_flops(arch, cfg.streaming);
      if (format == "json") std::cout << analysis::to_json(r).dump(2) << '\n';
      else std::cout << cli::format_cost_table(arch, cfg.streaming, r);
    } else if (*compare) {
      report(cli::cmd_compare_drivers(cfg, model, paths(traces), buffers, detector, out), out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
