#include "rachpred/cli/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rachpred/common/errors.hpp"
#include "rachpred/nn/checkpoint.hpp"
#include "rachpred/sim/simulator.hpp"

namespace rachpred::cli {

using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

io::RunManifest start_manifest(const std::string& command, const io::ExperimentConfig& cfg,
                               const fs::path& out) {
  fs::create_directories(out);
  io::RunManifest m;
  m.command = command;
  m.config_hash = io::config_hash(cfg);
  m.seed = cfg.seed;
  m.config = io::to_json(cfg);
  m.started_at = io::utc_timestamp();
  return m;
}

io::RunManifest finish_manifest(io::RunManifest m, const fs::path& out) {
  m.finished_at = io::utc_timestamp();
  io::write_manifest(m, out / "manifest.json");
  return m;
}

std::vector<io::LabeledTrace> read_traces(std::span<const fs::path> paths) {
  if (paths.empty()) throw ConfigError("no input traces given");
  std::vector<io::LabeledTrace> traces;
  for (const auto& p : paths) traces.push_back(io::read_trace_csv(p));
  return traces;
}

std::vector<std::uint8_t> expected_labels(const io::LabeledTrace& trace, const io::ExperimentConfig& cfg) {
  return sim::label_congestion(trace.records, cfg.labels, cfg.rach).expected;
}

void pool(std::vector<predict::LeadError>& total, const std::vector<predict::LeadError>& part) {
  if (total.empty()) {
    total = part;
    return;
  }
  for (std::size_t k = 0; k < part.size(); ++k) {
    const auto n = total[k].count + part[k].count;
    if (n > 0) {
      total[k].mse = (total[k].mse * static_cast<double>(total[k].count) +
                      part[k].mse * static_cast<double>(part[k].count)) /
                     static_cast<double>(n);
    }
    total[k].count = n;
  }
}

std::string fmt(double v) { return io::format_double(v); }

std::string rational_text(const analysis::Rational& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << '/' << r.denominator();
  os << " (" << boost::rational_cast<double>(r) << ')';
  return os.str();
}

}  // namespace

std::vector<std::int64_t> lead_grid(const predict::StreamingConfig& s) {
  std::vector<std::int64_t> leads;
  for (std::int64_t t = s.l_f; t < s.l_p; t += s.l_f) leads.push_back(t);
  leads.push_back(s.l_p);
  return leads;
}

std::uint64_t trace_seed(const io::ExperimentConfig& cfg, int index) {
  return cfg.seed + static_cast<std::uint64_t>(index);
}

io::LabeledTrace simulate_trace(const io::ExperimentConfig& cfg, std::uint64_t seed) {
  io::LabeledTrace t;
  t.records = sim::run_simulation(cfg.cell, cfg.rach, cfg.total_slots, seed).records;
  if (!t.records.empty()) t.labels = sim::label_congestion(t.records, cfg.labels, cfg.rach);
  return t;
}

predict::StreamingConfig driver_config(const io::ExperimentConfig& cfg, int l_buff) {
  auto s = cfg.streaming;
  s.l_buff = l_buff;
  return s;
}

BurstDataset burst_dataset(const predict::StreamRun& run, const predict::Series& series,
                           std::span<const std::uint8_t> expected, const io::ExperimentConfig& cfg) {
  BurstDataset d;
  d.chunks = predict::make_chunks(series, run, cfg.burst_horizon());
  d.labels = burst::step_labels(d.chunks, expected, run.config.l_f, cfg.burst_labels);
  return d;
}

nn::TrainResult train_traffic_model(const io::ExperimentConfig& cfg, std::span<const io::LabeledTrace> traces,
                                    const nn::EpochCallback& on_epoch) {
  std::vector<Eigen::MatrixXd> series;
  for (const auto& t : traces) series.push_back(nn::traffic_series(t.records));
  return nn::train(series, cfg.model, cfg.train, static_cast<double>(cfg.rach.preambles), on_epoch);
}

burst::BurstTrainResult train_burst_detector(const io::ExperimentConfig& cfg, const nn::TrafficModel& model,
                                             std::span<const io::LabeledTrace> traces) {
  BurstDataset all;
  for (const auto& t : traces) {
    const auto series = nn::traffic_series(t.records);
    const auto run = predict::run_stream(model, series, cfg.streaming, predict::Driver::Flsp);
    auto d = burst_dataset(run, series, expected_labels(t, cfg), cfg);
    all.chunks.insert(all.chunks.end(), d.chunks.begin(), d.chunks.end());
    all.labels.insert(all.labels.end(), d.labels.begin(), d.labels.end());
  }
  if (all.chunks.empty()) throw ConfigError("traces too short to produce any burst-detector chunk");
  return burst::train_burst(all.chunks, all.labels, cfg.streaming.l_f, cfg.burst_horizon(), cfg.burst);
}

std::vector<DriverScore> compare_drivers(const nn::TrafficModel& model, std::span<const io::LabeledTrace> traces,
                                         const io::ExperimentConfig& cfg, std::span<const int> buffers,
                                         const burst::BurstNetParams* detector) {
  if (detector) cfg.check_burst_net(*detector);
  std::vector<std::pair<predict::Driver, int>> plan{{predict::Driver::Flsp, 0}};
  for (int b : buffers) plan.emplace_back(predict::Driver::Rolling, b);

  const auto leads = lead_grid(cfg.streaming);
  std::vector<DriverScore> scores(plan.size());
  std::vector<std::vector<std::uint8_t>> decisions(plan.size()), labels(plan.size());
  std::vector<std::vector<double>> probabilities(plan.size());
  std::vector<std::int64_t> evals(plan.size(), 0), slots(plan.size(), 0);

  for (const auto& t : traces) {
    const auto series = nn::traffic_series(t.records);
    const auto expected = detector ? expected_labels(t, cfg) : std::vector<std::uint8_t>{};
    for (std::size_t k = 0; k < plan.size(); ++k) {
      const auto sc = driver_config(cfg, plan[k].first == predict::Driver::Flsp ? cfg.streaming.l_buff : plan[k].second);
      const auto run = predict::run_stream(model, series, sc, plan[k].first);
      pool(scores[k].leads, predict::evaluate_stream(run.blocks, series, sc.l_f, leads));
      evals[k] += run.total_evaluations - run.warmup_evaluations;
      slots[k] += static_cast<std::int64_t>(run.blocks.size()) * sc.l_f;
      if (detector) {
        const auto d = burst_dataset(run, series, expected, cfg);
        for (const auto& c : d.chunks) {
          const double p = burst::burst_forward(c.features, *detector);
          probabilities[k].push_back(p);
          decisions[k].push_back(burst::decide(p, *detector) ? 1 : 0);
        }
        labels[k].insert(labels[k].end(), d.labels.begin(), d.labels.end());
      }
    }
  }
  for (std::size_t k = 0; k < plan.size(); ++k) {
    scores[k].driver = plan[k].first;
    scores[k].l_buff = plan[k].second;
    scores[k].evaluations_per_slot =
        slots[k] > 0 ? static_cast<double>(evals[k]) / static_cast<double>(slots[k]) : 0.0;
    if (detector) scores[k].burst = burst::compute_metrics(decisions[k], labels[k], probabilities[k]);
  }
  return scores;
}

json to_json(const burst::Metrics& m) {
  return {{"true_positives", m.true_positives}, {"false_positives", m.false_positives},
          {"false_negatives", m.false_negatives}, {"true_negatives", m.true_negatives},
          {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"mse", m.mse},
          {"degenerate", m.degenerate}};
}

json to_json(const DriverScore& s) {
  json leads = json::array();
  for (const auto& e : s.leads) leads.push_back({{"lead_slots", e.lead_slots}, {"mse", e.mse}, {"count", e.count}});
  json j = {{"driver", predict::to_string(s.driver)}, {"l_buff", s.l_buff}, {"leads", leads},
            {"evaluations_per_slot", s.evaluations_per_slot}};
  if (s.burst) j["burst"] = to_json(*s.burst);
  return j;
}

io::RunManifest cmd_simulate(const io::ExperimentConfig& cfg, const fs::path& out, int count) {
  if (count < 1) throw ConfigError("trace count must be >= 1");
  auto m = start_manifest("simulate", cfg, out);
  for (int i = 0; i < count; ++i) {
    char name[32];
    if (count == 1) std::snprintf(name, sizeof name, "trace.csv");
    else std::snprintf(name, sizeof name, "trace_%03d.csv", i);
    const auto t = simulate_trace(cfg, trace_seed(cfg, i));
    io::write_trace_csv(out / name, t.records, t.labels);
    m.add_artifact("trace", out, out / name);
  }
  return finish_manifest(std::move(m), out);
}

io::RunManifest cmd_train(const io::ExperimentConfig& cfg, std::span<const fs::path> traces, const fs::path& out,
                          const nn::EpochCallback& on_epoch) {
  const auto data = read_traces(traces);
  auto m = start_manifest("train", cfg, out);
  for (const auto& p : traces) m.inputs.push_back(p.string());
  const auto result = train_traffic_model(cfg, data, on_epoch);
  nn::save_checkpoint(result.model, out / "model.json");
  auto csv = open_out(out / "loss_history.csv");
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) csv << e << ',' << fmt(result.loss_history[e]) << '\n';
  csv.close();
  m.add_artifact("checkpoint", out, out / "model.json");
  m.add_artifact("loss_history", out, out / "loss_history.csv");
  return finish_manifest(std::move(m), out);
}

io::RunManifest cmd_train_burst(const io::ExperimentConfig& cfg, const fs::path& model_path,
                                std::span<const fs::path> traces, const fs::path& out) {
  const auto model = nn::load_checkpoint(model_path);
  const auto data = read_traces(traces);
  auto m = start_manifest("train-burst", cfg, out);
  m.inputs.push_back(model_path.string());
  for (const auto& p : traces) m.inputs.push_back(p.string());
  const auto result = train_burst_detector(cfg, model, data);
  burst::save_burst_checkpoint(result.params, out / "burst.json");
  auto csv = open_out(out / "burst_loss_history.csv");
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) csv << e << ',' << fmt(result.loss_history[e]) << '\n';
  csv.close();
  m.add_artifact("burst_checkpoint", out, out / "burst.json");
  m.add_artifact("loss_history", out, out / "burst_loss_history.csv");
  return finish_manifest(std::move(m), out);
}

io::RunManifest cmd_predict(const io::ExperimentConfig& cfg, const fs::path& model_path, const fs::path& trace,
                            predict::Driver driver, const fs::path& out) {
  const auto model = nn::load_checkpoint(model_path);
  const auto data = io::read_trace_csv(trace);
  auto m = start_manifest("predict", cfg, out);
  m.inputs = {model_path.string(), trace.string()};

  const auto series = nn::traffic_series(data.records);
  const auto run = predict::run_stream(model, series, cfg.streaming, driver);
  io::write_predictions_csv(out / "predictions.csv", run.blocks);

  const auto chunks = predict::make_chunks(series, run, cfg.burst_horizon());
  auto csv = open_out(out / "chunks.csv");
  csv << "step,origin";
  if (!chunks.empty()) {
    for (Eigen::Index i = 0; i < chunks.front().features.size(); ++i) csv << ",x" << i;
  }
  csv << '\n';
  for (const auto& c : chunks) {
    csv << c.step << ',' << c.origin;
    for (Eigen::Index i = 0; i < c.features.size(); ++i) csv << ',' << fmt(c.features(i));
    csv << '\n';
  }
  csv.close();

  const auto arch = analysis::describe(model.params.architecture());
  write_json(out / "cost.json", {{"driver", predict::to_string(driver)},
                                 {"analytic", analysis::to_json(analysis::cost_report(arch, cfg.streaming))},
                                 {"empirical", analysis::to_json(analysis::empirical_cost(run, arch))}});

  m.add_artifact("predictions", out, out / "predictions.csv");
  m.add_artifact("chunks", out, out / "chunks.csv");
  m.add_artifact("cost", out, out / "cost.json");
  return finish_manifest(std::move(m), out);
}

io::RunManifest cmd_evaluate(const io::ExperimentConfig& cfg, const fs::path& predictions, const fs::path& trace,
                             const std::optional<fs::path>& detector_path, const fs::path& out) {
  const auto blocks = io::read_predictions_csv(predictions);
  const auto data = io::read_trace_csv(trace);
  if (blocks.empty()) throw ConfigError(predictions.string() + ": no predictions");
  std::optional<burst::BurstNetParams> detector;
  if (detector_path) {
    detector = burst::load_burst_checkpoint(*detector_path);
    cfg.check_burst_net(*detector);
  }
  auto m = start_manifest("evaluate", cfg, out);
  m.inputs = {predictions.string(), trace.string()};
  if (detector_path) m.inputs.push_back(detector_path->string());

  const auto series = nn::traffic_series(data.records);
  auto streaming = cfg.streaming;
  streaming.l_p = static_cast<int>(blocks.front().values.cols());
  if (streaming.l_p < cfg.burst_horizon() && detector) {
    throw ConfigError("predictions are shorter than the burst horizon");
  }
  const auto errors = predict::evaluate_stream(blocks, series, streaming.l_f, lead_grid(streaming));

  json metrics;
  json leads = json::array();
  for (const auto& e : errors) {
    leads.push_back({{"lead_slots", e.lead_slots},
                     {"lead_seconds", static_cast<double>(e.lead_slots) * cfg.rach.slot_period},
                     {"mse", e.mse},
                     {"count", e.count}});
  }
  metrics["leads"] = leads;
  metrics["steps"] = blocks.size();

  // Emitted stream: lead in (l_p - l_f, l_p] of each block.
  auto overlay = open_out(out / "traffic_overlay.csv");
  overlay << "slot,detected,collided,pred_detected,pred_collided\n";
  for (const auto& b : blocks) {
    for (Eigen::Index j = streaming.l_p - streaming.l_f; j < streaming.l_p; ++j) {
      const auto slot = b.origin + 1 + j;
      if (slot >= series.cols()) break;
      overlay << slot << ',' << series(0, slot) << ',' << series(1, slot) << ',' << fmt(b.values(0, j)) << ','
              << fmt(b.values(1, j)) << '\n';
    }
  }
  overlay.close();
  m.add_artifact("traffic_overlay", out, out / "traffic_overlay.csv");

  if (detector) {
    predict::StreamRun run;
    run.config = streaming;
    run.blocks = blocks;
    const auto expected = expected_labels(data, cfg);
    const auto d = burst_dataset(run, series, expected, cfg);
    std::vector<std::uint8_t> decisions;
    std::vector<double> probs;
    auto dec = open_out(out / "decisions.csv");
    dec << "step,probability,decision,label\n";
    for (std::size_t k = 0; k < d.chunks.size(); ++k) {
      const double p = burst::burst_forward(d.chunks[k].features, *detector);
      probs.push_back(p);
      decisions.push_back(burst::decide(p, *detector) ? 1 : 0);
      dec << d.chunks[k].step << ',' << fmt(p) << ',' << int(decisions.back()) << ',' << int(d.labels[k]) << '\n';
    }
    dec.close();
    metrics["burst"] = to_json(burst::compute_metrics(decisions, d.labels, probs));

    // Burst regions over each step's fresh slots, scaled for plotting next to the counts.
    const auto dec_plot = burst::expand_decisions_for_plot(decisions, streaming.l_f);
    const auto lab_plot = burst::expand_decisions_for_plot(d.labels, streaming.l_f);
    auto regions = open_out(out / "burst_regions.csv");
    regions << "slot,predicted_burst,expected_burst\n";
    const auto first = d.chunks.empty() ? 0 : d.chunks.front().origin - streaming.l_f;
    for (std::size_t i = 0; i < dec_plot.size(); ++i) {
      regions << first + static_cast<std::int64_t>(i) << ',' << fmt(dec_plot[i]) << ',' << fmt(lab_plot[i]) << '\n';
    }
    regions.close();
    m.add_artifact("decisions", out, out / "decisions.csv");
    m.add_artifact("burst_regions", out, out / "burst_regions.csv");
  }

  write_json(out / "metrics.json", metrics);
  m.add_artifact("metrics", out, out / "metrics.json");
  return finish_manifest(std::move(m), out);
}

analysis::CostReport cmd_flops(const analysis::ArchDescriptor& arch, const predict::StreamingConfig& streaming) {
  arch.validate();
  streaming.validate();
  return analysis::cost_report(arch, streaming);
}

std::string format_cost_table(const analysis::ArchDescriptor& arch, const predict::StreamingConfig& s,
                              const analysis::CostReport& r) {
  std::ostringstream os;
  os << "family            " << analysis::to_string(arch.family) << '\n'
     << "l_f / l_p / l_buff " << s.l_f << " / " << s.l_p << " / " << s.l_buff << '\n'
     << "parameters        " << r.parameters << '\n'
     << "flops/slot roll   " << rational_text(r.flops_rolling) << '\n';
  if (arch.family != analysis::Family::Cnn1d) {
    os << "flops/slot flsp   " << rational_text(r.flops_flsp) << '\n'
       << "ratio flsp/roll   " << rational_text(r.ratio) << '\n';
  }
  return os.str();
}

io::RunManifest cmd_compare_drivers(const io::ExperimentConfig& cfg, const fs::path& model_path,
                                    std::span<const fs::path> traces, std::span<const int> buffers,
                                    const std::optional<fs::path>& detector_path, const fs::path& out) {
  const auto model = nn::load_checkpoint(model_path);
  const auto data = read_traces(traces);
  std::optional<burst::BurstNetParams> detector;
  if (detector_path) detector = burst::load_burst_checkpoint(*detector_path);
  auto m = start_manifest("compare-drivers", cfg, out);
  m.inputs.push_back(model_path.string());
  for (const auto& p : traces) m.inputs.push_back(p.string());
  if (detector_path) m.inputs.push_back(detector_path->string());

  const auto scores = compare_drivers(model, data, cfg, buffers, detector ? &*detector : nullptr);

  auto csv = open_out(out / "driver_comparison.csv");
  csv << "driver,l_buff,lead_slots,lead_seconds,mse,count\n";
  json all = json::array();
  for (const auto& s : scores) {
    for (const auto& e : s.leads) {
      csv << predict::to_string(s.driver) << ',' << s.l_buff << ',' << e.lead_slots << ','
          << fmt(static_cast<double>(e.lead_slots) * cfg.rach.slot_period) << ',' << fmt(e.mse) << ','
          << e.count << '\n';
    }
    all.push_back(to_json(s));
  }
  csv.close();
  write_json(out / "comparison.json", {{"traces", data.size()}, {"drivers", all}});
  m.add_artifact("comparison_csv", out, out / "driver_comparison.csv");
  m.add_artifact("comparison", out, out / "comparison.json");
  return finish_manifest(std::move(m), out);
}

}  // namespace rachpred::cli
