#include "rachpred/io/trace_csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <string>

#include "rachpred/common/errors.hpp"

namespace rachpred::io {

namespace {

constexpr const char* kHeader = "slot,arrivals,attempts,detected,collided,dropped,congested,label";
constexpr const char* kPredictionHeader = "slot,pred_detected,pred_collided,lead_slots";

template <typename T>
T parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": bad field '" +
                      std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_trace_csv(const std::filesystem::path& path, std::span<const sim::TraceRecord> records,
                     const sim::CongestionLabels& labels) {
  const bool labeled = !labels.congested.empty();
  if (labeled && (labels.congested.size() != records.size() || labels.expected.size() != records.size())) {
    throw std::invalid_argument("label length differs from trace length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << kHeader << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << r.slot << ',' << r.arrivals << ',' << r.attempts << ',' << r.detected << ','
        << r.collided << ',' << r.dropped << ',' << (labeled ? int(labels.congested[i]) : 0) << ','
        << (labeled ? int(labels.expected[i]) : 0) << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path.string());
}

LabeledTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw ConfigError(path.string() + ": unexpected trace header");
  }
  LabeledTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string_view rest = line;
    std::int64_t fields[8];
    for (int k = 0; k < 8; ++k) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (k == 7)) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 8 fields");
      }
      fields[k] = parse_field<std::int64_t>(rest.substr(0, comma), path, line_no);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    sim::TraceRecord r;
    r.slot = fields[0];
    r.arrivals = static_cast<std::int32_t>(fields[1]);
    r.attempts = static_cast<std::int32_t>(fields[2]);
    r.detected = static_cast<std::int32_t>(fields[3]);
    r.collided = static_cast<std::int32_t>(fields[4]);
    r.dropped = static_cast<std::int32_t>(fields[5]);
    trace.records.push_back(r);
    trace.labels.congested.push_back(fields[6] ? 1 : 0);
    trace.labels.expected.push_back(fields[7] ? 1 : 0);
  }
  return trace;
}

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const predict::PredictionBlock> blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << kPredictionHeader << '\n';
  for (const auto& block : blocks) {
    for (Eigen::Index j = 0; j < block.values.cols(); ++j) {
      out << block.origin + 1 + j << ',' << format_double(block.values(0, j)) << ','
          << format_double(block.values(1, j)) << ',' << j + 1 << '\n';
    }
  }
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::vector<predict::PredictionBlock> read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kPredictionHeader) {
    throw ConfigError(path.string() + ": unexpected prediction header");
  }
  // origin -> lead -> (detected, collided)
  std::map<std::int64_t, std::map<std::int64_t, std::pair<double, double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    const auto slot = parse_field<std::int64_t>(f[0], path, line_no);
    const auto lead = parse_field<std::int64_t>(f[3], path, line_no);
    if (lead < 1) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": lead must be >= 1");
    rows[slot - lead][lead] = {parse_field<double>(f[1], path, line_no), parse_field<double>(f[2], path, line_no)};
  }
  std::vector<predict::PredictionBlock> blocks;
  std::int64_t width = -1;
  for (const auto& [origin, leads] : rows) {
    const auto n = static_cast<std::int64_t>(leads.size());
    if (leads.rbegin()->first != n || (width >= 0 && n != width)) {
      throw ConfigError(path.string() + ": prediction block at origin " + std::to_string(origin) +
                        " is not a contiguous run of leads 1.." + std::to_string(width < 0 ? n : width));
    }
    width = n;
    predict::PredictionBlock block{origin, predict::Series(2, n)};
    for (const auto& [lead, v] : leads) {
      block.values(0, lead - 1) = v.first;
      block.values(1, lead - 1) = v.second;
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace rachpred::io
