#include "hlora/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hlora {
namespace metrics {

namespace {

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* column) {
  T value{};
  const auto r = std::from_chars(field.data(), field.data() + field.size(), value);
  if (r.ec != std::errc() || r.ptr != field.data() + field.size()) {
    throw std::runtime_error("results line " + std::to_string(line) + ": bad " + column + " '" +
                             std::string(field) + "'");
  }
  return value;
}

}  // namespace

Evaluation evaluate(const model::DenseModel& m, const data::Dataset& test) {
  if (test.size() == 0) {
    throw DimensionError("evaluate: empty test set");
  }
  const Matrix logits = model::forward(m, test.features);
  std::size_t correct = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) {
        best = c;
      }
    }
    correct += best == test.labels[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  return {static_cast<double>(correct) / static_cast<double>(test.size()),
          model::loss(logits, test.labels)};
}

std::optional<std::int64_t> rounds_to_target(const History& history, double target) {
  for (const auto& r : history) {
    if (r.test_accuracy >= target) {
      return r.round;
    }
  }
  return std::nullopt;
}

std::string format_results(const History& history) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : history) {
    out += std::to_string(r.round);
    out += ',';
    out += r.strategy;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += real(r.mean_train_loss);
    out += ',';
    out += real(r.test_accuracy);
    out += ',';
    if (r.bias_gap) {
      out += real(*r.bias_gap);
    }
    out += ',';
    out += std::to_string(r.wall_ms);
    out += '\n';
  }
  return out;
}

History parse_results(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("results: missing or unexpected header");
  }
  History history;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) {
        break;
      }
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 7) {
      throw std::runtime_error("results line " + std::to_string(line_no) + ": expected 7 fields");
    }
    RoundReport r;
    r.round = parse_number<std::int64_t>(fields[0], line_no, "round");
    r.strategy = std::string(fields[1]);
    r.seed = parse_number<std::uint64_t>(fields[2], line_no, "seed");
    r.mean_train_loss = parse_number<double>(fields[3], line_no, "mean_train_loss");
    r.test_accuracy = parse_number<double>(fields[4], line_no, "test_accuracy");
    if (!fields[5].empty()) {
      r.bias_gap = parse_number<double>(fields[5], line_no, "bias_gap");
    }
    r.wall_ms = parse_number<std::int64_t>(fields[6], line_no, "wall_ms");
    history.push_back(std::move(r));
  }
  return history;
}

void write_results(const History& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << format_results(history);
  out.flush();
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

History read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_results(ss.str());
}

}  // namespace metrics
}  // namespace hlora
