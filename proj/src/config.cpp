#include "hlora/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace hlora {
namespace cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_int(const std::string& key, const std::string& value) {
  T out{};
  const auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") {
    return true;
  }
  if (value == "false") {
    return false;
  }
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<Index> parse_index_list(const std::string& key, const std::string& value) {
  std::vector<Index> out;
  if (value.empty()) {
    return out;
  }
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_int<Index>(key, trim(item)));
  }
  return out;
}

template <typename T>
T positive(const std::string& key, T v) {
  if (v <= T(0)) {
    throw ConfigError(key + ": must be positive");
  }
  return v;
}

std::string real(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  using C = ExperimentConfig;
  using S = std::string;
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"seed", [](C& c, const S& k, const S& v) { c.settings.seed = parse_int<std::uint64_t>(k, v); }},
      {"strategy", [](C& c, const S&, const S& v) { c.settings.strategy = federation::parse_strategy(v); }},
      {"clients", [](C& c, const S& k, const S& v) { c.settings.clients = positive(k, parse_int<std::size_t>(k, v)); }},
      {"sampled_per_round", [](C& c, const S& k, const S& v) { c.settings.sampled_per_round = positive(k, parse_int<std::size_t>(k, v)); }},
      {"rounds", [](C& c, const S& k, const S& v) { c.settings.rounds = parse_int<int>(k, v); }},
      {"rank", [](C& c, const S& k, const S& v) { c.settings.rank = parse_int<Index>(k, v); }},
      {"rank_min", [](C& c, const S& k, const S& v) { c.settings.rank_min = parse_int<Index>(k, v); }},
      {"rank_max", [](C& c, const S& k, const S& v) { c.settings.rank_max = parse_int<Index>(k, v); }},
      {"layer_rank_caps", [](C& c, const S& k, const S& v) { c.settings.layer_rank_caps = parse_index_list(k, v); }},
      {"layers", [](C& c, const S& k, const S& v) {
         c.layers = parse_int<int>(k, v);
         if (c.layers != 1 && c.layers != 2) {
           throw ConfigError(k + ": must be 1 or 2");
         }
       }},
      {"input_dim", [](C& c, const S& k, const S& v) { c.settings.synthetic.input_dim = positive(k, parse_int<Index>(k, v)); }},
      {"hidden_dim", [](C& c, const S& k, const S& v) { c.settings.synthetic.hidden_dim = positive(k, parse_int<Index>(k, v)); }},
      {"num_classes", [](C& c, const S& k, const S& v) { c.settings.synthetic.num_classes = parse_int<int>(k, v); }},
      {"samples", [](C& c, const S& k, const S& v) { c.settings.synthetic.samples = positive(k, parse_int<std::size_t>(k, v)); }},
      {"test_samples", [](C& c, const S& k, const S& v) { c.settings.test_samples = positive(k, parse_int<std::size_t>(k, v)); }},
      {"true_rank", [](C& c, const S& k, const S& v) { c.settings.synthetic.true_rank = parse_int<Index>(k, v); }},
      {"label_noise", [](C& c, const S& k, const S& v) { c.settings.synthetic.label_noise = parse_real(k, v); }},
      {"delta_scale", [](C& c, const S& k, const S& v) { c.settings.synthetic.delta_scale = positive(k, parse_real(k, v)); }},
      {"partition", [](C& c, const S& k, const S& v) {
         if (v != "dirichlet" && v != "iid") {
           throw ConfigError(k + ": expected dirichlet or iid, got '" + v + "'");
         }
         c.settings.iid = v == "iid";
       }},
      {"alpha", [](C& c, const S& k, const S& v) { c.settings.alpha = positive(k, parse_real(k, v)); }},
      {"min_samples", [](C& c, const S& k, const S& v) { c.settings.min_samples = parse_int<std::size_t>(k, v); }},
      {"import_path", [](C& c, const S&, const S& v) { c.settings.import_path = v; }},
      {"learning_rate", [](C& c, const S& k, const S& v) {
         c.settings.train.learning_rate = parse_real(k, v);
         if (c.settings.train.learning_rate < 0.0) {
           throw ConfigError(k + ": must be nonnegative");
         }
       }},
      {"local_epochs", [](C& c, const S& k, const S& v) { c.settings.train.local_epochs = positive(k, parse_int<int>(k, v)); }},
      {"batch_size", [](C& c, const S& k, const S& v) { c.settings.train.batch_size = positive(k, parse_int<int>(k, v)); }},
      {"init_std", [](C& c, const S& k, const S& v) { c.settings.init_std = positive(k, parse_real(k, v)); }},
      {"target_accuracy", [](C& c, const S& k, const S& v) { c.settings.target_accuracy = parse_real(k, v); }},
      {"threads", [](C& c, const S& k, const S& v) { c.settings.threads = positive(k, parse_int<int>(k, v)); }},
      {"timing", [](C& c, const S& k, const S& v) { c.settings.record_time = parse_bool(k, v); }},
      {"output", [](C& c, const S&, const S& v) { c.output = v; }},
  };
  return table;
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
  if (it == table.end()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  it->second(c, key, value);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) {
      out.push_back(k);
    }
    return out;
  }();
  return keys;
}

ExperimentConfig parse_config_text(const std::string& text, const Overrides& overrides,
                                   const std::string& origin) {
  ExperimentConfig c;
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    const std::string body = trim(line);
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
    if (!values.emplace(key, value).second) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  for (const auto& [k, v] : overrides) {
    values[k] = v;
  }
  // Apply in table order so results do not depend on file order.
  for (const auto& key : known_keys()) {
    const auto it = values.find(key);
    if (it != values.end()) {
      apply(c, key, it->second);
      values.erase(it);
    }
  }
  if (!values.empty()) {
    throw ConfigError("unknown config key '" + values.begin()->first + "'");
  }
  if (c.layers == 1) {
    c.settings.synthetic.hidden_dim = 0;
  }
  federation::validate(c.settings);
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides, path.string());
}

std::string render_config(const ExperimentConfig& c) {
  const auto& s = c.settings;
  std::ostringstream os;
  auto list = [](const std::vector<Index>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out += (i ? "," : "") + std::to_string(v[i]);
    }
    return out;
  };
  os << "seed = " << s.seed << '\n'
     << "strategy = " << federation::to_string(s.strategy) << '\n'
     << "clients = " << s.clients << '\n'
     << "sampled_per_round = " << s.sampled_per_round << '\n'
     << "rounds = " << s.rounds << '\n'
     << "rank = " << s.rank << '\n'
     << "rank_min = " << s.rank_min << '\n'
     << "rank_max = " << s.rank_max << '\n';
  if (!s.layer_rank_caps.empty()) {
    os << "layer_rank_caps = " << list(s.layer_rank_caps) << '\n';
  }
  os << "layers = " << c.layers << '\n'
     << "input_dim = " << s.synthetic.input_dim << '\n';
  if (c.layers == 2) {
    os << "hidden_dim = " << s.synthetic.hidden_dim << '\n';
  }
  os << "num_classes = " << s.synthetic.num_classes << '\n'
     << "samples = " << s.synthetic.samples << '\n'
     << "test_samples = " << s.test_samples << '\n'
     << "true_rank = " << s.synthetic.true_rank << '\n'
     << "label_noise = " << real(s.synthetic.label_noise) << '\n'
     << "delta_scale = " << real(s.synthetic.delta_scale) << '\n'
     << "partition = " << (s.iid ? "iid" : "dirichlet") << '\n'
     << "alpha = " << real(s.alpha) << '\n'
     << "min_samples = " << s.min_samples << '\n';
  if (!s.import_path.empty()) {
    os << "import_path = " << s.import_path.string() << '\n';
  }
  os << "learning_rate = " << real(s.train.learning_rate) << '\n'
     << "local_epochs = " << s.train.local_epochs << '\n'
     << "batch_size = " << s.train.batch_size << '\n'
     << "init_std = " << real(s.init_std) << '\n'
     << "target_accuracy = " << real(s.target_accuracy) << '\n'
     << "threads = " << s.threads << '\n'
     << "timing = " << (s.record_time ? "true" : "false") << '\n'
     << "output = " << c.output.string() << '\n';
  return os.str();
}

}  // namespace cli
}  // namespace hlora
