#include "ucw/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

namespace ucw {

namespace {

std::string trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value +
                    "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  size_t start = 0;
  while (start <= value.size()) {
    const size_t comma = value.find(',', start);
    const std::string item =
        trim(comma == std::string::npos ? value.substr(start)
                                        : value.substr(start, comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

// Seeds accept either a range "0..29" or a comma list "3,7,11".
std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  const size_t dots = value.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t first =
        parse_number<std::uint64_t>("seeds", trim(value.substr(0, dots)));
    const std::uint64_t last =
        parse_number<std::uint64_t>("seeds", trim(value.substr(dots + 2)));
    if (last < first) throw ConfigError("config key 'seeds': empty range");
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = first; s <= last; ++s) seeds.push_back(s);
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split_list(value)) {
    seeds.push_back(parse_number<std::uint64_t>("seeds", item));
  }
  if (seeds.empty()) throw ConfigError("config key 'seeds': no seeds given");
  return seeds;
}

void apply_key(ExperimentConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "domain") {
    config.domain = value;
  } else if (key == "dataset_path") {
    config.dataset_path = value;
  } else if (key == "arms" || key == "N") {
    config.arms = parse_number<int>(key, value);
  } else if (key == "budget" || key == "K") {
    config.budget = parse_number<int>(key, value);
  } else if (key == "horizon" || key == "H") {
    config.horizon = parse_number<int>(key, value);
  } else if (key == "episodes" || key == "T") {
    config.episodes = parse_number<int>(key, value);
  } else if (key == "gamma") {
    config.gamma = parse_number<double>(key, value);
  } else if (key == "delta") {
    config.delta = parse_number<double>(key, value);
  } else if (key == "seeds") {
    config.seeds = parse_seeds(value);
  } else if (key == "smoothing") {
    config.smoothing = parse_number<double>(key, value);
  } else if (key == "algorithms") {
    config.algorithms = split_list(value);
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "serial_timing") {
    config.serial_timing = parse_bool(key, value);
  } else if (key == "fix_population") {
    config.fix_population = parse_bool(key, value);
  } else if (key == "parallel") {
    config.parallel = parse_bool(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  ExperimentConfig config;
  if (const char* env_dir = std::getenv("UCW_OUT_DIR")) {
    config.out_dir = env_dir;  // fallback; the out_dir key and --out win
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section header
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

void apply_overrides(ExperimentConfig& config,
                     const std::vector<std::string>& overrides) {
  for (const std::string& item : overrides) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + item + "': expected key=value");
    }
    apply_key(config, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

std::string config_key_help() {
  return
      "domain: wide | thin | dataset (wide)\n"
      "dataset_path: CSV with header p0_pass,p0_act,p1_pass,p1_act (unset)\n"
      "arms | N: number of arms (8)\n"
      "budget | K: pulls per timestep (3)\n"
      "horizon | H: steps per episode (20)\n"
      "episodes | T: episodes per run (40)\n"
      "gamma: discount factor in (0,1) (0.9)\n"
      "delta: confidence failure probability (0.05)\n"
      "seeds: range 0..29 or comma list (0..29)\n"
      "smoothing: exponential smoothing weight in [0,1) (0.9)\n"
      "algorithms: comma list of ucw-value, ucw-penalty, extreme, wiql, random, "
      "oracle (all six)\n"
      "out_dir: output directory (out; UCW_OUT_DIR is the fallback)\n"
      "serial_timing: single-worker runs for fair wall-clock comparisons (false)\n"
      "fix_population: reuse the first seed's instance for all seeds (false)\n"
      "parallel: OpenMP over runs and per-arm planning (true)\n";
}

}  // namespace ucw
