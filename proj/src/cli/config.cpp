#include "psgdlab/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace psgdlab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    parts.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* why) {
  throw UsageError("config key '" + std::string(key) + "': " + why + " (got '" + std::string(value) + "')");
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad(key, text, "expected a nonnegative integer");
  }
  return value;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  const auto v = parse_int<std::size_t>(key, text);
  if (v == 0) bad(key, text, "must be positive");
  return v;
}

double parse_real(std::string_view key, std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(value)) {
    bad(key, text, "expected a finite number");
  }
  return value;
}

double parse_nonnegative(std::string_view key, std::string_view text) {
  const double v = parse_real(key, text);
  if (v < 0.0) bad(key, text, "must be nonnegative");
  return v;
}

double parse_positive(std::string_view key, std::string_view text) {
  const double v = parse_real(key, text);
  if (!(v > 0.0)) bad(key, text, "must be positive");
  return v;
}

std::vector<std::size_t> parse_counts(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  for (auto part : split_list(text)) out.push_back(parse_count(key, part));
  return out;
}

std::string one_of(std::string_view key, std::string_view value,
                   std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return std::string(value);
  }
  bad(key, value, "unrecognised value");
}

std::string real_text(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

std::string count_list(const std::vector<std::size_t>& v) {
  return join(v, [](std::size_t x) { return std::to_string(x); });
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "loss",          "n",           "d",           "T",            "schedule",
      "noise",         "sigma",       "batch",       "trials",       "seed",
      "constant_c",    "constant_C",  "radius",      "margin",       "epsilon",
      "mu",            "label_flip",  "eps_grid",    "search_starts", "search_top",
      "search_steps",  "search_rate", "limit_steps", "fallback_steps", "out",
      "format",        "inject_fault"};
  return keys;
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "loss") {
    loss = one_of(key, value, {"one_sided", "counterexample", "counterexample_perturbed", "strongly_convex"});
  } else if (key == "n") {
    n = parse_counts(key, value);
  } else if (key == "d") {
    d = parse_counts(key, value);
  } else if (key == "T") {
    T = parse_counts(key, value);
  } else if (key == "schedule") {
    try {
      StepSchedule::parse(std::string(value));
    } catch (const std::invalid_argument& e) {
      bad(key, value, e.what());
    }
    schedule = std::string(value);
  } else if (key == "noise") {
    noise = one_of(key, value, {"none", "gaussian", "minibatch"});
  } else if (key == "sigma") {
    sigma = parse_nonnegative(key, value);
  } else if (key == "batch") {
    batch = parse_count(key, value);
  } else if (key == "trials") {
    trials = parse_count(key, value);
    if (trials < 2) bad(key, value, "need at least 2 trials");
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "constant_c") {
    constant_c = parse_positive(key, value);
  } else if (key == "constant_C") {
    constant_C = parse_positive(key, value);
  } else if (key == "radius") {
    radius = parse_positive(key, value);
  } else if (key == "margin") {
    margin = parse_real(key, value);
  } else if (key == "epsilon") {
    epsilon = parse_positive(key, value);
  } else if (key == "mu") {
    mu = parse_positive(key, value);
  } else if (key == "label_flip") {
    label_flip = parse_nonnegative(key, value);
    if (label_flip > 1.0) bad(key, value, "must lie in [0, 1]");
  } else if (key == "eps_grid") {
    eps_grid.clear();
    for (auto part : split_list(value)) eps_grid.push_back(parse_positive(key, part));
  } else if (key == "search_starts") {
    search_starts = parse_count(key, value);
  } else if (key == "search_top") {
    search_top = parse_int<std::size_t>(key, value);
  } else if (key == "search_steps") {
    search_steps = parse_int<std::size_t>(key, value);
  } else if (key == "search_rate") {
    if (value == "auto") search_rate.reset();
    else search_rate = parse_positive(key, value);
  } else if (key == "limit_steps") {
    limit_steps = parse_count(key, value);
  } else if (key == "fallback_steps") {
    fallback_steps = parse_count(key, value);
  } else if (key == "out") {
    out = std::string(value);
  } else if (key == "format") {
    format = one_of(key, value, {"csv", "json"});
  } else if (key == "inject_fault") {
    inject_fault = one_of(key, value, {"none", "projection_scale"});
  } else {
    throw UsageError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      throw UsageError("config line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    config.set(key, line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream text;
  auto line = [&](const char* key, const std::string& value) { text << key << " = " << value << '\n'; };
  line("loss", loss);
  line("n", count_list(n));
  line("d", count_list(d));
  line("T", count_list(T));
  line("schedule", schedule);
  line("noise", noise);
  line("sigma", real_text(sigma));
  line("batch", std::to_string(batch));
  line("trials", std::to_string(trials));
  line("seed", std::to_string(seed));
  line("constant_c", real_text(constant_c));
  line("constant_C", real_text(constant_C));
  line("radius", real_text(radius));
  line("margin", real_text(margin));
  line("epsilon", real_text(epsilon));
  line("mu", real_text(mu));
  line("label_flip", real_text(label_flip));
  line("eps_grid", join(eps_grid, real_text));
  line("search_starts", std::to_string(search_starts));
  line("search_top", std::to_string(search_top));
  line("search_steps", std::to_string(search_steps));
  line("search_rate", search_rate ? real_text(*search_rate) : "auto");
  line("limit_steps", std::to_string(limit_steps));
  line("fallback_steps", std::to_string(fallback_steps));
  line("out", out);
  line("format", format);
  line("inject_fault", inject_fault);
  return text.str();
}

LossModel make_model(const ExperimentConfig& config, std::size_t d) {
  if (config.loss == "one_sided") return LossModel::one_sided_quadratic(1.0, config.radius, config.margin);
  if (config.loss == "strongly_convex") {
    return LossModel::quadratic_strongly_convex(config.mu, 1.0, config.radius);
  }
  if (config.loss == "counterexample") return LossModel::counterexample(config.radius);
  return LossModel::counterexample_perturbed(config.epsilon, d, config.radius);
}

Sampler make_sampler(const ExperimentConfig& config, std::size_t d) {
  if (config.loss == "one_sided" || config.loss == "strongly_convex") {
    Vector direction(d);
    direction[0] = 1.0;
    return noisy_halfspace_sampler(direction, config.label_flip);
  }
  return rademacher_sampler(d);
}

NoiseModel make_noise(const ExperimentConfig& config) {
  if (config.noise == "gaussian") return NoiseModel::isotropic_gaussian(config.sigma);
  if (config.noise == "minibatch") return NoiseModel::minibatch(config.batch);
  return NoiseModel::none();
}

StepSchedule make_schedule(const ExperimentConfig& config, double smoothness) {
  const StepSchedule parsed = StepSchedule::parse(config.schedule);
  const StepSchedule schedule =
      std::isfinite(parsed.cap()) ? parsed
                                  : StepSchedule::capped_for(parsed.kind(), parsed.c(), smoothness);
  try {
    schedule.validate_for(smoothness);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return schedule;
}

SupSearchConfig make_search(const ExperimentConfig& config) {
  SupSearchConfig s;
  s.random_starts = config.search_starts;
  s.refine_top = config.search_top;
  s.refine_steps = config.search_steps;
  s.refine_rate = config.search_rate;
  return s;
}

}  // namespace psgdlab::cli
