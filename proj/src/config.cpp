#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "rhmc/experiment.hpp"

namespace rhmc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string normalize_key(std::string key) {
  key = trim(key);
  std::replace(key.begin(), key.end(), '_', '-');
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return key;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::optional<double> parse_plain(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "scenario",  "sampler",  "lambda-grid", "horowitz-angle", "step-length", "n-samples",
      "seed",      "output",   "sigmas",      "burn-in",        "initial-q",   "initial-p",
      "horizon",   "replicas", "h-grid",      "threads"};
  return keys;
}

class Builder {
 public:
  explicit Builder(const RawConfig& raw) : raw_(raw) {}

  std::optional<std::string> text(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> real(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    const auto v = parse_real(*t);
    if (!v || !std::isfinite(*v)) {
      fail(key + ": '" + *t + "' is not a finite real number");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::vector<double>> reals(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    std::stringstream ss(*t);
    std::string item;
    bool ok = true;
    while (std::getline(ss, item, ',')) {
      const auto v = parse_real(trim(item));
      if (!v || !std::isfinite(*v)) {
        fail(key + ": '" + trim(item) + "' is not a finite real number");
        ok = false;
      } else {
        out.push_back(*v);
      }
    }
    if (ok && out.empty()) fail(key + ": list is empty");
    if (!ok || out.empty()) return std::nullopt;
    return out;
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    const std::string s = trim(*t);
    // Accept plain digits and scientific shorthand such as 1e6.
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
      try {
        return std::stoull(s);
      } catch (const std::exception&) {
      }
    } else if (const auto v = parse_plain(s); v && *v >= 0 && *v < 1.8e19 && std::floor(*v) == *v) {
      return static_cast<std::uint64_t>(*v);
    }
    fail(key + ": '" + s + "' is not a non-negative integer");
    return std::nullopt;
  }

  void fail(std::string message) { violations_.push_back(std::move(message)); }
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  const RawConfig& raw_;
  std::vector<std::string> violations_;
};

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

std::optional<double> parse_real(const std::string& raw) {
  const std::string token = trim(raw);
  const auto pi_at = token.find("pi");
  if (pi_at == std::string::npos) return parse_plain(token);

  // [coef][*]pi[/denominator]
  std::string coef = token.substr(0, pi_at);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double value = std::numbers::pi;
  if (coef == "-") {
    value = -value;
  } else if (!coef.empty()) {
    const auto c = parse_plain(coef);
    if (!c) return std::nullopt;
    value *= *c;
  }
  const std::string rest = token.substr(pi_at + 2);
  if (rest.empty()) return value;
  if (rest.front() != '/') return std::nullopt;
  const auto d = parse_plain(rest.substr(1));
  if (!d || *d == 0.0) return std::nullopt;
  return value / *d;
}

RawConfig parse_config_text(const std::string& text) {
  RawConfig out;
  std::vector<std::string> violations;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      violations.push_back("line " + std::to_string(number) + ": expected key=value");
      continue;
    }
    out[normalize_key(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return out;
}

RawConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

RawConfig merge_config(RawConfig base, const RawConfig& overrides) {
  for (const auto& [key, value] : overrides) base[normalize_key(key)] = value;
  return base;
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kGaussian1d: return "gaussian1d";
    case Scenario::kGaussian10d: return "gaussian10d";
    case Scenario::kDoubleWell2d: return "doublewell2d";
    case Scenario::kCustom: return "custom";
  }
  return "?";
}

std::string to_string(SamplerKind s) {
  switch (s) {
    case SamplerKind::kHmc: return "hmc";
    case SamplerKind::kHmcMetropolis: return "hmc-metropolis";
    case SamplerKind::kRhmc: return "rhmc";
    case SamplerKind::kVariant1: return "variant1";
    case SamplerKind::kVariant2: return "variant2";
  }
  return "?";
}

ExperimentConfig build_config(const RawConfig& raw, Command command) {
  Builder b(raw);
  ExperimentConfig cfg;

  for (const auto& [key, value] : raw) {
    if (!known_keys().contains(key)) b.fail("unknown key '" + key + "'");
  }

  if (const auto s = b.text("scenario")) {
    static const std::map<std::string, Scenario> names{{"gaussian1d", Scenario::kGaussian1d},
                                                       {"gaussian10d", Scenario::kGaussian10d},
                                                       {"doublewell2d", Scenario::kDoubleWell2d},
                                                       {"custom", Scenario::kCustom}};
    if (const auto it = names.find(*s); it != names.end()) {
      cfg.scenario = it->second;
    } else {
      b.fail("scenario: '" + *s + "' is not one of gaussian1d, gaussian10d, doublewell2d, custom");
    }
  } else {
    b.fail("scenario: required");
  }

  bool sampler_given = false;
  if (const auto s = b.text("sampler")) {
    static const std::map<std::string, SamplerKind> names{
        {"hmc", SamplerKind::kHmc},           {"hmc-metropolis", SamplerKind::kHmcMetropolis},
        {"rhmc", SamplerKind::kRhmc},         {"variant1", SamplerKind::kVariant1},
        {"variant2", SamplerKind::kVariant2}};
    if (const auto it = names.find(*s); it != names.end()) {
      cfg.sampler = it->second;
      sampler_given = true;
    } else {
      b.fail("sampler: '" + *s + "' is not one of hmc, hmc-metropolis, rhmc, variant1, variant2");
    }
  }

  switch (cfg.scenario) {
    case Scenario::kGaussian1d: cfg.sigmas = Vector::Ones(1); break;
    case Scenario::kGaussian10d:
      cfg.sigmas = Vector::LinSpaced(10, 1.0, 10.0) / 10.0;
      break;
    case Scenario::kDoubleWell2d: break;
    case Scenario::kCustom:
      if (const auto s = b.reals("sigmas")) {
        cfg.sigmas = to_vector(*s);
        if (!(cfg.sigmas.array() > 0.0).all()) b.fail("sigmas: every entry must be > 0");
      } else if (!b.text("sigmas")) {
        b.fail("sigmas: required for the custom scenario");
      }
      break;
  }
  if (cfg.scenario != Scenario::kCustom && b.text("sigmas")) {
    b.fail("sigmas: only allowed with scenario=custom");
  }

  if (const auto grid = b.reals("lambda-grid")) {
    cfg.lambda_grid = *grid;
    for (double l : cfg.lambda_grid) {
      if (!(l > 0.0)) b.fail("lambda-grid: every lambda must be > 0 (got " + format_real(l) + ")");
    }
  } else if (!b.text("lambda-grid")) {
    if (command == Command::kSweep) {
      b.fail("lambda-grid: required");
    } else {
      cfg.lambda_grid = {1.0};
    }
  }
  if ((command == Command::kDriftCheck || command == Command::kVariantBias ||
       command == Command::kSample) &&
      cfg.lambda_grid.size() > 1) {
    b.fail("lambda-grid: this subcommand takes a single mean duration");
  }

  if (const auto a = b.real("horowitz-angle")) {
    cfg.horowitz_angle = *a;
    if (!(*a > 0.0) || *a > std::numbers::pi / 2.0 * (1.0 + 4e-16)) {
      b.fail("horowitz-angle: must lie in (0, pi/2] (phi = 0 disables refresh)");
    }
  }
  if (const auto h = b.real("step-length")) {
    cfg.step_length = *h;
    if (!(*h > 0.0)) b.fail("step-length: must be > 0");
  }

  const bool gaussian = cfg.scenario != Scenario::kDoubleWell2d;
  cfg.n_samples = gaussian ? 1000000 : 10000;
  if (const auto n = b.unsigned_integer("n-samples")) {
    cfg.n_samples = static_cast<std::size_t>(*n);
    if (*n == 0) b.fail("n-samples: must be > 0");
  }
  cfg.burn_in = gaussian ? 0 : 10000;
  if (const auto n = b.unsigned_integer("burn-in")) cfg.burn_in = static_cast<std::size_t>(*n);
  if (const auto s = b.unsigned_integer("seed")) cfg.seed = *s;
  if (const auto o = b.text("output")) {
    cfg.output_path = *o;
    if (o->empty()) b.fail("output: empty path");
  }
  if (const auto t = b.unsigned_integer("threads")) cfg.threads = static_cast<unsigned>(*t);

  const Index dim = gaussian ? cfg.sigmas.size() : 2;
  for (const char* key : {"initial-q", "initial-p"}) {
    if (const auto v = b.reals(key)) {
      if (dim > 0 && static_cast<Index>(v->size()) != dim) {
        b.fail(std::string(key) + ": expected " + std::to_string(dim) + " values");
      } else {
        (std::string(key) == "initial-q" ? cfg.initial_q : cfg.initial_p) = to_vector(*v);
      }
    }
  }

  if (const auto h = b.real("horizon")) {
    cfg.horizon = *h;
    if (!(*h >= 0.0)) b.fail("horizon: must be >= 0");
  }
  if (const auto r = b.unsigned_integer("replicas")) {
    cfg.replicas = static_cast<std::size_t>(*r);
    if (*r == 0) b.fail("replicas: must be > 0");
  }

  cfg.h_grid = {0.2, 0.1, 0.05};
  if (const auto g = b.reals("h-grid")) {
    cfg.h_grid = *g;
    for (double h : cfg.h_grid) {
      if (!(h > 0.0)) b.fail("h-grid: every h must be > 0 (got " + format_real(h) + ")");
    }
  }

  switch (command) {
    case Command::kSweep:
    case Command::kSample:
      if (!sampler_given && !b.text("sampler")) b.fail("sampler: required");
      break;
    case Command::kDriftCheck:
      if (sampler_given && cfg.sampler != SamplerKind::kRhmc) {
        b.fail("sampler: drift-check runs rhmc only");
      }
      cfg.sampler = SamplerKind::kRhmc;
      break;
    case Command::kVariantBias:
      if (!sampler_given && !b.text("sampler")) {
        b.fail("sampler: required (variant1 or variant2)");
      } else if (sampler_given && cfg.sampler != SamplerKind::kVariant1 &&
                 cfg.sampler != SamplerKind::kVariant2) {
        b.fail("sampler: variant-bias needs variant1 or variant2");
      }
      if (cfg.scenario != Scenario::kGaussian1d) {
        b.fail("scenario: variant-bias is defined for gaussian1d only");
      }
      break;
  }

  if (!b.violations().empty()) throw ConfigError(b.violations());
  return cfg;
}

}  // namespace rhmc
