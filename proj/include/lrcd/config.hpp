#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrcd/duration_models.hpp"
#include "lrcd/point_process.hpp"

namespace lrcd {

inline constexpr const char* kToolVersion = "0.1.0";

// Collects every violated invariant instead of stopping at the first.
struct ConfigError : std::runtime_error {
  std::vector<std::string> violations;

  explicit ConfigError(std::vector<std::string> v)
      : std::runtime_error(join(v)), violations(std::move(v)) {}

  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& m : v) s += "\n  - " + m;
    return s;
  }
};

struct ExperimentConfig {
  ModelSpec model = LmsdSpec{};
  SamplingRegime regime = SamplingRegime::stationary();
  double horizon = 0.0;
  double delta_t = 1.0;
  std::vector<double> t_grid;
  std::vector<std::size_t> levels;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  void validate() const;
  std::vector<std::string> collect_violations() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  std::string canonical() const { return to_json().dump(); }
  std::uint64_t hash() const {
    // FNV-1a over the canonical serialization
    const std::string s = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

namespace detail {

inline nlohmann::json innovation_to_json(const InnovationSpec& s) {
  nlohmann::json j;
  j["family"] = s.name();
  if (s.family == InnovationFamily::Gamma) j["shape"] = s.gamma_shape;
  return j;
}

inline InnovationSpec innovation_from_json(const nlohmann::json& j, std::vector<std::string>& errs) {
  InnovationSpec s;
  const std::string family = j.value("family", "exponential");
  if (family == "exponential") {
    s.family = InnovationFamily::Exponential;
  } else if (family == "gamma") {
    s.family = InnovationFamily::Gamma;
    s.gamma_shape = j.value("shape", 1.0);
    if (!(s.gamma_shape > 0.0)) errs.push_back("innovation: gamma shape must be positive");
  } else if (family == "degenerate") {
    s.family = InnovationFamily::Degenerate;
  } else {
    errs.push_back("innovation: unknown family '" + family + "'");
  }
  return s;
}

}  // namespace detail

inline nlohmann::json model_to_json(const ModelSpec& model) {
  nlohmann::json j;
  if (const auto* l = std::get_if<LmsdSpec>(&model)) {
    j["type"] = "lmsd";
    j["d"] = l->gaussian.d;
    j["sigma_e"] = l->gaussian.sigma_e;
    j["a"] = l->gaussian.a;
    j["coeff_scale"] = l->gaussian.coeff_scale;
    j["innovation"] = detail::innovation_to_json(l->innovation);
  } else if (const auto* a = std::get_if<AcdSpec>(&model)) {
    j["type"] = "acd";
    j["omega"] = a->omega;
    j["alpha"] = a->alpha;
    j["beta"] = a->beta;
    j["innovation"] = detail::innovation_to_json(a->innovation);
  } else {
    const auto& r = std::get<RenewalSpec>(model);
    j["type"] = "renewal";
    j["scale"] = r.scale;
    j["innovation"] = detail::innovation_to_json(r.innovation);
  }
  return j;
}

inline ModelSpec model_from_json(const nlohmann::json& j, std::vector<std::string>& errs) {
  const std::string type = j.value("type", "");
  const nlohmann::json inn = j.contains("innovation") ? j["innovation"] : nlohmann::json::object();
  if (type == "lmsd") {
    LmsdSpec s;
    s.gaussian.d = j.value("d", 0.3);
    s.gaussian.a = j.value("a", 0.0);
    s.gaussian.coeff_scale = j.value("coeff_scale", 1.0);
    if (j.contains("sigma_h_sq") && j.contains("sigma_e")) {
      errs.push_back("lmsd: give sigma_e or sigma_h_sq, not both");
      s.gaussian.sigma_e = j.value("sigma_e", 1.0);
    } else if (j.contains("sigma_h_sq")) {
      const double sh2 = j["sigma_h_sq"].get<double>();
      if (!(sh2 > 0.0)) {
        errs.push_back("lmsd: sigma_h_sq must be positive");
      } else if (s.gaussian.d >= 0.0 && s.gaussian.d < 0.5 && std::abs(s.gaussian.a) < 1.0 &&
                 s.gaussian.coeff_scale != 0.0) {
        s.gaussian = LongMemoryGaussianSpec::with_target_variance(s.gaussian.d, sh2, s.gaussian.a,
                                                                  s.gaussian.coeff_scale);
      }
    } else {
      s.gaussian.sigma_e = j.value("sigma_e", 1.0);
    }
    s.innovation = detail::innovation_from_json(inn, errs);
    if (!(s.gaussian.d >= 0.0 && s.gaussian.d < 0.5)) errs.push_back("lmsd: d must be in [0, 0.5)");
    if (!(s.gaussian.sigma_e > 0.0)) errs.push_back("lmsd: sigma_e must be positive");
    if (!(std::abs(s.gaussian.a) < 1.0)) errs.push_back("lmsd: |a| must be < 1");
    if (s.gaussian.coeff_scale == 0.0) errs.push_back("lmsd: coeff_scale must be nonzero");
    return s;
  }
  if (type == "acd") {
    AcdSpec s;
    s.omega = j.value("omega", 0.1);
    s.alpha = j.value("alpha", 0.1);
    s.beta = j.value("beta", 0.8);
    s.innovation = detail::innovation_from_json(inn, errs);
    if (!(s.omega > 0.0)) errs.push_back("acd: omega must be positive");
    if (!(s.alpha > 0.0)) errs.push_back("acd: alpha must be positive");
    if (!(s.beta >= 0.0)) errs.push_back("acd: beta must be nonnegative");
    if (!(s.alpha + s.beta < 1.0)) errs.push_back("acd: alpha + beta must be < 1 (stationarity)");
    if (s.innovation.family == InnovationFamily::Degenerate)
      errs.push_back("acd: innovation needs positive density near 0 (degenerate not allowed)");
    return s;
  }
  if (type == "renewal") {
    RenewalSpec s;
    s.scale = j.value("scale", 1.0);
    s.innovation = detail::innovation_from_json(inn, errs);
    if (!(s.scale > 0.0)) errs.push_back("renewal: scale must be positive");
    return s;
  }
  errs.push_back("model: unknown type '" + type + "' (expected lmsd | acd | renewal)");
  return LmsdSpec{};
}

inline std::vector<std::string> ExperimentConfig::collect_violations() const {
  std::vector<std::string> errs;
  nlohmann::json probe = model_to_json(model);
  model_from_json(probe, errs);  // re-run the field checks
  if (!(regime.origin_window > 0.0 && regime.origin_window <= 1.0))
    errs.push_back("regime: origin window must be in (0, 1]");
  if (reps < 1) errs.push_back("reps must be >= 1");
  if (!(delta_t > 0.0)) errs.push_back("delta_t must be positive");
  if (!(horizon > 0.0)) errs.push_back("horizon must be positive");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) {
      errs.push_back("t_grid must be strictly increasing");
      break;
    }
  if (!t_grid.empty()) {
    if (!(t_grid.front() > 0.0)) errs.push_back("t_grid entries must be positive");
    if (t_grid.back() > horizon) errs.push_back("horizon must cover max(t_grid)");
  }
  for (std::size_t lv : levels)
    if (lv == 0) {
      errs.push_back("levels must be >= 1");
      break;
    }
  if (out_dir.empty()) errs.push_back("out_dir must be nonempty");
  return errs;
}

inline void ExperimentConfig::validate() const {
  std::vector<std::string> errs = collect_violations();
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["model"] = model_to_json(model);
  j["regime"] = regime.name();
  j["origin_window"] = regime.origin_window;
  j["horizon"] = horizon;
  j["delta_t"] = delta_t;
  j["t_grid"] = t_grid;
  j["levels"] = levels;
  j["reps"] = reps;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  return j;
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  std::vector<std::string> errs;
  ExperimentConfig c;
  if (!j.contains("model")) errs.push_back("missing model");
  else c.model = model_from_json(j["model"], errs);
  const std::string reg = j.value("regime", "stationary");
  if (reg == "palm") c.regime = SamplingRegime::palm();
  else if (reg == "stationary") c.regime = SamplingRegime::stationary(j.value("origin_window", 1.0 / 3.0));
  else errs.push_back("regime: expected palm | stationary");
  c.horizon = j.value("horizon", 0.0);
  c.delta_t = j.value("delta_t", 1.0);
  c.t_grid = j.value("t_grid", std::vector<double>{});
  c.levels = j.value("levels", std::vector<std::size_t>{});
  c.reps = j.value("reps", std::size_t{1});
  c.seed = j.value("seed", std::uint64_t{1});
  c.out_dir = j.value("out_dir", "out");
  if (!errs.empty()) throw ConfigError(std::move(errs));
  c.validate();
  return c;
}

}  // namespace lrcd
