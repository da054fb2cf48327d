#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergokit/error.hpp"
#include "ergokit/measures.hpp"
#include "ergokit/systems.hpp"

namespace ergokit::harness {

using Json = nlohmann::json;

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> t{"chi",        "entropy", "brin-katok",       "partition-build", "smb-check",
                                          "dimension", "verify",  "appendix-hilbert", "hamming-bounds"};
  return t;
}

/// Typed, path-aware view of a JSON object. Every key must be consumed;
/// leftovers are reported as unknown keys.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorKind::ConfigInvalid, path_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string at(const std::string& k) const { return path_ + "." + k; }

  const Json& raw(const std::string& k) {
    seen_.insert(k);
    if (!j_.contains(k)) fail(ErrorKind::ConfigInvalid, at(k) + ": missing required field");
    return j_.at(k);
  }

  template <class T>
  T get(const std::string& k) {
    const auto& v = raw(k);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      fail(ErrorKind::ConfigInvalid, at(k) + ": wrong type");
    }
  }
  template <class T>
  T get(const std::string& k, T dflt) {
    return has(k) ? get<T>(k) : dflt;
  }
  template <class T>
  std::optional<T> maybe(const std::string& k) {
    if (!has(k)) return std::nullopt;
    return get<T>(k);
  }

  double positive(const std::string& k, double dflt) {
    const double v = get<double>(k, dflt);
    if (!(v > 0.0)) fail(ErrorKind::ConfigInvalid, at(k) + ": must be positive");
    return v;
  }
  int count(const std::string& k, int dflt, int min = 1) {
    const int v = get<int>(k, dflt);
    if (v < min) fail(ErrorKind::ConfigInvalid, at(k) + ": must be >= " + std::to_string(min));
    return v;
  }

  template <class T>
  std::vector<T> schedule(const std::string& k, std::vector<T> dflt, bool increasing) {
    auto v = has(k) ? get<std::vector<T>>(k) : std::move(dflt);
    if (v.empty()) fail(ErrorKind::ConfigInvalid, at(k) + ": schedule is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > T(0))) fail(ErrorKind::ConfigInvalid, at(k) + ": entries must be positive");
      if (i > 0 && (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])))
        fail(ErrorKind::ConfigInvalid,
             at(k) + ": schedule must be strictly " + (increasing ? "increasing" : "decreasing"));
    }
    return v;
  }

  Fields child(const std::string& k) { return Fields(raw(k), at(k)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(ErrorKind::ConfigInvalid, at(it.key()) + ": unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline SystemDescriptor parse_system(Fields f) {
  const auto type = f.get<std::string>("type");
  SystemDescriptor s;
  if (type == "toral-automorphism") {
    const auto m = f.get<std::vector<std::vector<std::int64_t>>>("matrix");
    if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
      fail(ErrorKind::ConfigInvalid, f.at("matrix") + ": expected a 2x2 integer matrix");
    s.v = ToralAutomorphism{{m[0][0], m[0][1], m[1][0], m[1][1]}};
  } else if (type == "toral-translation") {
    s.v = ToralTranslation{f.get<double>("alpha"), f.get<double>("beta")};
  } else if (type == "full-shift") {
    FullShift sh;
    sh.alphabet = f.count("alphabet", 2, 2);
    sh.window = f.count("window", 256);
    const auto metric = f.get<std::string>("metric", "dyadic");
    if (metric == "weighted") {
      WeightSequence w;
      w.power = f.get<double>("weightPower", 2.0);
      w.witnessC = f.get<double>("witnessC", 2.0);
      sh.metric = WeightedL2Metric{w};
    } else if (metric != "dyadic") {
      fail(ErrorKind::ConfigInvalid, f.at("metric") + ": expected \"dyadic\" or \"weighted\"");
    }
    s.v = sh;
  } else if (type == "product") {
    s.v = ProductSystem{make_system(parse_system(f.child("left"))), make_system(parse_system(f.child("right")))};
  } else {
    fail(ErrorKind::ConfigInvalid, f.at("type") + ": unknown system type '" + type + "'");
  }
  f.finish();
  try {
    validate(s);
  } catch (const Error& e) {
    fail(ErrorKind::ConfigInvalid, f.at("type") + ": " + e.what());
  }
  return s;
}

inline MeasureOracle parse_oracle(Fields f) {
  const auto type = f.get<std::string>("type");
  MeasureOracle o;
  try {
    if (type == "lebesgue") {
      o.v = LebesgueTorus{};
    } else if (type == "bernoulli") {
      o.v = bernoulli(f.get<std::vector<double>>("p"));
    } else if (type == "markov") {
      o.v = markov(f.get<std::vector<std::vector<double>>>("P"), f.maybe<std::vector<double>>("pi"));
    } else if (type == "product") {
      o = product_measure(parse_oracle(f.child("left")), parse_oracle(f.child("right")));
    } else {
      fail(ErrorKind::ConfigInvalid, f.at("type") + ": unknown oracle type '" + type + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    fail(ErrorKind::ConfigInvalid, f.at("type") + ": " + e.what());
  }
  f.finish();
  return o;
}

struct ExperimentConfig {
  std::string task;
  std::uint64_t seed = 0;
  Json system, oracle, params;  // raw sections, parsed by the runner
  Json echo() const {
    Json j;
    j["task"] = task;
    j["seed"] = seed;
    j["system"] = system;
    j["oracle"] = oracle;
    j["params"] = params;
    return j;
  }
};

/// Top level: {task?, seed, system, oracle?, params?}. A task given on the
/// command line must match the file's task when both are present.
inline ExperimentConfig parse_config(const Json& j, const std::string& taskOverride = "",
                                     std::optional<std::uint64_t> seedOverride = {}) {
  Fields f(j, "config");
  ExperimentConfig c;
  c.task = f.get<std::string>("task", taskOverride);
  if (!taskOverride.empty() && c.task != taskOverride)
    fail(ErrorKind::ConfigInvalid, "config.task: file says '" + c.task + "' but the command is '" + taskOverride + "'");
  bool known = false;
  for (const auto& t : task_names()) known = known || t == c.task;
  if (!known) fail(ErrorKind::ConfigInvalid, "config.task: unknown task '" + c.task + "'");
  if (f.has("seed")) {
    const auto& s = f.raw("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) fail(ErrorKind::ConfigInvalid, "config.seed: must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  } else if (!seedOverride) {
    fail(ErrorKind::ConfigInvalid, "config.seed: missing required field (no seed is taken from the environment)");
  }
  if (seedOverride) c.seed = *seedOverride;
  c.system = f.has("system") ? f.raw("system") : Json::object();
  c.oracle = f.has("oracle") ? f.raw("oracle") : Json::object();
  c.params = f.has("params") ? f.raw("params") : Json::object();
  f.finish();
  return c;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ConfigInvalid, path + ": " + e.what());
  }
}

}  // namespace ergokit::harness
