#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "ergokit/combinatorics.hpp"
#include "ergokit/entropy.hpp"
#include "ergokit/harness/config.hpp"
#include "ergokit/harness/report.hpp"
#include "ergokit/lyapunov.hpp"
#include "ergokit/partitions/smb.hpp"
#include "ergokit/partitions/subordinate.hpp"
#include "ergokit/verify.hpp"

namespace ergokit::harness {

namespace detail {

inline std::vector<int> one_to(int n) {
  std::vector<int> v;
  for (int i = 1; i <= n; ++i) v.push_back(i);
  return v;
}

inline ChiConfig parse_chi(Fields f, std::uint64_t seed, int threads, ChiConfig d = {}) {
  ChiConfig c = d;
  c.rSchedule = f.schedule<double>("rSchedule", d.rSchedule, false);
  c.nSchedule = f.schedule<int>("nSchedule", d.nSchedule.empty() ? one_to(64) : d.nSchedule, true);
  c.samplePoints = f.count("samplePoints", d.samplePoints);
  c.probes = f.count("probes", d.probes);
  c.probeRadiusFloor = f.positive("probeRadiusFloor", d.probeRadiusFloor);
  c.seed = seed;
  c.threads = threads;
  f.finish();
  return c;
}

inline Json chi_parameters(const ChiConfig& c) {
  return {{"rSchedule", c.rSchedule}, {"nSchedule", c.nSchedule},       {"samplePoints", c.samplePoints},
          {"probes", c.probes},       {"probeRadiusFloor", c.probeRadiusFloor}};
}

inline FinitePartition parse_partition(Fields& f, const std::string& key, int alphabet) {
  return cylinder_partition(f.get<std::vector<std::int64_t>>(key, {0}), alphabet);
}

struct Ctx {
  const ExperimentConfig& cfg;
  int threads;
  Report& rep;
};

// ---------------------------------------------------------------------------

inline void run_chi(const Ctx& c) {
  const auto sys = parse_system(Fields(c.cfg.system, "system"));
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  const auto cc = parse_chi(Fields(c.cfg.params, "params"), c.cfg.seed, c.threads);
  c.rep.parameters = chi_parameters(cc);
  c.rep.parameters["resolutionFloor"] = resolution_floor(sys);
  const auto est = estimate_chi(sys, o, cc);
  Json perR = Json::array();
  Table t{"chi", {"r", "n", "phi_n_over_n", "Lambda_r"}, {}};
  for (const auto& a : est.perR) {
    perR.push_back({{"r", a.r}, {"lambda", a.lambda}, {"argminN", a.argminN}, {"lastSlope", a.lastSlope},
                    {"excluded", a.excluded}});
    for (std::size_t i = 0; i < est.nSchedule.size(); ++i)
      t.rows.push_back({a.r, double(est.nSchedule[i]), a.phi[i] / est.nSchedule[i], a.lambda});
  }
  c.rep.payload = {{"chi", est.value}, {"perR", perR}, {"sampleCount", est.sampleCount}};
  const auto& d = est.diagnostics;
  c.rep.diagnostics = {{"monotoneInR", d.monotoneInR},   {"fluctuation", d.fluctuation},
                       {"maxLogL1Half", d.maxLogL1Half}, {"maxLogL1All", d.maxLogL1All},
                       {"integrabilityFlag", d.integrabilityFlag}};
  c.rep.tables.push_back(std::move(t));
  if (d.integrabilityFlag) c.rep.flag("integrability-guard");
  if (!d.monotoneInR) c.rep.flag("lambda-not-monotone-in-r");
}

inline void run_entropy(const Ctx& c) {
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  Fields p(c.cfg.params, "params");
  const auto ns = p.schedule<int>("n", {1, 2, 4, 8, 16}, true);
  const auto alpha = parse_partition(p, "partition", alphabet_of(o));
  BlockEntropyOptions opt;
  opt.monteCarloSamples = p.count("monteCarloSamples", int(opt.monteCarloSamples));
  opt.seed = c.cfg.seed;
  p.finish();
  c.rep.parameters = {{"n", ns}, {"partition", alpha.cylinder()->coords}, {"monteCarloSamples", opt.monteCarloSamples},
                      {"atomBudget", kAtomBudget}};
  Json rows = Json::array();
  Table t{"entropy", {"n", "block_entropy_rate", "stderr", "exact"}, {}};
  for (int n : ns) {
    const auto e = block_entropy_rate(o, alpha, n, opt);
    const bool exact = e.mode == EstimateMode::Exact;
    rows.push_back({{"n", n}, {"value", e.value}, {"exact", exact}, {"stderr", e.stderr_}});
    t.rows.push_back({double(n), e.value, e.stderr_, exact ? 1.0 : 0.0});
  }
  c.rep.payload = {{"blocks", rows}};
  try {
    const double h = entropy_rate(o);
    c.rep.payload["closedFormRate"] = h;
    c.rep.diagnostics["relErrorAtMaxN"] = std::fabs(t.rows.back()[1] - h) / h;
  } catch (const Error&) {
    c.rep.payload["closedFormRate"] = nullptr;
  }
  c.rep.tables.push_back(std::move(t));
}

inline void run_brin_katok(const Ctx& c) {
  const auto sys = parse_system(Fields(c.cfg.system, "system"));
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  Fields p(c.cfg.params, "params");
  const auto eps = p.schedule<double>("eps", {0.5, 0.25, 0.125}, false);
  const auto ns = p.schedule<int>("n", {4, 8, 12, 16}, true);
  const auto modeName = p.get<std::string>("mode", "exact");
  BrinKatokMode mode;
  if (modeName == "monte-carlo") {
    mode.kind = BrinKatokMode::MonteCarlo;
    mode.sampleCount = p.count("sampleCount", 1000000);
  } else if (modeName != "exact") {
    fail(ErrorKind::ConfigInvalid, "params.mode: expected \"exact\" or \"monte-carlo\"");
  }
  const int bases = p.count("basePoints", 1);
  p.finish();
  c.rep.parameters = {{"eps", eps},       {"n", ns}, {"mode", modeName}, {"sampleCount", mode.sampleCount},
                      {"basePoints", bases}, {"hitFloor", BrinKatokResult::kHitFloor}};
  Json per = Json::array();
  Table t{"brin-katok", {"base", "eps", "n", "value"}, {}};
  double lo = 0, up = 0;
  for (int b = 0; b < bases; ++b) {
    const auto x = sample_point(sys, o, derive_seed(c.cfg.seed, std::uint64_t(b)));
    const auto r = brin_katok_local(sys, o, x, eps, ns, mode, derive_seed(c.cfg.seed, std::uint64_t(b), 1), c.threads);
    Json levels = Json::array();
    for (const auto& l : r.levels) {
      levels.push_back({{"eps", l.eps}, {"values", l.values}, {"hits", l.hits}, {"reliable", l.reliable},
                        {"lower", l.lower}, {"upper", l.upper}, {"slope", l.slope}});
      for (std::size_t i = 0; i < ns.size() && i < l.values.size(); ++i)
        t.rows.push_back({double(b), l.eps, double(ns[i]), l.values[i]});
      if (!l.reliable) c.rep.flag("unreliable-level-eps-" + format_double(l.eps) + "-base-" + std::to_string(b));
    }
    per.push_back({{"lower", r.lower.value},
                   {"upper", r.upper.value},
                   {"slope", r.slope},
                   {"chosenEps", r.chosenEps},
                   {"stderr", r.lower.stderr_},
                   {"levels", levels}});
    lo += r.lower.value;
    up += r.upper.value;
  }
  c.rep.payload = {{"lower", lo / bases}, {"upper", up / bases}, {"basePoints", per}};
  c.rep.tables.push_back(std::move(t));
}

inline void run_partition_build(const Ctx& c) {
  const auto sys = parse_system(Fields(c.cfg.system, "system"));
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  Fields p(c.cfg.params, "params");
  const double delta = p.positive("delta", 0.5);
  const int Q = p.count("Q", 3), P = p.count("P", 8);
  SubordinateOptions opt;
  opt.kMax = p.count("kMax", opt.kMax, 0);
  opt.tol = p.get<double>("tol", opt.tol);
  if (!(opt.tol >= 0.0 && opt.tol < 1.0)) fail(ErrorKind::ConfigInvalid, "params.tol: must lie in [0, 1)");
  opt.threads = c.threads;
  const int a = alphabet_of(o);
  std::vector<FinitePartition> betas;
  if (p.has("betas")) {
    for (const auto& w : p.get<std::vector<std::array<std::int64_t, 2>>>("betas"))
      betas.push_back(window_partition(w[0], w[1], a));
  } else {
    betas = default_beta_chain(Q, a);
  }
  std::optional<Json> atomCfg;
  if (p.has("atomCheck")) atomCfg = p.raw("atomCheck");
  p.finish();
  int horizon = 50, pairs = 40, bases = 5;
  if (atomCfg) {
    Fields ac(*atomCfg, "params.atomCheck");
    horizon = ac.count("horizon", horizon, 0);
    pairs = ac.count("pairs", pairs);
    bases = ac.count("basePoints", bases);
    ac.finish();
  }
  Json betaJson = Json::array();
  for (const auto& b : betas) betaJson.push_back(b.cylinder()->coords);
  c.rep.parameters = {{"delta", delta}, {"Q", Q}, {"P", P}, {"kMax", opt.kMax}, {"tol", opt.tol}, {"betas", betaJson}};
  const auto plan = construct_subordinate_partition(sys, o, delta, betas, Q, P, opt);
  Json alphas = Json::array(), res = Json::array();
  for (const auto& al : plan.alphas) alphas.push_back(al.cylinder()->coords);
  Table tr{"residuals", {"q", "p", "lhs", "rhs"}, {}};
  for (const auto& r : plan.residuals) {
    res.push_back({{"q", r.q}, {"p", r.p}, {"lhs", r.lhs}, {"rhs", r.rhs}});
    tr.rows.push_back({double(r.q), double(r.p), r.lhs, r.rhs});
  }
  Table ts{"search", {"q", "k", "max_lhs_over_rhs"}, {}};
  for (std::size_t i = 0; i < plan.searchCurves.size(); ++i)
    for (std::size_t k = 0; k < plan.searchCurves[i].size(); ++k)
      ts.rows.push_back({double(i + 2), double(k), plan.searchCurves[i][k]});
  c.rep.payload = {{"ks", plan.ks},         {"alphas", alphas},           {"residuals", res},
                   {"cP", plan.cP},         {"cHalfP", plan.cHalfP},      {"hAlpha", plan.hAlpha},
                   {"supC", plan.supC},     {"entropy", plan.entropyTarget}, {"gapToH", plan.gapToH}};
  if (atomCfg) {
    c.rep.parameters["atomCheck"] = {{"horizon", horizon}, {"pairs", pairs}, {"basePoints", bases}};
    Json checks = Json::array();
    int violations = 0;
    for (int b = 0; b < bases; ++b) {
      const auto x = sample_point(sys, o, derive_seed(c.cfg.seed, std::uint64_t(b)));
      const auto r = check_atom_in_unstable(sys, plan, x, horizon, pairs, derive_seed(c.cfg.seed, std::uint64_t(b), 1));
      Json perJ = Json::array();
      for (const auto& l : r.perJ) {
        perJ.push_back({{"j", l.j}, {"bound", l.bound}, {"maxObserved", l.maxObserved}, {"violations", l.violations}});
        violations += l.violations;
      }
      violations += r.deltaViolations;
      checks.push_back({{"maxBackDiam", r.maxBackDiam},
                        {"deltaViolations", r.deltaViolations},
                        {"fixedUpTo", r.fixedUpTo},
                        {"perJ", perJ}});
    }
    c.rep.payload["atomCheck"] = {{"violations", violations}, {"basePoints", checks}};
    if (violations) c.rep.flag("atom-check-violations");
  }
  c.rep.tables.push_back(std::move(tr));
  c.rep.tables.push_back(std::move(ts));
}

}  // namespace detail

namespace detail {

inline void run_smb(const Ctx& c) {
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  Fields p(c.cfg.params, "params");
  const int P = p.count("P", 8);
  const auto ns = p.schedule<int>("n", {100, 1000, 10000}, true);
  const int paths = p.count("paths", 200, 2);
  const double tol = p.positive("tol", 0.02);
  const auto alpha = parse_partition(p, "partition", alphabet_of(o));
  const auto shiftK = p.maybe<int>("shiftK");
  const double shiftTol = p.positive("shiftTol", 0.01);
  p.finish();
  c.rep.parameters = {{"P", P}, {"n", ns}, {"paths", paths}, {"tol", tol}, {"partition", alpha.cylinder()->coords}};
  const auto r = local_smb_check(o, P, alpha, ns, paths, c.cfg.seed, tol, c.threads);
  Json levels = Json::array();
  Table t{"smb", {"n", "mean", "stderr"}, {}};
  for (const auto& l : r.levels) {
    levels.push_back({{"n", l.n}, {"mean", l.mean}, {"stderr", l.stderr_}});
    t.rows.push_back({double(l.n), l.mean, l.stderr_});
  }
  c.rep.payload = {{"levels", levels},
                   {"limit", r.limitEstimate},
                   {"target", r.target},
                   {"relError", r.relError},
                   {"converged", r.converged}};
  c.rep.tables.push_back(std::move(t));
  if (!r.converged) c.rep.flag("smb-not-converged");
  if (shiftK) {
    c.rep.parameters["shiftK"] = *shiftK;
    c.rep.parameters["shiftTol"] = shiftTol;
    const auto s = shift_lemma_check(o, alpha, *shiftK, ns, paths, derive_seed(c.cfg.seed, 1), shiftTol, c.threads);
    Table ts{"shift", {"n", "mean_0", "mean_k", "length_factor"}, {}};
    for (std::size_t i = 0; i < s.levels.size(); ++i)
      ts.rows.push_back({double(s.levels[i].n), s.levels[i].mean, s.shifted[i].mean, s.shifted[i].lengthFactor});
    c.rep.payload["shift"] = {{"k", *shiftK},
                              {"limit0", s.limitEstimate},
                              {"limitK", s.shiftedLimit},
                              {"relError", s.relError},
                              {"agrees", s.converged}};
    c.rep.tables.push_back(std::move(ts));
    if (!s.converged) c.rep.flag("shift-lemma-disagreement");
  }
}

struct CloudParams {
  double delta;
  int backHorizon, budget, pastDepth;
  std::optional<double> tol;
  std::vector<double> scales, localScales;
};

inline CloudParams parse_cloud(Fields& p, double defaultDelta) {
  CloudParams cp;
  cp.delta = p.positive("delta", defaultDelta);
  cp.backHorizon = p.count("backHorizon", 40, 0);
  cp.budget = p.count("budget", 4096);
  cp.pastDepth = p.count("pastDepth", 16);
  cp.tol = p.maybe<double>("admissionTolerance");
  cp.scales = p.schedule<double>("scales", {}, false);
  if (p.has("localScales")) cp.localScales = p.schedule<double>("localScales", {}, false);
  return cp;
}

inline Json cloud_parameters(const CloudParams& cp) {
  return {{"delta", cp.delta},
          {"backHorizon", cp.backHorizon},
          {"admissionTolerance", cp.tol ? *cp.tol : cp.delta / 8.0},
          {"budget", cp.budget},
          {"scales", cp.scales},
          {"localScales", cp.localScales},
          {"pastDepth", cp.pastDepth}};
}

inline void run_dimension(const Ctx& c) {
  const auto sys = parse_system(Fields(c.cfg.system, "system"));
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  Fields p(c.cfg.params, "params");
  const auto cp = parse_cloud(p, 0.25);
  p.finish();
  c.rep.parameters = cloud_parameters(cp);
  const auto x = sample_point(sys, o, derive_seed(c.cfg.seed, 0));
  const auto cloud = sample_unstable_set(sys, x, cp.delta, cp.backHorizon, cp.budget, derive_seed(c.cfg.seed, 1), cp.tol);
  const auto e = box_counting_dimension(sys, cloud, cp.scales);
  Table t{"dimension", {"scale", "count", "log_scale", "log_count"}, {}};
  for (std::size_t i = 0; i < e.scales.size(); ++i)
    t.rows.push_back({e.scales[i], e.values[i], std::log(e.scales[i]), std::log(e.values[i])});
  c.rep.payload = {{"slope", e.slope},
                   {"slopeCI", {e.slopeLo, e.slopeHi}},
                   {"octaveSlopes", e.octaveSlopes},
                   {"shiftedCounts", e.shiftedCounts},
                   {"cloudSize", cloud.points.size()},
                   {"candidates", cloud.candidates},
                   {"enumerationDepth", cloud.enumerationDepth}};
  c.rep.diagnostics["rejected"] = cloud.candidates - int(cloud.points.size());
  c.rep.tables.push_back(std::move(t));
  if (!cp.localScales.empty()) {
    const auto* f = as_shift(sys);
    std::optional<MeasureOracle> mx;
    if (f && f->dyadic() && !f->reversed &&
        (std::holds_alternative<BernoulliIID>(o.v) || std::holds_alternative<MarkovStationary>(o.v)))
      mx = disintegrate_past(o, cp.pastDepth, x);
    const auto l = local_dimension_lower(sys, cloud, mx ? &*mx : nullptr, x, cp.localScales);
    Table tl{"local", {"scale", "mass", "log_scale", "log_mass"}, {}};
    for (std::size_t i = 0; i < l.scales.size(); ++i)
      tl.rows.push_back({l.scales[i], l.values[i], std::log(l.scales[i]), std::log(l.values[i])});
    c.rep.payload["local"] = {{"slope", l.slope},
                              {"slopeCI", {l.slopeLo, l.slopeHi}},
                              {"liminfProxy", l.liminfProxy},
                              {"exact", mx.has_value()}};
    c.rep.tables.push_back(std::move(tl));
  }
}

inline Json verify_json(const VerifyReport& r) {
  Json per = Json::array();
  for (const auto& b : r.perPoint) {
    Json j = {{"ok", b.ok},          {"cloudSize", b.cloudSize},   {"dim", b.dim},
              {"slopeCI", {b.slopeLo, b.slopeHi}}, {"octaveSlopes", b.octaveSlopes},
              {"increasingTail", b.increasingTail}};
    if (b.localDim) j["localDim"] = *b.localDim;
    if (!b.ok) j["error"] = b.error;
    per.push_back(j);
  }
  Json j = {{"direction", r.direction == Direction::Forward ? "forward" : "backward"},
            {"dim", r.dimEstimate},
            {"h", r.hValue},
            {"chi", r.chiEstimate},
            {"ratio", number(r.ratio)},
            {"ratioInfinite", std::isinf(r.ratio)},
            {"holds", r.inequalityHolds},
            {"slack", number(r.slack)},
            {"divergenceRegime", r.divergenceRegime},
            {"failedPoints", r.failedPoints},
            {"statement", r.statement()},
            {"perPoint", per}};
  j["localDim"] = r.localDimEstimate ? Json(*r.localDimEstimate) : Json(nullptr);
  return j;
}

inline void run_verify(const Ctx& c) {
  const auto sys = parse_system(Fields(c.cfg.system, "system"));
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  Fields p(c.cfg.params, "params");
  const auto dirName = p.get<std::string>("direction", "forward");
  if (dirName != "forward" && dirName != "backward" && dirName != "both")
    fail(ErrorKind::ConfigInvalid, "params.direction: expected forward, backward or both");
  VerifyConfig vc;
  vc.basePoints = p.count("basePoints", 20);
  const auto cp = parse_cloud(p, 0.25);
  vc.delta = cp.delta;
  vc.backHorizon = cp.backHorizon;
  vc.admissionTolerance = cp.tol;
  vc.budget = cp.budget;
  vc.scales = cp.scales;
  vc.localScales = cp.localScales;
  vc.pastDepth = cp.pastDepth;
  vc.chi = p.has("chi") ? parse_chi(p.child("chi"), c.cfg.seed, c.threads)
                        : parse_chi(Fields(Json::object(), "params.chi"), c.cfg.seed, c.threads);
  vc.hValue = p.maybe<double>("hValue");
  vc.chiFloor = p.positive("chiFloor", vc.chiFloor);
  vc.slackFloor = p.get<double>("slackFloor", vc.slackFloor);
  vc.seed = c.cfg.seed;
  vc.threads = c.threads;
  p.finish();
  c.rep.parameters = cloud_parameters(cp);
  c.rep.parameters["basePoints"] = vc.basePoints;
  c.rep.parameters["chi"] = chi_parameters(vc.chi);
  c.rep.parameters["chiFloor"] = vc.chiFloor;
  c.rep.parameters["slackFloor"] = vc.slackFloor;
  c.rep.parameters["direction"] = dirName;
  Table t{"verify", {"direction", "base", "dim", "slope_lo", "slope_hi", "local_dim"}, {}};
  auto one = [&](Direction d) {
    const auto r = verify_main_inequality(sys, o, d, vc);
    for (std::size_t b = 0; b < r.perPoint.size(); ++b) {
      const auto& pp = r.perPoint[b];
      t.rows.push_back({d == Direction::Forward ? 0.0 : 1.0, double(b), pp.dim, pp.slopeLo, pp.slopeHi,
                        pp.localDim ? *pp.localDim : std::nan("")});
    }
    const std::string tag = d == Direction::Forward ? "forward" : "backward";
    if (!r.inequalityHolds) c.rep.flag("inequality-not-confirmed-" + tag);
    if (r.partial()) c.rep.flag("partial-" + tag);
    return verify_json(r);
  };
  if (dirName == "backward") {
    c.rep.payload = one(Direction::Backward);
  } else {
    c.rep.payload = one(Direction::Forward);
    if (dirName == "both") c.rep.payload["backward"] = one(Direction::Backward);
  }
  c.rep.tables.push_back(std::move(t));
}

inline void run_appendix_hilbert(const Ctx& c) {
  const auto sys = parse_system(Fields(c.cfg.system, "system"));
  const auto o = parse_oracle(Fields(c.cfg.oracle, "oracle"));
  const auto* f = as_shift(sys);
  if (!f || f->dyadic()) fail(ErrorKind::ConfigInvalid, "system.metric: appendix-hilbert needs the weighted shift");
  const auto& w = std::get<WeightedL2Metric>(f->metric).weights;
  Fields p(c.cfg.params, "params");
  const auto ks = p.schedule<int>("k", {1, 2, 5, 10, 20, 50, 100, 150, 200}, true);
  const int N = p.count("N", 4 * ks.back());
  const int monotoneFrom = p.count("monotoneFrom", 50);
  const double rateMax = p.positive("rateThreshold", 0.05);
  const int witnessK = p.count("witnessK", 200, 0);
  ChiConfig d;
  d.rSchedule = {0.8, 0.6, 0.5};
  d.nSchedule = {1, 2, 4, 8, 16, 32, 64, 128};
  d.samplePoints = 60;
  const auto cc = p.has("chi") ? parse_chi(p.child("chi"), c.cfg.seed, c.threads, d)
                               : parse_chi(Fields(Json::object(), "params.chi"), c.cfg.seed, c.threads, d);
  const double chiFloor = p.positive("chiFloor", 0.05);
  p.finish();
  c.rep.parameters = {{"k", ks},           {"N", N},         {"monotoneFrom", monotoneFrom}, {"rateThreshold", rateMax},
                      {"witnessK", witnessK}, {"chi", chi_parameters(cc)}, {"chiFloor", chiFloor},
                      {"weightPower", w.power}, {"witnessC", w.witnessC}, {"tailBound", tail_bound(*f)}};
  Table t{"norms", {"k", "norm", "rate"}, {}};
  Json norms = Json::array();
  bool monotone = true, stabilized = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int k : ks) {
    const auto n = operator_norm_power(w, k, N);
    const double rate = std::log(n.value) / k;
    norms.push_back({{"k", k}, {"norm", n.value}, {"rate", rate}, {"stabilized", n.stabilized}});
    t.rows.push_back({double(k), n.value, rate});
    stabilized = stabilized && n.stabilized;
    if (k >= monotoneFrom) {
      monotone = monotone && rate <= prev;
      prev = rate;
    }
  }
  const double lastRate = t.rows.back()[2];
  const double witness = w.witness_ratio(witnessK);
  const auto chi = estimate_chi(sys, o, cc);
  c.rep.payload = {{"norms", norms},
                   {"rateAtMaxK", lastRate},
                   {"monotoneBeyond", monotone},
                   {"witnessRatio", witness},
                   {"witnessHolds", witness <= 1.0},
                   {"subexpRateAtMaxK", w.subexp_rate(ks.back())},
                   {"chi", chi.value},
                   {"entropy", entropy_rate(o)}};
  c.rep.diagnostics = {{"normsStabilized", stabilized}, {"chiIntegrabilityFlag", chi.diagnostics.integrabilityFlag}};
  c.rep.tables.push_back(std::move(t));
  if (lastRate > rateMax) c.rep.flag("norm-rate-above-threshold");
  if (!monotone) c.rep.flag("norm-rate-not-monotone");
  if (witness > 1.0) c.rep.flag("weight-witness-fails");
  if (chi.value > chiFloor) c.rep.flag("chi-above-floor");
  if (!stabilized) c.rep.flag("norm-window-too-small");
}

inline void run_hamming(const Ctx& c) {
  Fields p(c.cfg.params, "params");
  const int nLo = p.count("nLo", 12), nHi = p.count("nHi", 30);
  const int a = p.count("alphabet", 2, 2);
  const double eps = p.positive("eps", 0.04);
  p.finish();
  if (nHi < nLo) fail(ErrorKind::ConfigInvalid, "params.nHi: must be >= nLo");
  c.rep.parameters = {{"nLo", nLo}, {"nHi", nHi}, {"alphabet", a}, {"eps", eps}, {"ballConvention", "open"}};
  const auto s = scan_hamming_bounds(nLo, nHi, a, eps);
  Json rows = Json::array();
  Table t{"hamming",
          {"n", "m", "exact_count", "stirling_bound", "crude_lhs", "crude_bound", "stirling_holds", "crude_holds"},
          {}};
  int crudeFailures = 0;
  for (const auto& r : s.rows) {
    rows.push_back({{"n", r.n},
                    {"m", r.m},
                    {"exactCount", ergokit::to_string(r.exactCount)},
                    {"stirlingBound", r.stirlingBound},
                    {"crudeLhs", ergokit::to_string(r.crudeLhs)},
                    {"crudeBound", r.paperCrudeBound},
                    {"stirlingHolds", r.stirlingHolds},
                    {"crudeHolds", r.crudeHolds}});
    t.rows.push_back({double(r.n), double(r.m), double(r.exactCount), r.stirlingBound, double(r.crudeLhs),
                      r.paperCrudeBound, r.stirlingHolds ? 1.0 : 0.0, r.crudeHolds ? 1.0 : 0.0});
    crudeFailures += !r.crudeHolds;
  }
  const double delta = delta_constant(eps, a);
  c.rep.payload = {{"delta", delta}, {"rows", rows}};
  c.rep.payload["stirlingFrom"] = s.stirlingFrom ? Json(*s.stirlingFrom) : Json(nullptr);
  c.rep.payload["crudeFrom"] = s.crudeFrom ? Json(*s.crudeFrom) : Json(nullptr);
  if (a == 2) {
    const double r = 2 * std::sqrt(eps);
    c.rep.diagnostics["binaryEntropyGap"] = std::fabs(delta - (-r * std::log(r) - (1 - r) * std::log1p(-r)));
  }
  c.rep.tables.push_back(std::move(t));
  if (crudeFailures) c.rep.flag("crude-bound-fails-small-m");
  if (!s.stirlingFrom || *s.stirlingFrom != nLo) c.rep.flag("stirling-bound-fails");
}

}  // namespace detail

/// Runs one experiment; never throws. Errors land in the report with status failed.
inline Report run_experiment(const ExperimentConfig& cfg, int threads = 1) {
  Report rep;
  rep.config = cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const detail::Ctx c{cfg, std::max(1, threads), rep};
  try {
    const auto& t = cfg.task;
    if (t == "chi") detail::run_chi(c);
    else if (t == "entropy") detail::run_entropy(c);
    else if (t == "brin-katok") detail::run_brin_katok(c);
    else if (t == "partition-build") detail::run_partition_build(c);
    else if (t == "smb-check") detail::run_smb(c);
    else if (t == "dimension") detail::run_dimension(c);
    else if (t == "verify") detail::run_verify(c);
    else if (t == "appendix-hilbert") detail::run_appendix_hilbert(c);
    else if (t == "hamming-bounds") detail::run_hamming(c);
    else fail(ErrorKind::ConfigInvalid, "config.task: unknown task '" + t + "'");
  } catch (const Error& e) {
    rep.status = Status::Failed;
    rep.errorKind = std::string(ergokit::to_string(e.kind()));
    rep.errorMessage = e.what();
  } catch (const std::exception& e) {
    rep.status = Status::Failed;
    rep.errorKind = std::string(ergokit::to_string(ErrorKind::TaskFailed));
    rep.errorMessage = e.what();
  }
  rep.wallClockSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace ergokit::harness
