#include "lurerad/commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lurerad/nn_sector.h"
#include "lurerad/robustness.h"
#include "lurerad/simulation.h"

namespace lurerad {

using nlohmann::json;

namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json MatJson(const Mat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* PassFail(bool ok) { return ok ? "pass" : "FAIL"; }

json CertificateJson(const AizermanCertificate& c) {
  json j;
  j["b_nonneg"] = c.b_nonneg;
  j["c_nonneg"] = c.c_nonneg;
  j["sector_ordered"] = c.sector_ordered;
  j["metzler_at_lower"] = c.metzler_at_lower;
  j["hurwitz_at_upper"] = c.hurwitz_at_upper;
  j["metzler_at_upper"] = c.metzler_at_upper;
  j["upper_abscissa"] = c.upper_abscissa;
  j["lower_closed_loop"] = MatJson(c.lower_closed_loop);
  j["upper_closed_loop"] = MatJson(c.upper_closed_loop);
  j["positive_vector"] = c.positive_vector ? MatJson(*c.positive_vector) : json(nullptr);
  j["verdict"] = c.verdict;
  return j;
}

void CertificateLines(const AizermanCertificate& c, std::vector<std::string>& lines) {
  lines.push_back(std::string("  B >= 0                      : ") + PassFail(c.b_nonneg));
  lines.push_back(std::string("  C >= 0                      : ") + PassFail(c.c_nonneg));
  lines.push_back(std::string("  Sigma1 <= Sigma2            : ") + PassFail(c.sector_ordered));
  lines.push_back(std::string("  A + B Sigma1 C Metzler      : ") + PassFail(c.metzler_at_lower));
  lines.push_back(std::string("  A + B Sigma2 C Hurwitz      : ") + PassFail(c.hurwitz_at_upper) +
                  " (spectral abscissa " + Num(c.upper_abscissa) + ")");
  lines.push_back(std::string("  A + B Sigma2 C Metzler      : ") +
                  (c.metzler_at_upper ? "true" : "false") + " (informational)");
  if (c.positive_vector) {
    lines.push_back("  positive vector v           : " + c.positive_vector->transpose().ToString() +
                    "^T");
  }
  lines.push_back(std::string("  verdict                     : ") +
                  (c.verdict ? "globally exponentially stable for every nonlinearity in the sector"
                             : "NOT certified"));
}

struct LoopSector {
  SectorBound bound;
  std::string source;  // "sector", "network", "builtin"
  std::optional<Ffnn> net;
};

std::optional<LoopSector> ResolveSector(const ProblemFile& pf, const CommandOptions& opts) {
  if (opts.network || pf.network) {
    if (!pf.has_loop()) throw Error(ErrorCode::kInvalidArgument, "a network needs system.B and system.C");
    Ffnn net = LoadNetwork(opts.network ? *opts.network : *pf.network);
    SectorBound b = sector_bound_ffnn(net).bound;
    return LoopSector{std::move(b), "network", std::move(net)};
  }
  if (pf.sector) return LoopSector{*pf.sector, "sector", std::nullopt};
  if (pf.builtin_nonlinearity) {
    Nonlinearity::Builtin(*pf.builtin_nonlinearity);  // validates the name
    auto b = Nonlinearity::BuiltinSector(*pf.builtin_nonlinearity);
    if (!b) {
      throw Error(ErrorCode::kInvalidArgument,
                  "built-in '" + *pf.builtin_nonlinearity + "' has no declared sector");
    }
    return LoopSector{*b, "builtin", std::nullopt};
  }
  return std::nullopt;
}

PerturbationStructure Structure(const ProblemFile& pf, const CommandOptions& opts,
                                std::vector<std::string>& warnings) {
  if (!opts.norm) return pf.pert;
  if (pf.pert.schur_scale()) {
    warnings.emplace_back("--norm ignored: a Schur-scaled structure always uses the max-abs-entry norm");
    return pf.pert;
  }
  return pf.pert.with_norm(*opts.norm);
}

Report NewReport(const std::string& command, const std::string& digest) {
  Report r;
  r.command = command;
  r.inputs_digest = digest;
  return r;
}

void RadiusToReport(const RadiusReport& rr, Report& report) {
  report.results["radius"] = rr.radius;
  report.results["norm"] = std::string(NormKindName(rr.norm));
  report.results["formula"] = std::string(RadiusFormulaName(rr.formula));
  report.results["closed_loop"] = MatJson(rr.closed_loop);
  if (rr.certificate) report.results["certificate"] = CertificateJson(*rr.certificate);
  for (const auto& w : rr.warnings) report.warnings.push_back(w);
  report.lines.push_back("formula     : " + std::string(RadiusFormulaName(rr.formula)));
  report.lines.push_back("norm        : " + std::string(NormKindName(rr.norm)));
  report.lines.push_back("closed loop : " + rr.closed_loop.ToString());
  if (rr.certificate) {
    report.lines.push_back("certificate :");
    CertificateLines(*rr.certificate, report.lines);
  }
  report.lines.push_back("radius      : " + Num(rr.radius));
}

// Computes the radius the problem calls for. Certification failures are
// returned as a report (exit 2) through the thrown CertificationError.
RadiusReport ComputeRadius(const ProblemFile& pf, const CommandOptions& opts,
                           std::vector<std::string>& warnings) {
  const PerturbationStructure pert = Structure(pf, opts, warnings);
  const auto sector = ResolveSector(pf, opts);
  const LureOptions lo{opts.override_gates};
  if (sector) {
    if (sector->source == "network") return nn_stability_radius(pf.system(), sector->bound, pert, lo);
    return stability_radius_lure(pf.system(), sector->bound, pert, lo);
  }
  if (pert.schur_scale()) return stability_radius_schur(pf.A, pert);
  return stability_radius_linear(pf.A, pert);
}

Nonlinearity LoopNonlinearity(const ProblemFile& pf, const CommandOptions& opts) {
  if (opts.network || pf.network) return Nonlinearity::Network(LoadNetwork(opts.network ? *opts.network : *pf.network));
  if (pf.builtin_nonlinearity) return Nonlinearity::Builtin(*pf.builtin_nonlinearity);
  if (pf.sector) return Nonlinearity::LinearGain(pf.sector->upper);
  const LtiSystem sys = pf.system();
  return Nonlinearity::LinearGain(Mat(sys.inputs(), sys.outputs()));
}

// Simulation direction: +1 for a scalar structure, otherwise the all-ones
// matrix normalised in the structure's norm.
Mat SimulationDirection(const ProblemFile& pf, const PerturbationStructure& pert) {
  if (pf.direction) return *pf.direction;
  const Mat ones = Mat::Ones(pert.in_dim(), pert.out_dim());
  return (1.0 / operator_norm(ones, pert.norm())) * ones;
}

SimConfig Config(const ProblemFile& pf, const CommandOptions& opts) {
  SimConfig cfg;
  if (pf.simulation.dt) cfg.dt = *pf.simulation.dt;
  if (pf.simulation.horizon) cfg.horizon = *pf.simulation.horizon;
  if (opts.dt) cfg.dt = *opts.dt;
  if (opts.horizon) cfg.horizon = *opts.horizon;
  cfg.Validate();
  return cfg;
}

std::uint64_t Seed(const ProblemFile& pf, const CommandOptions& opts) {
  if (opts.seed) return *opts.seed;
  return pf.simulation.seed.value_or(kDefaultSeed);
}

int Trials(const ProblemFile& pf, const CommandOptions& opts) {
  if (opts.trials) return *opts.trials;
  return pf.simulation.trials.value_or(kDefaultTrials);
}

bool IsNegativeOutcome(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCertificationFailed:
    case ErrorCode::kNotMetzler:
    case ErrorCode::kNotHurwitz:
    case ErrorCode::kNotMetzlerUpper:
    case ErrorCode::kNoInstabilityFound:
    case ErrorCode::kUnstableAtZero:
    case ErrorCode::kSingular:
    case ErrorCode::kZeroSpectralRadius:
    case ErrorCode::kInfiniteRadius:
    case ErrorCode::kNonFiniteState:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string Report::ToJson() const {
  json j;
  j["command"] = command;
  j["inputs_digest"] = inputs_digest;
  j["results"] = results;
  j["warnings"] = warnings;
  j["exit_code"] = exit_code;
  return j.dump(2) + "\n";
}

std::string Report::ToText() const {
  std::ostringstream os;
  os << "command: " << command << "\n";
  if (!inputs_digest.empty()) os << "inputs : sha256 " << inputs_digest << "\n";
  for (const auto& l : lines) os << l << "\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  return os.str();
}

Report cmd_check(const ProblemFile& pf, const CommandOptions& opts) {
  Report report = NewReport("check", pf.digest);
  const auto sector = ResolveSector(pf, opts);
  if (!sector) {
    const bool metzler = is_metzler(pf.A);
    const SpectralResult abscissa = spectral_abscissa(pf.A);
    const bool hurwitz = abscissa.value < -kHurwitzTol;
    report.results["a_metzler"] = metzler;
    report.results["a_hurwitz"] = hurwitz;
    report.results["a_abscissa"] = abscissa.value;
    report.lines.push_back("linear problem (no feedback nonlinearity)");
    report.lines.push_back(std::string("  A Metzler                   : ") + PassFail(metzler));
    report.lines.push_back(std::string("  A Hurwitz                   : ") + PassFail(hurwitz) +
                           " (spectral abscissa " + Num(abscissa.value) + ")");
    if (metzler && hurwitz) {
      const Mat v = metzler_hurwitz_certificate(pf.A);
      report.results["positive_vector"] = MatJson(v);
      report.lines.push_back("  positive vector v           : " + v.transpose().ToString() + "^T");
    }
    report.results["verdict"] = metzler && hurwitz;
    report.exit_code = metzler && hurwitz ? kExitOk : kExitNegative;
    return report;
  }
  const AizermanCertificate cert = certify_positive_lure(pf.system(), sector->bound);
  report.results["sector_source"] = sector->source;
  report.results["sigma1"] = MatJson(sector->bound.lower);
  report.results["sigma2"] = MatJson(sector->bound.upper);
  report.results["certificate"] = CertificateJson(cert);
  report.results["verdict"] = cert.verdict;
  report.lines.push_back("sector Sigma1 = " + sector->bound.lower.ToString() + ", Sigma2 = " +
                         sector->bound.upper.ToString() + " (from " + sector->source + ")");
  CertificateLines(cert, report.lines);
  if (!cert.verdict) {
    std::string w = "positive Aizerman hypotheses not met:";
    for (const auto& g : cert.failed_gates()) w += " [" + g + "]";
    if (!cert.metzler_at_lower) {
      w += "; the closed loop is not guaranteed positive at the lower sector, so the radius "
           "formula is outside its hypotheses (radius --override-gates still evaluates it)";
    }
    report.warnings.push_back(std::move(w));
  }
  report.exit_code = cert.verdict ? kExitOk : kExitNegative;
  return report;
}

Report cmd_radius(const ProblemFile& pf, const CommandOptions& opts) {
  Report report = NewReport("radius", pf.digest);
  try {
    const RadiusReport rr = ComputeRadius(pf, opts, report.warnings);
    RadiusToReport(rr, report);
  } catch (const CertificationError& e) {
    report.results["error"] = std::string(ErrorCodeName(e.code()));
    report.results["certificate"] = CertificateJson(e.certificate());
    report.lines.push_back(std::string("error: ") + e.what());
    CertificateLines(e.certificate(), report.lines);
    report.warnings.emplace_back("use --override-gates to evaluate the formula anyway");
    report.exit_code = kExitNegative;
  }
  return report;
}

Report cmd_nn_bound(const ProblemFile* pf, const CommandOptions& opts) {
  std::filesystem::path path;
  if (opts.network) {
    path = *opts.network;
  } else if (pf && pf->network) {
    path = *pf->network;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "nn-bound needs --network or a problem with a network");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open network file " + path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  Report report = NewReport("nn-bound", Sha256Hex(bytes.str()));
  const Ffnn net = LoadNetwork(path);
  const FfnnSector s = sector_bound_ffnn(net);
  report.results["activation"] = net.activation().name;
  report.results["c"] = s.c;
  report.results["q"] = net.q();
  report.results["gamma1"] = MatJson(s.bound.lower);
  report.results["gamma2"] = MatJson(s.bound.upper);
  json trace = json::array();
  report.lines.push_back("activation " + net.activation().name + " in [" + Num(net.activation().a1) +
                         ", " + Num(net.activation().a2) + "], c = " + Num(s.c) +
                         ", hidden layers q = " + std::to_string(net.q()));
  for (const auto& t : s.trace) {
    trace.push_back({{"layer", t.layer}, {"abs_weights", MatJson(t.abs_weights)},
                     {"running_product", MatJson(t.running_product)}});
    report.lines.push_back("  layer " + std::to_string(t.layer) + ": |W| = " +
                           t.abs_weights.ToString() + ", product = " + t.running_product.ToString());
  }
  report.results["trace"] = std::move(trace);
  report.lines.push_back("Gamma1 = " + s.bound.lower.ToString());
  report.lines.push_back("Gamma2 = " + s.bound.upper.ToString());
  return report;
}

Report cmd_sweep(const ProblemFile& pf, const CommandOptions& opts) {
  Report report = NewReport("sweep", pf.digest);
  const PerturbationStructure pert = Structure(pf, opts, report.warnings);
  std::optional<double> radius;
  try {
    radius = ComputeRadius(pf, opts, report.warnings).radius;
  } catch (const Error& e) {
    report.warnings.push_back(std::string("analytic radius unavailable: ") + e.what());
  }
  std::vector<double> deltas;
  if (pf.sweep) {
    deltas = *pf.sweep;
  } else if (radius) {
    for (double f : {0.5, 0.8, 1.0, 1.2, 1.5}) deltas.push_back(f * *radius);
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "no sweep deltas in the problem and no analytic radius to derive them from");
  }
  const SimConfig cfg = Config(pf, opts);
  const Nonlinearity phi = LoopNonlinearity(pf, opts);
  const Mat direction = SimulationDirection(pf, pert);
  const int trials = Trials(pf, opts);
  const std::uint64_t seed = Seed(pf, opts);
  const LtiSystem sys = pf.system();
  const auto rows = sweep(sys, phi, pert, deltas, direction, cfg, trials, seed);

  if (opts.out) {
    std::ofstream out(*opts.out);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + opts.out->string());
    WriteSweepCsv(out, rows);
    report.results["csv"] = opts.out->string();
  }
  if (opts.dump_dir) {
    std::filesystem::create_directories(*opts.dump_dir);
    for (std::size_t di = 0; di < deltas.size(); ++di) {
      for (int t = 0; t < trials; ++t) {
        SimConfig c = cfg;
        c.x0 = TrialInitialState(sys.states(), seed + static_cast<std::uint64_t>(t));
        const Trajectory traj = simulate_lure(sys, phi, pert, deltas[di] * direction, c);
        const auto file = *opts.dump_dir / ("traj_d" + std::to_string(di) + "_t" + std::to_string(t) + ".csv");
        std::ofstream out(file);
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
        WriteTrajectoryCsv(out, traj);
      }
    }
  }

  json summary = json::array();
  bool beyond_radius = false, all_stable_beyond = true;
  report.lines.push_back("nonlinearity: " + phi.name() + ", trials " + std::to_string(trials) +
                         ", seed " + std::to_string(seed) + ", dt " + Num(cfg.dt) +
                         ", horizon " + Num(cfg.horizon));
  if (radius) report.lines.push_back("analytic radius: " + Num(*radius));
  for (double delta : deltas) {
    int stable = 0, unstable = 0, inconclusive = 0;
    double worst = 0.0;
    for (const auto& r : rows) {
      if (r.delta != delta) continue;
      switch (r.verdict.label) {
        case StabilityLabel::kStable: ++stable; break;
        case StabilityLabel::kUnstable: ++unstable; break;
        case StabilityLabel::kInconclusive: ++inconclusive; break;
      }
      worst = std::max(worst, r.verdict.decay_ratio);
    }
    if (radius && delta > *radius) {
      beyond_radius = true;
      if (stable != trials) all_stable_beyond = false;
    }
    summary.push_back({{"delta", delta}, {"stable", stable}, {"unstable", unstable},
                       {"inconclusive", inconclusive}, {"max_decay_ratio", worst}});
    report.lines.push_back("  delta " + Num(delta) + ": stable " + std::to_string(stable) +
                           ", unstable " + std::to_string(unstable) + ", inconclusive " +
                           std::to_string(inconclusive) + ", max decay ratio " + Num(worst));
  }
  report.results["summary"] = std::move(summary);
  report.results["radius"] = radius ? json(*radius) : json(nullptr);
  const bool conservative = beyond_radius && all_stable_beyond;
  report.results["analytic_radius_conservative"] = conservative;
  if (conservative) {
    report.warnings.emplace_back("analytic radius conservative: every trial beyond r stayed Stable");
  }
  return report;
}

Report cmd_refine(const ProblemFile& pf, const CommandOptions& opts) {
  Report report = NewReport("refine", pf.digest);
  if (!(opts.network || pf.network)) {
    throw Error(ErrorCode::kInvalidArgument, "refine needs a problem with a network");
  }
  const PerturbationStructure pert = Structure(pf, opts, report.warnings);
  if (!pert.is_scalar()) {
    throw Error(ErrorCode::kNotSiso, "refine needs a scalar perturbation structure (k1 = k2 = 1)");
  }
  const LtiSystem sys = pf.system();
  const Ffnn net = LoadNetwork(opts.network ? *opts.network : *pf.network);
  const FfnnSector original = sector_bound_ffnn(net);
  report.results["gamma2_original"] = MatJson(original.bound.upper);
  report.lines.push_back("original Gamma2 = " + original.bound.upper.ToString());

  double delta_crit = 0.0;
  if (opts.delta_crit) {
    delta_crit = *opts.delta_crit;
    report.results["delta_crit_source"] = "given";
  } else {
    const SimConfig cfg = Config(pf, opts);
    const double delta_max = pf.simulation.delta_max.value_or(10.0);
    const double tol = pf.simulation.tol.value_or(1e-3);
    const CriticalDelta cd =
        find_critical_delta(sys, Nonlinearity::Network(net), pert, Mat::Scalar(1.0), delta_max,
                            tol, cfg, Trials(pf, opts), Seed(pf, opts));
    delta_crit = cd.delta_star;
    report.results["delta_crit_source"] = "simulation";
    report.results["delta_crit_bracket"] = {cd.lo, cd.hi};
    report.lines.push_back("critical delta bracket [" + Num(cd.lo) + ", " + Num(cd.hi) + "]");
  }
  report.results["delta_crit"] = delta_crit;
  report.lines.push_back("delta_crit = " + Num(delta_crit));

  const RefinedSector refined = refine_upper_sector(sys, pert, delta_crit);
  report.results["magnitude"] = refined.magnitude;
  report.lines.push_back("refined |Gamma2| = " + Num(refined.magnitude));

  const std::uint64_t seed = Seed(pf, opts);
  const InputBox box = InputBox::Uniform(net.input_dim(), 0.0, kSectorBoxHi);
  const RefinedSign sign = select_refined_sign(net, refined.magnitude, kSectorSamples, box, seed);
  const SectorCheck check = empirical_sector_check(net, sign.chosen, kSectorSamples, box, seed);
  report.results["chosen_sign"] = sign.positive ? "+" : "-";
  report.results["refined_sector"] = {{"lower", MatJson(sign.chosen.lower)},
                                      {"upper", MatJson(sign.chosen.upper)}};
  report.results["violations_positive"] = sign.violations_positive;
  report.results["violations_negative"] = sign.violations_negative;
  report.results["violations"] = check.violations.size();
  report.results["samples"] = check.samples;
  report.results["max_ratio"] = check.max_ratio;
  report.lines.push_back("refined sector Gamma1 = " + sign.chosen.lower.ToString() +
                         ", Gamma2 = " + sign.chosen.upper.ToString() + " (sign " +
                         (sign.positive ? "+" : "-") + ")");
  report.lines.push_back("empirical check: " + std::to_string(check.violations.size()) + " of " +
                         std::to_string(check.samples) + " samples outside the refined sector, " +
                         "max ratio " + Num(check.max_ratio));
  if (!check.violations.empty()) {
    report.warnings.emplace_back(
        "refined bound is empirically too tight: the network leaves the refined sector");
  }
  return report;
}

Report RunCommand(const std::string& command, const ProblemFile* problem,
                  const CommandOptions& opts) {
  const std::string digest = problem ? problem->digest : std::string();
  try {
    if (command == "nn-bound") return cmd_nn_bound(problem, opts);
    if (!problem) throw Error(ErrorCode::kInvalidArgument, command + " needs --problem");
    if (command == "check") return cmd_check(*problem, opts);
    if (command == "radius") return cmd_radius(*problem, opts);
    if (command == "sweep") return cmd_sweep(*problem, opts);
    if (command == "refine") return cmd_refine(*problem, opts);
    throw Error(ErrorCode::kInvalidArgument, "unknown command '" + command + "'");
  } catch (const Error& e) {
    Report r = NewReport(command, digest);
    r.results["error"] = std::string(ErrorCodeName(e.code()));
    r.results["message"] = e.what();
    r.lines.push_back(std::string("error (") + std::string(ErrorCodeName(e.code())) + "): " + e.what());
    r.exit_code = IsNegativeOutcome(e.code()) ? kExitNegative : kExitInputError;
    return r;
  }
}

Report RunCommandFromFile(const std::string& command,
                          const std::optional<std::filesystem::path>& problem_path,
                          const CommandOptions& opts) {
  std::optional<ProblemFile> problem;
  if (problem_path) {
    try {
      problem = LoadProblem(*problem_path);
    } catch (const Error& e) {
      Report r = NewReport(command, "");
      r.results["error"] = std::string(ErrorCodeName(e.code()));
      r.results["message"] = e.what();
      r.lines.push_back(std::string("error (") + std::string(ErrorCodeName(e.code())) + "): " + e.what());
      r.exit_code = kExitInputError;
      return r;
    }
  }
  return RunCommand(command, problem ? &*problem : nullptr, opts);
}

}  // namespace lurerad
