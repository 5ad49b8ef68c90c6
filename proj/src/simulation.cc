#include "lurerad/simulation.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <utility>

namespace lurerad {

Nonlinearity Nonlinearity::StaticScalar(std::string name, std::function<double(double)> f) {
  if (!f) throw Error(ErrorCode::kInvalidArgument, "static nonlinearity needs a callable");
  if (f(0.0) != 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "static nonlinearity '" + name + "' must satisfy f(0) = 0");
  }
  Nonlinearity phi(Kind::kStaticScalar, std::move(name));
  phi.scalar_ = std::move(f);
  return phi;
}

Nonlinearity Nonlinearity::Network(Ffnn net) {
  Nonlinearity phi(Kind::kNetwork, "network");
  phi.net_ = std::move(net);
  return phi;
}

Nonlinearity Nonlinearity::LinearGain(Mat gain) {
  Nonlinearity phi(Kind::kLinearGain, "linear_gain");
  phi.gain_ = std::move(gain);
  return phi;
}

Nonlinearity Nonlinearity::Builtin(const std::string& name) {
  if (name == "cubic_sine") {
    return StaticScalar(name, [](double y) { return -1.5 * y + 0.01 * y * y * y + std::sin(2.0 * y); });
  }
  throw Error(ErrorCode::kParseError, "unknown built-in nonlinearity '" + name + "'");
}

std::optional<SectorBound> Nonlinearity::BuiltinSector(const std::string& name) {
  if (name == "cubic_sine") return SectorBound{Mat::Scalar(-2.0), Mat::Scalar(-0.48)};
  return std::nullopt;
}

std::size_t Nonlinearity::output_dim(std::size_t p) const {
  switch (kind_) {
    case Kind::kStaticScalar: return p;
    case Kind::kNetwork: return net_->output_dim();
    case Kind::kLinearGain: return gain_->rows();
  }
  return 0;
}

std::size_t Nonlinearity::input_dim(std::size_t p) const {
  switch (kind_) {
    case Kind::kStaticScalar: return p;
    case Kind::kNetwork: return net_->input_dim();
    case Kind::kLinearGain: return gain_->cols();
  }
  return 0;
}

void Nonlinearity::Evaluate(std::span<const double> y, std::span<double> u) const {
  switch (kind_) {
    case Kind::kStaticScalar:
      for (std::size_t i = 0; i < y.size(); ++i) u[i] = scalar_(y[i]);
      return;
    case Kind::kNetwork: {
      const Mat out = ffnn_eval(*net_, Mat::Column(std::vector<double>(y.begin(), y.end())));
      std::copy(out.data().begin(), out.data().end(), u.begin());
      return;
    }
    case Kind::kLinearGain: {
      const Mat& g = *gain_;
      for (std::size_t i = 0; i < g.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j) s += g(i, j) * y[j];
        u[i] = s;
      }
      return;
    }
  }
}

void SimConfig::Validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  if (!(horizon >= dt) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kInvalidArgument, "horizon must be finite and >= dt");
  }
  if (!(blowup_bound > 0.0)) throw Error(ErrorCode::kInvalidArgument, "blowup bound must be positive");
}

std::string_view StabilityLabelName(StabilityLabel label) {
  switch (label) {
    case StabilityLabel::kStable: return "Stable";
    case StabilityLabel::kUnstable: return "Unstable";
    case StabilityLabel::kInconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

// Dense closed-loop right-hand side x' = Ap x + B Phi(C x), in plain vectors.
class LoopDynamics {
 public:
  LoopDynamics(const LtiSystem& sys, const Nonlinearity& phi, const PerturbationStructure& pert,
               const Mat& delta)
      : n_(sys.states()), m_(sys.inputs()), p_(sys.outputs()), phi_(phi) {
    if (delta.rows() != pert.in_dim() || delta.cols() != pert.out_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "Delta must be " + std::to_string(pert.in_dim()) + "x" +
                      std::to_string(pert.out_dim()));
    }
    if (pert.D().rows() != n_) {
      throw Error(ErrorCode::kDimensionMismatch, "perturbation does not fit the state dimension");
    }
    if (phi.input_dim(p_) != p_ || phi.output_dim(p_) != m_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "nonlinearity maps R^" + std::to_string(phi.input_dim(p_)) + " -> R^" +
                      std::to_string(phi.output_dim(p_)) + ", loop needs R^" +
                      std::to_string(p_) + " -> R^" + std::to_string(m_));
    }
    const Mat ap = sys.A() + pert.D() * delta * pert.E();
    ap_.assign(ap.data().begin(), ap.data().end());
    b_.assign(sys.B().data().begin(), sys.B().data().end());
    c_.assign(sys.C().data().begin(), sys.C().data().end());
    y_.resize(p_);
    u_.resize(m_);
    if (const Ffnn* net = phi.network()) {
      net_ = net;
      std::size_t widest = net->input_dim();
      for (const auto& l : net->hidden()) widest = std::max(widest, l.weights.rows());
      buf_a_.resize(widest);
      buf_b_.resize(widest);
    }
  }

  std::size_t n() const { return n_; }

  void Output(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t i = 0; i < p_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += c_[i * n_ + j] * x[j];
      y[i] = s;
    }
  }

  void Rhs(const std::vector<double>& x, std::vector<double>& dx) {
    Output(x, y_);
    if (net_) {
      EvaluateNetwork();
    } else {
      phi_.Evaluate(y_, u_);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += ap_[i * n_ + j] * x[j];
      for (std::size_t k = 0; k < m_; ++k) s += b_[i * m_ + k] * u_[k];
      dx[i] = s;
    }
  }

 private:
  // Allocation-free forward pass; matches ffnn_eval.
  void EvaluateNetwork() {
    std::size_t width = p_;
    std::copy(y_.begin(), y_.end(), buf_a_.begin());
    for (const Layer& l : net_->hidden()) {
      const std::size_t rows = l.weights.rows();
      const ActivationSpec& act = net_->activation();
      const bool own = l.activation && *l.activation != act.name;
      for (std::size_t i = 0; i < rows; ++i) {
        double s = l.bias(i, 0);
        for (std::size_t j = 0; j < width; ++j) s += l.weights(i, j) * buf_a_[j];
        buf_b_[i] = own ? ActivationSpec::Builtin(*l.activation).apply(s) : act.apply(s);
      }
      buf_a_.swap(buf_b_);
      width = rows;
    }
    const Layer& out = net_->output();
    for (std::size_t i = 0; i < m_; ++i) {
      double s = out.bias(i, 0);
      for (std::size_t j = 0; j < width; ++j) s += out.weights(i, j) * buf_a_[j];
      u_[i] = s;
    }
  }

  std::size_t n_, m_, p_;
  const Nonlinearity& phi_;
  const Ffnn* net_ = nullptr;
  std::vector<double> ap_, b_, c_, y_, u_, buf_a_, buf_b_;
};

struct RunResult {
  std::vector<double> x0;
  std::vector<double> x_final;
  std::optional<double> blowup_time;
};

// Fixed-step RK4. Calls record(t, x) for every accepted state when given.
RunResult Integrate(LoopDynamics& dyn, std::vector<double> x, const SimConfig& cfg,
                    const std::function<void(double, const std::vector<double>&)>& record) {
  const std::size_t n = dyn.n();
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  RunResult result;
  result.x0 = x;
  if (record) record(0.0, x);
  for (std::size_t step = 1; step <= steps; ++step) {
    const double h = cfg.dt;
    dyn.Rhs(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    dyn.Rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    dyn.Rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    dyn.Rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double t = static_cast<double>(step) * h;
    double norm = 0.0;
    for (double v : tmp) {
      if (std::isnan(v)) {
        throw Error(ErrorCode::kNonFiniteState,
                    "state became NaN at t = " + std::to_string(t) + " before the blowup bound");
      }
      norm = std::max(norm, std::abs(v));
    }
    if (std::isinf(norm)) {
      result.blowup_time = t;
      break;
    }
    x.swap(tmp);
    if (record) record(t, x);
    if (norm > cfg.blowup_bound) {
      result.blowup_time = t;
      break;
    }
  }
  result.x_final = std::move(x);
  return result;
}

double InfNorm(std::span<const double> v) {
  double best = 0.0;
  for (double e : v) best = std::max(best, std::abs(e));
  return best;
}

StabilityVerdict Classify(double norm0, double norm_final, std::optional<double> blowup,
                          double decay_threshold, double growth_threshold) {
  if (norm0 == 0.0) throw Error(ErrorCode::kZeroInitialState, "x0 = 0 cannot be classified");
  StabilityVerdict v;
  v.decay_ratio = norm_final / norm0;
  v.blowup_time = blowup;
  if (blowup || v.decay_ratio >= growth_threshold) {
    v.label = StabilityLabel::kUnstable;
  } else if (v.decay_ratio <= decay_threshold) {
    v.label = StabilityLabel::kStable;
  } else {
    v.label = StabilityLabel::kInconclusive;
  }
  return v;
}

StabilityVerdict RunTrial(LoopDynamics& dyn, const SimConfig& cfg, std::uint64_t trial_seed) {
  const Mat x0 = TrialInitialState(dyn.n(), trial_seed);
  RunResult r = Integrate(dyn, std::vector<double>(x0.data().begin(), x0.data().end()), cfg, {});
  return Classify(InfNorm(r.x0), InfNorm(r.x_final), r.blowup_time, cfg.decay_threshold,
                  cfg.growth_threshold);
}

}  // namespace

Trajectory simulate_lure(const LtiSystem& sys, const Nonlinearity& phi,
                         const PerturbationStructure& pert, const Mat& delta,
                         const SimConfig& cfg) {
  cfg.Validate();
  if (!cfg.x0) throw Error(ErrorCode::kInvalidArgument, "simulate_lure needs an initial state x0");
  if (cfg.x0->rows() != sys.states() || cfg.x0->cols() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "x0 must be a column of length " + std::to_string(sys.states()));
  }
  LoopDynamics dyn(sys, phi, pert, delta);
  Trajectory traj;
  std::vector<double> y(sys.outputs());
  auto record = [&](double t, const std::vector<double>& x) {
    traj.times.push_back(t);
    traj.states.push_back(Mat::Column(x));
    dyn.Output(x, y);
    traj.outputs.push_back(Mat::Column(y));
  };
  const RunResult r = Integrate(
      dyn, std::vector<double>(cfg.x0->data().begin(), cfg.x0->data().end()), cfg, record);
  traj.blowup_time = r.blowup_time;
  return traj;
}

StabilityVerdict classify_stability(const Trajectory& traj, double decay_threshold,
                                    double growth_threshold) {
  if (traj.states.empty()) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  return Classify(InfNorm(traj.states.front().data()), InfNorm(traj.states.back().data()),
                  traj.blowup_time, decay_threshold, growth_threshold);
}

Mat TrialInitialState(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = unit(rng);
  return Mat::Column(std::move(x));
}

namespace {

void CheckDirection(const PerturbationStructure& pert, const Mat& direction) {
  if (direction.rows() != pert.in_dim() || direction.cols() != pert.out_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "direction must be " + std::to_string(pert.in_dim()) + "x" +
                    std::to_string(pert.out_dim()));
  }
}

}  // namespace

CriticalDelta find_critical_delta(const LtiSystem& sys, const Nonlinearity& phi,
                                  const PerturbationStructure& pert, const Mat& direction,
                                  double delta_max, double tol, const SimConfig& cfg,
                                  int trials, std::uint64_t seed) {
  cfg.Validate();
  CheckDirection(pert, direction);
  if (std::abs(operator_norm(direction, pert.norm()) - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "direction must have unit norm");
  }
  if (!(delta_max > 0.0) || !(tol > 0.0) || trials < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need delta_max > 0, tol > 0 and trials >= 1");
  }

  CriticalDelta out;
  auto any_unstable = [&](double delta, bool require_stable) {
    LoopDynamics dyn(sys, phi, pert, delta * direction);
    ++out.evaluations;
    for (int t = 0; t < trials; ++t) {
      const StabilityVerdict v = RunTrial(dyn, cfg, seed + static_cast<std::uint64_t>(t));
      if (require_stable && v.label != StabilityLabel::kStable) {
        throw Error(ErrorCode::kUnstableAtZero,
                    "trial " + std::to_string(t) + " is " +
                        std::string(StabilityLabelName(v.label)) +
                        " at delta = 0 (decay ratio " + std::to_string(v.decay_ratio) + ")");
      }
      if (v.label == StabilityLabel::kUnstable) return true;
    }
    return false;
  };

  any_unstable(0.0, /*require_stable=*/true);

  const int halvings =
      std::clamp(static_cast<int>(std::ceil(std::log2(delta_max / tol))), 0, 40);
  double lo = 0.0;
  std::optional<double> hi;
  for (int j = halvings; j >= 0; --j) {
    const double delta = std::ldexp(delta_max, -j);
    if (any_unstable(delta, false)) {
      hi = delta;
      break;
    }
    lo = delta;
  }
  if (!hi) {
    throw Error(ErrorCode::kNoInstabilityFound,
                "no Unstable trial for delta up to " + std::to_string(lo));
  }
  while (*hi - lo > tol) {
    const double mid = 0.5 * (lo + *hi);
    if (any_unstable(mid, false)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.lo = lo;
  out.hi = *hi;
  out.delta_star = 0.5 * (lo + *hi);
  return out;
}

std::vector<SweepRow> sweep(const LtiSystem& sys, const Nonlinearity& phi,
                            const PerturbationStructure& pert,
                            const std::vector<double>& deltas, const Mat& direction,
                            const SimConfig& cfg, int trials, std::uint64_t seed) {
  cfg.Validate();
  CheckDirection(pert, direction);
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  std::vector<SweepRow> rows;
  rows.reserve(deltas.size() * static_cast<std::size_t>(trials));
  for (double delta : deltas) {
    LoopDynamics dyn(sys, phi, pert, delta * direction);
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
      rows.push_back(SweepRow{delta, t, s, RunTrial(dyn, cfg, s)});
    }
  }
  return rows;
}

namespace {

// Shortest text that reads back to the same double.
std::string Num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "delta,trial,seed,verdict,decay_ratio,blowup_time\n";
  for (const auto& r : rows) {
    out << Num(r.delta) << ',' << r.trial << ',' << r.seed << ','
        << StabilityLabelName(r.verdict.label) << ',' << Num(r.verdict.decay_ratio) << ',';
    if (r.verdict.blowup_time) out << Num(*r.verdict.blowup_time);
    out << '\n';
  }
}

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj) {
  if (traj.states.empty()) return;
  out << 't';
  for (std::size_t i = 0; i < traj.states.front().rows(); ++i) out << ",x_" << i + 1;
  for (std::size_t i = 0; i < traj.outputs.front().rows(); ++i) out << ",y_" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << Num(traj.times[k]);
    for (double v : traj.states[k].data()) out << ',' << Num(v);
    for (double v : traj.outputs[k].data()) out << ',' << Num(v);
    out << '\n';
  }
}

}  // namespace lurerad
