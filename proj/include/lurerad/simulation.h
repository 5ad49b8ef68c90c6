#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lurerad/matrix.h"
#include "lurerad/nn_sector.h"
#include "lurerad/robustness.h"

namespace lurerad {

/// Feedback map u = Phi(y).
class Nonlinearity {
 public:
  enum class Kind { kStaticScalar, kNetwork, kLinearGain };

  /// Applied elementwise (requires m == p). f(0) must be exactly 0.
  static Nonlinearity StaticScalar(std::string name, std::function<double(double)> f);
  static Nonlinearity Network(Ffnn net);
  static Nonlinearity LinearGain(Mat gain);
  /// Bundled scalar nonlinearities. "cubic_sine": -1.5y + 0.01y^3 + sin(2y).
  static Nonlinearity Builtin(const std::string& name);
  /// Sector claimed for a built-in, if any.
  static std::optional<SectorBound> BuiltinSector(const std::string& name);

  Kind kind() const { return kind_; }
  const Ffnn* network() const { return net_ ? &*net_ : nullptr; }
  const std::string& name() const { return name_; }
  /// Output dimension for an input of dimension p.
  std::size_t output_dim(std::size_t p) const;
  std::size_t input_dim(std::size_t p) const;

  void Evaluate(std::span<const double> y, std::span<double> u) const;

 private:
  Nonlinearity(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::function<double(double)> scalar_;
  std::optional<Ffnn> net_;
  std::optional<Mat> gain_;
};

enum class Integrator { kRk4 };

struct SimConfig {
  double dt = 1e-3;
  double horizon = 20.0;
  Integrator method = Integrator::kRk4;
  std::optional<Mat> x0;  // required by simulate_lure; trial runs draw their own
  double blowup_bound = 1e9;
  double decay_threshold = 1e-3;
  double growth_threshold = 1e3;

  void Validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Mat> states;
  std::vector<Mat> outputs;
  std::optional<double> blowup_time;
};

enum class StabilityLabel { kStable, kUnstable, kInconclusive };
std::string_view StabilityLabelName(StabilityLabel label);

struct StabilityVerdict {
  StabilityLabel label = StabilityLabel::kInconclusive;
  double decay_ratio = 0.0;
  std::optional<double> blowup_time;
};

Trajectory simulate_lure(const LtiSystem& sys, const Nonlinearity& phi,
                         const PerturbationStructure& pert, const Mat& delta,
                         const SimConfig& cfg);

StabilityVerdict classify_stability(const Trajectory& traj, double decay_threshold = 1e-3,
                                    double growth_threshold = 1e3);

/// Initial state for trial runs: uniform on [0, 1]^n from seed.
Mat TrialInitialState(std::size_t n, std::uint64_t seed);

struct CriticalDelta {
  double delta_star = 0.0;
  double lo = 0.0;  // largest delta with no Unstable trial
  double hi = 0.0;  // smallest delta with an Unstable trial
  int evaluations = 0;
};

/// Geometric sweep delta_max * 2^-j (ascending) until a trial is Unstable,
/// then bisection to width <= tol. Inconclusive counts as not Unstable.
CriticalDelta find_critical_delta(const LtiSystem& sys, const Nonlinearity& phi,
                                  const PerturbationStructure& pert, const Mat& direction,
                                  double delta_max, double tol, const SimConfig& cfg,
                                  int trials, std::uint64_t seed);

struct SweepRow {
  double delta = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  StabilityVerdict verdict;
};

/// Rows sorted by delta (input order) then trial index.
std::vector<SweepRow> sweep(const LtiSystem& sys, const Nonlinearity& phi,
                            const PerturbationStructure& pert,
                            const std::vector<double>& deltas, const Mat& direction,
                            const SimConfig& cfg, int trials, std::uint64_t seed);

/// Columns: delta,trial,seed,verdict,decay_ratio,blowup_time.
void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows);
/// Columns: t,x_1..x_n,y_1..y_p.
void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj);

}  // namespace lurerad
