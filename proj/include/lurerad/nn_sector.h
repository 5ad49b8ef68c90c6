#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lurerad/matrix.h"
#include "lurerad/robustness.h"

namespace lurerad {

/// Activation with a declared sector [a1, a2]. Built-ins: relu and tanh, both
/// in [0, 1]. "custom" needs explicit slopes and, for evaluation, a callable.
struct ActivationSpec {
  std::string name;
  double a1 = 0.0;
  double a2 = 1.0;
  std::function<double(double)> fn;  // empty for built-ins

  static ActivationSpec Relu();
  static ActivationSpec Tanh();
  static ActivationSpec Custom(double a1, double a2, std::function<double(double)> fn = {});
  /// Built-in lookup; throws kParseError for unknown names.
  static ActivationSpec Builtin(const std::string& name);

  double constant() const;  // c = max(|a1|, |a2|)
  double apply(double v) const;
};

struct Layer {
  Mat weights;
  Mat bias;  // column, rows == weights.rows()
  // Per-layer activation override; sector bounds reject any mismatch.
  std::optional<std::string> activation;
};

class Ffnn {
 public:
  /// hidden: q layers W(1)..W(q); output: W(q+1).
  Ffnn(std::vector<Layer> hidden, Layer output, ActivationSpec activation);

  const std::vector<Layer>& hidden() const { return hidden_; }
  const Layer& output() const { return output_; }
  const ActivationSpec& activation() const { return activation_; }
  std::size_t q() const { return hidden_.size(); }
  std::size_t input_dim() const;
  std::size_t output_dim() const { return output_.weights.rows(); }

 private:
  std::vector<Layer> hidden_;
  Layer output_;
  ActivationSpec activation_;
};

/// Network file: JSON {activation: {name, a1, a2}, layers: [{rows, cols,
/// weights (row-major), bias}]}, the last layer being the output layer.
Ffnn LoadNetwork(const std::filesystem::path& path);
Ffnn ParseNetwork(const std::string& json_text);

Mat ffnn_eval(const Ffnn& net, const Mat& z);

struct LayerTraceEntry {
  std::size_t layer = 0;      // 1-based
  Mat abs_weights{1, 1};
  Mat running_product{1, 1};  // |W(i)| ... |W(1)|
};

struct FfnnSector {
  SectorBound bound;
  double c = 0.0;
  std::vector<LayerTraceEntry> trace;
};

/// Gamma2 = c^q |W(q+1)| ... |W(1)|, Gamma1 = -Gamma2.
FfnnSector sector_bound_ffnn(const Ffnn& net);

struct InputBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static InputBox Uniform(std::size_t dim, double lo, double hi);
};

struct SectorViolation {
  Mat z;
  Mat output;
};

struct SectorCheck {
  std::vector<SectorViolation> violations;
  double max_ratio = 0.0;
  std::size_t samples = 0;
};

SectorCheck empirical_sector_check(const Ffnn& net, const SectorBound& sector,
                                   std::size_t samples, const InputBox& box,
                                   std::uint64_t seed);

struct RefinedSign {
  SectorBound chosen;
  bool positive = true;
  std::size_t violations_positive = 0;
  std::size_t violations_negative = 0;
};

RefinedSign select_refined_sign(const Ffnn& net, double magnitude, std::size_t samples,
                                const InputBox& box, std::uint64_t seed);

}  // namespace lurerad
