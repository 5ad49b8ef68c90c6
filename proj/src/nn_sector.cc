#include "lurerad/nn_sector.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace lurerad {

using nlohmann::json;

ActivationSpec ActivationSpec::Relu() { return {"relu", 0.0, 1.0, {}}; }
ActivationSpec ActivationSpec::Tanh() { return {"tanh", 0.0, 1.0, {}}; }

ActivationSpec ActivationSpec::Custom(double a1, double a2, std::function<double(double)> fn) {
  if (!(a1 < a2)) throw Error(ErrorCode::kInvalidArgument, "activation sector needs a1 < a2");
  return {"custom", a1, a2, std::move(fn)};
}

ActivationSpec ActivationSpec::Builtin(const std::string& name) {
  if (name == "relu") return Relu();
  if (name == "tanh") return Tanh();
  throw Error(ErrorCode::kParseError, "unknown activation '" + name + "'");
}

double ActivationSpec::constant() const { return std::max(std::abs(a1), std::abs(a2)); }

double ActivationSpec::apply(double v) const {
  if (fn) return fn(v);
  if (name == "relu") return v > 0.0 ? v : 0.0;
  if (name == "tanh") return std::tanh(v);
  throw Error(ErrorCode::kInvalidArgument,
              "activation '" + name + "' has no callable and cannot be evaluated");
}

Ffnn::Ffnn(std::vector<Layer> hidden, Layer output, ActivationSpec activation)
    : hidden_(std::move(hidden)), output_(std::move(output)), activation_(std::move(activation)) {
  if (!(activation_.a1 < activation_.a2)) {
    throw Error(ErrorCode::kInvalidArgument, "activation sector needs a1 < a2");
  }
  std::size_t prev = hidden_.empty() ? output_.weights.cols() : hidden_.front().weights.cols();
  auto check = [&prev](const Layer& l, std::size_t index) {
    if (l.weights.cols() != prev) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + std::to_string(index) + " expects " +
                      std::to_string(l.weights.cols()) + " inputs but receives " +
                      std::to_string(prev));
    }
    if (l.bias.rows() != l.weights.rows() || l.bias.cols() != 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + std::to_string(index) + " bias must be a column of length " +
                      std::to_string(l.weights.rows()));
    }
    prev = l.weights.rows();
  };
  for (std::size_t i = 0; i < hidden_.size(); ++i) check(hidden_[i], i + 1);
  check(output_, hidden_.size() + 1);
}

std::size_t Ffnn::input_dim() const {
  return hidden_.empty() ? output_.weights.cols() : hidden_.front().weights.cols();
}

namespace {

std::vector<double> ReadNumbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::kParseError, where + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::kParseError, where + " must contain numbers");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw Error(ErrorCode::kParseError, where + " has a non-finite entry");
    out.push_back(d);
  }
  return out;
}

Layer ReadLayer(const json& j, std::size_t index) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  if (!j.is_object()) throw Error(ErrorCode::kParseError, where + " must be an object");
  for (const char* key : {"rows", "cols", "weights"}) {
    if (!j.contains(key)) throw Error(ErrorCode::kParseError, where + " is missing '" + key + "'");
  }
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  std::vector<double> w = ReadNumbers(j.at("weights"), where + ".weights");
  if (w.size() != rows * cols) {
    throw Error(ErrorCode::kParseError, where + ".weights has " + std::to_string(w.size()) +
                                            " entries, expected rows*cols = " +
                                            std::to_string(rows * cols));
  }
  std::vector<double> b = j.contains("bias") ? ReadNumbers(j.at("bias"), where + ".bias")
                                             : std::vector<double>(rows, 0.0);
  if (b.size() != rows) {
    throw Error(ErrorCode::kParseError,
                where + ".bias has " + std::to_string(b.size()) + " entries, expected " +
                    std::to_string(rows));
  }
  Layer layer{Mat(rows, cols, std::move(w)), Mat::Column(std::move(b)), std::nullopt};
  if (j.contains("activation")) layer.activation = j.at("activation").get<std::string>();
  return layer;
}

}  // namespace

Ffnn ParseNetwork(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("network file: ") + e.what());
  }
  try {
    if (!doc.contains("activation") || !doc.contains("layers")) {
      throw Error(ErrorCode::kParseError, "network file needs 'activation' and 'layers'");
    }
    const json& act = doc.at("activation");
    const auto name = act.at("name").get<std::string>();
    ActivationSpec spec;
    if (name == "custom") {
      if (!act.contains("a1") || !act.contains("a2")) {
        throw Error(ErrorCode::kParseError, "custom activation requires a1 and a2");
      }
      spec = ActivationSpec::Custom(act.at("a1").get<double>(), act.at("a2").get<double>());
    } else {
      spec = ActivationSpec::Builtin(name);
      if ((act.contains("a1") && act.at("a1").get<double>() != spec.a1) ||
          (act.contains("a2") && act.at("a2").get<double>() != spec.a2)) {
        throw Error(ErrorCode::kParseError,
                    "declared sector of '" + name + "' disagrees with the built-in [0, 1]");
      }
    }
    const json& layers = doc.at("layers");
    if (!layers.is_array() || layers.empty()) {
      throw Error(ErrorCode::kParseError, "'layers' must be a nonempty array");
    }
    std::vector<Layer> hidden;
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) hidden.push_back(ReadLayer(layers[i], i));
    Layer output = ReadLayer(layers.back(), layers.size() - 1);
    try {
      return Ffnn(std::move(hidden), std::move(output), std::move(spec));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, std::string("network file: ") + e.what());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("network file: ") + e.what());
  }
}

Ffnn LoadNetwork(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open network file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseNetwork(ss.str());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

namespace {

std::vector<double> Affine(const Layer& l, const std::vector<double>& in) {
  std::vector<double> out(l.weights.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = l.bias(i, 0);
    for (std::size_t j = 0; j < in.size(); ++j) s += l.weights(i, j) * in[j];
    out[i] = s;
  }
  return out;
}

}  // namespace

Mat ffnn_eval(const Ffnn& net, const Mat& z) {
  if (z.cols() != 1 || z.rows() != net.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "network input must be a column of length " + std::to_string(net.input_dim()));
  }
  std::vector<double> omega(z.data().begin(), z.data().end());
  for (const Layer& layer : net.hidden()) {
    omega = Affine(layer, omega);
    if (layer.activation && *layer.activation != net.activation().name) {
      const ActivationSpec own = ActivationSpec::Builtin(*layer.activation);
      for (double& v : omega) v = own.apply(v);
    } else {
      for (double& v : omega) v = net.activation().apply(v);
    }
  }
  return Mat::Column(Affine(net.output(), omega));
}

FfnnSector sector_bound_ffnn(const Ffnn& net) {
  std::vector<std::size_t> biased;
  const auto all = [&net] {
    std::vector<const Layer*> v;
    for (const auto& l : net.hidden()) v.push_back(&l);
    v.push_back(&net.output());
    return v;
  }();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->bias.max_abs() != 0.0) biased.push_back(i + 1);
    if (all[i]->activation && *all[i]->activation != net.activation().name) {
      throw Error(ErrorCode::kMixedActivations,
                  "layer " + std::to_string(i + 1) + " uses activation '" +
                      *all[i]->activation + "' but the network declares '" +
                      net.activation().name + "'");
    }
  }
  if (!biased.empty()) {
    std::string list;
    for (std::size_t i : biased) list += (list.empty() ? "" : ", ") + std::to_string(i);
    throw Error(ErrorCode::kNonzeroBias, "sector bound requires zero biases; nonzero in layer(s) " + list);
  }

  FfnnSector out;
  out.c = net.activation().constant();
  Mat product = elementwise_abs(all.front()->weights);
  out.trace.push_back({1, product, product});
  for (std::size_t i = 1; i < all.size(); ++i) {
    const Mat abs_w = elementwise_abs(all[i]->weights);
    product = abs_w * product;
    out.trace.push_back({i + 1, abs_w, product});
  }
  const Mat upper = std::pow(out.c, static_cast<double>(net.q())) * product;
  out.bound = SectorBound{-upper, upper};
  return out;
}

InputBox InputBox::Uniform(std::size_t dim, double lo, double hi) {
  return InputBox{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

SectorCheck empirical_sector_check(const Ffnn& net, const SectorBound& sector,
                                   std::size_t samples, const InputBox& box,
                                   std::uint64_t seed) {
  const std::size_t p = net.input_dim();
  const std::size_t m = net.output_dim();
  if (samples == 0) throw Error(ErrorCode::kInvalidArgument, "samples must be >= 1");
  if (box.lo.size() != p || box.hi.size() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "input box dimension differs from network input");
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (box.lo[i] < 0.0 || box.hi[i] < box.lo[i]) {
      throw Error(ErrorCode::kInvalidArgument, "input box must satisfy 0 <= lo <= hi");
    }
  }
  if (sector.lower.rows() != m || sector.lower.cols() != p || sector.upper.rows() != m ||
      sector.upper.cols() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "sector must be " + std::to_string(m) + "x" +
                                                   std::to_string(p));
  }

  std::mt19937_64 rng(seed);
  SectorCheck out;
  out.samples = samples;
  out.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> zv(p);
    for (std::size_t i = 0; i < p; ++i) {
      zv[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
    }
    const Mat z = Mat::Column(zv);
    const Mat y = ffnn_eval(net, z);
    const Mat lo = sector.lower * z;
    const Mat hi = sector.upper * z;
    bool violated = false;
    for (std::size_t j = 0; j < m; ++j) {
      const double slack_lo = 1e-12 * (1.0 + std::abs(lo(j, 0)));
      const double slack_hi = 1e-12 * (1.0 + std::abs(hi(j, 0)));
      if (y(j, 0) < lo(j, 0) - slack_lo || y(j, 0) > hi(j, 0) + slack_hi) violated = true;
      if (hi(j, 0) > 0.0) out.max_ratio = std::max(out.max_ratio, y(j, 0) / hi(j, 0));
    }
    if (violated) out.violations.push_back({z, y});
  }
  if (!std::isfinite(out.max_ratio)) out.max_ratio = 0.0;
  return out;
}

RefinedSign select_refined_sign(const Ffnn& net, double magnitude, std::size_t samples,
                                const InputBox& box, std::uint64_t seed) {
  if (net.output_dim() != 1 || net.input_dim() != 1) {
    throw Error(ErrorCode::kNotSiso, "sign selection needs a single-input single-output network");
  }
  if (!(magnitude > 0.0)) throw Error(ErrorCode::kInvalidArgument, "magnitude must be positive");
  const Mat original_upper = sector_bound_ffnn(net).bound.upper;
  const Mat lower = Mat::Scalar(-operator_norm(original_upper, NormKind::kTwo));
  const SectorBound plus{lower, Mat::Scalar(magnitude)};
  const SectorBound minus{lower, Mat::Scalar(-magnitude)};
  RefinedSign out;
  out.violations_positive = empirical_sector_check(net, plus, samples, box, seed).violations.size();
  out.violations_negative = empirical_sector_check(net, minus, samples, box, seed).violations.size();
  // Fewer violations wins. When both candidates hold on every sample the
  // negative one is the tighter valid bound; other ties go to +magnitude.
  if (out.violations_positive == 0 && out.violations_negative == 0) {
    out.positive = false;
  } else {
    out.positive = out.violations_positive <= out.violations_negative;
  }
  out.chosen = out.positive ? plus : minus;
  return out;
}

}  // namespace lurerad
