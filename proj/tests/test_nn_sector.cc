#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "lurerad/nn_sector.h"
#include "oracles.h"

using lurerad::ActivationSpec;
using lurerad::ErrorCode;
using lurerad::Ffnn;
using lurerad::InputBox;
using lurerad::Layer;
using lurerad::Mat;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const lurerad::Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

Layer L(Mat w) { return Layer{w, Mat(w.rows(), 1), std::nullopt}; }
Layer L(Mat w, Mat b) { return Layer{std::move(w), std::move(b), std::nullopt}; }

Ffnn FixtureNet() {
  return Ffnn({L(Mat::Column({0.7, -0.7}))}, L(Mat::FromRows({{0.65, 0.65}})), ActivationSpec::Relu());
}

Ffnn RandomNet(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(1, 3), width(1, 8);
  std::normal_distribution<double> w(0.0, 1.0);
  const std::size_t p = width(rng) % 3 + 1, m = width(rng) % 3 + 1;
  std::vector<Layer> hidden;
  std::size_t prev = p;
  const int q = depth(rng);
  for (int i = 0; i < q; ++i) {
    const std::size_t next = width(rng);
    std::vector<double> v(next * prev);
    for (double& x : v) x = w(rng);
    hidden.push_back(L(Mat(next, prev, v)));
    prev = next;
  }
  std::vector<double> v(m * prev);
  for (double& x : v) x = w(rng);
  const bool tanh = rng() % 2;
  return Ffnn(std::move(hidden), L(Mat(m, prev, v)),
              tanh ? ActivationSpec::Tanh() : ActivationSpec::Relu());
}

}  // namespace

TEST_CASE("activation specs") {
  CHECK(ActivationSpec::Relu().constant() == 1.0);
  CHECK(ActivationSpec::Tanh().a1 == 0.0);
  CHECK(ActivationSpec::Relu().apply(-3.0) == 0.0);
  CHECK(ActivationSpec::Tanh().apply(0.5) == std::tanh(0.5));
  const auto leaky = ActivationSpec::Custom(-0.1, 1.0, [](double v) { return v > 0 ? v : 0.1 * v; });
  CHECK(leaky.constant() == 1.0);
  CHECK(ActivationSpec::Custom(-2.0, 0.5).constant() == 2.0);
  CHECK(CodeOf([] { ActivationSpec::Custom(1.0, 1.0); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { ActivationSpec::Builtin("gelu"); }) == ErrorCode::kParseError);
  CHECK(CodeOf([] { ActivationSpec::Custom(0.0, 1.0).apply(1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Ffnn validates chaining") {
  CHECK(CodeOf([] {
          Ffnn({L(Mat(2, 1))}, L(Mat(1, 3)), ActivationSpec::Relu());
        }) == ErrorCode::kDimensionMismatch);
  CHECK(CodeOf([] {
          Ffnn({L(Mat(2, 1), Mat(3, 1))}, L(Mat(1, 2)), ActivationSpec::Relu());
        }) == ErrorCode::kDimensionMismatch);
  const Ffnn net = FixtureNet();
  CHECK(net.q() == 1);
  CHECK(net.input_dim() == 1);
  CHECK(net.output_dim() == 1);
}

TEST_CASE("ffnn_eval") {
  const Ffnn zero({L(Mat(2, 3))}, L(Mat(1, 2), Mat::Scalar(0.25)), ActivationSpec::Tanh());
  CHECK(lurerad::ffnn_eval(zero, Mat::Column({1, 2, 3})) == Mat::Scalar(0.25));
  const Ffnn ident({L(Mat::Identity(3))}, L(Mat::Identity(3)), ActivationSpec::Relu());
  CHECK(lurerad::ffnn_eval(ident, Mat::Column({1, 0, 2.5})) == Mat::Column({1, 0, 2.5}));
  // The fixture computes 0.455 |z|.
  CHECK(lurerad::ffnn_eval(FixtureNet(), Mat::Scalar(2.0))(0, 0) == doctest::Approx(0.91));
  CHECK(lurerad::ffnn_eval(FixtureNet(), Mat::Scalar(-2.0))(0, 0) == doctest::Approx(0.91));
  CHECK(CodeOf([&] { lurerad::ffnn_eval(ident, Mat::Column({1, 2})); }) ==
        ErrorCode::kDimensionMismatch);
}

TEST_CASE("zero-bias networks fix the origin") {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 50; ++k) {
    const Ffnn net = RandomNet(rng);
    CHECK(lurerad::ffnn_eval(net, Mat(net.input_dim(), 1)) == Mat(net.output_dim(), 1));
  }
}

TEST_CASE("sector_bound_ffnn") {
  const Ffnn scalar({L(Mat::Scalar(2))}, L(Mat::Scalar(-3)), ActivationSpec::Relu());
  const auto s = lurerad::sector_bound_ffnn(scalar);
  CHECK(s.bound.upper == Mat::Scalar(6));
  CHECK(s.bound.lower == Mat::Scalar(-6));
  const Ffnn zero({L(Mat(2, 1))}, L(Mat(1, 2)), ActivationSpec::Tanh());
  CHECK(lurerad::sector_bound_ffnn(zero).bound.upper == Mat::Scalar(0));
  CHECK(lurerad::sector_bound_ffnn(zero).bound.lower == Mat::Scalar(0));
  const auto fixture = lurerad::sector_bound_ffnn(FixtureNet());
  CHECK(std::abs(fixture.bound.upper(0, 0) - 0.91) <= 1e-12);
  CHECK(fixture.c == 1.0);
  REQUIRE(fixture.trace.size() == 2);
  CHECK(fixture.trace[0].running_product == Mat::Column({0.7, 0.7}));
  // c^q scaling with a custom activation of constant 2.
  const Ffnn custom({L(Mat::Scalar(1)), L(Mat::Scalar(1))}, L(Mat::Scalar(1)),
                    ActivationSpec::Custom(-2.0, 1.0, [](double v) { return v; }));
  CHECK(lurerad::sector_bound_ffnn(custom).bound.upper == Mat::Scalar(4));
}

TEST_CASE("sector_bound_ffnn rejects biases and mixed activations") {
  const Ffnn biased({L(Mat(2, 1)), L(Mat::Identity(2), Mat::Column({0.1, 0}))}, L(Mat(1, 2), Mat::Scalar(1)),
                    ActivationSpec::Relu());
  try {
    lurerad::sector_bound_ffnn(biased);
    FAIL("expected NonzeroBias");
  } catch (const lurerad::Error& e) {
    CHECK(e.code() == ErrorCode::kNonzeroBias);
    CHECK(std::string(e.what()).find("2, 3") != std::string::npos);
  }
  Layer odd = L(Mat::Scalar(1));
  odd.activation = "tanh";
  const Ffnn mixed({odd}, L(Mat::Scalar(1)), ActivationSpec::Relu());
  CHECK(CodeOf([&] { lurerad::sector_bound_ffnn(mixed); }) == ErrorCode::kMixedActivations);
}

TEST_CASE("Gamma2 scales linearly with a hidden layer's weights") {
  std::mt19937_64 rng(53);
  for (int k = 0; k < 30; ++k) {
    const Ffnn net = RandomNet(rng);
    const double s = 0.5 + k * 0.1;
    std::vector<Layer> hidden = net.hidden();
    hidden[0].weights = s * hidden[0].weights;
    const Ffnn scaled(hidden, net.output(), net.activation());
    const Mat a = lurerad::sector_bound_ffnn(net).bound.upper;
    const Mat b = lurerad::sector_bound_ffnn(scaled).bound.upper;
    CHECK(((s * a) - b).max_abs() <= 1e-12 * (1.0 + b.max_abs()));
    CHECK(lurerad::sector_bound_ffnn(scaled).bound.lower == -b);
  }
}

TEST_CASE("empirical_sector_check") {
  const Ffnn net = FixtureNet();
  const auto box = InputBox::Uniform(1, 0.0, 10.0);
  const auto own = lurerad::empirical_sector_check(net, lurerad::sector_bound_ffnn(net).bound, 1000,
                                                   box, 42);
  CHECK(own.violations.empty());
  CHECK(own.samples == 1000);
  CHECK(own.max_ratio == doctest::Approx(0.5));
  const auto degenerate =
      lurerad::empirical_sector_check(net, {Mat(1, 1), Mat(1, 1)}, 100, box, 42);
  CHECK(degenerate.violations.size() > 0);
  const auto tight = lurerad::empirical_sector_check(net, {Mat::Scalar(-0.91), Mat::Scalar(0.25)},
                                                     1000, box, 42);
  CHECK(tight.violations.size() > 0);
  CHECK(CodeOf([&] {
          lurerad::empirical_sector_check(net, {Mat(1, 1), Mat(1, 1)}, 0, box, 42);
        }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] {
          lurerad::empirical_sector_check(net, {Mat(1, 1), Mat(1, 1)}, 10,
                                          InputBox::Uniform(1, -1.0, 1.0), 42);
        }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([&] {
          lurerad::empirical_sector_check(net, {Mat(2, 1), Mat(2, 1)}, 10, box, 42);
        }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("sector bound soundness on random networks") {
  std::mt19937_64 rng(57);
  for (int k = 0; k < 100; ++k) {
    const Ffnn net = RandomNet(rng);
    const auto bound = lurerad::sector_bound_ffnn(net).bound;
    const auto check = lurerad::empirical_sector_check(
        net, bound, 1000, InputBox::Uniform(net.input_dim(), 0.0, 10.0), 1000 + k);
    CHECK(check.violations.empty());
    CHECK(check.max_ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("select_refined_sign") {
  const auto box = InputBox::Uniform(1, 0.0, 10.0);
  // Output 0.455 z on nonnegative inputs: the positive candidate is closer.
  const auto fixture = lurerad::select_refined_sign(FixtureNet(), 0.25, 1000, box, 42);
  CHECK(fixture.positive);
  CHECK(fixture.chosen.upper == Mat::Scalar(0.25));
  CHECK(fixture.chosen.lower(0, 0) == doctest::Approx(-0.91).epsilon(1e-12));
  CHECK(fixture.violations_positive > 0);
  // A negated network satisfies both candidates; the tighter negative one wins.
  const Ffnn negated({L(Mat::Column({0.7, -0.7}))}, L(Mat::FromRows({{-0.65, -0.65}})),
                     ActivationSpec::Relu());
  const auto neg = lurerad::select_refined_sign(negated, 0.25, 1000, box, 42);
  CHECK_FALSE(neg.positive);
  CHECK(neg.violations_negative == 0);
  CHECK(neg.violations_positive == 0);
  CHECK(neg.chosen.upper == Mat::Scalar(-0.25));
  // A zero-output network breaks the negative candidate only.
  const Ffnn dead({L(Mat::Scalar(-1))}, L(Mat::Scalar(1)), ActivationSpec::Relu());
  const auto z = lurerad::select_refined_sign(dead, 0.5, 100, box, 42);
  CHECK(z.positive);
  CHECK(z.violations_positive == 0);
  CHECK(z.violations_negative == 100);
  const Ffnn wide({L(Mat::Identity(2))}, L(Mat::Identity(2)), ActivationSpec::Relu());
  CHECK(CodeOf([&] {
          lurerad::select_refined_sign(wide, 0.5, 10, InputBox::Uniform(2, 0, 1), 1);
        }) == ErrorCode::kNotSiso);
}

TEST_CASE("network file parsing") {
  const Ffnn net = lurerad::LoadNetwork(LURERAD_DATA_DIR "/example_b_net.json");
  CHECK(std::abs(lurerad::sector_bound_ffnn(net).bound.upper(0, 0) - 0.91) <= 1e-12);
  CHECK(lurerad::ParseNetwork(R"({"activation":{"name":"custom","a1":-1,"a2":2},
      "layers":[{"rows":1,"cols":1,"weights":[1]},{"rows":1,"cols":1,"weights":[1]}]})")
            .activation()
            .constant() == 2.0);
  CHECK(CodeOf([] { lurerad::ParseNetwork("{"); }) == ErrorCode::kParseError);
  CHECK(CodeOf([] { lurerad::ParseNetwork(R"({"layers":[]})"); }) == ErrorCode::kParseError);
  CHECK(CodeOf([] {
          lurerad::ParseNetwork(R"({"activation":{"name":"relu"},"layers":[{"rows":2,"cols":1,"weights":[1]}]})");
        }) == ErrorCode::kParseError);
  CHECK(CodeOf([] {
          lurerad::ParseNetwork(R"({"activation":{"name":"relu","a2":2},"layers":[{"rows":1,"cols":1,"weights":[1]}]})");
        }) == ErrorCode::kParseError);
  CHECK(CodeOf([] {
          lurerad::ParseNetwork(R"({"activation":{"name":"relu"},"layers":[
              {"rows":2,"cols":1,"weights":[1,1]},{"rows":1,"cols":3,"weights":[1,1,1]}]})");
        }) == ErrorCode::kParseError);
  CHECK(CodeOf([] { lurerad::LoadNetwork("/nonexistent/net.json"); }) == ErrorCode::kIoError);
  try {
    lurerad::LoadNetwork(LURERAD_DATA_DIR "/biased_net.json");
  } catch (...) {
    FAIL("biases are legal for evaluation");
  }
}
