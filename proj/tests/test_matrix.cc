#include <cmath>
#include <random>

#include "doctest.h"
#include "lurerad/error.h"
#include "lurerad/matrix.h"
#include "oracles.h"

using lurerad::ErrorCode;
using lurerad::Mat;
using lurerad::NormKind;

namespace {

const Mat kExampleA = Mat::FromRows({{-5, 5, 1}, {6, -7, 1}, {2, 1, -5}});

// A + B sigma C with B = ones(3,1), C = ones(1,3).
Mat ShiftAll(const Mat& a, double sigma) { return a + sigma * Mat::Ones(3, 3); }

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const lurerad::Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

double MaxAbsDiff(const Mat& a, const Mat& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("construction rejects bad shapes and values") {
  CHECK(CodeOf([] { Mat(0, 2); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { Mat(2, 2, {1, 2, 3}); }) == ErrorCode::kDimensionMismatch);
  CHECK(CodeOf([] { Mat(1, 1, {std::nan("")}); }) == ErrorCode::kNonFinite);
  CHECK(CodeOf([] { Mat(1, 1, {INFINITY}); }) == ErrorCode::kNonFinite);
  CHECK(CodeOf([] { Mat::FromRows({{1, 2}, {3}}); }) == ErrorCode::kDimensionMismatch);
  CHECK(CodeOf([] { Mat::FromRows(std::vector<std::vector<double>>{}); }) != ErrorCode::kOk);
}

TEST_CASE("arithmetic") {
  const Mat a = Mat::FromRows({{1, 2}, {3, 4}});
  CHECK(a * Mat::Identity(2) == a);
  CHECK((a + a) == 2.0 * a);
  CHECK((a - a) == Mat(2, 2));
  CHECK(a.transpose() == Mat::FromRows({{1, 3}, {2, 4}}));
  CHECK(a * Mat::Column({1, 1}) == Mat::Column({3, 7}));
  CHECK(CodeOf([&] { a * Mat(3, 1); }) == ErrorCode::kDimensionMismatch);
  CHECK(CodeOf([&] { a + Mat(3, 1); }) == ErrorCode::kDimensionMismatch);
  // Negating zero stays +0 so printed bounds never show "-0".
  CHECK(!std::signbit((-Mat(1, 1))(0, 0)));
  CHECK(CodeOf([] { 1e300 * Mat::Scalar(1e300); }) == ErrorCode::kNonFinite);
}

TEST_CASE("ToString and norm names round-trip") {
  CHECK(Mat::FromRows({{1, -2}, {3, 0.5}}).ToString() == "[[1,-2],[3,0.5]]");
  for (auto k : {NormKind::kOne, NormKind::kTwo, NormKind::kInf, NormKind::kMaxAbsEntry}) {
    CHECK(lurerad::ParseNormKind(lurerad::NormKindName(k)) == k);
  }
  CHECK(CodeOf([] { lurerad::ParseNormKind("fro"); }) == ErrorCode::kParseError);
}

TEST_CASE("is_nonnegative") {
  CHECK(lurerad::is_nonnegative(Mat::Ones(3, 1)));
  CHECK(lurerad::is_nonnegative(Mat(2, 2)));
  CHECK_FALSE(lurerad::is_nonnegative(Mat::FromRows({{1, -1e-12}, {0, 1}})));
}

TEST_CASE("is_metzler") {
  CHECK(lurerad::is_metzler(kExampleA));
  CHECK(lurerad::is_metzler(Mat::Identity(4)));
  CHECK_FALSE(lurerad::is_metzler(Mat::FromRows({{-7, 3, -1}, {4, -9, -1}, {0, -1, -7}})));
  CHECK(CodeOf([] { lurerad::is_metzler(Mat(2, 3)); }) == ErrorCode::kNonSquare);
}

TEST_CASE("spectral_abscissa") {
  auto r = lurerad::spectral_abscissa(Mat::FromRows({{-1, 0}, {0, -2}}));
  CHECK(r.value == doctest::Approx(-1.0));
  CHECK(r.converged);
  CHECK(r.residual <= lurerad::kHurwitzTol);
  CHECK(lurerad::spectral_abscissa(Mat::FromRows({{0, 1}, {-1, 0}})).value ==
        doctest::Approx(0.0).epsilon(1e-12));
  const Mat upper = ShiftAll(kExampleA, -0.48);
  const double value = lurerad::spectral_abscissa(upper).value;
  CHECK(value < 0.0);
  CHECK(value == doctest::Approx(oracle::Abscissa(upper)).epsilon(1e-10));
  CHECK(value == doctest::Approx(-1.137558688).epsilon(1e-8));
  CHECK(CodeOf([] { lurerad::spectral_abscissa(Mat(2, 3)); }) == ErrorCode::kNonSquare);
}

TEST_CASE("spectral_abscissa agrees with an independent eigen-solver") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + k % 8;
    std::vector<double> v(n * n);
    for (double& x : v) x = g(rng);
    const Mat m(n, n, v);
    CHECK(lurerad::spectral_abscissa(m).value ==
          doctest::Approx(oracle::Abscissa(m)).epsilon(1e-8));
  }
}

TEST_CASE("is_hurwitz") {
  CHECK(lurerad::is_hurwitz(Mat::FromRows({{-1, 0}, {0, -2}})));
  CHECK_FALSE(lurerad::is_hurwitz(Mat(2, 2)));
  CHECK_FALSE(lurerad::is_hurwitz(kExampleA));
  // Open-loop abscissa of the example is positive.
  CHECK(lurerad::spectral_abscissa(kExampleA).value ==
        doctest::Approx(oracle::Abscissa(kExampleA)).epsilon(1e-10));
  CHECK(lurerad::spectral_abscissa(kExampleA).value > 0.15);
}

TEST_CASE("metzler_hurwitz_certificate") {
  CHECK(lurerad::metzler_hurwitz_certificate(-1.0 * Mat::Identity(3)) == Mat::Ones(3, 1));
  const Mat upper = ShiftAll(kExampleA, -0.48);
  const Mat v = lurerad::metzler_hurwitz_certificate(upper);
  CHECK(v.min_entry() > 0.0);
  CHECK((upper * v).max_entry() < 0.0);
  const Eigen::VectorXd ref = oracle::Inverse(-oracle::Dense(upper)) * Eigen::VectorXd::Ones(3);
  for (int i = 0; i < 3; ++i) CHECK(v(i, 0) == doctest::Approx(ref(i)).epsilon(1e-12));
  CHECK(CodeOf([] { lurerad::metzler_hurwitz_certificate(Mat::Scalar(1)); }) ==
        ErrorCode::kNotHurwitz);
  CHECK(CodeOf([] { lurerad::metzler_hurwitz_certificate(Mat::FromRows({{-1, -1}, {0, -1}})); }) ==
        ErrorCode::kNotMetzler);
  CHECK(CodeOf([] { lurerad::metzler_hurwitz_certificate(Mat(2, 2)); }) == ErrorCode::kNotHurwitz);
}

TEST_CASE("certificate soundness and completeness on random Metzler matrices") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(0.0, 1.0), diag(-3.0, 0.5);
  int agree = 0, total = 1000;
  for (int k = 0; k < total; ++k) {
    const std::size_t n = 2 + k % 5;
    std::vector<double> v(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v[i * n + j] = i == j ? diag(rng) - 0.5 * n : off(rng);
    const Mat m(n, n, v);
    const double abscissa = oracle::Abscissa(m);
    bool certified = false;
    try {
      const Mat cert = lurerad::metzler_hurwitz_certificate(m);
      certified = true;
      CHECK(cert.min_entry() > 0.0);
      CHECK((m * cert).max_entry() < 0.0);
    } catch (const lurerad::Error& e) {
      CHECK(e.code() == ErrorCode::kNotHurwitz);
    }
    if (certified == (abscissa < 0.0)) {
      ++agree;
    } else {
      CHECK(std::abs(abscissa) < 1e-7);
    }
  }
  CHECK(agree >= 990);
}

TEST_CASE("inverse") {
  CHECK(lurerad::inverse(Mat::Identity(3)) == Mat::Identity(3));
  CHECK(lurerad::inverse(Mat::FromRows({{2, 0}, {0, 4}})) == Mat::FromRows({{0.5, 0}, {0, 0.25}}));
  const Mat neg_upper = -ShiftAll(kExampleA, -0.48);
  CHECK(lurerad::inverse(neg_upper).min_entry() >= 0.0);
  CHECK(CodeOf([] { lurerad::inverse(Mat::FromRows({{1, 2}, {2, 4}})); }) == ErrorCode::kSingular);
  CHECK(CodeOf([] { lurerad::inverse(Mat(2, 3)); }) == ErrorCode::kNonSquare);
  // Scale-relative pivot threshold: a tiny but well-conditioned matrix inverts.
  CHECK(lurerad::inverse(1e-20 * Mat::Identity(2))(0, 0) == doctest::Approx(1e20));
}

TEST_CASE("inverse residuals and M-matrix inverse nonnegativity") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    const Mat m = oracle::RandomMetzlerHurwitz(2 + k % 7, rng);
    const Mat inv = lurerad::inverse(m);
    const Mat id = Mat::Identity(m.rows());
    CHECK(MaxAbsDiff(inv * m, id) <= 1e-9);
    CHECK(MaxAbsDiff(m * inv, id) <= 1e-9);
    CHECK(lurerad::inverse(-m).min_entry() >= -1e-9);
  }
}

TEST_CASE("operator_norm") {
  for (auto k : {NormKind::kOne, NormKind::kTwo, NormKind::kInf, NormKind::kMaxAbsEntry}) {
    CHECK(lurerad::operator_norm(Mat::Identity(3), k) == doctest::Approx(1.0));
  }
  const Mat m = Mat::FromRows({{1, -2}, {3, 4}});
  CHECK(lurerad::operator_norm(m, NormKind::kInf) == 7.0);
  CHECK(lurerad::operator_norm(m, NormKind::kOne) == 6.0);
  CHECK(lurerad::operator_norm(m, NormKind::kMaxAbsEntry) == 4.0);
  // Largest singular value of [[1,-2],[3,4]] is sqrt(15 + sqrt(125)).
  CHECK(lurerad::operator_norm(m, NormKind::kTwo) ==
        doctest::Approx(std::sqrt(15.0 + std::sqrt(125.0))).epsilon(1e-14));
  CHECK(lurerad::operator_norm(Mat::FromRows({{3, 4}}), NormKind::kTwo) == doctest::Approx(5.0));
  CHECK(lurerad::operator_norm(Mat::Column({3, 4}), NormKind::kTwo) == doctest::Approx(5.0));
}

TEST_CASE("operator norms are monotone on nonnegative matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const std::size_t r = 1 + k % 5, c = 1 + (k / 5) % 5;
    const Mat a = oracle::RandomNonneg(r, c, rng);
    const Mat b = a + oracle::RandomNonneg(r, c, rng, u(rng));
    for (auto kind : {NormKind::kOne, NormKind::kTwo, NormKind::kInf}) {
      CHECK(lurerad::operator_norm(a, kind) <= lurerad::operator_norm(b, kind) + 1e-9);
    }
  }
}

TEST_CASE("spectral_radius") {
  CHECK(lurerad::spectral_radius(Mat::FromRows({{3, 0}, {0, -5}})).value == doctest::Approx(5.0));
  const auto nil = lurerad::spectral_radius(Mat::FromRows({{0, 1}, {0, 0}}));
  CHECK(nil.value == 0.0);
  CHECK(nil.converged);
  CHECK(lurerad::spectral_radius(Mat::Scalar(-2.5)).value == doctest::Approx(2.5));
  CHECK(lurerad::spectral_radius(Mat(3, 3)).value == 0.0);
  // Rotation: not nonnegative, goes to the dense method.
  CHECK(lurerad::spectral_radius(Mat::FromRows({{0, -1}, {1, 0}})).value == doctest::Approx(1.0));
  // Permutation: power iteration from ones is stuck, the result must still be right.
  CHECK(lurerad::spectral_radius(Mat::FromRows({{0, 2}, {2, 0}})).value == doctest::Approx(2.0));
  CHECK(lurerad::spectral_radius(Mat::FromRows({{0, 1}, {4, 0}})).value == doctest::Approx(2.0));
  CHECK(CodeOf([] { lurerad::spectral_radius(Mat(1, 2)); }) == ErrorCode::kNonSquare);
}

TEST_CASE("power iteration agrees with the dense method on nonnegative matrices") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + k % 9;
    const Mat m = oracle::RandomNonneg(n, n, rng, 3.0);
    const auto r = lurerad::spectral_radius(m);
    const double ref = oracle::SpectralRadius(oracle::Dense(m));
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(ref).epsilon(1e-8));
    CHECK(lurerad::spectral_radius_dense(m) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("elementwise helpers") {
  CHECK(lurerad::elementwise_abs(Mat::FromRows({{-1, 2}})) == Mat::FromRows({{1, 2}}));
  CHECK(lurerad::elementwise_abs(Mat(2, 2)) == Mat(2, 2));
  CHECK(lurerad::elementwise_abs(Mat::Scalar(-0.91)) == Mat::Scalar(0.91));
  const Mat a = Mat::FromRows({{1, 0}});
  CHECK(lurerad::elementwise_leq(a, a));
  CHECK(lurerad::elementwise_leq(Mat::Scalar(-2), Mat::Scalar(-0.48)));
  CHECK_FALSE(lurerad::elementwise_leq(a, Mat::FromRows({{0, 1}})));
  CHECK(CodeOf([&] { lurerad::elementwise_leq(a, Mat(2, 1)); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("sigma_min") {
  CHECK(lurerad::sigma_min(Mat::FromRows({{3, 0}, {0, -0.5}})) == doctest::Approx(0.5));
  const Mat m = Mat::FromRows({{1, -2}, {3, 4}});
  // Product of singular values is |det| = 10.
  CHECK(lurerad::sigma_min(m) * lurerad::operator_norm(m, NormKind::kTwo) ==
        doctest::Approx(10.0));
}
