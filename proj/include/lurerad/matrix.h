#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lurerad {

/// Dense real matrix, row-major, immutable after construction. Every entry is
/// finite; construction (including arithmetic results) throws kNonFinite
/// otherwise.
class Mat {
 public:
  Mat(std::size_t rows, std::size_t cols);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Mat FromRows(std::initializer_list<std::initializer_list<double>> rows);
  static Mat FromRows(const std::vector<std::vector<double>>& rows);
  static Mat Identity(std::size_t n);
  static Mat Ones(std::size_t rows, std::size_t cols);
  static Mat Column(std::vector<double> values);
  static Mat Scalar(double value) { return Mat(1, 1, {value}); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool is_square() const { return rows_ == cols_; }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  std::span<const double> data() const { return data_; }

  Mat transpose() const;
  double max_abs() const;
  double min_entry() const;
  double max_entry() const;

  friend Mat operator+(const Mat& a, const Mat& b);
  friend Mat operator-(const Mat& a, const Mat& b);
  friend Mat operator*(const Mat& a, const Mat& b);
  friend Mat operator*(double s, const Mat& m);
  friend Mat operator-(const Mat& m);
  friend bool operator==(const Mat& a, const Mat& b) = default;

  std::string ToString() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

enum class NormKind { kOne, kTwo, kInf, kMaxAbsEntry };

std::string_view NormKindName(NormKind kind);
/// Accepts "one", "two", "inf", "maxabs" (case-sensitive). Throws kParseError.
NormKind ParseNormKind(std::string_view name);

struct SpectralResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

inline constexpr double kHurwitzTol = 1e-9;
inline constexpr double kComputedSignSlack = 1e-9;
inline constexpr double kPivotRelTol = 1e-12;
inline constexpr double kPowerTol = 1e-10;
inline constexpr int kPowerMaxIter = 10'000;

bool is_nonnegative(const Mat& m);
bool is_metzler(const Mat& m);

/// Max real part over the eigenvalues (dense real Schur method). Does not
/// throw on non-convergence: the best estimate is returned with
/// converged = false.
SpectralResult spectral_abscissa(const Mat& m, double tol = kHurwitzTol,
                                 int max_iter = 10'000);

bool is_hurwitz(const Mat& m, double tol = kHurwitzTol);

/// Lemma-2 style certificate: v = (-m)^{-1} 1 with v > 0 and m v < 0.
Mat metzler_hurwitz_certificate(const Mat& m);

Mat inverse(const Mat& m);

double operator_norm(const Mat& m, NormKind kind);

/// Power iteration from the all-ones vector when m is nonnegative, falling
/// back to the dense eigenvalue method when that does not settle.
SpectralResult spectral_radius(const Mat& m, double tol = kPowerTol,
                               int max_iter = kPowerMaxIter);

/// Dense-method spectral radius; used as the fallback and cross-check.
double spectral_radius_dense(const Mat& m);

Mat elementwise_abs(const Mat& m);
bool elementwise_leq(const Mat& a, const Mat& b);

/// Smallest singular value.
double sigma_min(const Mat& m);

}  // namespace lurerad
