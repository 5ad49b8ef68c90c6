#include "lurerad/matrix.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "eigen_bridge.h"
#include "lurerad/error.h"

namespace lurerad {
namespace {

void RequireSquare(const Mat& m, const char* what) {
  if (!m.is_square()) {
    throw Error(ErrorCode::kNonSquare,
                std::string(what) + ": matrix is " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()));
  }
}

std::string Shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols)
    : Mat(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "matrix dimensions must be positive");
  }
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "entry count " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(rows_) + "x" +
                    std::to_string(cols_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, "matrix entries must be finite");
    }
  }
}

Mat Mat::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> copy;
  for (const auto& r : rows) copy.emplace_back(r);
  return FromRows(copy);
}

Mat Mat::FromRows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "matrix has no rows");
  }
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "ragged matrix: row " + std::to_string(i) + " has " +
                      std::to_string(rows[i].size()) + " entries, expected " +
                      std::to_string(cols));
    }
    data.insert(data.end(), rows[i].begin(), rows[i].end());
  }
  return Mat(rows.size(), cols, std::move(data));
}

Mat Mat::Identity(std::size_t n) {
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
  return Mat(n, n, std::move(data));
}

Mat Mat::Ones(std::size_t rows, std::size_t cols) {
  return Mat(rows, cols, std::vector<double>(rows * cols, 1.0));
}

Mat Mat::Column(std::vector<double> values) {
  const std::size_t n = values.size();
  return Mat(n, 1, std::move(values));
}

Mat Mat::transpose() const {
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[j * rows_ + i] = (*this)(i, j);
  return Mat(cols_, rows_, std::move(out));
}

double Mat::max_abs() const {
  double best = 0.0;
  for (double v : data_) best = std::max(best, std::abs(v));
  return best;
}

double Mat::min_entry() const { return *std::min_element(data_.begin(), data_.end()); }
double Mat::max_entry() const { return *std::max_element(data_.begin(), data_.end()); }

Mat operator+(const Mat& a, const Mat& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot add " + Shape(a) + " and " + Shape(b));
  }
  std::vector<double> out(a.data_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b.data_[k];
  return Mat(a.rows_, a.cols_, std::move(out));
}

Mat operator-(const Mat& a, const Mat& b) { return a + (-b); }

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols_ != b.rows_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot multiply " + Shape(a) + " by " + Shape(b));
  }
  std::vector<double> out(a.rows_ * b.cols_, 0.0);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) out[i * b.cols_ + j] += aik * b(k, j);
    }
  }
  return Mat(a.rows_, b.cols_, std::move(out));
}

Mat operator*(double s, const Mat& m) {
  std::vector<double> out(m.data_);
  for (double& v : out) v *= s;
  return Mat(m.rows_, m.cols_, std::move(out));
}

Mat operator-(const Mat& m) {
  std::vector<double> out(m.data_);
  for (double& v : out) v = 0.0 - v;  // keeps +0 for zero entries
  return Mat(m.rows_, m.cols_, std::move(out));
}

std::string Mat::ToString() const {
  std::ostringstream os;
  os.precision(10);
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << (*this)(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

std::string_view NormKindName(NormKind kind) {
  switch (kind) {
    case NormKind::kOne: return "one";
    case NormKind::kTwo: return "two";
    case NormKind::kInf: return "inf";
    case NormKind::kMaxAbsEntry: return "maxabs";
  }
  return "?";
}

NormKind ParseNormKind(std::string_view name) {
  if (name == "one") return NormKind::kOne;
  if (name == "two") return NormKind::kTwo;
  if (name == "inf") return NormKind::kInf;
  if (name == "maxabs") return NormKind::kMaxAbsEntry;
  throw Error(ErrorCode::kParseError,
              "unknown norm '" + std::string(name) + "' (expected one|two|inf|maxabs)");
}

bool is_nonnegative(const Mat& m) {
  return std::ranges::all_of(m.data(), [](double v) { return v >= 0.0; });
}

bool is_metzler(const Mat& m) {
  RequireSquare(m, "is_metzler");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < 0.0) return false;
  return true;
}

SpectralResult spectral_abscissa(const Mat& m, double tol, int max_iter) {
  RequireSquare(m, "spectral_abscissa");
  const Eigen::MatrixXd a = internal::ToEigen(m);
  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  solver.setMaxIterations(max_iter);
  solver.compute(a, /*computeEigenvectors=*/true);

  SpectralResult result;
  result.iterations = 1;
  if (solver.info() != Eigen::Success) {
    // Fall back to eigenvalues only; the Schur iteration has not settled.
    Eigen::EigenSolver<Eigen::MatrixXd> values_only(a, false);
    result.value = values_only.eigenvalues().real().maxCoeff();
    result.converged = false;
    result.residual = std::numeric_limits<double>::infinity();
    return result;
  }
  const auto& lambda = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const double scale = std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  double residual = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const Eigen::VectorXcd v = vectors.col(k);
    const double vn = v.norm();
    if (vn == 0.0) continue;
    residual = std::max(residual, (ac * v - lambda(k) * v).norm() / (vn * scale));
  }
  result.value = lambda.real().maxCoeff();
  result.residual = residual;
  result.converged = residual <= tol;
  return result;
}

bool is_hurwitz(const Mat& m, double tol) {
  const SpectralResult r = spectral_abscissa(m);
  if (!r.converged) {
    throw Error(ErrorCode::kNoConvergence,
                "eigenvalue iteration did not converge (estimate " +
                    std::to_string(r.value) + ")");
  }
  return r.value < -tol;
}

Mat metzler_hurwitz_certificate(const Mat& m) {
  RequireSquare(m, "metzler_hurwitz_certificate");
  if (!is_metzler(m)) {
    throw Error(ErrorCode::kNotMetzler, "certificate requires a Metzler matrix");
  }
  Mat v(m.rows(), 1);
  try {
    v = inverse(-m) * Mat::Ones(m.rows(), 1);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSingular) throw;
    throw Error(ErrorCode::kNotHurwitz, "-m is singular; no positive certificate");
  }
  const Mat mv = m * v;
  if (v.min_entry() <= 0.0 || mv.max_entry() >= 0.0) {
    throw Error(ErrorCode::kNotHurwitz,
                "(-m)^{-1} 1 is not a strictly positive vector with m v < 0");
  }
  return v;
}

// Gauss-Jordan elimination with partial pivoting.
Mat inverse(const Mat& m) {
  RequireSquare(m, "inverse");
  const std::size_t n = m.rows();
  const double threshold = kPivotRelTol * m.max_abs();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    const double p = a[pivot * n + col];
    if (!(std::abs(p) > threshold) || p == 0.0) {
      throw Error(ErrorCode::kSingular,
                  "matrix is singular to working precision (pivot " +
                      std::to_string(p) + " in column " + std::to_string(col) + ")");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[pivot * n + j], a[col * n + j]);
        std::swap(inv[pivot * n + j], inv[col * n + j]);
      }
    }
    const double inv_p = 1.0 / p;
    for (std::size_t j = 0; j < n; ++j) {
      a[col * n + j] *= inv_p;
      inv[col * n + j] *= inv_p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  return Mat(n, n, std::move(inv));
}

double operator_norm(const Mat& m, NormKind kind) {
  switch (kind) {
    case NormKind::kOne: {
      double best = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormKind::kInf: {
      double best = 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case NormKind::kTwo: {
      if (m.rows() == 1 || m.cols() == 1) {
        double s = 0.0;
        for (double v : m.data()) s += v * v;
        return std::sqrt(s);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(internal::ToEigen(m));
      return svd.singularValues()(0);
    }
    case NormKind::kMaxAbsEntry:
      return m.max_abs();
  }
  return 0.0;
}

double spectral_radius_dense(const Mat& m) {
  RequireSquare(m, "spectral_radius");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(internal::ToEigen(m), false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNoConvergence, "dense eigenvalue method did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SpectralResult spectral_radius(const Mat& m, double tol, int max_iter) {
  RequireSquare(m, "spectral_radius");
  const std::size_t n = m.rows();
  SpectralResult result;
  if (is_nonnegative(m)) {
    // Collatz-Wielandt bracket: for x > 0, min (Ax)_i/x_i <= rho <= max (Ax)_i/x_i.
    std::vector<double> x(n, 1.0), y(n);
    for (int it = 1; it <= max_iter; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m(i, j) * x[j];
        y[i] = s;
      }
      const double ymax = *std::max_element(y.begin(), y.end());
      if (ymax == 0.0) {
        // A^k 1 = 0 for a nonnegative A means A is nilpotent.
        return SpectralResult{0.0, it, true, 0.0};
      }
      if (std::ranges::any_of(x, [](double v) { return v <= 0.0; })) break;
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, y[i] / x[i]);
        hi = std::max(hi, y[i] / x[i]);
      }
      result = SpectralResult{0.5 * (lo + hi), it, false, hi - lo};
      if (hi - lo <= tol * hi) {
        result.converged = true;
        return result;
      }
      for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ymax;
    }
  }
  const double dense = spectral_radius_dense(m);
  return SpectralResult{dense, result.iterations + 1, true, 0.0};
}

Mat elementwise_abs(const Mat& m) {
  std::vector<double> out(m.data().begin(), m.data().end());
  for (double& v : out) v = std::abs(v);
  return Mat(m.rows(), m.cols(), std::move(out));
}

bool elementwise_leq(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "elementwise comparison of " + Shape(a) + " and " + Shape(b));
  }
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!(a.data()[k] <= b.data()[k])) return false;
  return true;
}

double sigma_min(const Mat& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(internal::ToEigen(m));
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

}  // namespace lurerad
