#include "lurerad/robustness.h"

#include <cmath>
#include <utility>

namespace lurerad {
namespace {

std::string Shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void RequireMetzlerHurwitz(const Mat& a, const char* what) {
  if (!a.is_square()) throw Error(ErrorCode::kNonSquare, std::string(what) + ": A not square");
  if (!is_metzler(a)) {
    throw Error(ErrorCode::kNotMetzler, std::string(what) + ": state matrix is not Metzler");
  }
  if (!is_hurwitz(a)) {
    throw Error(ErrorCode::kNotHurwitz, std::string(what) + ": state matrix is not Hurwitz");
  }
}

void RequireStructureFits(const Mat& a, const PerturbationStructure& pert) {
  if (pert.D().rows() != a.rows() || pert.E().cols() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "perturbation D " + Shape(pert.D()) + " / E " + Shape(pert.E()) +
                    " do not fit a " + Shape(a) + " state matrix");
  }
}

// 1 / ||E m^{-1} D|| for the monotone-norm path, 1 / rho(E (-m)^{-1} D S) for
// the Schur path.
double RadiusFromClosedLoop(const Mat& m, const PerturbationStructure& pert) {
  if (pert.schur_scale()) {
    const Mat g = pert.E() * inverse(-m) * pert.D() * *pert.schur_scale();
    const double rho = spectral_radius(g).value;
    if (rho <= 0.0) {
      throw Error(ErrorCode::kZeroSpectralRadius,
                  "rho(E(-A)^{-1} D S) = 0: the structure cannot destabilize");
    }
    return 1.0 / rho;
  }
  const double gain = operator_norm(pert.E() * inverse(m) * pert.D(), pert.norm());
  if (gain <= 0.0) {
    throw Error(ErrorCode::kInfiniteRadius,
                "||E A^{-1} D|| = 0: the structure cannot destabilize");
  }
  return 1.0 / gain;
}

}  // namespace

LtiSystem::LtiSystem(Mat a, Mat b, Mat c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (!a_.is_square()) throw Error(ErrorCode::kNonSquare, "A must be square, got " + Shape(a_));
  if (b_.rows() != a_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "B has " + std::to_string(b_.rows()) + " rows, A has " +
                    std::to_string(a_.rows()));
  }
  if (c_.cols() != a_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "C has " + std::to_string(c_.cols()) + " columns, A has " +
                    std::to_string(a_.cols()));
  }
}

PerturbationStructure::PerturbationStructure(Mat d, Mat e, NormKind norm,
                                             std::optional<Mat> schur_scale)
    : d_(std::move(d)), e_(std::move(e)), norm_(norm), schur_(std::move(schur_scale)) {
  if (d_.rows() != e_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "D " + Shape(d_) + " and E " + Shape(e_) + " disagree on the state dimension");
  }
  if (!is_nonnegative(d_) || !is_nonnegative(e_)) {
    throw Error(ErrorCode::kInvalidArgument, "D and E must be elementwise nonnegative");
  }
  if (schur_) {
    if (schur_->rows() != d_.cols() || schur_->cols() != e_.rows()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "Schur scale S must be " + std::to_string(d_.cols()) + "x" +
                      std::to_string(e_.rows()) + ", got " + Shape(*schur_));
    }
    if (!is_nonnegative(*schur_)) {
      throw Error(ErrorCode::kInvalidArgument, "Schur scale S must be nonnegative");
    }
    norm_ = NormKind::kMaxAbsEntry;
  }
}

PerturbationStructure PerturbationStructure::with_norm(NormKind norm) const {
  if (schur_) return *this;
  return PerturbationStructure(d_, e_, norm);
}

Mat PerturbationStructure::default_direction() const {
  std::vector<double> dir(in_dim() * out_dim(), 0.0);
  for (std::size_t i = 0; i < std::min(in_dim(), out_dim()); ++i) dir[i * out_dim() + i] = 1.0;
  return Mat(in_dim(), out_dim(), std::move(dir));
}

std::vector<std::string> AizermanCertificate::failed_gates() const {
  std::vector<std::string> failed;
  if (!b_nonneg) failed.emplace_back("B >= 0");
  if (!c_nonneg) failed.emplace_back("C >= 0");
  if (!sector_ordered) failed.emplace_back("Sigma1 <= Sigma2");
  if (!metzler_at_lower) failed.emplace_back("A + B Sigma1 C Metzler");
  if (!hurwitz_at_upper) failed.emplace_back("A + B Sigma2 C Hurwitz");
  return failed;
}

std::string_view RadiusFormulaName(RadiusFormula f) {
  switch (f) {
    case RadiusFormula::kLinearNorm: return "LinearNorm";
    case RadiusFormula::kSchurSpectral: return "SchurSpectral";
    case RadiusFormula::kLureUpperSector: return "LureUpperSector";
    case RadiusFormula::kNnUpperSector: return "NnUpperSector";
  }
  return "?";
}

namespace {
std::string CertificationMessage(const AizermanCertificate& cert) {
  std::string msg = "positive Lur'e certification failed:";
  for (const auto& g : cert.failed_gates()) msg += " [" + g + "]";
  return msg;
}
}  // namespace

CertificationError::CertificationError(AizermanCertificate cert)
    : Error(ErrorCode::kCertificationFailed, CertificationMessage(cert)),
      cert_(std::move(cert)) {}

Mat closed_loop_matrix(const LtiSystem& sys, const Mat& gain) {
  if (gain.rows() != sys.inputs() || gain.cols() != sys.outputs()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "gain must be " + std::to_string(sys.inputs()) + "x" +
                    std::to_string(sys.outputs()) + ", got " + Shape(gain));
  }
  return sys.A() + sys.B() * gain * sys.C();
}

AizermanCertificate certify_positive_lure(const LtiSystem& sys, const SectorBound& sector) {
  AizermanCertificate cert;
  cert.b_nonneg = is_nonnegative(sys.B());
  cert.c_nonneg = is_nonnegative(sys.C());
  cert.lower_closed_loop = closed_loop_matrix(sys, sector.lower);
  cert.upper_closed_loop = closed_loop_matrix(sys, sector.upper);
  cert.sector_ordered = sector.ordered();
  cert.metzler_at_lower = is_metzler(cert.lower_closed_loop);
  cert.metzler_at_upper = is_metzler(cert.upper_closed_loop);
  const SpectralResult upper = spectral_abscissa(cert.upper_closed_loop);
  if (!upper.converged) {
    throw Error(ErrorCode::kNoConvergence, "eigenvalues of A + B Sigma2 C did not converge");
  }
  cert.upper_abscissa = upper.value;
  cert.hurwitz_at_upper = upper.value < -kHurwitzTol;
  if (cert.hurwitz_at_upper && cert.metzler_at_upper) {
    try {
      cert.positive_vector = metzler_hurwitz_certificate(cert.upper_closed_loop);
    } catch (const Error&) {
      // Leave empty; the Hurwitz gate above is authoritative.
    }
  }
  cert.verdict = cert.b_nonneg && cert.c_nonneg && cert.sector_ordered &&
                 cert.metzler_at_lower && cert.hurwitz_at_upper;
  return cert;
}

RadiusReport stability_radius_linear(const Mat& a, const PerturbationStructure& pert) {
  if (pert.norm() == NormKind::kMaxAbsEntry || pert.schur_scale()) {
    throw Error(ErrorCode::kInvalidArgument,
                "the norm formula needs an operator norm; use stability_radius_schur");
  }
  RequireStructureFits(a, pert);
  RequireMetzlerHurwitz(a, "stability_radius_linear");
  RadiusReport report;
  report.radius = RadiusFromClosedLoop(a, pert);
  report.norm = pert.norm();
  report.closed_loop = a;
  report.formula = RadiusFormula::kLinearNorm;
  report.a_metzler = report.a_hurwitz = true;
  return report;
}

RadiusReport stability_radius_schur(const Mat& a, const PerturbationStructure& pert) {
  if (!pert.schur_scale()) {
    throw Error(ErrorCode::kMissingSchurScale, "stability_radius_schur requires a Schur scale S");
  }
  RequireStructureFits(a, pert);
  RequireMetzlerHurwitz(a, "stability_radius_schur");
  RadiusReport report;
  report.radius = RadiusFromClosedLoop(a, pert);
  report.norm = NormKind::kMaxAbsEntry;
  report.closed_loop = a;
  report.formula = RadiusFormula::kSchurSpectral;
  report.a_metzler = report.a_hurwitz = true;
  return report;
}

RadiusReport stability_radius_lure(const LtiSystem& sys, const SectorBound& sector,
                                   const PerturbationStructure& pert, LureOptions options) {
  RequireStructureFits(sys.A(), pert);
  AizermanCertificate cert = certify_positive_lure(sys, sector);
  RadiusReport report;
  if (!cert.verdict) {
    if (!options.override_gates) throw CertificationError(cert);
    std::string w = "certification gates overridden; the radius formula is "
                    "evaluated outside its hypotheses. Failed:";
    for (const auto& g : cert.failed_gates()) w += " [" + g + "]";
    report.warnings.push_back(std::move(w));
  }
  if (!cert.metzler_at_upper) {
    if (!options.override_gates) {
      throw Error(ErrorCode::kNotMetzlerUpper, "A + B Sigma2 C is not Metzler");
    }
    report.warnings.emplace_back("A + B Sigma2 C is not Metzler (overridden)");
  }
  report.radius = RadiusFromClosedLoop(cert.upper_closed_loop, pert);
  report.norm = pert.norm();
  report.closed_loop = cert.upper_closed_loop;
  report.formula = RadiusFormula::kLureUpperSector;
  report.certificate = std::move(cert);
  return report;
}

RadiusReport nn_stability_radius(const LtiSystem& sys, const SectorBound& nn_sector,
                                 const PerturbationStructure& pert, LureOptions options) {
  if (!(nn_sector.lower == -nn_sector.upper)) {
    throw Error(ErrorCode::kInvalidArgument,
                "network sector must be symmetric (lower = -upper)");
  }
  RadiusReport report = stability_radius_lure(sys, nn_sector, pert, options);
  report.formula = RadiusFormula::kNnUpperSector;
  return report;
}

RefinedSector refine_upper_sector(const LtiSystem& sys, const PerturbationStructure& pert,
                                  double delta_crit, std::optional<Mat> direction) {
  if (!std::isfinite(delta_crit) || delta_crit < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "delta_crit must be finite and nonnegative");
  }
  RequireStructureFits(sys.A(), pert);
  const Mat dir = direction ? *direction : pert.default_direction();
  if (dir.rows() != pert.in_dim() || dir.cols() != pert.out_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "direction must be " + std::to_string(pert.in_dim()) + "x" +
                    std::to_string(pert.out_dim()) + ", got " + Shape(dir));
  }
  RefinedSector out;
  out.perturbed = sys.A() + delta_crit * (pert.D() * dir * pert.E());
  const Mat g = sys.C() * inverse(out.perturbed) * sys.B();
  const double gain = operator_norm(g, pert.norm());
  if (gain <= 0.0) {
    throw Error(ErrorCode::kInfiniteRadius, "C (A + D Delta E)^{-1} B = 0");
  }
  out.magnitude = 1.0 / gain;
  if (sys.inputs() == 1 && sys.outputs() == 1) {
    out.candidates.emplace(Mat::Scalar(out.magnitude), Mat::Scalar(-out.magnitude));
  }
  return out;
}

MonotonicityGap monotonicity_gap(const Mat& p, const Mat& q, const PerturbationStructure& pert) {
  if (!elementwise_leq(q, p)) {
    throw Error(ErrorCode::kOrderViolated, "monotonicity_gap requires P >= Q elementwise");
  }
  return MonotonicityGap{stability_radius_linear(p, pert).radius,
                         stability_radius_linear(q, pert).radius};
}

}  // namespace lurerad
