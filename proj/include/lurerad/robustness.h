#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lurerad/error.h"
#include "lurerad/matrix.h"

namespace lurerad {

/// Linear part x' = A x + B u, y = C x.
class LtiSystem {
 public:
  LtiSystem(Mat a, Mat b, Mat c);

  const Mat& A() const { return a_; }
  const Mat& B() const { return b_; }
  const Mat& C() const { return c_; }
  std::size_t states() const { return a_.rows(); }
  std::size_t inputs() const { return b_.cols(); }
  std::size_t outputs() const { return c_.rows(); }

 private:
  Mat a_, b_, c_;
};

/// Elementwise sector [lower, upper] for an m x p nonlinearity.
struct SectorBound {
  Mat lower{1, 1};
  Mat upper{1, 1};

  bool ordered() const { return elementwise_leq(lower, upper); }
};

/// Structured perturbation A + D Delta E. When a Schur scale S is attached the
/// admissible set is {S (.) Delta} measured in the max-abs-entry norm.
class PerturbationStructure {
 public:
  PerturbationStructure(Mat d, Mat e, NormKind norm = NormKind::kTwo,
                        std::optional<Mat> schur_scale = std::nullopt);

  const Mat& D() const { return d_; }
  const Mat& E() const { return e_; }
  NormKind norm() const { return norm_; }
  const std::optional<Mat>& schur_scale() const { return schur_; }
  std::size_t in_dim() const { return d_.cols(); }    // k1
  std::size_t out_dim() const { return e_.rows(); }   // k2
  bool is_scalar() const { return in_dim() == 1 && out_dim() == 1; }

  PerturbationStructure with_norm(NormKind norm) const;

  /// Unit-norm default direction: the k1 x k2 identity, truncated.
  Mat default_direction() const;

 private:
  Mat d_, e_;
  NormKind norm_;
  std::optional<Mat> schur_;
};

struct AizermanCertificate {
  bool b_nonneg = false;
  bool c_nonneg = false;
  bool sector_ordered = false;
  bool metzler_at_lower = false;
  bool hurwitz_at_upper = false;
  // Informational: not one of the five gates.
  bool metzler_at_upper = false;
  double upper_abscissa = 0.0;
  Mat lower_closed_loop{1, 1};
  Mat upper_closed_loop{1, 1};
  std::optional<Mat> positive_vector;
  bool verdict = false;

  std::vector<std::string> failed_gates() const;
};

enum class RadiusFormula { kLinearNorm, kSchurSpectral, kLureUpperSector, kNnUpperSector };

std::string_view RadiusFormulaName(RadiusFormula f);

struct RadiusReport {
  double radius = 0.0;
  NormKind norm = NormKind::kTwo;
  Mat closed_loop{1, 1};
  RadiusFormula formula = RadiusFormula::kLinearNorm;
  std::optional<AizermanCertificate> certificate;
  // Linear-case gates, filled when certificate is absent.
  bool a_metzler = false;
  bool a_hurwitz = false;
  std::vector<std::string> warnings;
};

/// Thrown by stability_radius_lure when a hypothesis fails and gates are not
/// overridden; carries the full gate breakdown.
class CertificationError : public Error {
 public:
  explicit CertificationError(AizermanCertificate cert);
  const AizermanCertificate& certificate() const { return cert_; }

 private:
  AizermanCertificate cert_;
};

struct LureOptions {
  bool override_gates = false;
};

Mat closed_loop_matrix(const LtiSystem& sys, const Mat& gain);

AizermanCertificate certify_positive_lure(const LtiSystem& sys,
                                          const SectorBound& sector);

RadiusReport stability_radius_linear(const Mat& a, const PerturbationStructure& pert);
RadiusReport stability_radius_schur(const Mat& a, const PerturbationStructure& pert);

RadiusReport stability_radius_lure(const LtiSystem& sys, const SectorBound& sector,
                                   const PerturbationStructure& pert,
                                   LureOptions options = {});

/// Network loop radius; nn_sector must be symmetric (lower = -upper).
RadiusReport nn_stability_radius(const LtiSystem& sys, const SectorBound& nn_sector,
                                 const PerturbationStructure& pert,
                                 LureOptions options = {});

struct RefinedSector {
  double magnitude = 0.0;
  Mat perturbed{1, 1};  // A + delta_crit D dir E
  // +magnitude, -magnitude as 1x1 matrices; only for single-input or
  // single-output loops.
  std::optional<std::pair<Mat, Mat>> candidates;
};

/// |Gamma2,refined| = 1 / || C (A + delta_crit D dir E)^{-1} B ||.
RefinedSector refine_upper_sector(const LtiSystem& sys, const PerturbationStructure& pert,
                                  double delta_crit,
                                  std::optional<Mat> direction = std::nullopt);

struct MonotonicityGap {
  double r_p = 0.0;
  double r_q = 0.0;
};

MonotonicityGap monotonicity_gap(const Mat& p, const Mat& q,
                                 const PerturbationStructure& pert);

}  // namespace lurerad
