#include "lurerad/lurerad.h"

#include <cstring>
#include <exception>
#include <optional>
#include <string>

#include "lurerad/commands.h"
#include "lurerad/matrix.h"
#include "lurerad/nn_sector.h"
#include "lurerad/problem.h"
#include "lurerad/robustness.h"

struct lurerad_matrix {
  lurerad::Mat value;
};

struct lurerad_network {
  lurerad::Ffnn value;
};

struct lurerad_problem {
  lurerad::ProblemFile value;
};

struct lurerad_report {
  lurerad::Report value;
  std::string text;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

lurerad_status SetError(lurerad_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
lurerad_status Guard(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return LURERAD_OK;
  } catch (const lurerad::Error& e) {
    return SetError(static_cast<lurerad_status>(e.code()), e.what());
  } catch (const std::exception& e) {
    return SetError(LURERAD_ERR_INTERNAL, e.what());
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw lurerad::Error(lurerad::ErrorCode::kInvalidArgument, what);
}

lurerad::NormKind ToNorm(lurerad_norm n) {
  switch (n) {
    case LURERAD_NORM_ONE: return lurerad::NormKind::kOne;
    case LURERAD_NORM_TWO: return lurerad::NormKind::kTwo;
    case LURERAD_NORM_INF: return lurerad::NormKind::kInf;
    case LURERAD_NORM_MAX_ABS: return lurerad::NormKind::kMaxAbsEntry;
  }
  throw lurerad::Error(lurerad::ErrorCode::kInvalidArgument, "unknown norm kind");
}

void FillCertificate(const lurerad::AizermanCertificate& c, lurerad_certificate* out) {
  if (!out) return;
  out->b_nonneg = c.b_nonneg;
  out->c_nonneg = c.c_nonneg;
  out->sector_ordered = c.sector_ordered;
  out->metzler_at_lower = c.metzler_at_lower;
  out->hurwitz_at_upper = c.hurwitz_at_upper;
  out->metzler_at_upper = c.metzler_at_upper;
  out->verdict = c.verdict;
  out->upper_abscissa = c.upper_abscissa;
}

lurerad::CommandOptions ToOptions(const lurerad_options* o) {
  lurerad::CommandOptions opts;
  if (!o) return opts;
  if (o->norm >= 0) opts.norm = ToNorm(static_cast<lurerad_norm>(o->norm));
  opts.override_gates = o->override_gates != 0;
  if (o->has_delta_crit) opts.delta_crit = o->delta_crit;
  if (o->network) opts.network = o->network;
  if (o->out) opts.out = o->out;
  if (o->dump_dir) opts.dump_dir = o->dump_dir;
  if (o->has_seed) opts.seed = o->seed;
  if (o->trials > 0) opts.trials = o->trials;
  if (o->dt > 0) opts.dt = o->dt;
  if (o->horizon > 0) opts.horizon = o->horizon;
  return opts;
}

lurerad_report* WrapReport(lurerad::Report r) {
  auto* out = new lurerad_report{std::move(r), {}, {}};
  out->text = out->value.ToText();
  out->json = out->value.ToJson();
  return out;
}

}  // namespace

extern "C" {

const char* lurerad_status_name(lurerad_status status) {
  if (status == LURERAD_ERR_INTERNAL) return "Internal";
  static thread_local std::string name;
  name = std::string(lurerad::ErrorCodeName(static_cast<lurerad::ErrorCode>(status)));
  return name.c_str();
}

const char* lurerad_last_error(void) { return g_last_error.c_str(); }

const char* lurerad_version(void) { return "1.0.0"; }

lurerad_status lurerad_matrix_create(size_t rows, size_t cols, const double* row_major,
                                     lurerad_matrix** out) {
  return Guard([&] {
    Require(out != nullptr, "out is null");
    Require(row_major != nullptr || rows * cols == 0, "data is null");
    std::vector<double> data(row_major, row_major + rows * cols);
    *out = new lurerad_matrix{lurerad::Mat(rows, cols, std::move(data))};
  });
}

void lurerad_matrix_destroy(lurerad_matrix* m) { delete m; }

size_t lurerad_matrix_rows(const lurerad_matrix* m) { return m ? m->value.rows() : 0; }
size_t lurerad_matrix_cols(const lurerad_matrix* m) { return m ? m->value.cols() : 0; }

lurerad_status lurerad_matrix_copy(const lurerad_matrix* m, double* buffer, size_t len) {
  return Guard([&] {
    Require(m && buffer, "null argument");
    Require(len >= m->value.size(), "buffer too small");
    std::memcpy(buffer, m->value.data().data(), m->value.size() * sizeof(double));
  });
}

lurerad_status lurerad_is_metzler(const lurerad_matrix* m, int* out) {
  return Guard([&] {
    Require(m && out, "null argument");
    *out = lurerad::is_metzler(m->value);
  });
}

lurerad_status lurerad_is_hurwitz(const lurerad_matrix* m, int* out) {
  return Guard([&] {
    Require(m && out, "null argument");
    *out = lurerad::is_hurwitz(m->value);
  });
}

lurerad_status lurerad_spectral_abscissa(const lurerad_matrix* m, double* out) {
  return Guard([&] {
    Require(m && out, "null argument");
    const auto r = lurerad::spectral_abscissa(m->value);
    *out = r.value;
    if (!r.converged) {
      throw lurerad::Error(lurerad::ErrorCode::kNoConvergence, "eigenvalues did not converge");
    }
  });
}

lurerad_status lurerad_spectral_radius(const lurerad_matrix* m, double* out) {
  return Guard([&] {
    Require(m && out, "null argument");
    *out = lurerad::spectral_radius(m->value).value;
  });
}

lurerad_status lurerad_operator_norm(const lurerad_matrix* m, lurerad_norm kind, double* out) {
  return Guard([&] {
    Require(m && out, "null argument");
    *out = lurerad::operator_norm(m->value, ToNorm(kind));
  });
}

lurerad_status lurerad_inverse(const lurerad_matrix* m, lurerad_matrix** out) {
  return Guard([&] {
    Require(m && out, "null argument");
    *out = new lurerad_matrix{lurerad::inverse(m->value)};
  });
}

lurerad_status lurerad_stability_radius_linear(const lurerad_matrix* a, const lurerad_matrix* d,
                                               const lurerad_matrix* e, lurerad_norm norm,
                                               double* radius) {
  return Guard([&] {
    Require(a && d && e && radius, "null argument");
    const lurerad::PerturbationStructure pert(d->value, e->value, ToNorm(norm));
    *radius = lurerad::stability_radius_linear(a->value, pert).radius;
  });
}

lurerad_status lurerad_stability_radius_schur(const lurerad_matrix* a, const lurerad_matrix* d,
                                              const lurerad_matrix* e, const lurerad_matrix* s,
                                              double* radius) {
  return Guard([&] {
    Require(a && d && e && radius, "null argument");
    std::optional<lurerad::Mat> scale;
    if (s) scale = s->value;
    const lurerad::PerturbationStructure pert(d->value, e->value,
                                              lurerad::NormKind::kMaxAbsEntry, scale);
    *radius = lurerad::stability_radius_schur(a->value, pert).radius;
  });
}

lurerad_status lurerad_certify_positive_lure(const lurerad_matrix* a, const lurerad_matrix* b,
                                             const lurerad_matrix* c,
                                             const lurerad_matrix* sigma1,
                                             const lurerad_matrix* sigma2,
                                             lurerad_certificate* cert) {
  return Guard([&] {
    Require(a && b && c && sigma1 && sigma2, "null argument");
    const lurerad::LtiSystem sys(a->value, b->value, c->value);
    FillCertificate(lurerad::certify_positive_lure(sys, {sigma1->value, sigma2->value}), cert);
  });
}

lurerad_status lurerad_stability_radius_lure(const lurerad_matrix* a, const lurerad_matrix* b,
                                             const lurerad_matrix* c,
                                             const lurerad_matrix* sigma1,
                                             const lurerad_matrix* sigma2,
                                             const lurerad_matrix* d, const lurerad_matrix* e,
                                             lurerad_norm norm, int override_gates,
                                             double* radius, lurerad_certificate* cert) {
  return Guard([&] {
    Require(a && b && c && sigma1 && sigma2 && d && e && radius, "null argument");
    const lurerad::LtiSystem sys(a->value, b->value, c->value);
    const lurerad::PerturbationStructure pert(d->value, e->value, ToNorm(norm));
    try {
      const auto report = lurerad::stability_radius_lure(
          sys, {sigma1->value, sigma2->value}, pert, {override_gates != 0});
      if (report.certificate) FillCertificate(*report.certificate, cert);
      *radius = report.radius;
    } catch (const lurerad::CertificationError& e) {
      FillCertificate(e.certificate(), cert);
      throw;
    }
  });
}

lurerad_status lurerad_refine_upper_sector(const lurerad_matrix* a, const lurerad_matrix* b,
                                           const lurerad_matrix* c, const lurerad_matrix* d,
                                           const lurerad_matrix* e, lurerad_norm norm,
                                           double delta_crit, double* magnitude) {
  return Guard([&] {
    Require(a && b && c && d && e && magnitude, "null argument");
    const lurerad::LtiSystem sys(a->value, b->value, c->value);
    const lurerad::PerturbationStructure pert(d->value, e->value, ToNorm(norm));
    *magnitude = lurerad::refine_upper_sector(sys, pert, delta_crit).magnitude;
  });
}

lurerad_status lurerad_network_load(const char* path, lurerad_network** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new lurerad_network{lurerad::LoadNetwork(path)};
  });
}

lurerad_status lurerad_network_parse(const char* json_text, lurerad_network** out) {
  return Guard([&] {
    Require(json_text && out, "null argument");
    *out = new lurerad_network{lurerad::ParseNetwork(json_text)};
  });
}

void lurerad_network_destroy(lurerad_network* net) { delete net; }

lurerad_status lurerad_network_eval(const lurerad_network* net, const lurerad_matrix* z,
                                    lurerad_matrix** out) {
  return Guard([&] {
    Require(net && z && out, "null argument");
    *out = new lurerad_matrix{lurerad::ffnn_eval(net->value, z->value)};
  });
}

lurerad_status lurerad_network_sector_bound(const lurerad_network* net, lurerad_matrix** gamma1,
                                            lurerad_matrix** gamma2) {
  return Guard([&] {
    Require(net && gamma1 && gamma2, "null argument");
    const auto s = lurerad::sector_bound_ffnn(net->value);
    *gamma1 = new lurerad_matrix{s.bound.lower};
    *gamma2 = new lurerad_matrix{s.bound.upper};
  });
}

lurerad_status lurerad_network_sector_violations(const lurerad_network* net,
                                                 const lurerad_matrix* gamma1,
                                                 const lurerad_matrix* gamma2, size_t samples,
                                                 double box_hi, uint64_t seed,
                                                 size_t* violations) {
  return Guard([&] {
    Require(net && gamma1 && gamma2 && violations, "null argument");
    const auto box = lurerad::InputBox::Uniform(net->value.input_dim(), 0.0, box_hi);
    *violations = lurerad::empirical_sector_check(net->value, {gamma1->value, gamma2->value},
                                                  samples, box, seed)
                      .violations.size();
  });
}

void lurerad_options_init(lurerad_options* opts) {
  if (!opts) return;
  *opts = lurerad_options{};
  opts->norm = -1;
}

lurerad_status lurerad_problem_load(const char* path, lurerad_problem** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new lurerad_problem{lurerad::LoadProblem(path)};
  });
}

void lurerad_problem_destroy(lurerad_problem* problem) { delete problem; }

lurerad_status lurerad_run(const char* command, const lurerad_problem* problem,
                           const lurerad_options* opts, lurerad_report** out) {
  return Guard([&] {
    Require(command && out, "null argument");
    *out = WrapReport(lurerad::RunCommand(command, problem ? &problem->value : nullptr,
                                          ToOptions(opts)));
  });
}

lurerad_status lurerad_run_file(const char* command, const char* problem_path,
                                const lurerad_options* opts, lurerad_report** out) {
  return Guard([&] {
    Require(command && out, "null argument");
    std::optional<std::filesystem::path> path;
    if (problem_path) path = problem_path;
    *out = WrapReport(lurerad::RunCommandFromFile(command, path, ToOptions(opts)));
  });
}

int lurerad_report_exit_code(const lurerad_report* report) {
  return report ? report->value.exit_code : 1;
}

const char* lurerad_report_text(const lurerad_report* report) {
  return report ? report->text.c_str() : "";
}

const char* lurerad_report_json(const lurerad_report* report) {
  return report ? report->json.c_str() : "";
}

void lurerad_report_destroy(lurerad_report* report) { delete report; }

}  // extern "C"
