#include "nlfd/nlfd.h"

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlfd/barenblatt.hpp"
#include "nlfd/error.hpp"
#include "nlfd/operator.hpp"
#include "nlfd/parallel.hpp"
#include "nlfd/scenario.hpp"
#include "nlfd/solver.hpp"
#include "nlfd/suite.hpp"

using nlohmann::json;

struct nlfd_grid {
  nlfd::Grid grid;
};
struct nlfd_field {
  nlfd::Field field;
};
struct nlfd_kernel {
  nlfd::KernelSpec kernel;
};
struct nlfd_nonlinearity {
  nlfd::NonlinearitySpec phi;
};
struct nlfd_operator {
  nlfd::DiscreteOperator op;
};
struct nlfd_trajectory {
  nlfd::Trajectory trajectory;
  std::vector<nlfd_field> fields;
};
struct nlfd_scenario {
  json doc;
};
struct nlfd_report {
  nlfd::DiagnosticsReport report;
  std::vector<std::string> names;
  std::vector<std::string> messages;
  std::string json_text;
};

namespace {

thread_local std::string last_error;

nlfd_status status_of(nlfd::ErrorCode code) { return static_cast<nlfd_status>(code); }

template <class F>
nlfd_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return NLFD_OK;
  } catch (const nlfd::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    last_error = e.what();
    return NLFD_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NLFD_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown exception";
    return NLFD_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw nlfd::Error(nlfd::ErrorCode::invalid_argument, message);
}

nlfd::Point point(const double* p, int dim) { return {p[0], dim > 1 ? p[1] : 0.0}; }

}  // namespace

extern "C" {

const char* nlfd_version(void) { return "1.0.0"; }

const char* nlfd_last_error(void) { return last_error.c_str(); }

const char* nlfd_status_string(nlfd_status status) {
  if (status == NLFD_OK) return "ok";
  if (status == NLFD_INTERNAL_ERROR) return "internal_error";
  return nlfd::to_string(static_cast<nlfd::ErrorCode>(status));
}

void nlfd_set_threads(int threads) { nlfd::set_thread_count(threads); }

nlfd_status nlfd_grid_create(int dim, double half_width, int points, nlfd_boundary mode,
                             nlfd_grid** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    const auto m = mode == NLFD_PERIODIC ? nlfd::BoundaryMode::periodic
                                         : nlfd::BoundaryMode::exterior_zero;
    *out = new nlfd_grid{nlfd::make_grid(dim, half_width, points, m)};
  });
}

void nlfd_grid_free(nlfd_grid* grid) { delete grid; }
size_t nlfd_grid_size(const nlfd_grid* grid) { return grid ? grid->grid.size() : 0; }
double nlfd_grid_spacing(const nlfd_grid* grid) { return grid ? grid->grid.spacing() : 0.0; }

nlfd_status nlfd_field_create(const nlfd_grid* grid, const double* values, nlfd_field** out) {
  return guarded([&] {
    require(grid != nullptr && out != nullptr, "null handle");
    nlfd::Field f(grid->grid);
    if (values != nullptr) f.values.assign(values, values + f.size());
    *out = new nlfd_field{std::move(f)};
  });
}

void nlfd_field_free(nlfd_field* field) { delete field; }
size_t nlfd_field_size(const nlfd_field* field) { return field ? field->field.size() : 0; }
const double* nlfd_field_data(const nlfd_field* field) {
  return field ? field->field.values.data() : nullptr;
}
double nlfd_field_integral(const nlfd_field* field) {
  return field ? nlfd::integrate(field->field) : 0.0;
}

nlfd_status nlfd_field_write_csv(const nlfd_field* field, const char* path) {
  return guarded([&] {
    require(field != nullptr && path != nullptr, "null argument");
    nlfd::write_field_csv(field->field, path);
  });
}

nlfd_status nlfd_kernel_create(const char* family, int dim, double sigma, double epsilon,
                               const char* modulation, nlfd_kernel** out) {
  return guarded([&] {
    require(family != nullptr && out != nullptr, "null argument");
    const auto fam = nlfd::kernel_family_from_string(family);
    using nlfd::KernelSpec;
    std::optional<KernelSpec> k;
    switch (fam) {
      case nlfd::KernelFamily::fractional_power:
        k = KernelSpec::fractional_power(dim, sigma);
        break;
      case nlfd::KernelFamily::convolution_modulated:
        k = KernelSpec::convolution_modulated(
            dim, sigma, epsilon,
            modulation ? nlfd::modulation_from_string(modulation) : nlfd::Modulation::cosine_decay);
        break;
      case nlfd::KernelFamily::midpoint_general:
        k = KernelSpec::midpoint_general(dim, sigma, epsilon);
        break;
    }
    *out = new nlfd_kernel{*k};
  });
}

void nlfd_kernel_free(nlfd_kernel* kernel) { delete kernel; }

nlfd_status nlfd_kernel_eval(const nlfd_kernel* kernel, const double* x, const double* y,
                             double* out) {
  return guarded([&] {
    require(kernel && x && y && out, "null argument");
    const int d = kernel->kernel.dim();
    *out = kernel->kernel.eval(point(x, d), point(y, d));
  });
}

nlfd_status nlfd_nonlinearity_create(const char* family, double m, double epsilon, double A,
                                     nlfd_nonlinearity** out) {
  return guarded([&] {
    require(family != nullptr && out != nullptr, "null argument");
    const std::optional<double> a = A > 0.0 ? std::optional<double>(A) : std::nullopt;
    const auto fam = nlfd::nonlinearity_family_from_string(family);
    *out = new nlfd_nonlinearity{fam == nlfd::NonlinearityFamily::pure_power
                                     ? nlfd::NonlinearitySpec::pure_power(m, a)
                                     : nlfd::NonlinearitySpec::perturbed_power(m, epsilon, a)};
  });
}

void nlfd_nonlinearity_free(nlfd_nonlinearity* phi) { delete phi; }

nlfd_status nlfd_nonlinearity_phi(const nlfd_nonlinearity* phi, double s, double* out) {
  return guarded([&] {
    require(phi && out, "null argument");
    *out = phi->phi.phi(s);
  });
}

nlfd_status nlfd_operator_assemble(const nlfd_grid* grid, const nlfd_kernel* kernel,
                                   uint64_t seed, nlfd_operator** out) {
  return guarded([&] {
    require(grid && kernel && out, "null argument");
    nlfd::AssemblyOptions options;
    options.validation_seed = seed;
    *out = new nlfd_operator{
        nlfd::DiscreteOperator::assemble_quadrature(grid->grid, kernel->kernel, options)};
  });
}

void nlfd_operator_free(nlfd_operator* op) { delete op; }

nlfd_status nlfd_operator_apply(const nlfd_operator* op, const double* f, double* out) {
  return guarded([&] {
    require(op && f && out, "null argument");
    const std::size_t n = op->op.grid().size();
    op->op.apply(std::span<const double>(f, n), std::span<double>(out, n));
  });
}

nlfd_status nlfd_operator_energy(const nlfd_operator* op, const double* f, const double* g,
                                 double* out) {
  return guarded([&] {
    require(op && f && g && out, "null argument");
    const std::size_t n = op->op.grid().size();
    *out = nlfd::energy(op->op, std::span<const double>(f, n), std::span<const double>(g, n));
  });
}

void nlfd_solver_options_default(nlfd_solver_options* options) {
  if (options == nullptr) return;
  const nlfd::SolverConfig d;
  *options = {d.dt_initial, d.dt_max, d.dt_relative_max, d.t_end,
              d.newton_tol, d.extinction_floor, nullptr, 0};
}

nlfd_status nlfd_solve(const nlfd_operator* op, const nlfd_nonlinearity* phi,
                       const nlfd_field* u0, const nlfd_solver_options* options,
                       nlfd_trajectory** out) {
  return guarded([&] {
    require(op && phi && u0 && options && out, "null argument");
    require(options->snapshot_count == 0 || options->snapshot_times != nullptr,
            "snapshot_times is null");
    nlfd::SolverConfig c;
    c.dt_initial = options->dt_initial;
    c.dt_max = options->dt_max;
    c.dt_relative_max = options->dt_relative_max;
    c.t_end = options->t_end;
    c.newton_tol = options->newton_tol;
    c.extinction_floor = options->extinction_floor;
    c.snapshot_times.assign(options->snapshot_times,
                            options->snapshot_times + options->snapshot_count);
    auto t = std::make_unique<nlfd_trajectory>(
        nlfd_trajectory{nlfd::run(op->op, phi->phi, u0->field, c), {}});
    for (const auto& s : t->trajectory.snapshots) t->fields.push_back({s.field});
    *out = t.release();
  });
}

void nlfd_trajectory_free(nlfd_trajectory* trajectory) { delete trajectory; }

size_t nlfd_trajectory_snapshot_count(const nlfd_trajectory* t) {
  return t ? t->trajectory.snapshots.size() : 0;
}

double nlfd_trajectory_snapshot_time(const nlfd_trajectory* t, size_t index) {
  if (!t || index >= t->trajectory.snapshots.size()) return -1.0;
  return t->trajectory.snapshots[index].time;
}

const nlfd_field* nlfd_trajectory_snapshot(const nlfd_trajectory* t, size_t index) {
  if (!t || index >= t->fields.size()) return nullptr;
  return &t->fields[index];
}

double nlfd_trajectory_leaked_mass(const nlfd_trajectory* t) {
  return t ? t->trajectory.leaked_mass : 0.0;
}

double nlfd_trajectory_extinction_time(const nlfd_trajectory* t) {
  return t ? t->trajectory.extinction_time() : -1.0;
}

int nlfd_trajectory_partial(const nlfd_trajectory* t) { return t && t->trajectory.partial; }

nlfd_status nlfd_barenblatt(double M, double m, double sigma, int N, double half_width,
                            int points, const char* csv_path, double* mass_out) {
  return guarded([&] {
    require(csv_path != nullptr, "null path");
    const nlfd::SelfSimilarParams params = nlfd::make_self_similar_params(N, m, sigma, M);
    const nlfd::Grid grid = nlfd::make_grid(N, half_width, points);
    const nlfd::ProfileResult result = nlfd::compute_profile(params, grid);
    nlfd::write_profile_csv(result.profile, csv_path);
    if (mass_out) *mass_out = result.total_mass;
  });
}

nlfd_status nlfd_scenario_load(const char* path, nlfd_scenario** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new nlfd_scenario{nlfd::load_config_document(path)};
  });
}

nlfd_status nlfd_scenario_from_json(const char* json_text, nlfd_scenario** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    json doc;
    try {
      doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
      throw nlfd::ConfigError({std::string("malformed configuration: ") + e.what()});
    }
    if (!doc.is_object()) throw nlfd::ConfigError({"configuration is not an object"});
    *out = new nlfd_scenario{std::move(doc)};
  });
}

void nlfd_scenario_free(nlfd_scenario* scenario) { delete scenario; }

nlfd_status nlfd_scenario_set(nlfd_scenario* scenario, const char* assignment) {
  return guarded([&] {
    require(scenario && assignment, "null argument");
    nlfd::apply_override(scenario->doc, assignment);
  });
}

nlfd_status nlfd_scenario_set_output(nlfd_scenario* scenario, const char* output_dir) {
  return guarded([&] {
    require(scenario && output_dir, "null argument");
    scenario->doc["output_dir"] = output_dir;
  });
}

nlfd_status nlfd_scenario_set_seed(nlfd_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require(scenario != nullptr, "null argument");
    scenario->doc["seed"] = seed;
  });
}

nlfd_status nlfd_scenario_validate(const nlfd_scenario* scenario) {
  return guarded([&] {
    require(scenario != nullptr, "null argument");
    (void)nlfd::config_from_json(scenario->doc);
  });
}

nlfd_status nlfd_scenario_run(const nlfd_scenario* scenario, nlfd_report** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const nlfd::ScenarioConfig config = nlfd::config_from_json(scenario->doc);
    const nlfd::ScenarioOutcome outcome = nlfd::run_scenario(config);
    nlfd::write_artifacts(config, outcome);
    auto r = std::make_unique<nlfd_report>();
    r->report = outcome.report;
    for (const auto& rec : r->report.records()) {
      r->names.push_back(rec.name);
      r->messages.push_back(rec.message);
    }
    r->json_text = nlfd::to_json(r->report).dump(2);
    *out = r.release();
  });
}

void nlfd_report_free(nlfd_report* report) { delete report; }

size_t nlfd_report_count(const nlfd_report* report) { return report ? report->names.size() : 0; }

int nlfd_report_all_passed(const nlfd_report* report) {
  return report && report->report.all_passed();
}

nlfd_status nlfd_report_record(const nlfd_report* report, size_t index, const char** name,
                               nlfd_check_status* status, const char** message) {
  return guarded([&] {
    require(report != nullptr, "null argument");
    require(index < report->names.size(), "record index out of range");
    const auto& rec = report->report.records()[index];
    if (name) *name = report->names[index].c_str();
    if (message) *message = report->messages[index].c_str();
    if (status) {
      *status = rec.status == nlfd::CheckStatus::pass   ? NLFD_CHECK_PASS
                : rec.status == nlfd::CheckStatus::fail ? NLFD_CHECK_FAIL
                                                        : NLFD_CHECK_NOT_APPLICABLE;
    }
  });
}

const char* nlfd_report_json(const nlfd_report* report) {
  return report ? report->json_text.c_str() : "";
}

nlfd_status nlfd_suite_run(const char* name, uint64_t seed, const char* output_dir,
                           nlfd_suite_callback callback, void* user, int* all_passed) {
  return guarded([&] {
    require(name != nullptr, "null suite name");
    nlfd::SuiteOptions options;
    options.seed = seed;
    if (output_dir) options.output_dir = output_dir;
    if (callback) {
      options.on_result = [&](const nlfd::CriterionResult& r) {
        callback(r.id, r.name.c_str(), r.passed ? 1 : 0, r.summary.c_str(), r.seconds, user);
      };
    }
    const auto results = nlfd::run_suite(name, options);
    bool ok = true;
    for (const auto& r : results) ok = ok && r.passed;
    if (all_passed) *all_passed = ok ? 1 : 0;
  });
}

}  // extern "C"
