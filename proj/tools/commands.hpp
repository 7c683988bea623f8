#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bzeta/diagnostics.hpp"

namespace bzeta::cli {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kInputError = 2, kNumericalError = 3 };

struct Flags {
  std::string schedule = "parallel";
  double damping = 0.0;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::string init;  // empty: zeros for lbp-run, random for verify
  std::uint64_t seed = 0;
  int samples = 50;
  int max_cycle_len = 12;
};

struct Output {
  int exit_code = kOk;
  std::string text;     // document or CSV
  std::string message;  // human summary for stderr
};

std::string csv_number(double v);

Output lbp_run(const ModelSpec& model, const Flags& flags);
// which: bethe-zeta, ihara-bass, linearization, stationarity
Output verify(const ModelSpec& model, const std::string& which, const Flags& flags);
Output experiment_grid(double kmin, double kmax, double jmin, double jmax, int steps, const Flags& flags);
Output experiment_wn(double kmin, double kmax, int steps, const Flags& flags);
Output zeta_info(const ModelSpec& model, double u, const Flags& flags);
Output experiment_trajectory(const ModelSpec& tmpl, double tmax, int steps, double damping, const Flags& flags);

// tolerances used by verify
double verify_tolerance(const std::string& which);

}  // namespace bzeta::cli
