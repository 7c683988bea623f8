#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bzeta/bethe.hpp"

namespace bzeta {

// Mooij-Kappen N_ij of a multinomial factor with natural parameters theta at member positions p, q.
double mooij_weight(const ExpFamily& fam, const Vec& theta, int p, int q);

struct WatanabeOptions {
  int starts = 20;
  double init_range = 2.0;
  double tol = 1e-6;
  int max_evals = 2000;
  std::uint64_t seed = 12345;
};

struct WatanabeResult {
  double value = 0;      // best correlation norm found (a lower bound of the sup)
  bool converged = false;  // at least one start met the simplex size tolerance
  int evaluations = 0;
};

// W_ij = sup_f ||Corr_b[phi_i, phi_j]||, b ~ Psi prod f_k, by multi-start Nelder-Mead on log f.
WatanabeResult watanabe_weight(const ExpFamily& fam, const Vec& theta, int p, int q,
                               const WatanabeOptions& opt = {});

// Canonical correlation norm between members p and q under the factor density theta.
double correlation_norm(const ExpFamily& fam, const Vec& theta, int p, int q);

enum class WeightKind { W, N };

struct UniquenessCertificate {
  WeightKind kind = WeightKind::W;
  EdgeWeights weights;   // scalar weights per factor and ordered member pair
  double rho = 0;        // spectral radius of M(weights)
  double tested_rho = 0; // rho times the safety factor (W only)
  bool certified = false;
  bool optimizer_ok = true;
};

// W is multiplied by 1 + 1e-3 before the spectral test.
constexpr double kWatanabeSafety = 1.001;

UniquenessCertificate uniqueness_certificate(const ModelSpec& model, WeightKind kind,
                                             const WatanabeOptions& opt = {});
void clear_weight_cache();

struct StabilityReport {
  CVec spectrum;
  double rho = 0;
  double residual = 0;
  bool locally_stable = false;       // all |lambda| < 1
  bool stable_with_damping = false;  // all Re lambda < 1
  bool local_min_certified = false;  // no eigenvalue on [1, inf)
  bool marginal = false;             // some eigenvalue within 1e-9 of the unit circle
};

StabilityReport stability_classify(const ModelSpec& model, const MessageSet& msgs);
StabilityReport stability_from_spectrum(const CVec& eig);

struct TrajectoryOptions {
  double damping = 0.25;
  double retry_damping = 0.5;
  double tol = 1e-10;
  int max_iters = 20000;
};

struct TrajectoryRow {
  double t = 0;
  double rho = 0;               // spectral radius of the undamped T'
  double min_eig = 0;           // min eigenvalue of the restricted Hessian
  double hessian_det_sign = 0;  // sign of det of the restricted Hessian
  bool converged = false;
  int iterations = 0;
  StabilityReport stability;
  Beliefs beliefs;
};

struct TrajectoryResult {
  std::vector<TrajectoryRow> rows;
  int onset_index = -1;    // first row with rho >= 1
  int hessian_index = -1;  // first row with min eig <= 0
  bool truncated = false;
  std::string diagnostic;
  bool same_interval() const { return onset_index == hessian_index; }
};

// Continuation along t_grid: each point starts LBP from the previous fixed point.
TrajectoryResult trajectory(const std::function<ModelSpec(double)>& family, const std::vector<double>& t_grid,
                            const TrajectoryOptions& opt = {});

// Scale a template: pure parameters by t; vertex parameters by t for discrete models and kept for Gaussian ones.
ModelSpec scale_template(const ModelSpec& tmpl, double t);

// Fixed-mean Gaussian torus with unit precision diagonal and coupling J (valid for J < 1/4).
ModelSpec gaussian_torus_model(int rows, int cols, double J);

std::vector<double> linear_grid(double lo, double hi, int steps);

// Worker count: BETHE_ZETA_THREADS when set, else hardware concurrency.
int sweep_threads();
// Runs fn(k) for k in [0, n) on up to sweep_threads() workers.
void parallel_for(int n, const std::function<void(int)>& fn);

struct ProtocolOptions {
  double tol = 1e-3;
  int max_iters = 30;
};

struct GridPoint {
  double K = 0, J = 0;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0;
  double rho_W = 0, rho_N = 0;
  bool certified_W = false, certified_N = false;
  bool optimizer_ok = true;
  // stability check at the refined fixed point, when the protocol converged
  bool refined = false;
  bool locally_stable = false;
  double min_eig = 0;
};

GridPoint grid_point(double K, double J, const ProtocolOptions& protocol = {}, bool check_stability = true);
std::vector<GridPoint> experiment_grid(double kmin, double kmax, double jmin, double jmax, int steps,
                                       const ProtocolOptions& protocol = {}, bool check_stability = true);

struct WnRow {
  double K = 0;
  double W = 0;
  double N = 0;
  bool optimizer_ok = true;
};
std::vector<WnRow> experiment_wn(double kmin, double kmax, int steps, double pair_coupling = 0.3);

}  // namespace bzeta
