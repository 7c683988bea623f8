#include "bzeta/diagnostics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace bzeta {

namespace {

const DiscreteFamily& as_discrete(const ExpFamily& fam, const char* what) {
  auto* d = dynamic_cast<const DiscreteFamily*>(&fam);
  if (!d) throw InputError(std::string(what) + " needs a multinomial factor family");
  return *d;
}

// largest canonical correlation of a joint table over two variables
double pair_table_correlation(const Mat& joint) {
  Vec a = joint.rowwise().sum(), b = joint.colwise().sum().transpose();
  Mat s = joint - a * b.transpose();
  for (int r = 0; r < s.rows(); ++r)
    for (int c = 0; c < s.cols(); ++c) {
      double d = std::sqrt(a(r) * b(c));
      s(r, c) = d > 0 ? s(r, c) / d : 0.0;
    }
  if (s.rows() == 2 && s.cols() == 2) return s.norm();  // rank one
  Eigen::JacobiSVD<Mat> svd(s);
  return svd.singularValues()(0);
}

}  // namespace

double mooij_weight(const ExpFamily& fam_in, const Vec& theta, int p, int q) {
  const auto& fam = as_discrete(fam_in, "mooij_weight");
  if (p == q || p < 0 || q < 0 || p >= fam.num_members() || q >= fam.num_members())
    throw InputError("mooij_weight needs two distinct member positions");
  Vec lw = fam.log_weights(theta);
  int n = fam.num_states(), m = fam.num_members();
  std::vector<int> s(m);
  double best = 0;
  for (int r1 = 0; r1 < n; ++r1)
    for (int r2 = 0; r2 < n; ++r2) {
      int xi = fam.state_of(r1, p), xj = fam.state_of(r1, q);
      int yi = fam.state_of(r2, p), yj = fam.state_of(r2, q);
      if (xi == yi || xj == yj) continue;
      // Psi(x_i', x_j, x_r)
      for (int k = 0; k < m; ++k) s[k] = fam.state_of(r1, k);
      s[p] = yi;
      int c1 = fam.row_of(s);
      // Psi(x_i, x_j', x_r')
      for (int k = 0; k < m; ++k) s[k] = fam.state_of(r2, k);
      s[p] = xi;
      int c2 = fam.row_of(s);
      best = std::max(best, lw(r1) + lw(r2) - lw(c1) - lw(c2));
    }
  return std::tanh(0.25 * best);
}

double correlation_norm(const ExpFamily& fam, const Vec& theta, int p, int q) {
  Mat c = correlation_block(fam, theta, p, q);
  Eigen::JacobiSVD<Mat> svd(c);
  return svd.singularValues()(0);
}

namespace {

struct WatanabeContext {
  Vec lw;
  std::vector<int> coord;  // per row and member: coordinate index of its log f, -1 when pinned
  std::vector<int> cell;   // per row: joint cell of (x_p, x_q)
  int members = 0;
  int rows_p = 0, cols_q = 0;
  Vec lb;
  Mat joint;
  int evals = 0;
};

double watanabe_objective(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<WatanabeContext*>(params);
  ++ctx->evals;
  int n = static_cast<int>(ctx->lw.size()), m = ctx->members;
  for (int r = 0; r < n; ++r) {
    double v = ctx->lw(r);
    for (int k = 0; k < m; ++k) {
      int c = ctx->coord[r * m + k];
      if (c >= 0) v += std::clamp(gsl_vector_get(x, c), -40.0, 40.0);
    }
    ctx->lb(r) = v;
  }
  double mx = ctx->lb.maxCoeff();
  ctx->joint.setZero();
  double z = 0;
  for (int r = 0; r < n; ++r) {
    double w = std::exp(ctx->lb(r) - mx);
    ctx->joint.data()[ctx->cell[r]] += w;
    z += w;
  }
  ctx->joint /= z;
  return -pair_table_correlation(ctx->joint);
}

}  // namespace

WatanabeResult watanabe_weight(const ExpFamily& fam_in, const Vec& theta, int p, int q, const WatanabeOptions& opt) {
  const auto& fam = as_discrete(fam_in, "watanabe_weight");
  if (p == q || p < 0 || q < 0 || p >= fam.num_members() || q >= fam.num_members())
    throw InputError("watanabe_weight needs two distinct member positions");
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });

  WatanabeContext ctx;
  ctx.lw = fam.log_weights(theta);
  ctx.members = fam.num_members();
  std::vector<int> offset;
  int d = 0;
  for (int k = 0; k < fam.num_members(); ++k) {
    offset.push_back(d);
    d += fam.alphabet(k) - 1;
  }
  ctx.rows_p = fam.alphabet(p);
  ctx.cols_q = fam.alphabet(q);
  for (int r = 0; r < fam.num_states(); ++r) {
    for (int k = 0; k < fam.num_members(); ++k) {
      int st = fam.state_of(r, k);
      ctx.coord.push_back(st > 0 ? offset[k] + st - 1 : -1);
    }
    ctx.cell.push_back(fam.state_of(r, p) + ctx.rows_p * fam.state_of(r, q));
  }
  ctx.lb.resize(fam.num_states());
  ctx.joint.resize(ctx.rows_p, ctx.cols_q);
  WatanabeResult res;
  if ((ctx.lw.array() == ctx.lw(0)).all()) {
    res.converged = true;  // constant Psi: independent under any f
    return res;
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> init(-opt.init_range, opt.init_range);
  gsl_multimin_function func{&watanabe_objective, static_cast<std::size_t>(d), &ctx};
  gsl_vector* x = gsl_vector_alloc(d);
  gsl_vector* step = gsl_vector_alloc(d);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d);
  double best = 0;
  for (int start = 0; start < opt.starts; ++start) {
    for (int k = 0; k < d; ++k) gsl_vector_set(x, k, start == 0 ? 0.0 : init(rng));
    gsl_vector_set_all(step, 0.5);
    ctx.evals = 0;
    gsl_multimin_fminimizer_set(s, &func, x, step);
    int status = GSL_CONTINUE;
    // the sup is often approached at infinity, where the simplex never shrinks; a stalled value counts too
    double mark = s->fval;
    int since = 0;
    while (status == GSL_CONTINUE && ctx.evals < opt.max_evals) {
      if (gsl_multimin_fminimizer_iterate(s)) break;
      status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.tol);
      if (++since == 100) {
        if (mark - s->fval < 1e-12) status = GSL_SUCCESS;
        mark = s->fval;
        since = 0;
      }
    }
    if (status == GSL_SUCCESS) res.converged = true;
    res.evaluations += ctx.evals;
    best = std::max(best, -s->fval);
  }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  res.value = best;
  return res;
}

namespace {

std::mutex cache_mutex;
std::map<std::string, WatanabeResult> w_cache, n_cache;

std::string weight_key(const DiscreteFamily& fam, const Vec& theta, int p, int q, const WatanabeOptions& opt) {
  std::string key;
  auto put = [&](const void* d, std::size_t n) { key.append(static_cast<const char*>(d), n); };
  int hdr[5] = {p, q, fam.num_states(), opt.starts, opt.max_evals};
  put(hdr, sizeof hdr);
  put(&opt.seed, sizeof opt.seed);
  put(&opt.tol, sizeof opt.tol);
  put(&opt.init_range, sizeof opt.init_range);
  put(theta.data(), sizeof(double) * theta.size());
  put(fam.design().data(), sizeof(double) * fam.design().size());
  return key;
}

WatanabeResult cached_weight(const ExpFamily& fam_in, const Vec& theta, int p, int q, WeightKind kind,
                             const WatanabeOptions& opt) {
  const auto& fam = as_discrete(fam_in, "uniqueness_certificate");
  auto& cache = kind == WeightKind::W ? w_cache : n_cache;
  std::string key = weight_key(fam, theta, p, q, opt);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  WatanabeResult r;
  if (kind == WeightKind::W) {
    r = watanabe_weight(fam, theta, p, q, opt);
  } else {
    r.value = mooij_weight(fam, theta, p, q);
    r.converged = true;
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, r);
  return r;
}

}  // namespace

void clear_weight_cache() {
  std::lock_guard<std::mutex> lock(cache_mutex);
  w_cache.clear();
  n_cache.clear();
}

UniquenessCertificate uniqueness_certificate(const ModelSpec& model, WeightKind kind, const WatanabeOptions& opt) {
  const auto& g = model.graph();
  if (!model.family().all_discrete()) throw InputError("uniqueness certificates need a multinomial model");
  UniquenessCertificate c;
  c.kind = kind;
  c.weights = EdgeWeights(g, std::vector<int>(g.num_vertices(), 1));
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    for (int p = 0; p < g.factor_degree(a); ++p)
      for (int q = p + 1; q < g.factor_degree(a); ++q) {
        WatanabeResult r = cached_weight(fam, model.theta_bar(a), p, q, kind, opt);
        c.optimizer_ok = c.optimizer_ok && r.converged;
        c.weights.at(a, p, q) = Mat::Constant(1, 1, r.value);
        c.weights.at(a, q, p) = Mat::Constant(1, 1, r.value);
      }
  }
  c.rho = spectral_radius(directed_edge_matrix(g, c.weights));
  c.tested_rho = kind == WeightKind::W ? kWatanabeSafety * c.rho : c.rho;
  c.certified = c.tested_rho < 1.0;
  return c;
}

StabilityReport stability_from_spectrum(const CVec& eig) {
  StabilityReport r;
  r.spectrum = eig;
  r.locally_stable = r.stable_with_damping = r.local_min_certified = true;
  for (int k = 0; k < eig.size(); ++k) {
    double mod = std::abs(eig(k));
    r.rho = std::max(r.rho, mod);
    if (mod >= 1.0) r.locally_stable = false;
    if (eig(k).real() >= 1.0) r.stable_with_damping = false;
    if (eig(k).real() >= 1.0 && std::abs(eig(k).imag()) <= 1e-9 * std::max(1.0, mod)) r.local_min_certified = false;
    if (std::abs(mod - 1.0) < 1e-9) r.marginal = true;
  }
  return r;
}

StabilityReport stability_classify(const ModelSpec& model, const MessageSet& msgs) {
  Linearization lin = linearization(model, msgs);
  StabilityReport r = stability_from_spectrum(spectrum(lin.matrix));
  r.residual = lin.residual;
  return r;
}

namespace {

bool try_run(const ModelSpec& model, const MessageSet& init, const RunOptions& ro, RunResult& out) {
  try {
    out = run(model, init, ro);
    return out.converged;
  } catch (const DomainError&) {
    return false;
  } catch (const NumericalError&) {
    return false;
  }
}

}  // namespace

TrajectoryResult trajectory(const std::function<ModelSpec(double)>& family, const std::vector<double>& t_grid,
                            const TrajectoryOptions& opt) {
  TrajectoryResult res;
  MessageSet prev;
  bool have_prev = false;
  for (double t : t_grid) {
    ModelSpec model;
    try {
      model = family(t);
    } catch (const DomainError& e) {
      res.truncated = true;
      res.diagnostic = "model invalid at t = " + std::to_string(t) + ": " + e.what();
      break;
    }
    MessageSet init = have_prev ? prev : init_messages(model, InitMode::zeros);
    RunResult rr;
    RunOptions ro{Schedule::parallel, opt.damping, opt.tol, opt.max_iters};
    if (!try_run(model, init, ro, rr)) {
      ro.damping = opt.retry_damping;
      if (!try_run(model, init, ro, rr)) {
        res.truncated = true;
        res.diagnostic = "continuation lost the fixed point at t = " + std::to_string(t) +
                         " (no convergence with damping " + std::to_string(opt.retry_damping) + ")";
        break;
      }
    }
    TrajectoryRow row;
    row.t = t;
    row.converged = true;
    row.iterations = rr.iterations;
    row.stability = stability_classify(model, rr.messages);
    row.rho = row.stability.rho;
    row.beliefs = beliefs(model, rr.messages);
    HessianReport h = restricted_hessian_at_messages(model, rr.messages);
    row.min_eig = h.min_eigenvalue();
    row.hessian_det_sign = h.determinant > 0 ? 1.0 : (h.determinant < 0 ? -1.0 : 0.0);
    res.rows.push_back(std::move(row));
    prev = rr.messages;
    have_prev = true;
  }
  for (int k = 0; k < static_cast<int>(res.rows.size()); ++k) {
    if (res.onset_index < 0 && res.rows[k].rho >= 1.0) res.onset_index = k;
    if (res.hessian_index < 0 && res.rows[k].min_eig <= 0.0) res.hessian_index = k;
  }
  return res;
}

ModelSpec scale_template(const ModelSpec& tmpl, double t) {
  const auto& g = tmpl.graph();
  std::vector<Vec> th;
  for (int a = 0; a < g.num_factors(); ++a) {
    Vec v = tmpl.theta_bar(a);
    if (tmpl.family().all_discrete())
      v *= t;
    else
      v.head(tmpl.family().factor_family(a).pure_dim()) *= t;
    th.push_back(v);
  }
  return ModelSpec(g, tmpl.family().vertex_specs(), th);
}

ModelSpec gaussian_torus_model(int rows, int cols, double J) {
  FactorGraph g = torus_graph(rows, cols);
  return fixed_mean_gaussian_model(g, Vec::Constant(g.num_factors(), J), 1.0);
}

std::vector<double> linear_grid(double lo, double hi, int steps) {
  if (steps < 1) throw InputError("grid needs at least one point");
  std::vector<double> v;
  for (int k = 0; k < steps; ++k) v.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
  return v;
}

int sweep_threads() {
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const char* env = std::getenv("BETHE_ZETA_THREADS");
  if (!env || !*env) return hw;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw InputError("BETHE_ZETA_THREADS must be a positive integer");
  return static_cast<int>(n);
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(sweep_threads(), n);
  if (workers <= 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

GridPoint grid_point(double K, double J, const ProtocolOptions& protocol, bool check_stability) {
  GridPoint gp;
  gp.K = K;
  gp.J = J;
  ModelSpec model = grid_model(3, 3, K, J);
  RunResult rr;
  try {
    rr = run(model, init_messages(model, InitMode::zeros), {Schedule::parallel, 0.0, protocol.tol, protocol.max_iters});
    gp.converged = rr.converged;
    gp.iterations = rr.iterations;
    gp.final_residual = rr.residuals.empty() ? 0.0 : rr.residuals.back();
  } catch (const DomainError&) {
    gp.converged = false;
  }
  UniquenessCertificate w = uniqueness_certificate(model, WeightKind::W);
  UniquenessCertificate n = uniqueness_certificate(model, WeightKind::N);
  gp.rho_W = w.rho;
  gp.rho_N = n.rho;
  gp.certified_W = w.certified;
  gp.certified_N = n.certified;
  gp.optimizer_ok = w.optimizer_ok;

  if (check_stability && gp.converged) {
    RunResult fine;
    if (try_run(model, rr.messages, {Schedule::parallel, 0.0, 1e-10, 5000}, fine) ||
        try_run(model, rr.messages, {Schedule::parallel, 0.5, 1e-10, 5000}, fine)) {
      gp.refined = true;
      gp.locally_stable = stability_classify(model, fine.messages).locally_stable;
      gp.min_eig = restricted_hessian_at_messages(model, fine.messages).min_eigenvalue();
    }
  }
  return gp;
}

std::vector<GridPoint> experiment_grid(double kmin, double kmax, double jmin, double jmax, int steps,
                                       const ProtocolOptions& protocol, bool check_stability) {
  if (steps < 2) throw InputError("grid experiment needs steps >= 2");
  auto ks = linear_grid(kmin, kmax, steps), js = linear_grid(jmin, jmax, steps);
  std::vector<GridPoint> out(ks.size() * js.size());
  parallel_for(static_cast<int>(out.size()), [&](int idx) {
    out[idx] = grid_point(ks[idx / js.size()], js[idx % js.size()], protocol, check_stability);
  });
  return out;
}

std::vector<WnRow> experiment_wn(double kmin, double kmax, int steps, double pair_coupling) {
  auto ks = linear_grid(kmin, kmax, steps);
  std::vector<WnRow> out(ks.size());
  parallel_for(static_cast<int>(ks.size()), [&](int idx) {
    ModelSpec m = triple_factor_model(ks[idx], pair_coupling);
    const auto& fam = m.family().factor_family(0);
    WatanabeResult w = watanabe_weight(fam, m.theta_bar(0), 0, 1);
    out[idx] = {ks[idx], w.value, mooij_weight(fam, m.theta_bar(0), 0, 1), w.converged};
  });
  return out;
}

}  // namespace bzeta
