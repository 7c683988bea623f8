#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

namespace bzeta::cli {

using nlohmann::json;

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

RunOptions run_options(const Flags& f, double tol, int iters) {
  RunOptions o;
  if (f.schedule == "parallel")
    o.schedule = Schedule::parallel;
  else if (f.schedule == "sequential")
    o.schedule = Schedule::sequential;
  else
    throw InputError("--schedule must be parallel or sequential");
  o.damping = f.damping;
  o.tol = f.tol.value_or(tol);
  o.max_iters = f.max_iters.value_or(iters);
  if (o.max_iters < 1) throw InputError("--max-iters must be positive");
  return o;
}

MessageSet make_init(const ModelSpec& model, const std::string& mode, std::uint64_t seed) {
  if (mode == "zeros") return init_messages(model, InitMode::zeros);
  if (mode != "random") throw InputError("--init must be zeros or random");
  double scale = 1.0;
  for (int k = 0; k < 12; ++k, scale *= 0.5) {
    MessageSet m = init_messages(model, InitMode::random, seed, scale);
    if (messages_valid(model, m)) return m;
  }
  // gaussian models can reject every random draw; start from the zero initialization instead
  return init_messages(model, InitMode::zeros);
}

json stat_map(const ExpFamily& fam, const Vec& eta) {
  json o = json::object();
  for (int k = 0; k < fam.dim(); ++k) o[fam.statistic_names()[k]] = eta(k);
  return o;
}

json complex_list(const CVec& v) {
  json a = json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(json{{"re", v(k).real()}, {"im", v(k).imag()}});
  return a;
}

json stability_json(const StabilityReport& s) {
  return json{{"spectral_radius", s.rho},
              {"locally_stable", s.locally_stable},
              {"stable_with_damping", s.stable_with_damping},
              {"local_min_certified", s.local_min_certified},
              {"marginal", s.marginal},
              {"spectrum", complex_list(s.spectrum)}};
}

EdgeWeights random_weights(const ModelSpec& model, std::mt19937_64& rng) {
  const auto& g = model.graph();
  std::vector<int> dims;
  for (int i = 0; i < g.num_vertices(); ++i) dims.push_back(model.family().vertex_dim(i));
  EdgeWeights w(g, dims);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int a = 0; a < g.num_factors(); ++a)
    for (int p = 0; p < g.factor_degree(a); ++p)
      for (int q = 0; q < g.factor_degree(a); ++q) {
        if (p == q) continue;
        Mat& m = w.at(a, p, q);
        for (int r = 0; r < m.rows(); ++r)
          for (int c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
      }
  return w;
}

double rel_gap(double a, double b) {
  double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

}  // namespace

double verify_tolerance(const std::string& which) {
  if (which == "bethe-zeta") return 1e-8;
  if (which == "ihara-bass") return 1e-9;
  if (which == "linearization") return 1e-5;
  if (which == "stationarity") return 1e-8;
  throw InputError("verify target must be bethe-zeta, ihara-bass, linearization or stationarity");
}

Output lbp_run(const ModelSpec& model, const Flags& flags) {
  const auto& g = model.graph();
  RunOptions opt = run_options(flags, 1e-3, 30);
  RunResult r = run(model, make_init(model, flags.init.empty() ? "zeros" : flags.init, flags.seed), opt);
  Beliefs b = beliefs(model, r.messages);
  json doc;
  doc["converged"] = r.converged;
  doc["iterations"] = r.iterations;
  doc["final_change"] = r.residuals.empty() ? 0.0 : r.residuals.back();
  doc["fixed_point_residual"] = fixed_point_residual(model, r.messages);
  doc["fallback_init"] = r.messages.fallback_init;
  doc["stationarity_residual"] = stationarity_residual(model, b.point(model));
  doc["consistency"] = b.consistency;
  json verts = json::object();
  for (int i = 0; i < g.num_vertices(); ++i) verts[g.vertex_label(i)] = stat_map(model.family().vertex_family(i), b.vertex[i]);
  json facs = json::array();
  for (int a = 0; a < g.num_factors(); ++a) {
    json mem = json::array();
    for (int i : g.members(a)) mem.push_back(g.vertex_label(i));
    facs.push_back(json{{"id", "f" + std::to_string(a + 1)},
                        {"members", mem},
                        {"expectation", stat_map(model.family().factor_family(a), b.factor[a])}});
  }
  doc["beliefs"] = json{{"vertices", verts}, {"factors", facs}};
  if (doc["fixed_point_residual"].get<double>() < 1e-6) {
    json st = stability_json(stability_classify(model, r.messages));
    st["restricted_hessian_min_eigenvalue"] = restricted_hessian_at_messages(model, r.messages).min_eigenvalue();
    doc["stability"] = st;
  } else {
    doc["stability"] = nullptr;
  }
  Output out;
  out.text = doc.dump(2) + "\n";
  out.message = std::string(r.converged ? "converged" : "not converged") + " after " + std::to_string(r.iterations) +
                " iterations";
  return out;
}

Output verify(const ModelSpec& model, const std::string& which, const Flags& flags) {
  double tol = verify_tolerance(which);
  if (flags.samples < 1) throw InputError("--samples must be positive");
  std::mt19937_64 rng(flags.seed);
  std::ostringstream csv;
  csv << "sample,residual\n";
  double worst = 0;
  int used = 0, skipped = 0;
  for (int k = 0; k < flags.samples; ++k) {
    double res = std::numeric_limits<double>::quiet_NaN();
    if (which == "bethe-zeta") {
      res = bethe_zeta(model, random_point(model, rng)).residual;
    } else if (which == "ihara-bass") {
      EdgeWeights w = random_weights(model, rng);
      double det = zeta_inverse(model.graph(), w);
      res = rel_gap(det, ihara_bass_factorization(model.graph(), w).product);
      if (model.graph().is_pairwise()) res = std::max(res, rel_gap(det, ihara_bass_graph(model.graph(), w)));
    } else {
      RunOptions opt = run_options(flags, 1e-12, 10000);
      RunResult r;
      try {
        r = run(model, make_init(model, flags.init.empty() ? "random" : flags.init, flags.seed + k), opt);
      } catch (const DomainError&) {
        r.converged = false;
      }
      if (r.converged) {
        try {
          if (which == "linearization") {
            Linearization lin = linearization(model, r.messages);
            Mat fd = finite_difference_jacobian(model, r.messages);
            res = lin.matrix.size() ? (lin.matrix.matrix - fd).cwiseAbs().maxCoeff() : 0.0;
          } else {
            res = stationarity_residual(model, beliefs(model, r.messages).point(model));
          }
        } catch (const DomainError&) {
          // a loose --tol can stop far from a fixed point, where beliefs are not locally consistent
          res = std::numeric_limits<double>::infinity();
        }
      }
    }
    if (std::isnan(res)) {
      ++skipped;
      csv << k << ",nan\n";
      continue;
    }
    ++used;
    worst = std::max(worst, res);
    csv << k << "," << csv_number(res) << "\n";
  }
  Output out;
  out.text = csv.str();
  if (used == 0) {
    out.exit_code = kNumericalError;
    out.message = which + ": no sample reached a fixed point";
    return out;
  }
  out.exit_code = worst < tol ? kOk : kVerifyFailed;
  out.message = which + ": max residual " + csv_number(worst) + " over " + std::to_string(used) + " samples (tolerance " +
                csv_number(tol) + ")" + (skipped ? ", " + std::to_string(skipped) + " skipped without convergence" : "") +
                (out.exit_code == kOk ? " PASS" : " FAIL");
  return out;
}

Output experiment_grid(double kmin, double kmax, double jmin, double jmax, int steps, const Flags& flags) {
  if (steps < 2) throw InputError("--steps must be at least 2");
  ProtocolOptions p;
  p.tol = flags.tol.value_or(1e-3);
  p.max_iters = flags.max_iters.value_or(30);
  auto pts = bzeta::experiment_grid(kmin, kmax, jmin, jmax, steps, p, false);
  std::ostringstream csv;
  csv << "K,J,converged,rho_W,rho_N,certified_W,certified_N\n";
  int w_only = 0, n_bad = 0;
  for (const auto& g : pts) {
    csv << csv_number(g.K) << "," << csv_number(g.J) << "," << g.converged << "," << csv_number(g.rho_W) << ","
        << csv_number(g.rho_N) << "," << g.certified_W << "," << g.certified_N << "\n";
    if (g.certified_W && !g.converged) ++w_only;
    if (g.certified_N && !g.converged) ++n_bad;
  }
  Output out;
  out.text = csv.str();
  out.message = std::to_string(pts.size()) + " points; W-certified but not converged: " + std::to_string(w_only) +
                "; N-certified but not converged: " + std::to_string(n_bad);
  return out;
}

Output experiment_wn(double kmin, double kmax, int steps, const Flags&) {
  if (steps < 2) throw InputError("--steps must be at least 2");
  std::ostringstream csv;
  csv << "K,W,N,optimizer_converged\n";
  int failed = 0;
  for (const auto& r : bzeta::experiment_wn(kmin, kmax, steps)) {
    csv << csv_number(r.K) << "," << csv_number(r.W) << "," << csv_number(r.N) << "," << r.optimizer_ok << "\n";
    failed += !r.optimizer_ok;
  }
  Output out;
  out.text = csv.str();
  out.message = failed ? std::to_string(failed) + " rows without optimizer convergence (W is a lower bound there)"
                       : "all rows converged";
  return out;
}

Output zeta_info(const ModelSpec& model, double u, const Flags& flags) {
  const auto& g = model.graph();
  if (flags.max_cycle_len < 1) throw InputError("--max-cycle-len must be positive");
  EdgeWeights w = EdgeWeights::uniform(g, u);
  json doc;
  doc["u"] = u;
  doc["num_vertices"] = g.num_vertices();
  doc["num_factors"] = g.num_factors();
  doc["num_directed_edges"] = g.num_edges();
  doc["nullity"] = nullity(g);
  doc["euler_number"] = euler_number(g);

  auto cycles = prime_cycles(g, flags.max_cycle_len);
  std::map<int, int> by_len;
  for (const auto& c : cycles) ++by_len[static_cast<int>(c.size())];
  json bl = json::object();
  for (auto [len, n] : by_len) bl[std::to_string(len)] = n;
  doc["prime_cycles"] = json{{"max_len", flags.max_cycle_len}, {"total", cycles.size()}, {"by_length", bl}};

  BlockEdgeMatrix m = unweighted_edge_matrix(g);
  CVec eig = spectrum(m);
  bool pole = false;
  std::vector<std::complex<double>> poles;
  for (int k = 0; k < eig.size(); ++k) {
    if (std::abs(eig(k)) < 1e-12) continue;
    poles.push_back(1.0 / eig(k));
    if (std::abs(1.0 - u * eig(k)) < 1e-10) pole = true;
  }
  std::sort(poles.begin(), poles.end(), [](auto a, auto b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  CVec pv(poles.size());
  for (std::size_t k = 0; k < poles.size(); ++k) pv(k) = poles[k];
  doc["poles"] = complex_list(pv);
  doc["pole_at_u"] = pole;
  doc["spectral_radius"] = eig.size() ? eig.cwiseAbs().maxCoeff() : 0.0;
  PfBounds pf = pf_bounds(g);
  doc["pf_bounds"] = json::array({pf.k_min, pf.k_max});

  double det = zeta_inverse(g, w);
  EulerProduct ep = zeta_euler_truncated(g, w, flags.max_cycle_len);
  // the factorized forms divide by per-factor determinants that can vanish even off the poles
  auto guarded = [&](auto&& f) -> json {
    if (pole) return nullptr;
    try {
      double v = f();
      return v == 0.0 ? json(nullptr) : json(1.0 / v);
    } catch (const NumericalError&) {
      return nullptr;
    }
  };
  json z;
  z["inverse_determinant"] = det;
  z["determinant_formula"] = pole ? json(nullptr) : json(1.0 / det);
  z["euler_product"] = ep.value;
  z["euler_tail_bound"] = std::isfinite(ep.tail_bound) ? json(ep.tail_bound) : json("unbounded");
  z["ihara_bass"] = guarded([&] { return ihara_bass_factorization(g, w).product; });
  if (g.is_pairwise()) {
    z["ihara_bass_graph"] = guarded([&] { return ihara_bass_graph(g, w); });
    z["classical"] = guarded([&] { return classical_ihara_bass(g, u); });
  }
  doc["zeta"] = z;

  if (connected_components(g).count == 1 && nullity(g) >= 1) {
    HashimotoReport h = hashimoto_limit(g);
    json hj{{"u", h.u}, {"numeric", h.numeric}, {"predicted", h.predicted}, {"kappa_bipartite", h.kappa_bipartite}};
    if (h.graph_form) {
      hj["graph_numeric"] = h.graph_numeric;
      hj["graph_predicted"] = h.graph_predicted;
      hj["kappa_graph"] = h.kappa_graph;
    }
    doc["hashimoto"] = hj;
  } else {
    doc["hashimoto"] = nullptr;
  }
  Output out;
  out.text = doc.dump(2) + "\n";
  if (pole) {
    out.exit_code = kNumericalError;
    out.message = "u = " + csv_number(u) + " is a pole of the zeta function";
  } else {
    out.message = "zeta(u) = " + csv_number(1.0 / det);
  }
  return out;
}

Output experiment_trajectory(const ModelSpec& tmpl, double tmax, int steps, double damping, const Flags&) {
  const auto& g = tmpl.graph();
  if (!g.is_pairwise()) throw InputError("trajectory template must be pairwise");
  if (steps < 1 || !(tmax > 0)) throw InputError("trajectory needs tmax > 0 and steps >= 1");
  if (tmpl.family().all_binary()) {
    for (int a = 0; a < g.num_factors(); ++a)
      if (tmpl.theta_bar(a)(0) < 0) throw InputError("trajectory template must be attractive (all J >= 0)");
  } else if (!tmpl.family().all_fixed_mean()) {
    throw InputError("trajectory template must be binary pairwise or fixed-mean gaussian");
  }
  std::vector<double> ts;
  for (int k = 0; k <= steps; ++k) ts.push_back(tmax * k / steps);
  TrajectoryOptions opt;
  opt.damping = damping;
  TrajectoryResult tr = trajectory([&](double t) { return scale_template(tmpl, t); }, ts, opt);
  std::ostringstream csv;
  csv << "t,rho_Tprime,min_eig_restricted_hessian,stable,onset_instability,onset_hessian\n";
  for (int k = 0; k < static_cast<int>(tr.rows.size()); ++k) {
    const auto& r = tr.rows[k];
    csv << csv_number(r.t) << "," << csv_number(r.rho) << "," << csv_number(r.min_eig) << "," << r.stability.locally_stable
        << "," << (k == tr.onset_index) << "," << (k == tr.hessian_index) << "\n";
  }
  Output out;
  out.text = csv.str();
  auto interval = [&](int k) {
    if (k < 0) return std::string("none");
    if (k == 0) return "at t = " + csv_number(tr.rows[0].t);
    return "(" + csv_number(tr.rows[k - 1].t) + ", " + csv_number(tr.rows[k].t) + "]";
  };
  out.message = "instability onset " + interval(tr.onset_index) + "; hessian sign change " + interval(tr.hessian_index);
  if (tr.truncated) {
    out.exit_code = kNumericalError;
    out.message += "; truncated: " + tr.diagnostic;
  }
  return out;
}

}  // namespace bzeta::cli
