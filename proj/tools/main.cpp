#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "bzeta/model_io.hpp"
#include "commands.hpp"

using namespace bzeta;

namespace {

void add_run_flags(CLI::App* c, cli::Flags& f) {
  c->add_option("--schedule", f.schedule, "parallel or sequential")->check(CLI::IsMember({"parallel", "sequential"}));
  c->add_option("--damping", f.damping, "damping in [0, 1)");
  c->add_option("--tol", f.tol, "convergence threshold on the max message change");
  c->add_option("--max-iters", f.max_iters, "iteration cap");
  c->add_option("--init", f.init, "zeros or random")->check(CLI::IsMember({"zeros", "random"}));
  c->add_option("--seed", f.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bethe free energy, graph zeta and loopy belief propagation tools"};
  app.require_subcommand(1);
  cli::Flags flags;
  std::string model_path, out_path, which;
  double u = 0.5, kmin = -1, kmax = 1, jmin = -1, jmax = 1, tmax = 0.5, traj_damping = 0.25;
  int steps = 41, wn_steps = 41, traj_steps = 100;
  double wkmin = -2, wkmax = 2;

  auto* run = app.add_subcommand("lbp-run", "run loopy belief propagation and report beliefs");
  run->add_option("model", model_path, "model file")->required();
  add_run_flags(run, flags);

  auto* ver = app.add_subcommand("verify", "check an identity at random samples");
  ver->add_option("model", model_path, "model file")->required();
  ver->add_option("which", which, "bethe-zeta, ihara-bass, linearization or stationarity")
      ->required()
      ->check(CLI::IsMember({"bethe-zeta", "ihara-bass", "linearization", "stationarity"}));
  ver->add_option("--samples", flags.samples, "number of samples");
  add_run_flags(ver, flags);

  auto* grid = app.add_subcommand("experiment-grid", "3x3 torus (K, J) sweep with W and N certificates");
  grid->add_option("--kmin", kmin);
  grid->add_option("--kmax", kmax);
  grid->add_option("--jmin", jmin);
  grid->add_option("--jmax", jmax);
  grid->add_option("--steps", steps, "points per axis");
  grid->add_option("--tol", flags.tol, "protocol threshold (default 1e-3)");
  grid->add_option("--max-iters", flags.max_iters, "protocol iterations (default 30)");

  auto* wn = app.add_subcommand("experiment-wn", "W and N for exp(K x1x2x3 + 0.3 sum x_i x_j)");
  wn->add_option("--kmin", wkmin);
  wn->add_option("--kmax", wkmax);
  wn->add_option("--steps", wn_steps, "number of K values");

  auto* zi = app.add_subcommand("zeta-info", "prime cycles, zeta values, poles and Hashimoto check");
  zi->add_option("model", model_path, "model file")->required();
  zi->add_option("--u", u, "scalar edge weight");
  zi->add_option("--max-cycle-len", flags.max_cycle_len, "longest prime cycle enumerated");

  auto* tr = app.add_subcommand("experiment-trajectory", "continuation of fixed points along t * template");
  tr->add_option("model", model_path, "template model file")->required();
  tr->add_option("--tmax", tmax);
  tr->add_option("--steps", traj_steps, "grid intervals on [0, tmax]");
  tr->add_option("--damping", traj_damping, "continuation damping");

  for (auto* c : {run, ver, grid, wn, zi, tr}) c->add_option("--out", out_path, "write output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  try {
    cli::Output out;
    if (*run) out = cli::lbp_run(load_model(model_path), flags);
    if (*ver) out = cli::verify(load_model(model_path), which, flags);
    if (*grid) out = cli::experiment_grid(kmin, kmax, jmin, jmax, steps, flags);
    if (*wn) out = cli::experiment_wn(wkmin, wkmax, wn_steps, flags);
    if (*zi) out = cli::zeta_info(load_model(model_path), u, flags);
    if (*tr) out = cli::experiment_trajectory(load_model(model_path), tmax, traj_steps, traj_damping, flags);
    if (out_path.empty()) {
      std::cout << out.text;
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw InputError("cannot write " + out_path);
      f << out.text;
    }
    if (!out.message.empty()) std::cerr << out.message << "\n";
    return out.exit_code;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return cli::kInputError;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::kNumericalError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cli::kNumericalError;
  }
}
