#include <sstream>
#include <string>

#include "bzeta/model_io.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bzeta;
using nlohmann::json;

namespace {

std::string data(const std::string& name) { return std::string(BZETA_TEST_DATA) + "/" + name; }

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("csv numbers carry 17 significant digits") {
  CHECK(cli::csv_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(cli::csv_number(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("lbp-run report") {
  cli::Flags f;
  f.tol = 1e-12;
  f.max_iters = 1000;
  auto out = cli::lbp_run(load_model(data("c3_binary.json")), f);
  CHECK(out.exit_code == cli::kOk);
  auto doc = json::parse(out.text);
  CHECK(doc["converged"].get<bool>());
  CHECK(doc["stationarity_residual"].get<double>() < 1e-8);
  CHECK(doc["beliefs"]["vertices"]["a"].contains("a"));
  CHECK(doc["beliefs"]["factors"].size() == 3);
  CHECK(doc["stability"]["locally_stable"].get<bool>());
  CHECK(doc["stability"]["restricted_hessian_min_eigenvalue"].get<double>() > 0);

  cli::Flags few;
  few.max_iters = 1;
  auto early = cli::lbp_run(load_model(data("k4_binary.json")), few);
  auto d2 = json::parse(early.text);
  CHECK_FALSE(d2["converged"].get<bool>());
  CHECK(d2["stability"].is_null());

  cli::Flags bad;
  bad.schedule = "random";
  CHECK_THROWS_AS(cli::lbp_run(load_model(data("c3_binary.json")), bad), InputError);
}

TEST_CASE("lbp-run on gaussian models uses the fallback start") {
  auto doc = json::parse(cli::lbp_run(load_model(data("gaussian_c3.json")), {}).text);
  CHECK(doc["fallback_init"].get<bool>());
}

TEST_CASE("verify subcommands pass on valid models") {
  cli::Flags f;
  f.samples = 5;
  for (const char* which : {"bethe-zeta", "ihara-bass", "linearization", "stationarity"})
    for (const char* m : {"c3_binary.json", "hypergraph_binary.json", "gaussian_c3.json"}) {
      auto out = cli::verify(load_model(data(m)), which, f);
      CAPTURE(which);
      CAPTURE(m);
      CHECK(out.exit_code == cli::kOk);
      CHECK(count_lines(out.text) == 6);
    }
  CHECK_THROWS_AS(cli::verify(load_model(data("c3_binary.json")), "nonsense", f), InputError);
}

TEST_CASE("verify output is deterministic under a seed") {
  cli::Flags f;
  f.samples = 4;
  f.seed = 77;
  auto m = load_model(data("k4_binary.json"));
  CHECK(cli::verify(m, "bethe-zeta", f).text == cli::verify(m, "bethe-zeta", f).text);
}

TEST_CASE("zeta-info") {
  cli::Flags f;
  auto out = cli::zeta_info(load_model(data("c3_binary.json")), 0.5, f);
  auto doc = json::parse(out.text);
  CHECK(out.exit_code == cli::kOk);
  CHECK(doc["prime_cycles"]["by_length"]["3"] == 2);
  CHECK(doc["zeta"]["determinant_formula"].get<double>() == doctest::Approx(1.306122).epsilon(1e-6));
  CHECK(doc["zeta"]["classical"].get<double>() == doctest::Approx(1.306122).epsilon(1e-6));
  CHECK(doc["nullity"] == 1);
  auto pole = cli::zeta_info(load_model(data("c3_binary.json")), 1.0, f);
  CHECK(pole.exit_code == cli::kNumericalError);
  auto tree = json::parse(cli::zeta_info(load_model(data("tree_multinomial.json")), 0.5, f).text);
  CHECK(tree["hashimoto"].is_null());
  CHECK(tree["zeta"]["inverse_determinant"].get<double>() == 1.0);
}

TEST_CASE("experiment commands") {
  cli::Flags f;
  auto grid = cli::experiment_grid(-0.2, 0.2, 0.0, 0.2, 2, f);
  CHECK(count_lines(grid.text) == 5);
  CHECK(grid.text.rfind("K,J,converged,rho_W,rho_N,certified_W,certified_N\n", 0) == 0);
  auto wn = cli::experiment_wn(1.5, 2.0, 2, f);
  CHECK(count_lines(wn.text) == 3);
  auto tr = cli::experiment_trajectory(load_model(data("torus_ising_template.json")), 0.4, 8, 0.25, f);
  CHECK(tr.exit_code == cli::kOk);
  CHECK(count_lines(tr.text) == 10);
  CHECK(tr.message.find("instability onset (0.3") != std::string::npos);
  CHECK(tr.message.find("hessian sign change (0.3") != std::string::npos);
  CHECK_THROWS_AS(cli::experiment_trajectory(load_model(data("hypergraph_binary.json")), 0.4, 8, 0.25, f), InputError);
  CHECK_THROWS_AS(cli::experiment_grid(0, 1, 0, 1, 1, f), InputError);
}

}
