#include "srkcd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

using namespace srkcd;

namespace {

std::string strip_comment_lines(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      continue;
    }
    out << line << "\n";
  }
  return out.str();
}

size_t argmin_row(const SweepResult& r) {
  size_t best = 0;
  for (size_t i = 1; i < r.rows.size(); ++i) {
    if (r.rows[i].mean_final_loss < r.rows[best].mean_final_loss) {
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("sweep rejects bad configurations") {
  SweepConfig cfg;
  cfg.problem = {ProblemKind::quadratic, 50, 4, 1};
  cfg.repeats = 0;
  CHECK_THROWS_AS(cmd_sweep(cfg), std::invalid_argument);
  cfg.repeats = 1;
  cfg.explicit_grid = {0.2, 0.1};  // not increasing
  CHECK_THROWS_AS(cmd_sweep(cfg), std::invalid_argument);
}

TEST_CASE("sweep output is deterministic byte for byte") {
  SweepConfig cfg;
  cfg.method = {Method::srkcd_recursion, 3, 0.01};
  cfg.problem = {ProblemKind::quadratic, 100, 6, 7};
  cfg.batch_size = 16;
  cfg.grid_count = 5;
  cfg.grid_lo = 0.1;
  cfg.grid_hi = 0.8;
  cfg.epochs = 2;
  cfg.repeats = 3;
  cfg.threads = 2;
  const std::string a = sweep_csv(cmd_sweep(cfg));
  const std::string b = sweep_csv(cmd_sweep(cfg));
  CHECK(strip_comment_lines(a) == strip_comment_lines(b));
  // Scheduling independence: a different worker count gives the same bytes.
  cfg.threads = 1;
  const std::string c = sweep_csv(cmd_sweep(cfg));
  CHECK(strip_comment_lines(a) == strip_comment_lines(c));
}

TEST_CASE("sweep csv has the documented schema header") {
  SweepConfig cfg;
  cfg.method = {Method::sgd, 1, 0.0};
  cfg.problem = {ProblemKind::quadratic, 60, 4, 3};
  cfg.batch_size = 60;
  cfg.grid_count = 3;
  cfg.grid_lo = 0.2;
  cfg.grid_hi = 0.6;
  cfg.iterations = 5;
  cfg.repeats = 2;
  const SweepResult res = cmd_sweep(cfg);
  const std::string csv = sweep_csv(res);
  CHECK(csv.find("alpha,mean_final_loss,n_diverged,rep_0,rep_1\n") != std::string::npos);
  const nlohmann::json meta = sweep_metadata(res);
  CHECK(meta.contains("lambda_min"));
  CHECK(meta.contains("lambda_max"));
  CHECK(meta.contains("stability_limit"));
  CHECK(meta["version"] == kVersion);
}

TEST_CASE("short gradient-descent sweep dips near the balanced step size") {
  // Full-batch descent for a few iterations: the best grid step sits in the
  // valley just below 2/(lambda_min + lambda_max), and the boundary point is
  // far worse.
  SweepConfig cfg;
  cfg.method = {Method::sgd, 1, 0.0};
  cfg.problem = {ProblemKind::quadratic, 1000, 50, 1};
  cfg.batch_size = 1000;
  cfg.grid_count = 20;
  cfg.grid_lo = 0.05;
  cfg.grid_hi = 1.0;
  cfg.iterations = 15;
  cfg.repeats = 1;
  const SweepResult res = cmd_sweep(cfg);
  const double balanced = 2.0 / (res.lambda_min + res.lambda_max);
  const size_t best = argmin_row(res);
  const double best_alpha = res.rows[best].alpha;
  CHECK(best_alpha > 0.75 * balanced);
  CHECK(best_alpha < 1.05 * balanced);
  CHECK(res.rows.back().mean_final_loss > 10.0 * res.rows[best].mean_final_loss);
}

TEST_CASE("deterministic sweep has a divergent tail beyond the stability limit") {
  SweepConfig cfg;
  cfg.method = {Method::sgd, 1, 0.0};
  cfg.problem = {ProblemKind::quadratic, 1000, 50, 1};
  cfg.batch_size = 1000;
  cfg.grid_count = 12;
  cfg.grid_lo = 0.5;
  cfg.grid_hi = 1.25;
  cfg.iterations = 1500;
  cfg.repeats = 1;
  const SweepResult res = cmd_sweep(cfg);
  // Find the first diverged row; every later row must also diverge.
  size_t first = res.rows.size();
  for (size_t i = 0; i < res.rows.size(); ++i) {
    if (res.rows[i].n_diverged == cfg.repeats) {
      first = i;
      break;
    }
  }
  REQUIRE(first < res.rows.size());
  CHECK(res.rows[first].alpha > res.stability_limit);
  for (size_t i = first; i < res.rows.size(); ++i) {
    REQUIRE(res.rows[i].n_diverged == cfg.repeats);
    REQUIRE(res.rows[i].mean_final_loss == cfg.divergence_threshold);
  }
  // And everything strictly inside the stability interval stays finite.
  for (size_t i = 0; i < res.rows.size(); ++i) {
    if (res.rows[i].alpha < 0.99 * res.stability_limit) {
      REQUIRE(res.rows[i].n_diverged == 0);
    }
  }
}

TEST_CASE("longer stable runs reach lower loss") {
  SweepConfig base;
  base.method = {Method::sgd, 1, 0.0};
  base.problem = {ProblemKind::quadratic, 300, 20, 2};
  base.batch_size = 300;
  base.explicit_grid = {0.15};  // well inside the stable region (L ~ 4.9)
  base.repeats = 1;
  double losses[3];
  long iteration_counts[3] = {50, 100, 200};
  for (int i = 0; i < 3; ++i) {
    base.iterations = iteration_counts[i];
    losses[i] = cmd_sweep(base).rows[0].mean_final_loss;
  }
  CHECK(losses[1] < losses[0]);
  CHECK(losses[2] < losses[1]);
}

TEST_CASE("sweep writes csv and json files") {
  const std::string base =
      (std::filesystem::temp_directory_path() / "srkcd_sweep_out").string();
  SweepConfig cfg;
  cfg.method = {Method::srkcd_recursion, 2, 0.01};
  cfg.problem = {ProblemKind::quadratic, 50, 4, 1};
  cfg.batch_size = 16;
  cfg.grid_count = 3;
  cfg.grid_lo = 0.1;
  cfg.grid_hi = 0.5;
  cfg.iterations = 10;
  cfg.repeats = 2;
  cfg.out_path = base;
  cmd_sweep(cfg);
  CHECK(std::filesystem::exists(base + ".csv"));
  CHECK(std::filesystem::exists(base + ".json"));
  std::ifstream json_in(base + ".json");
  nlohmann::json meta;
  json_in >> meta;
  CHECK(meta["config"]["repeats"] == 2);
  std::filesystem::remove(base + ".csv");
  std::filesystem::remove(base + ".json");
}

TEST_CASE("converge with a zero step size keeps the error constant") {
  ConvergeConfig cfg;
  cfg.method = {Method::srkcd_recursion, 3, 0.01};
  cfg.problem = {ProblemKind::quadratic, 80, 5, 4};
  cfg.schedule = StepSchedule::constant(0.0);
  cfg.iterations = 50;
  cfg.repeats = 2;
  const ConvergeReport rep = cmd_converge(cfg);
  for (double v : rep.mean_series) {
    REQUIRE(v == rep.mean_series.front());
  }
}

TEST_CASE("converge flags an inadmissible schedule but still runs") {
  ConvergeConfig cfg;
  cfg.method = {Method::srkcd_recursion, 2, 0.01};
  cfg.problem = {ProblemKind::quadratic, 80, 5, 4};
  // beta far below 1/(c*mu): the guarantee does not apply.
  cfg.schedule = StepSchedule::harmonic(0.01, 1.0);
  cfg.iterations = 30;
  cfg.repeats = 1;
  const ConvergeReport rep = cmd_converge(cfg);
  CHECK_FALSE(rep.schedule_ok);
  CHECK(!rep.warnings.empty());
  CHECK(rep.ks.back() == 30);
}

TEST_CASE("converge q-check accepts a small admissible first step") {
  ConvergeConfig cfg;
  cfg.method = {Method::srkcd_recursion, 5, 0.01};
  cfg.problem = {ProblemKind::quadratic, 100, 8, 4};
  const QuadraticProblem p = generate_quadratic(100, 8, 4);
  const double beta = 2.0 / p.lambda_min();
  const double alpha_q = q_admissible_step(
      tableau_from_rkc(rkc_coefficients(5, 0.01)), p.lambda_max(), 1.0, 1.0);
  const double gamma = std::ceil(beta / alpha_q);
  cfg.schedule = StepSchedule::harmonic(beta, gamma);
  cfg.iterations = 200;
  cfg.repeats = 2;
  const ConvergeReport rep = cmd_converge(cfg);
  CHECK(rep.schedule_ok);
  CHECK(rep.q_check_ok);
  CHECK(rep.q_at_alpha1 < -0.5 * rep.alpha1);
}

TEST_CASE("coeffs report") {
  SUBCASE("one stage") {
    const nlohmann::json j = cmd_coeffs(1, 0.0);
    CHECK(j["a"] == nlohmann::json::array({nlohmann::json::array({1.0})}));
    CHECK(j["b_R"] == doctest::Approx(2.0));
    CHECK(j["report"]["pass"] == true);
  }
  SUBCASE("two stages") {
    const nlohmann::json j = cmd_coeffs(2, 0.0);
    CHECK(j["b_R"] == doctest::Approx(8.0));
    CHECK(j["report"]["weights_sum_ok"] == true);
    CHECK(j["report"]["row_abs_sums_ok"] == true);
  }
  SUBCASE("five stages with damping") {
    const nlohmann::json j = cmd_coeffs(5, 0.01);
    CHECK(std::abs(j["report"]["weights_sum"].get<double>() - 1.0) <= 1e-10);
    CHECK(j.contains("s"));
    CHECK(j.contains("epsilon"));
    CHECK(j.contains("a"));
    CHECK(j.contains("b"));
    CHECK(j.contains("b_R"));
    CHECK(j.contains("report"));
    CHECK(j["max_step_bound"]["value"] == doctest::Approx(0.08));
  }
  SUBCASE("invalid stage count") {
    CHECK_THROWS_AS(cmd_coeffs(0, 0.0), std::invalid_argument);
  }
}
