#include "psgdlab/bounds.hpp"
#include "psgdlab/cli/commands.hpp"
#include "psgdlab/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace psgdlab;
using namespace psgdlab::cli;

namespace {

double number(const Table& t, std::size_t row, const std::string& col) {
  return std::get<double>(t.at(row, col));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 4.9e-324, 1.7976931348623157e308}) {
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS(parse_double("1,5"));
  CHECK_THROWS(parse_double("1.5x"));
  CHECK_THROWS(parse_double(""));
}

TEST_CASE("config parse and serialize") {
  const std::string text =
      "# experiment\n"
      "loss = counterexample\n"
      "n = 25, 100 ,400\n"
      "d = 20\n"
      "schedule = inverse_t:2:0.5\n"
      "eps_grid = 0.1,0.001\n"
      "search_rate = 0.02\n"
      "seed = 18446744073709551615\n";
  const ExperimentConfig c = ExperimentConfig::parse(text);
  CHECK(c.loss == "counterexample");
  CHECK(c.n == std::vector<std::size_t>{25, 100, 400});
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.search_rate == 0.02);
  CHECK(ExperimentConfig::parse(c.serialize()) == c);
  CHECK(ExperimentConfig::parse(ExperimentConfig{}.serialize()) == ExperimentConfig{});

  CHECK_THROWS_AS(ExperimentConfig::parse("loss = one_sided\nloss = counterexample\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("learning_rate = 1\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("n = 0\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("n = -3\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("trials = 1\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("schedule = fast\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("format = xml\n"), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::parse("just words\n"), UsageError);
}

TEST_CASE("schedule cap defaults to 1/L") {
  ExperimentConfig c;
  c.schedule = "constant:5";
  CHECK(make_schedule(c, 2.0)(0) == 0.5);
  c.schedule = "constant:5:4";
  CHECK_THROWS_AS(make_schedule(c, 2.0), UsageError);
}

TEST_CASE("dataset and trajectory serialization") {
  RngStream rng(1);
  const Dataset S = sample_dataset(noisy_halfspace_sampler(Vector{1, 0, 0}, 0.2), 10, rng);
  std::stringstream buf;
  write_dataset_csv(S, buf);
  CHECK(read_dataset_csv(buf) == S);
  const Dataset Z = sample_rademacher_dataset(7, 4, rng);
  std::stringstream zbuf;
  write_dataset_csv(Z, zbuf);
  CHECK(read_dataset_csv(zbuf) == Z);

  const Trajectory tr = run_psgd(LossModel::one_sided_quadratic(1.0, 1.0), S, ConvexSet::ball(3, 1.0),
                                 Vector(3), StepSchedule::inverse_sqrt(1.0),
                                 NoiseModel::isotropic_gaussian(0.2), 50, rng);
  const Trajectory back = trajectory_from_json(trajectory_json(tr));
  CHECK(back.final_iterate == tr.final_iterate);
  CHECK(back.average == tr.average);
  CHECK(back.sum_alpha == tr.sum_alpha);
  CHECK(back.steps == tr.steps);
}

TEST_CASE("table rendering") {
  Table t({"a", "b", "c"});
  t.new_row();
  t.set("a", std::string("x,y"));
  t.set("b", 0.1);
  t.new_row();
  t.set("c", std::numeric_limits<double>::infinity());
  CHECK(t.to_csv() == "a,b,c\n\"x,y\",0.10000000000000001,\n,,inf\n");
  CHECK(t.to_json().find("\"c\": \"inf\"") != std::string::npos);
  CHECK_THROWS(t.set("d", 1.0));
}

TEST_CASE("run command") {
  ExperimentConfig c;
  c.n = {50};
  c.d = {3};
  c.T = {10, 100};
  c.trials = 8;
  const CommandResult r = cmd_run(c);
  CHECK(r.exit_code == 0);
  REQUIRE(r.table.rows().size() == 2);
  // noiseless descent: the final-iterate training loss cannot increase
  CHECK(number(r.table, 1, "train_loss") <= number(r.table, 0, "train_loss"));

  const double stab = number(r.table, 1, "stability_bound");
  const LossModel model = make_model(c, 3);
  CHECK(stab == stability_bound(50, make_schedule(c, 1.0), 100, *model.gradient_bound()).value);
  CHECK(number(r.table, 1, "opt_error_bound") == opt_error_bound(100, make_schedule(c, 1.0), 2.0, 0.0).value);

  CHECK(cmd_run(c).table.to_csv() == r.table.to_csv());
}

TEST_CASE("output is written atomically and reproducibly") {
  const auto dir = std::filesystem::temp_directory_path() / "psgdlab_cli_test";
  std::filesystem::create_directories(dir);
  ExperimentConfig c;
  c.n = {30};
  c.d = {2};
  c.T = {20};
  c.trials = 4;
  c.format = "json";
  c.out = (dir / "run.json").string();
  std::stringstream unused;
  emit(cmd_run(c), c, unused);
  const std::string first = slurp(c.out);
  emit(cmd_run(c), c, unused);
  CHECK(slurp(c.out) == first);
  CHECK(unused.str().empty());
  CHECK_FALSE(std::filesystem::exists(c.out + ".tmp"));

  ExperimentConfig bad = c;
  bad.out = (dir / "never.csv").string();
  bad.schedule = "constant:2:2";
  CHECK_THROWS_AS(emit(dispatch("run", bad), bad, unused), UsageError);
  CHECK_FALSE(std::filesystem::exists(bad.out));
  std::filesystem::remove_all(dir);
}

TEST_CASE("scaling command") {
  ExperimentConfig c;
  c.loss = "counterexample";
  c.n = {25, 100};
  c.d = {5};
  c.T = {10};
  c.trials = 4;
  CHECK_THROWS_AS(cmd_scaling(c), UsageError);
  c.n = {25};
  CHECK_THROWS_AS(cmd_scaling(c), UsageError);

  c.n = {25, 100, 400};
  c.search_starts = 64;
  c.search_steps = 50;
  const CommandResult r = cmd_scaling(c);
  std::size_t slopes = 0;
  for (std::size_t i = 0; i < r.table.rows().size(); ++i) {
    if (std::get<std::string>(r.table.at(i, "kind")) == "slope") {
      ++slopes;
      CHECK(std::get<std::int64_t>(r.table.at(i, "points")) == 3);
    }
  }
  CHECK(slopes == 2);
  CHECK(fit_scaling_slope({1, 4, 16}, {2, 1, 0.5}) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::isnan(fit_scaling_slope({1, 2, 3}, {1, 0, 1})));
}

TEST_CASE("counterexample command") {
  ExperimentConfig c;
  c.loss = "counterexample";
  c.n = {5};
  c.d = {50, 200};
  c.trials = 20;
  c.eps_grid = {0.1, 0.01};
  c.limit_steps = 20000;
  c.fallback_steps = 2000;
  const CommandResult r = cmd_counterexample(c);
  CHECK(number(r.table, 0, "p_event_I") == event_I_probability(5, 50));
  CHECK(number(r.table, 1, "p_event_I") == event_I_probability(5, 200));
  CHECK(std::get<std::string>(r.table.at(2, "kind")) == "limit");
  c.loss = "one_sided";
  CHECK_THROWS_AS(cmd_counterexample(c), UsageError);
}

TEST_CASE("verify command and fault injection") {
  ExperimentConfig c;
  const CommandResult ok = cmd_verify(c);
  CHECK(ok.exit_code == exit_ok);
  c.inject_fault = "projection_scale";
  const CommandResult broken = cmd_verify(c);
  CHECK(broken.exit_code == exit_verification);
  bool nonexpansive_failed = false;
  for (std::size_t i = 0; i < broken.table.rows().size(); ++i) {
    const auto& name = std::get<std::string>(broken.table.at(i, "check"));
    if (name.rfind("projection_nonexpansive", 0) == 0 && !std::get<bool>(broken.table.at(i, "pass"))) {
      nonexpansive_failed = true;
    }
  }
  CHECK(nonexpansive_failed);
}

TEST_CASE("bounds command and dispatch") {
  ExperimentConfig c;
  c.loss = "strongly_convex";
  c.T = {10, 100};
  const CommandResult r = cmd_bounds(c);
  CHECK(r.table.rows().size() == 2 * 3 + 2);
  CHECK_THROWS_AS(dispatch("train", c), UsageError);
}
