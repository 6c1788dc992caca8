#include "psgdlab/cli/commands.hpp"

#include "psgdlab/bounds.hpp"
#include "psgdlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace psgdlab::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

GenErrorExperiment make_experiment(const ExperimentConfig& config, std::size_t d, std::size_t n) {
  const LossModel model = make_model(config, d);
  return GenErrorExperiment{model,
                            ConvexSet::ball(d, config.radius),
                            make_sampler(config, d),
                            n,
                            make_schedule(config, model.smoothness()),
                            make_noise(config),
                            Vector(d)};
}

// Noise level for the bounds: sigma for Gaussian noise, 2B for minibatch noise.
std::optional<double> bound_sigma(const ExperimentConfig& config, const LossModel& model) {
  if (config.noise == "gaussian") return config.sigma;
  if (config.noise == "minibatch") {
    if (auto B = model.gradient_bound()) return 2.0 * *B;
    return std::nullopt;
  }
  return 0.0;
}

Cell maybe(std::optional<double> x) { return x ? Cell{*x} : Cell{}; }

std::string terms_text(const BoundReport& r) {
  std::string out;
  for (const auto& [k, v] : r.terms) {
    if (!out.empty()) out += ';';
    out += k + "=" + format_double(v);
  }
  return out;
}

struct CellBounds {
  std::optional<double> opt_error, stability, strongly_convex, main_theorem, plateau;
};

CellBounds bounds_for(const ExperimentConfig& config, const LossModel& model,
                      const StepSchedule& schedule, std::size_t d, std::size_t n, std::size_t T,
                      double sigma_star) {
  CellBounds b;
  const double w0_dist = 2.0 * config.radius;
  if (const auto B = model.gradient_bound()) {
    b.stability = stability_bound(n, schedule, T, *B).value;
    if (model.family() == LossFamily::quadratic_strongly_convex) {
      b.strongly_convex = strongly_convex_bound(n, *B, model.mu()).value;
    }
  }
  if (const auto sigma = bound_sigma(config, model)) {
    b.opt_error = opt_error_bound(T, schedule, w0_dist, *sigma).value;
    MainTheoremInputs in;
    in.T = T;
    in.schedule = schedule;
    in.w0_dist = w0_dist;
    in.sigma = *sigma;
    in.sigma_star = sigma_star;
    in.L = model.smoothness();
    in.R = config.radius;
    in.d = d;
    in.n = n;
    in.C = config.constant_C;
    const BoundReport r = main_theorem_bound(in);
    b.main_theorem = r.value;
    b.plateau = r.terms.at("plateau");
  }
  return b;
}

void require_swept_axis(const char* name, std::size_t count) {
  if (count == 2) {
    throw UsageError(std::string("scaling: axis ") + name + " needs at least 3 grid points, got 2");
  }
}

}  // namespace

double fit_scaling_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return nan;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return nan;
  }
  return loglog_slope(x, y);
}

double sigma_star_for(const ExperimentConfig& config, std::size_t d, const RngStream& rng) {
  const LossModel model = make_model(config, d);
  if (model.data_kind() == DataKind::sign_vector) return 0.0;
  const Sampler sampler = make_sampler(config, d);
  RngStream data_rng = rng.split(0);
  const Dataset big = sample_dataset(sampler, 10000, data_rng);
  const EmpiricalObjective objective(model, big);
  const ConvexSet set = ConvexSet::ball(d, config.radius);
  const Vector w_star = minimize_empirical(objective, set, Vector(d), 5000, 1e-12).minimizer;
  RngStream sample_rng = rng.split(1);
  return estimate_sigma_star(model, w_star, sampler, 10000, sample_rng).upper;
}

CommandResult cmd_run(const ExperimentConfig& config) {
  Table table({"d", "n", "T", "loss", "schedule", "noise", "trials", "seed", "gen_error",
               "gen_error_se", "train_loss", "train_loss_se", "train_loss_avg",
               "train_loss_avg_se", "opt_error_bound", "stability_bound",
               "strongly_convex_bound", "main_theorem_bound", "plateau", "sigma_star"});
  const RngStream master(config.seed);
  const auto Ts = sorted_unique(config.T);
  std::size_t cell = 0;
  for (std::size_t d : config.d) {
    const double sigma_star = sigma_star_for(config, d, master.split(1u << 20).split(d));
    for (std::size_t n : config.n) {
      const GenErrorExperiment exp = make_experiment(config, d, n);
      const auto points = estimate_gen_error_curve(exp, Ts, config.trials, master.split(cell++));
      for (const auto& p : points) {
        const CellBounds b = bounds_for(config, exp.model, exp.schedule, d, n, p.T, sigma_star);
        table.new_row();
        table.set("d", count_cell(d));
        table.set("n", count_cell(n));
        table.set("T", count_cell(p.T));
        table.set("loss", config.loss);
        table.set("schedule", exp.schedule.to_string());
        table.set("noise", config.noise);
        table.set("trials", count_cell(config.trials));
        table.set("seed", count_cell(config.seed));
        table.set("gen_error", p.gen_error.mean);
        table.set("gen_error_se", p.gen_error.std_error);
        table.set("train_loss", p.train_loss_final.mean);
        table.set("train_loss_se", p.train_loss_final.std_error);
        table.set("train_loss_avg", p.train_loss.mean);
        table.set("train_loss_avg_se", p.train_loss.std_error);
        table.set("opt_error_bound", maybe(b.opt_error));
        table.set("stability_bound", maybe(b.stability));
        table.set("strongly_convex_bound", maybe(b.strongly_convex));
        table.set("main_theorem_bound", maybe(b.main_theorem));
        table.set("plateau", maybe(b.plateau));
        table.set("sigma_star", sigma_star);
      }
    }
  }
  return {std::move(table), exit_ok};
}

CommandResult cmd_scaling(const ExperimentConfig& config) {
  const auto ns = sorted_unique(config.n);
  const auto ds = sorted_unique(config.d);
  const auto Ts = sorted_unique(config.T);
  require_swept_axis("n", ns.size());
  require_swept_axis("d", ds.size());
  require_swept_axis("T", Ts.size());
  if (ns.size() < 3 && ds.size() < 3 && Ts.size() < 3) {
    throw UsageError("scaling: no swept axis; give 3 or more values for n, d or T");
  }

  Table table({"kind", "d", "n", "T", "gen_error", "gen_error_se", "delta_mean", "delta_mean_se",
               "stability_bound", "main_theorem_bound", "quantity", "slope", "points", "seed"});
  const RngStream master(config.seed);
  const SupSearchConfig search = make_search(config);

  // gen[d][n][T], delta[d][n]
  std::vector<std::vector<std::vector<Estimate>>> gen(ds.size());
  std::vector<std::vector<Estimate>> delta(ds.size());
  std::size_t cell = 0;
  for (std::size_t a = 0; a < ds.size(); ++a) {
    const std::size_t d = ds[a];
    const double sigma_star = sigma_star_for(config, d, master.split(1u << 20).split(d));
    for (std::size_t n : ns) {
      const GenErrorExperiment exp = make_experiment(config, d, n);
      const RngStream cell_rng = master.split(cell++);
      const auto points = estimate_gen_error_curve(exp, Ts, config.trials, cell_rng.split(0));
      const Estimate dm = estimate_delta_mean(exp.model, exp.sampler, n, exp.set, search,
                                              config.trials, cell_rng.split(1));
      gen[a].emplace_back();
      for (const auto& p : points) {
        gen[a].back().push_back(p.gen_error);
        const CellBounds b = bounds_for(config, exp.model, exp.schedule, d, n, p.T, sigma_star);
        table.new_row();
        table.set("kind", std::string("cell"));
        table.set("d", count_cell(d));
        table.set("n", count_cell(n));
        table.set("T", count_cell(p.T));
        table.set("gen_error", p.gen_error.mean);
        table.set("gen_error_se", p.gen_error.std_error);
        table.set("delta_mean", dm.mean);
        table.set("delta_mean_se", dm.std_error);
        table.set("stability_bound", maybe(b.stability));
        table.set("main_theorem_bound", maybe(b.main_theorem));
        table.set("seed", count_cell(config.seed));
      }
      delta[a].push_back(dm);
    }
  }

  auto slope_row = [&](const std::string& quantity, std::optional<std::size_t> d,
                       std::optional<std::size_t> n, std::optional<std::size_t> T,
                       const std::vector<double>& x, const std::vector<double>& y) {
    table.new_row();
    table.set("kind", std::string("slope"));
    if (d) table.set("d", count_cell(*d));
    if (n) table.set("n", count_cell(*n));
    if (T) table.set("T", count_cell(*T));
    table.set("quantity", quantity);
    table.set("slope", fit_scaling_slope(x, y));
    table.set("points", count_cell(x.size()));
    table.set("seed", count_cell(config.seed));
  };
  if (ns.size() >= 3) {
    const std::vector<double> x(ns.begin(), ns.end());
    for (std::size_t a = 0; a < ds.size(); ++a) {
      std::vector<double> g, dm;
      for (std::size_t b = 0; b < ns.size(); ++b) {
        g.push_back(gen[a][b].back().mean);
        dm.push_back(delta[a][b].mean);
      }
      slope_row("gen_error_vs_n", ds[a], std::nullopt, Ts.back(), x, g);
      slope_row("delta_mean_vs_n", ds[a], std::nullopt, std::nullopt, x, dm);
    }
  }
  if (Ts.size() >= 3) {
    const std::vector<double> x(Ts.begin(), Ts.end());
    for (std::size_t a = 0; a < ds.size(); ++a) {
      std::vector<double> g;
      for (const auto& e : gen[a].back()) g.push_back(e.mean);
      slope_row("gen_error_vs_T", ds[a], ns.back(), std::nullopt, x, g);
    }
  }
  if (ds.size() >= 3) {
    const std::vector<double> x(ds.begin(), ds.end());
    std::vector<double> dm;
    for (std::size_t a = 0; a < ds.size(); ++a) dm.push_back(delta[a].back().mean);
    slope_row("delta_mean_vs_d", std::nullopt, ns.back(), std::nullopt, x, dm);
  }
  return {std::move(table), exit_ok};
}

CommandResult cmd_counterexample(const ExperimentConfig& config) {
  if (config.loss != "counterexample" && config.loss != "counterexample_perturbed") {
    throw UsageError("counterexample: loss must be counterexample or counterexample_perturbed");
  }
  Table table({"kind", "d", "n", "p_event_I", "p_event_I_complement", "gen_error",
               "gen_error_se", "trials", "event_I_trials", "fallback_trials", "epsilon",
               "distance", "norm", "population_risk", "plus_spread", "seed"});
  const RngStream master(config.seed);
  std::size_t cell = 0;
  for (std::size_t d : config.d) {
    for (std::size_t n : config.n) {
      const MinimizerGenError g = gen_error_at_minimizer(
          n, d, config.trials, master.split(cell++), FallbackSolver{config.epsilon, config.fallback_steps});
      table.new_row();
      table.set("kind", std::string("cell"));
      table.set("d", count_cell(d));
      table.set("n", count_cell(n));
      table.set("p_event_I", event_I_probability(n, d));
      table.set("p_event_I_complement", event_I_complement(n, d));
      table.set("gen_error", g.estimate.mean);
      table.set("gen_error_se", g.estimate.std_error);
      table.set("trials", count_cell(config.trials));
      table.set("event_I_trials", count_cell(g.event_I_trials));
      table.set("fallback_trials", count_cell(g.fallback_trials));
      table.set("seed", count_cell(config.seed));
    }
  }

  // first dataset with event I at the smallest n and largest d
  const std::size_t n0 = *std::min_element(config.n.begin(), config.n.end());
  const std::size_t d0 = *std::max_element(config.d.begin(), config.d.end());
  const RngStream limit_rng = master.split(1u << 20);
  for (std::uint64_t attempt = 0; attempt < 10000; ++attempt) {
    RngStream r = limit_rng.split(attempt);
    const Dataset S = sample_rademacher_dataset(n0, d0, r);
    if (!detect_event_I(S).holds) continue;
    const LimitReport report = perturbed_minimizer_limit_check(S, config.eps_grid, config.limit_steps);
    for (const auto& row : report.rows) {
      table.new_row();
      table.set("kind", std::string("limit"));
      table.set("d", count_cell(d0));
      table.set("n", count_cell(n0));
      table.set("epsilon", row.epsilon);
      table.set("distance", row.distance);
      table.set("norm", row.norm);
      table.set("population_risk", row.population_risk);
      table.set("plus_spread", row.plus_spread);
      table.set("seed", count_cell(config.seed));
    }
    return {std::move(table), exit_ok};
  }
  throw UsageError("counterexample: no dataset with event I found for the limit check at n = " +
                   std::to_string(n0) + ", d = " + std::to_string(d0));
}

CommandResult cmd_verify(const ExperimentConfig& config) {
  Table table({"check", "measured", "bound", "pass", "detail"});
  bool all = true;
  for (const auto& c : run_property_suites(config)) {
    table.new_row();
    table.set("check", c.name);
    table.set("measured", c.measured);
    table.set("bound", c.bound);
    table.set("pass", c.pass);
    table.set("detail", c.detail);
    all = all && c.pass;
  }
  return {std::move(table), all ? exit_ok : exit_verification};
}

CommandResult cmd_bounds(const ExperimentConfig& config) {
  Table table({"name", "d", "n", "T", "value", "divergent", "unbounded_in_T", "terms"});
  const RngStream master(config.seed);
  auto add = [&](const BoundReport& r, std::size_t d, std::size_t n, std::optional<std::size_t> T) {
    table.new_row();
    table.set("name", r.name);
    table.set("d", count_cell(d));
    table.set("n", count_cell(n));
    if (T) table.set("T", count_cell(*T));
    table.set("value", r.value);
    table.set("divergent", r.divergent);
    table.set("unbounded_in_T", r.unbounded_in_T);
    table.set("terms", terms_text(r));
  };
  for (std::size_t d : config.d) {
    const LossModel model = make_model(config, d);
    const StepSchedule schedule = make_schedule(config, model.smoothness());
    const double sigma_star = sigma_star_for(config, d, master.split(1u << 20).split(d));
    const auto sigma = bound_sigma(config, model);
    for (std::size_t n : config.n) {
      for (std::size_t T : sorted_unique(config.T)) {
        if (sigma) add(opt_error_bound(T, schedule, 2.0 * config.radius, *sigma), d, n, T);
        if (const auto B = model.gradient_bound()) add(stability_bound(n, schedule, T, *B), d, n, T);
        if (sigma) {
          MainTheoremInputs in;
          in.T = T;
          in.schedule = schedule;
          in.w0_dist = 2.0 * config.radius;
          in.sigma = *sigma;
          in.sigma_star = sigma_star;
          in.L = model.smoothness();
          in.R = config.radius;
          in.d = d;
          in.n = n;
          in.C = config.constant_C;
          add(main_theorem_bound(in), d, n, T);
        }
      }
      if (const auto B = model.gradient_bound();
          B && model.family() == LossFamily::quadratic_strongly_convex) {
        add(strongly_convex_bound(n, *B, model.mu()), d, n, std::nullopt);
      }
      add(delta_mean_bound(sigma_star, model.smoothness(), config.radius, d, n, config.constant_c),
          d, n, std::nullopt);
    }
  }
  return {std::move(table), exit_ok};
}

CommandResult dispatch(const std::string& command, const ExperimentConfig& config) {
  if (command == "run") return cmd_run(config);
  if (command == "scaling") return cmd_scaling(config);
  if (command == "counterexample") return cmd_counterexample(config);
  if (command == "verify") return cmd_verify(config);
  if (command == "bounds") return cmd_bounds(config);
  throw UsageError("unknown command '" + command + "'");
}

void emit(const CommandResult& result, const ExperimentConfig& config, std::ostream& fallback) {
  const std::string text = result.table.render(config.format);
  if (config.out.empty()) {
    fallback << text;
    return;
  }
  write_file_atomic(config.out, text);
}

}  // namespace psgdlab::cli
