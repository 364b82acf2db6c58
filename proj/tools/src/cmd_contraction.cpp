#include <cmath>
#include <ostream>

#include "common.hpp"

namespace bnslab::cli {

namespace {

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const NoiseSchedule s = schedule_from(cfg);
  const int d = static_cast<int>(cfg.get_int("data.dim"));
  const GaussianSpec spec = GaussianSpec::isotropic(d, cfg.get_double("data.sigma0_sq"));
  const int n_skip = s.n_steps() - static_cast<int>(cfg.get_int("sampler.delta_skip"));
  const int n_pairs = static_cast<int>(cfg.get_int("contraction.n_pairs"));
  const int n_pilot = static_cast<int>(cfg.get_int("contraction.n_pilot"));
  plan_skip(s, s.n_steps() - n_skip);  // validates the skip

  CsvTable curve;
  curve.comments = provenance(cfg);
  curve.columns = {"gamma", "i", "mean_sq_error", "stderr_sq_error", "bound", "floor_term",
                   "decay_term", "lambda"};
  CsvTable summary;
  summary.comments = provenance(cfg);
  summary.columns = {"gamma", "b", "initial_error", "initial_budget", "initial_ratio", "final_error"};
  CheckList checks;
  const std::vector<double> gammas = cfg.get_doubles("sampler.gammas");
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const double gamma = gammas[g];
    const double b = estimate_norm_bound(spec, s, n_skip, gamma, n_pilot, mix_seed(cfg.seed(), 2 * g));
    const CoupledCurve c = coupled_error_curve(spec, s, n_skip, gamma, n_pairs, mix_seed(cfg.seed(), 2 * g + 1));
    int first_violation = -1;
    double worst = 0.0;
    for (std::size_t k = 0; k < c.indices.size(); ++k) {
      const int i = c.indices[k];
      const ContractionReport r = contraction_bound(s, i, n_skip, gamma, b, d);
      curve.add_row({gamma, std::int64_t{i}, c.mean_sq_error[k], c.stderr_sq_error[k], r.bound,
                     r.floor_term, r.decay_term, r.lambda});
      worst = std::max(worst, c.mean_sq_error[k] / r.bound);
      if (c.mean_sq_error[k] > r.bound && first_violation < 0) first_violation = i;
    }
    const double budget = b * b + gamma * gamma * d;
    const double initial = c.mean_sq_error.front();
    summary.add_row({gamma, b, initial, budget, initial / budget, c.mean_sq_error.back()});
    log << "gamma " << format_number(gamma) << ": B " << format_number(b) << ", initial error "
        << format_number(initial) << " of budget " << format_number(budget) << "\n";
    checks.add("error below bound gamma=" + format_number(gamma), first_violation < 0, worst, 1.0,
               first_violation < 0 ? "largest error/bound ratio"
                                   : "first violation at step i=" + std::to_string(first_violation));
  }
  write_csv(out_path(cfg, "contraction.csv"), curve);
  write_csv(out_path(cfg, "summary.csv"), summary);
  return checks.finish(cfg, log);
}

}  // namespace

Command make_contraction() {
  return {"contraction", "synchronously coupled error curve against the discrete contraction bound",
          join({run_keys(), schedule_keys(),
                {{"data.sigma0_sq", "4", "data variance (isotropic, zero mean)"},
                 {"data.dim", "1", "data dimension"},
                 {"sampler.gammas", "1,2,3", "boost factors of the second chain"},
                 {"sampler.delta_skip", "0", "skipped steps; both chains start at N - delta"},
                 {"contraction.n_pairs", "10000", "coupled pairs"},
                 {"contraction.n_pilot", "1000", "pilot pairs for the norm bound B"}}}),
          run};
}

}  // namespace bnslab::cli
