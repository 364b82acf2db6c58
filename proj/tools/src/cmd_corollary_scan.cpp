#include <cmath>
#include <ostream>

#include "common.hpp"

namespace bnslab::cli {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const NoiseSchedule s = schedule_from(cfg);
  const int N = s.n_steps();
  const double sigma0 = cfg.get_double("data.sigma0");
  const double var0 = sigma0 * sigma0;
  const GaussianSpec spec = GaussianSpec::isotropic(1, var0);
  const std::vector<double> gammas = cfg.get_doubles("scan.gammas");

  CsvTable curves;
  curves.comments = provenance(cfg);
  curves.columns = {"gamma", "n_skip", "t_skip_over_t", "alpha", "predicted_var"};
  CsvTable regions;
  regions.comments = provenance(cfg);
  regions.columns = {"gamma", "region", "kappa", "boundary_index", "first_crossing", "mismatches"};
  CheckList checks;
  SvgPanel panel;
  panel.title = "generated variance vs skip point, sigma0 = " + format_number(sigma0);
  panel.x_label = "T_skip / T";
  panel.y_label = "variance";
  panel.x_min = 0.0;
  panel.x_max = 1.0;
  panel.h_rules = {var0};
  double y_hi = var0;
  double y_lo = var0;

  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const double gamma = gammas[g];
    const AmplificationRegion r = amplification_region(sigma0, gamma, s);
    LineSeries line;
    line.color = kPalette[g % std::size(kPalette)];
    line.label = "gamma " + format_number(gamma);
    int mismatches = 0;
    int first_crossing = -1;
    bool prev_above = false;
    for (int n_skip = 1; n_skip <= N; ++n_skip) {
      const SkipPlan plan = plan_skip(s, N - n_skip);
      const double v = predict_bns_sde(spec, plan, Vec::Zero(1), Mat::Constant(1, 1, gamma * gamma))
                           .cov(0, 0);
      const double t = s.time_of(n_skip) / s.horizon();
      curves.add_row({gamma, std::int64_t{n_skip}, t, plan.alpha_at_skip, v});
      line.x.push_back(t);
      line.y.push_back(v);
      y_hi = std::max(y_hi, v);
      y_lo = std::min(y_lo, v);
      const double change = v - var0;
      if (std::abs(change) > 1e-9 * var0 && r.contains(n_skip) != (change > 0.0)) ++mismatches;
      const bool above = change > 0.0;
      if (n_skip > 1 && above != prev_above && first_crossing < 0) first_crossing = n_skip;
      prev_above = above;
    }
    regions.add_row({gamma, std::string(to_string(r.region)),
                     r.kappa ? CsvCell{*r.kappa} : CsvCell{std::string("")},
                     r.boundary_index ? CsvCell{std::int64_t{*r.boundary_index}} : CsvCell{std::string("")},
                     std::int64_t{first_crossing}, std::int64_t{mismatches}});
    checks.add("region membership gamma=" + format_number(gamma), mismatches == 0, mismatches, 0.0);
    if (first_crossing >= 0 && r.boundary_index) {
      const int gap = std::abs(first_crossing - *r.boundary_index);
      checks.add("boundary vs crossing gamma=" + format_number(gamma), gap <= 1, gap, 1.0);
    }
    panel.lines.push_back(std::move(line));
    log << "gamma " << format_number(gamma) << ": " << to_string(r.region) << "\n";
  }
  const double pad = 0.05 * (y_hi - y_lo + 1e-9);
  panel.y_min = y_lo - pad;
  panel.y_max = y_hi + pad;
  write_csv(out_path(cfg, "curves.csv"), curves);
  write_csv(out_path(cfg, "regions.csv"), regions);
  write_svg(out_path(cfg, "corollary_scan.svg"), {panel}, 1, 520, 360);
  return checks.finish(cfg, log);
}

}  // namespace

Command make_corollary_scan() {
  return {"corollary-scan",
          "sweep the skip point and report where boosting inflates the generated variance",
          join({run_keys(), schedule_keys(),
                {{"data.sigma0", "2", "data standard deviation"},
                 {"scan.gammas", "0.5,1.5,2,3", "boost factors to sweep"}}}),
          run};
}

}  // namespace bnslab::cli
