#include <cmath>
#include <ostream>

#include "common.hpp"

namespace bnslab::cli {

namespace {

std::string block_of(double gamma_sq, int delta) {
  if (gamma_sq == 1.0 && delta == 0) return "baseline";
  if (delta == 0) return "boost_only";
  if (gamma_sq == 1.0) return "skip_only";
  return "combined";
}

double fraction_stderr(double p, Eigen::Index n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const NoiseSchedule s = schedule_from(cfg);
  const CirclesSpec spec = circles_from(cfg);
  const CirclesGeometry geo = geometry_from(cfg, spec);
  const ScoreField field = toy_field(cfg, spec, s, log);
  const LabeledPoints truth = sample_circles(spec);

  const std::vector<double> gamma_sq = cfg.get_doubles("ablation.gamma_sq");
  const std::vector<int> deltas = cfg.get_ints("ablation.delta_skip");
  std::vector<double> gammas;
  for (double g2 : gamma_sq) {
    if (!(g2 > 0.0)) throw ConfigError("ablation.gamma_sq entries must be > 0");
    gammas.push_back(std::sqrt(g2));
  }
  SamplerConfig base = SamplerConfig::standard(static_cast<int>(cfg.get_int("sampler.n_samples")),
                                               cfg.seed(), dynamics_from(cfg, "sampler.dynamics"));
  log << "sampling " << gammas.size() * deltas.size() << " grid cells\n";
  const std::vector<GridCell> cells = sample_grid(field, s, base, gammas, deltas);
  const int knn_k = static_cast<int>(cfg.get_int("metrics.knn_k"));

  CsvTable t;
  t.comments = provenance(cfg);
  t.columns = {"block", "gamma_sq", "delta_skip", "minority_fraction", "majority_fraction",
               "off_manifold_fraction", "avgknn_mean", "n", "error"};
  struct Row {
    double g2;
    int delta;
    CirclesReport r;
    bool ok;
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const GridCell& c = cells[k];
    const double g2 = gamma_sq[k / deltas.size()];
    if (!c.error.empty()) {
      log << "cell gamma^2=" << format_number(g2) << " delta=" << c.delta_skip << " failed: " << c.error << "\n";
      t.add_row({block_of(g2, c.delta_skip), g2, std::int64_t{c.delta_skip}, std::string(""),
                 std::string(""), std::string(""), std::string(""), std::int64_t{0}, c.error});
      rows.push_back({g2, c.delta_skip, {}, false});
      continue;
    }
    const CirclesReport r = circles_report(c.batch.points, geo);
    const DensityStats knn = avg_knn(c.batch.points, truth.points, knn_k);
    t.add_row({block_of(g2, c.delta_skip), g2, std::int64_t{c.delta_skip}, r.minority_fraction,
               r.majority_fraction, r.off_manifold_fraction, knn.mean, static_cast<std::int64_t>(r.n),
               std::string("")});
    rows.push_back({g2, c.delta_skip, r, true});
  }
  write_csv(out_path(cfg, "ablation.csv"), t);

  CheckList checks;
  const Row* baseline = nullptr;
  for (const Row& r : rows) {
    if (r.ok && r.g2 == 1.0 && r.delta == 0) baseline = &r;
  }
  if (baseline == nullptr) {
    log << "no successful (gamma^2 = 1, delta = 0) cell; directional checks skipped\n";
    return checks.finish(cfg, log);
  }
  const Row* best = nullptr;
  const Row* widest_skip = nullptr;
  for (const Row& r : rows) {
    if (!r.ok) continue;
    if (r.delta == 0 && r.g2 != 1.0) {
      const double ci = 1.96 * std::hypot(fraction_stderr(r.r.minority_fraction, r.r.n),
                                          fraction_stderr(baseline->r.minority_fraction, baseline->r.n));
      const double diff = std::abs(r.r.minority_fraction - baseline->r.minority_fraction);
      checks.add("boost-only gamma^2=" + format_number(r.g2) + " minority within 95% CI of baseline",
                 diff <= ci, diff, ci);
    }
    if (r.g2 == 1.0 && (widest_skip == nullptr || r.delta > widest_skip->delta)) widest_skip = &r;
    if (best == nullptr || r.r.minority_fraction > best->r.minority_fraction) best = &r;
  }
  if (widest_skip != nullptr && widest_skip->delta > 0) {
    const double rise = widest_skip->r.off_manifold_fraction - baseline->r.off_manifold_fraction;
    checks.add("skip-only delta=" + std::to_string(widest_skip->delta) + " raises off-manifold fraction",
               rise >= 0.05, rise, 0.05);
  }
  checks.add("best minority cell combines boost and skip", best->g2 > 1.0 && best->delta > 0,
             best->r.minority_fraction, baseline->r.minority_fraction,
             "gamma^2=" + format_number(best->g2) + " delta=" + std::to_string(best->delta));
  return checks.finish(cfg, log);
}

}  // namespace

Command make_ablation() {
  return {"ablation", "boost-only, skip-only and combined grid on the two-circles data",
          join({run_keys(), schedule_keys(), circles_keys(), model_keys(),
                {{"ablation.gamma_sq", "1,2,4", "boost factors gamma^2"},
                 {"ablation.delta_skip", "0,300,500,700,800", "skipped steps"},
                 {"sampler.n_samples", "2000", "points per cell"},
                 {"sampler.dynamics", "stochastic", "stochastic or ode"},
                 {"metrics.knn_k", "5", "neighbours for AvgkNN"}}}),
          run};
}

}  // namespace bnslab::cli
