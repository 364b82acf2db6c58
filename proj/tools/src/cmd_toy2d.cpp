#include <cmath>
#include <ostream>

#include "common.hpp"

namespace bnslab::cli {

namespace {

struct Panel {
  std::string id;
  std::string label;
  Mat points;
  CirclesReport report;
};

double fraction_stderr(double p, Eigen::Index n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(n));
}

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const NoiseSchedule s = schedule_from(cfg);
  const CirclesSpec spec = circles_from(cfg);
  const CirclesGeometry geo = geometry_from(cfg, spec);
  const ScoreField field = toy_field(cfg, spec, s, log);

  const int n = static_cast<int>(cfg.get_int("sampler.n_samples"));
  const double gamma = cfg.get_double("sampler.gamma");
  const int delta = static_cast<int>(cfg.get_int("sampler.delta_skip"));
  const double tau = cfg.get_double("sampler.tau");
  const std::uint64_t seed = cfg.seed();

  const LabeledPoints truth = sample_circles(spec);
  std::vector<Panel> panels;
  panels.push_back({"a", "ground truth", truth.points, {}});
  write_csv(out_path(cfg, "samples_a.csv"), labeled_points_table(truth, provenance(cfg)));

  const std::vector<std::tuple<std::string, std::string, SamplerConfig>> runs = {
      {"b", "standard", SamplerConfig::standard(n, mix_seed(seed, 1))},
      {"c", "temperature", SamplerConfig::temperature(tau, n, mix_seed(seed, 2))},
      {"d", "boost only", SamplerConfig::boost_skip(gamma, 0, n, mix_seed(seed, 3))},
      {"e", "ODE + boost", SamplerConfig::boost_skip(gamma, delta, n, mix_seed(seed, 4), Dynamics::ode)},
      {"f", "boost and skip", SamplerConfig::boost_skip(gamma, delta, n, mix_seed(seed, 5))},
  };
  for (const auto& [id, label, sc] : runs) {
    log << "panel " << id << " (" << label << ")\n";
    const SampleBatch b = sample(field, s, sc);
    CsvTable t = sample_batch_table(b);
    t.comments.insert(t.comments.begin(), {"panel", id});
    write_csv(out_path(cfg, "samples_" + id + ".csv"), t);
    panels.push_back({id, label, b.points, {}});
  }

  const int knn_k = static_cast<int>(cfg.get_int("metrics.knn_k"));
  const int lof_k = static_cast<int>(cfg.get_int("metrics.lof_k"));
  CsvTable report;
  report.comments = provenance(cfg);
  report.columns = {"panel", "label", "minority_fraction", "majority_fraction",
                    "off_manifold_fraction", "n"};
  CsvTable metrics;
  metrics.comments = provenance(cfg);
  metrics.columns = {"metric", "k", "mean", "p50", "p90", "n"};
  std::vector<SvgPanel> svg;
  for (Panel& p : panels) {
    p.report = circles_report(p.points, geo);
    report.add_row({p.id, p.label, p.report.minority_fraction, p.report.majority_fraction,
                    p.report.off_manifold_fraction, static_cast<std::int64_t>(p.report.n)});
    const DensityStats knn = p.id == "a" ? avg_knn_self(p.points, knn_k) : avg_knn(p.points, truth.points, knn_k);
    const DensityStats lf = p.id == "a" ? lof_self(p.points, lof_k) : lof(p.points, truth.points, lof_k);
    const auto rows = static_cast<std::int64_t>(p.points.rows());
    metrics.add_row({"avgknn_" + p.id, std::int64_t{knn_k}, knn.mean, knn.p50, knn.p90, rows});
    metrics.add_row({"lof_" + p.id, std::int64_t{lof_k}, lf.mean, lf.p50, lf.p90, rows});
    log << p.id << ": minority " << format_number(p.report.minority_fraction) << ", off-manifold "
        << format_number(p.report.off_manifold_fraction) << "\n";
    SvgPanel sp;
    sp.title = "(" + p.id + ") " + p.label;
    sp.x_min = sp.y_min = -1.4;
    sp.x_max = sp.y_max = 1.4;
    sp.scatters.push_back({p.points, "#1f77b4", 0.8, ""});
    svg.push_back(std::move(sp));
  }
  write_csv(out_path(cfg, "report.csv"), report);
  write_csv(out_path(cfg, "metrics.csv"), metrics);
  write_svg(out_path(cfg, "toy2d.svg"), svg, 3);

  const CirclesReport& std_r = panels[1].report;
  const CirclesReport& boost_r = panels[3].report;
  const CirclesReport& ode_r = panels[4].report;
  const CirclesReport& bns_r = panels[5].report;
  CheckList checks;
  checks.add("boost-and-skip minority above standard", bns_r.minority_fraction > std_r.minority_fraction,
             bns_r.minority_fraction, std_r.minority_fraction);
  const double ci = 1.96 * std::hypot(fraction_stderr(std_r.minority_fraction, std_r.n),
                                      fraction_stderr(boost_r.minority_fraction, boost_r.n));
  const double diff = std::abs(boost_r.minority_fraction - std_r.minority_fraction);
  checks.add("boost-only minority within 95% CI of standard", diff <= ci, diff, ci);
  checks.add("ODE + boost off-manifold above 3x boost-and-skip",
             ode_r.off_manifold_fraction > 3.0 * bns_r.off_manifold_fraction,
             ode_r.off_manifold_fraction, 3.0 * bns_r.off_manifold_fraction);
  return checks.finish(cfg, log);
}

}  // namespace

Command make_toy2d() {
  return {"toy2d", "two-circles study: six sampler panels with minority and off-manifold fractions",
          join({run_keys(), schedule_keys(), circles_keys(), model_keys(),
                {{"sampler.n_samples", "10000", "points per sampled panel"},
                 {"sampler.gamma", "2", "boost factor"},
                 {"sampler.delta_skip", "700", "skipped steps for the skip panels"},
                 {"sampler.tau", "1.1", "temperature panel"},
                 {"metrics.knn_k", "5", "neighbours for AvgkNN"},
                 {"metrics.lof_k", "20", "neighbours for LOF"}}}),
          run};
}

}  // namespace bnslab::cli
