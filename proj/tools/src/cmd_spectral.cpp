#include <cmath>
#include <ostream>

#include "common.hpp"

namespace bnslab::cli {

namespace {

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const int h = static_cast<int>(cfg.get_int("field.height"));
  const int w = static_cast<int>(cfg.get_int("field.width"));
  const double gamma = cfg.get_double("field.gamma");
  const int draws = static_cast<int>(cfg.get_int("field.n_draws"));
  const std::vector<double> cutoffs = cfg.get_doubles("field.cutoffs");
  const double tol = cfg.get_double("check.plancherel_tol");

  CsvTable t;
  t.comments = provenance(cfg);
  t.columns = {"gamma", "cutoff", "low_bins", "low_mean", "high_mean", "spatial_mean",
               "low_per_bin", "high_per_bin", "max_plancherel_rel_err"};
  CheckList checks;
  double worst = 0.0;
  for (double g : {1.0, gamma}) {
    for (double c : cutoffs) {
      // Same stream for both gammas, so boosted rows are the unit rows scaled.
      RngStream rng(cfg.seed(), 0);
      double lo = 0.0, hi = 0.0, sp = 0.0, err = 0.0;
      for (int k = 0; k < draws; ++k) {
        const BandEnergy e = band_energy(draw_noise_field(h, w, g, rng), c);
        lo += e.low;
        hi += e.high;
        sp += e.spatial;
        err = std::max(err, std::abs(e.low + e.high - e.spatial) / e.spatial);
      }
      const int bins = bins_within(h, w, c);
      const int rest = h * w - bins;
      t.add_row({g, c, std::int64_t{bins}, lo / draws, hi / draws, sp / draws, lo / draws / bins,
                 rest > 0 ? CsvCell{hi / draws / rest} : CsvCell{std::string("")}, err});
      worst = std::max(worst, err);
    }
  }
  write_csv(out_path(cfg, "bands.csv"), t);
  log << "largest Plancherel relative error " << format_number(worst) << "\n";
  checks.add("Plancherel identity", worst <= tol, worst, tol);
  return checks.finish(cfg, log);
}

}  // namespace

Command make_spectral() {
  return {"spectral", "low/high frequency energy of boosted versus unboosted Gaussian noise",
          join({run_keys(),
                {{"field.height", "32", "noise image height"},
                 {"field.width", "32", "noise image width"},
                 {"field.gamma", "2", "boost factor"},
                 {"field.cutoffs", "0,2,4,8", "radial frequency cutoffs"},
                 {"field.n_draws", "1000", "noise fields per row"},
                 {"check.plancherel_tol", "1e-8", "relative tolerance of low + high = total"}}}),
          run};
}

}  // namespace bnslab::cli
