#include <cmath>
#include <limits>
#include <ostream>

#include "common.hpp"

namespace bnslab::cli {

namespace {

const char* kPalette[] = {"#000000", "#d62728", "#ff7f0e", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"};

struct SamplerRun {
  std::string name;
  SamplerConfig config;
  std::vector<double> mean_norm;  // by grid index, NaN where not visited
  std::vector<double> mean_err;
  std::vector<double> mean_denoise;
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const NoiseSchedule s = schedule_from(cfg);
  const int N = s.n_steps();
  const CirclesSpec spec = circles_from(cfg);
  const ScoreField field = toy_field(cfg, spec, s, log);
  const int n = static_cast<int>(cfg.get_int("sampler.n_trajectories"));
  const int delta = delta_from(cfg, "sampler.delta_skip", s);
  const std::uint64_t seed = cfg.seed();

  std::vector<SamplerRun> runs;
  runs.push_back({"standard", SamplerConfig::standard(n, seed), {}, {}, {}});
  for (double tau : cfg.has_value("sampler.taus") ? cfg.get_doubles("sampler.taus") : std::vector<double>{}) {
    runs.push_back({"temperature_" + format_number(tau), SamplerConfig::temperature(tau, n, seed), {}, {}, {}});
  }
  for (double g : cfg.has_value("sampler.gammas") ? cfg.get_doubles("sampler.gammas") : std::vector<double>{}) {
    runs.push_back({"bns_" + format_number(g), SamplerConfig::boost_skip(g, delta, n, seed), {}, {}, {}});
  }
  if (cfg.has_value("sampler.ode_gamma")) {
    const double g = cfg.get_double("sampler.ode_gamma");
    runs.push_back({"bns_ode_" + format_number(g),
                    SamplerConfig::boost_skip(g, delta, n, seed, Dynamics::ode), {}, {}, {}});
  }

  RecordFlags flags;
  flags.states = false;
  flags.denoised = true;
  flags.errors = true;
  const int d = field.dim();
  for (SamplerRun& r : runs) {
    r.config.validate();
    const ScoreField f = r.config.mode == SamplerMode::temperature ? field.with_temperature(r.config.tau) : field;
    const int start = N - r.config.delta_skip;
    log << "sampler " << r.name << " from index " << start << "\n";
    std::vector<Trajectory> trajs(static_cast<std::size_t>(n));
    parallel_for(trajs.size(), [&](std::size_t t) {
      RngStream rng(r.config.seed, t);
      const Vec x = draw_init(r.config, d, rng);
      trajs[t] = run_reverse(f, s, x, start, r.config.dynamics, rng, flags);
    });

    CsvTable t;
    t.comments = provenance(cfg);
    t.comments.emplace_back("sampler", r.name);
    t.columns = {"traj_id", "i", "norm", "err", "denoise_norm"};
    r.mean_norm.assign(static_cast<std::size_t>(N + 1), nan());
    r.mean_err.assign(static_cast<std::size_t>(N + 1), nan());
    r.mean_denoise.assign(static_cast<std::size_t>(N + 1), nan());
    for (std::size_t k = 0; k < trajs[0].indices.size(); ++k) {
      const auto i = static_cast<std::size_t>(trajs[0].indices[k]);
      double sn = 0.0, se = 0.0, sd = 0.0;
      for (const Trajectory& tr : trajs) {
        sn += tr.norms[k];
        if (k < tr.errors.size()) {
          se += tr.errors[k];
          sd += tr.denoised[k].norm();
        }
      }
      r.mean_norm[i] = sn / n;
      if (k < trajs[0].errors.size()) {
        r.mean_err[i] = se / n;
        r.mean_denoise[i] = sd / n;
      }
    }
    for (std::size_t id = 0; id < trajs.size(); ++id) {
      const Trajectory& tr = trajs[id];
      for (std::size_t k = 0; k < tr.indices.size(); ++k) {
        const bool has = k < tr.errors.size();
        t.add_row({static_cast<std::int64_t>(id), std::int64_t{tr.indices[k]}, tr.norms[k],
                   has ? CsvCell{tr.errors[k]} : CsvCell{std::string("")},
                   has ? CsvCell{tr.denoised[k].norm()} : CsvCell{std::string("")}});
      }
    }
    write_csv(out_path(cfg, "trajectory_" + r.name + ".csv"), t);
  }

  CsvTable curves;
  curves.comments = provenance(cfg);
  curves.columns = {"sampler", "i", "mean_norm", "mean_err", "mean_denoise_norm"};
  SvgPanel norms;
  norms.title = "mean norm ||x_i||";
  norms.x_label = "i";
  norms.x_min = 0.0;
  norms.x_max = N;
  SvgPanel errs = norms;
  errs.title = "mean estimation error";
  double norm_hi = 0.0, err_hi = 0.0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const SamplerRun& r = runs[k];
    LineSeries ln{{}, {}, kPalette[k % std::size(kPalette)], r.name, false};
    LineSeries le = ln;
    for (int i = N; i >= 0; --i) {
      const auto u = static_cast<std::size_t>(i);
      if (std::isnan(r.mean_norm[u])) continue;
      curves.add_row({r.name, std::int64_t{i}, r.mean_norm[u], r.mean_err[u], r.mean_denoise[u]});
      ln.x.push_back(i);
      ln.y.push_back(r.mean_norm[u]);
      norm_hi = std::max(norm_hi, r.mean_norm[u]);
      if (!std::isnan(r.mean_err[u])) {
        le.x.push_back(i);
        le.y.push_back(r.mean_err[u]);
        err_hi = std::max(err_hi, r.mean_err[u]);
      }
    }
    norms.lines.push_back(std::move(ln));
    errs.lines.push_back(std::move(le));
  }
  norms.y_min = errs.y_min = 0.0;
  norms.y_max = 1.05 * norm_hi + 1e-9;
  errs.y_max = 1.05 * err_hi + 1e-9;
  write_csv(out_path(cfg, "curves.csv"), curves);
  write_svg(out_path(cfg, "trajectory.svg"), {norms, errs}, 2, 480, 360);

  CheckList checks;
  const std::vector<double>& ref = runs[0].mean_norm;
  const double max_gap = cfg.get_double("check.max_relative_gap");
  for (const SamplerRun& r : runs) {
    if (r.config.mode == SamplerMode::boost_skip && r.config.dynamics == Dynamics::stochastic) {
      const int mid = (N - r.config.delta_skip) / 2;
      const auto u = static_cast<std::size_t>(mid);
      const double gap = std::abs(r.mean_norm[u] - ref[u]) / ref[u];
      checks.add(r.name + " norm gap at i=" + std::to_string(mid), gap < max_gap, gap, max_gap);
    }
    if (r.config.mode == SamplerMode::temperature) {
      // Gap to the standard curve at quarter points, in sampling order.
      double prev = -1.0;
      bool monotone = true;
      for (int q = 3; q >= 0; --q) {
        const auto u = static_cast<std::size_t>(q * N / 4);
        const double gap = std::abs(r.mean_norm[u] - ref[u]);
        if (gap < prev) monotone = false;
        prev = gap;
      }
      checks.add(r.name + " gap grows along the trajectory", monotone, prev, 0.0);
    }
  }
  return checks.finish(cfg, log);
}

}  // namespace

Command make_trajectory() {
  return {"trajectory", "norm and estimation-error curves along the reverse trajectory per sampler",
          join({run_keys(), schedule_keys(), circles_keys(), model_keys(),
                {{"sampler.n_trajectories", "200", "trajectories per sampler"},
                 {"sampler.taus", "1.1", "temperature samplers"},
                 {"sampler.gammas", "2,5", "boost-and-skip samplers"},
                 {"sampler.delta_skip", "auto", "skip for the boost-and-skip samplers (auto = recipe)"},
                 {"sampler.ode_gamma", "2", "boost factor of the ODE variant; empty disables it"},
                 {"check.max_relative_gap", "0.1", "largest relative norm gap at mid-trajectory"}}}),
          run};
}

}  // namespace bnslab::cli
