#include "common.hpp"

#include <ostream>

namespace bnslab::cli {

Schema join(std::initializer_list<Schema> parts) {
  Schema out;
  for (const Schema& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Schema run_keys() { return {{"run.seed", "0", "master seed; every stream is derived from it"}}; }

Schema schedule_keys() {
  return {{"schedule.n_steps", "1000", "number of grid steps N"},
          {"schedule.beta_min", "1e-4", "first beta of the linear schedule"},
          {"schedule.beta_max", "0.02", "last beta of the linear schedule"}};
}

Schema circles_keys() {
  return {{"data.radius_major", "0.5", "radius of the majority ring"},
          {"data.radius_minor", "1.0", "radius of the minority ring"},
          {"data.ring_noise_sigma", "0.02", "isotropic ring noise"},
          {"data.imbalance", "10", "majority:minority count ratio"},
          {"data.n_points", "10000", "ground-truth points"},
          {"data.eps_manifold", "auto", "on-manifold radius tolerance (auto = 3 sigma)"}};
}

Schema model_keys() {
  return {{"model.kind", "net", "net (trained) or mixture (ring-mixture oracle)"},
          {"model.hidden", "256,256,256", "hidden layer widths"},
          {"model.iterations", "20000", "training iterations"},
          {"model.batch_size", "256", "training batch size"},
          {"model.learning_rate", "2e-3", "initial learning rate"},
          {"model.optimizer", "adam", "adam or sgd"},
          {"model.time_sampling", "low_noise", "low_noise or uniform"},
          {"model.linear_decay", "true", "decay the learning rate linearly to zero"},
          {"model.load", "", "load a saved network instead of training"},
          {"model.save", "", "save the trained network to this path"},
          {"model.mixture_components", "128", "Gaussians per ring for the mixture oracle"}};
}

NoiseSchedule schedule_from(const ExperimentConfig& cfg) {
  return NoiseSchedule::linear(static_cast<int>(cfg.get_int("schedule.n_steps")),
                               cfg.get_double("schedule.beta_min"),
                               cfg.get_double("schedule.beta_max"));
}

CirclesSpec circles_from(const ExperimentConfig& cfg) {
  CirclesSpec s;
  s.radius_major = cfg.get_double("data.radius_major");
  s.radius_minor = cfg.get_double("data.radius_minor");
  s.ring_noise_sigma = cfg.get_double("data.ring_noise_sigma");
  s.imbalance = cfg.get_double("data.imbalance");
  s.n_points = static_cast<int>(cfg.get_int("data.n_points"));
  s.seed = mix_seed(cfg.seed(), 0x64617461);
  s.validate();
  return s;
}

CirclesGeometry geometry_from(const ExperimentConfig& cfg, const CirclesSpec& spec) {
  const std::string& eps = cfg.get_string("data.eps_manifold");
  if (eps == "auto" || eps.empty()) return CirclesGeometry::from_spec(spec);
  return CirclesGeometry::from_spec(spec, cfg.get_double("data.eps_manifold"));
}

Dynamics dynamics_from(const ExperimentConfig& cfg, const std::string& key) {
  return parse_dynamics(cfg.get_string(key));
}

int delta_from(const ExperimentConfig& cfg, const std::string& key, const NoiseSchedule& s) {
  const std::string& v = cfg.get_string(key);
  if (v == "auto" || v.empty()) return recipe_delta_skip(s);
  return static_cast<int>(cfg.get_int(key));
}

ScoreField toy_field(const ExperimentConfig& cfg, const CirclesSpec& spec,
                     const NoiseSchedule& schedule, std::ostream& log) {
  const std::string& kind = cfg.get_string("model.kind");
  if (kind == "mixture") {
    const int k = static_cast<int>(cfg.get_int("model.mixture_components"));
    log << "score field: ring-mixture oracle, " << k << " components per ring\n";
    return ScoreField::mixture(circles_ring_mixture(spec, k));
  }
  if (kind != "net") throw ConfigError("model.kind must be net or mixture, got '" + kind + "'");
  if (cfg.has_value("model.load")) {
    log << "score field: network loaded from " << cfg.get_string("model.load") << "\n";
    return ScoreField::network(load_net(cfg.get_string("model.load")));
  }
  TrainConfig tc;
  tc.n_iterations = static_cast<int>(cfg.get_int("model.iterations"));
  tc.batch_size = static_cast<int>(cfg.get_int("model.batch_size"));
  tc.learning_rate = cfg.get_double("model.learning_rate");
  tc.hidden = cfg.get_ints("model.hidden");
  tc.seed = mix_seed(cfg.seed(), 0x6e6574);
  const std::string& opt = cfg.get_string("model.optimizer");
  if (opt == "adam") {
    tc.optimizer = Optimizer::adam;
  } else if (opt == "sgd") {
    tc.optimizer = Optimizer::sgd;
  } else {
    throw ConfigError("model.optimizer must be adam or sgd, got '" + opt + "'");
  }
  const std::string& ts = cfg.get_string("model.time_sampling");
  if (ts == "low_noise") {
    tc.time_sampling = TimeSampling::low_noise;
  } else if (ts == "uniform") {
    tc.time_sampling = TimeSampling::uniform;
  } else {
    throw ConfigError("model.time_sampling must be low_noise or uniform, got '" + ts + "'");
  }
  tc.linear_decay = cfg.get_bool("model.linear_decay");
  tc.validate();
  log << "training score network (" << tc.n_iterations << " iterations)\n";
  TrainResult res = dsm_train(circles_data_sampler(spec), schedule, tc);
  CsvTable loss;
  loss.comments = provenance(cfg);
  loss.columns = {"iteration", "loss"};
  for (std::size_t k = 0; k < res.losses.size(); ++k) {
    loss.add_row({static_cast<std::int64_t>(k), res.losses[k]});
  }
  write_csv(out_path(cfg, "training_loss.csv"), loss);
  if (cfg.has_value("model.save")) save_net(res.net, cfg.get_string("model.save"));
  return ScoreField::network(std::move(res.net));
}

std::vector<std::pair<std::string, std::string>> provenance(const ExperimentConfig& cfg) {
  auto out = cfg.entries();
  out.insert(out.begin(), {"command", cfg.command()});
  return out;
}

void CheckList::add(std::string name, bool passed, double value, double threshold,
                    std::string detail) {
  entries_.push_back({std::move(name), passed, value, threshold, std::move(detail)});
}

bool CheckList::all_passed() const {
  for (const Entry& e : entries_) {
    if (!e.passed) return false;
  }
  return true;
}

int CheckList::finish(const ExperimentConfig& cfg, std::ostream& log) const {
  CsvTable t;
  t.comments = provenance(cfg);
  t.columns = {"check", "passed", "value", "threshold", "detail"};
  for (const Entry& e : entries_) {
    t.add_row({e.name, std::int64_t{e.passed ? 1 : 0}, e.value, e.threshold, e.detail});
    log << (e.passed ? "[pass] " : "[FAIL] ") << e.name << ": " << format_number(e.value)
        << " vs " << format_number(e.threshold);
    if (!e.detail.empty()) log << " (" << e.detail << ")";
    log << "\n";
  }
  write_csv(out_path(cfg, "checks.csv"), t);
  for (const Entry& e : entries_) {
    if (!e.passed) {
      log << "check failed: " << e.name << "\n";
      return kExitCheckFailed;
    }
  }
  return kExitOk;
}

std::filesystem::path out_path(const ExperimentConfig& cfg, const std::string& file) {
  return cfg.out_dir / file;
}

}  // namespace bnslab::cli
