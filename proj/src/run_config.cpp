#include "gemnas/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/parallel.hpp"

namespace gemnas {

int RunConfig::effective_workers() const {
  return workers > 0 ? workers : default_worker_count();
}

namespace {

std::vector<OpKind> parse_palette(const nlohmann::json& arr) {
  std::vector<OpKind> palette;
  for (const auto& s : arr) palette.push_back(OpKind::parse(s.get<std::string>()));
  if (palette.empty()) throw ConfigError("op_palette must be non-empty");
  return palette;
}

nlohmann::json palette_to_json(const std::vector<OpKind>& palette) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& op : palette) arr.push_back(op.to_string());
  return arr;
}

TrainConfig parse_train(const nlohmann::json& j, const TrainConfig& defaults) {
  TrainConfig cfg = defaults;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  if (j.contains("optimizer")) {
    std::string opt = j.at("optimizer").get<std::string>();
    if (opt == "sgd")
      cfg.optimizer = Optimizer::Sgd;
    else if (opt == "adam")
      cfg.optimizer = Optimizer::Adam;
    else
      throw ConfigError("unknown optimizer: '" + opt + "'");
  }
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    cfg.adam.beta1 = a.value("beta1", cfg.adam.beta1);
    cfg.adam.beta2 = a.value("beta2", cfg.adam.beta2);
    cfg.adam.epsilon = a.value("epsilon", cfg.adam.epsilon);
  }
  cfg.rng_seed = j.value("seed", cfg.rng_seed);
  return cfg;
}

nlohmann::json train_to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["learning_rate"] = cfg.learning_rate;
  j["iterations"] = cfg.iterations;
  j["batch_size"] = cfg.batch_size;
  j["optimizer"] = cfg.optimizer == Optimizer::Sgd ? "sgd" : "adam";
  j["adam"] = {{"beta1", cfg.adam.beta1},
               {"beta2", cfg.adam.beta2},
               {"epsilon", cfg.adam.epsilon}};
  j["seed"] = cfg.rng_seed;
  return j;
}

void validate(const RunConfig& cfg) {
  if (cfg.space.n < 1) throw ConfigError("search_space.n must be >= 1");
  if (cfg.space.edge_prob < 0.0 || cfg.space.edge_prob > 1.0)
    throw ConfigError("search_space.edge_prob must be in [0, 1]");
  if (cfg.space.channels < 1) throw ConfigError("search_space.channels must be >= 1");
  if (cfg.space.resolution.height < 1 || cfg.space.resolution.width < 1)
    throw ConfigError("search_space.resolution must be positive");
  if (cfg.encoder.d < 1) throw ConfigError("encoder.d must be >= 1");
  if (cfg.encoder.wl.h < 0) throw ConfigError("encoder.wl.h must be >= 0");
  if (cfg.encoder.pair_count < 1) throw ConfigError("encoder.pair_count must be >= 1");
  if (cfg.encoder.train.learning_rate <= 0.0 || cfg.estimator.train.learning_rate <= 0.0)
    throw ConfigError("learning_rate must be positive");
  if (cfg.encoder.train.iterations < 1) throw ConfigError("encoder.train.iterations must be >= 1");
  if (cfg.encoder.train.batch_size < 1 || cfg.estimator.train.batch_size < 1)
    throw ConfigError("batch_size must be >= 1");
  double lo = cfg.encoder.edge_prob_range.first, hi = cfg.encoder.edge_prob_range.second;
  if (lo < 0.0 || hi > 1.0 || lo > hi)
    throw ConfigError("encoder.edge_prob_range must be within [0, 1] and ordered");
  if (cfg.encoder.pair_perturb_prob < 0.0 || cfg.encoder.pair_permute_prob < 0.0 ||
      cfg.encoder.pair_perturb_prob + cfg.encoder.pair_permute_prob > 1.0)
    throw ConfigError("encoder pair-kind probabilities must be non-negative and sum to <= 1");
  if (cfg.oracle.lambda < 0.0) throw ConfigError("oracle.lambda must be >= 0");
  if (cfg.oracle.synthetic.noise_sigma < 0.0)
    throw ConfigError("oracle.synthetic.noise_sigma must be >= 0");
  if (cfg.oracle.kind == OracleKind::Tabular) {
    if (cfg.oracle.table_path.empty())
      throw ConfigError("oracle.table_path is required for the tabular oracle");
    if (!std::filesystem::exists(cfg.oracle.table_path))
      throw ConfigError("oracle.table_path does not exist: " + cfg.oracle.table_path);
  }
  if (cfg.estimator.sample_budget < 1) throw ConfigError("estimator.sample_budget must be >= 1");
  if (cfg.estimator.finetune_epochs < 0) throw ConfigError("estimator.finetune_epochs must be >= 0");
  if (cfg.search.pool_size < 1) throw ConfigError("search.pool_size must be >= 1");
  if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.workers = j.value("workers", cfg.workers);

  if (j.contains("search_space")) {
    const auto& s = j.at("search_space");
    cfg.space.n = s.value("n", cfg.space.n);
    cfg.space.edge_prob = s.value("edge_prob", cfg.space.edge_prob);
    if (s.contains("op_palette")) cfg.space.op_palette = parse_palette(s.at("op_palette"));
    cfg.space.channels = s.value("channels", cfg.space.channels);
    cfg.space.require_single_source =
        s.value("require_single_source", cfg.space.require_single_source);
    if (s.contains("resolution")) {
      const auto& r = s.at("resolution");
      if (!r.is_array() || r.size() != 2) throw ConfigError("resolution must be [H, W]");
      cfg.space.resolution = {r[0].get<int>(), r[1].get<int>()};
    }
  }

  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    cfg.encoder.d = e.value("d", cfg.encoder.d);
    if (e.contains("wl")) {
      cfg.encoder.wl.h = e.at("wl").value("h", cfg.encoder.wl.h);
      cfg.encoder.wl.use_ops_as_initial_labels =
          e.at("wl").value("use_ops_as_initial_labels", cfg.encoder.wl.use_ops_as_initial_labels);
    }
    cfg.encoder.pair_count = e.value("pair_count", cfg.encoder.pair_count);
    if (e.contains("train")) cfg.encoder.train = parse_train(e.at("train"), cfg.encoder.train);
    if (e.contains("hidden")) cfg.encoder.hidden = e.at("hidden").get<std::vector<int>>();
    cfg.encoder.use_op_onehots = e.value("use_op_onehots", cfg.encoder.use_op_onehots);
    if (e.contains("edge_prob_range")) {
      const auto& r = e.at("edge_prob_range");
      if (!r.is_array() || r.size() != 2) throw ConfigError("edge_prob_range must be [lo, hi]");
      cfg.encoder.edge_prob_range = {r[0].get<double>(), r[1].get<double>()};
    }
    cfg.encoder.pair_perturb_prob = e.value("pair_perturb_prob", cfg.encoder.pair_perturb_prob);
    cfg.encoder.pair_permute_prob = e.value("pair_permute_prob", cfg.encoder.pair_permute_prob);
    if (e.contains("perturb_flip_range")) {
      const auto& r = e.at("perturb_flip_range");
      if (!r.is_array() || r.size() != 2) throw ConfigError("perturb_flip_range must be [lo, hi]");
      cfg.encoder.perturb_flip_range = {r[0].get<double>(), r[1].get<double>()};
    }
    cfg.encoder.checkpoint_every = e.value("checkpoint_every", cfg.encoder.checkpoint_every);
  }

  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    if (o.contains("kind")) {
      std::string kind = o.at("kind").get<std::string>();
      if (kind == "synthetic")
        cfg.oracle.kind = OracleKind::Synthetic;
      else if (kind == "tabular")
        cfg.oracle.kind = OracleKind::Tabular;
      else
        throw ConfigError("oracle.kind must be 'synthetic' or 'tabular'");
    }
    if (o.contains("synthetic")) {
      const auto& s = o.at("synthetic");
      auto& syn = cfg.oracle.synthetic;
      syn.w_longest_path = s.value("w_longest_path", syn.w_longest_path);
      syn.w_mean_in_degree = s.value("w_mean_in_degree", syn.w_mean_in_degree);
      syn.w_op_mix = s.value("w_op_mix", syn.w_op_mix);
      syn.bias = s.value("bias", syn.bias);
      syn.noise_sigma = s.value("noise_sigma", syn.noise_sigma);
      syn.rng_seed = s.value("seed", syn.rng_seed);
      syn.hash_iterations = s.value("hash_iterations", syn.hash_iterations);
    }
    cfg.oracle.table_path = o.value("table_path", cfg.oracle.table_path);
    cfg.oracle.lambda = o.value("lambda", cfg.oracle.lambda);
    if (o.contains("missing_policy")) {
      std::string policy = o.at("missing_policy").get<std::string>();
      if (policy == "fail")
        cfg.oracle.missing_policy = MissingPolicy::Fail;
      else if (policy == "skip")
        cfg.oracle.missing_policy = MissingPolicy::Skip;
      else
        throw ConfigError("oracle.missing_policy must be 'fail' or 'skip'");
    }
  }

  if (j.contains("estimator")) {
    const auto& e = j.at("estimator");
    cfg.estimator.sample_budget = e.value("sample_budget", cfg.estimator.sample_budget);
    if (e.contains("train")) cfg.estimator.train = parse_train(e.at("train"), cfg.estimator.train);
    if (e.contains("hidden")) cfg.estimator.hidden = e.at("hidden").get<std::vector<int>>();
    cfg.estimator.finetune_epochs = e.value("finetune_epochs", cfg.estimator.finetune_epochs);
    cfg.estimator.batch_epochs = e.value("batch_epochs", cfg.estimator.batch_epochs);
  }

  if (j.contains("search")) {
    const auto& s = j.at("search");
    cfg.search.pool_size = s.value("pool_size", cfg.search.pool_size);
    cfg.search.evaluate_best = s.value("evaluate_best", cfg.search.evaluate_best);
  }

  validate(cfg);
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  j["search_space"] = {{"n", cfg.space.n},
                       {"edge_prob", cfg.space.edge_prob},
                       {"op_palette", palette_to_json(cfg.space.op_palette)},
                       {"channels", cfg.space.channels},
                       {"resolution", {cfg.space.resolution.height, cfg.space.resolution.width}},
                       {"require_single_source", cfg.space.require_single_source}};
  j["encoder"] = {
      {"d", cfg.encoder.d},
      {"wl",
       {{"h", cfg.encoder.wl.h},
        {"use_ops_as_initial_labels", cfg.encoder.wl.use_ops_as_initial_labels}}},
      {"pair_count", cfg.encoder.pair_count},
      {"train", train_to_json(cfg.encoder.train)},
      {"hidden", cfg.encoder.hidden},
      {"use_op_onehots", cfg.encoder.use_op_onehots},
      {"edge_prob_range", {cfg.encoder.edge_prob_range.first, cfg.encoder.edge_prob_range.second}},
      {"pair_perturb_prob", cfg.encoder.pair_perturb_prob},
      {"pair_permute_prob", cfg.encoder.pair_permute_prob},
      {"perturb_flip_range",
       {cfg.encoder.perturb_flip_range.first, cfg.encoder.perturb_flip_range.second}},
      {"checkpoint_every", cfg.encoder.checkpoint_every}};
  j["oracle"] = {
      {"kind", cfg.oracle.kind == OracleKind::Synthetic ? "synthetic" : "tabular"},
      {"synthetic",
       {{"w_longest_path", cfg.oracle.synthetic.w_longest_path},
        {"w_mean_in_degree", cfg.oracle.synthetic.w_mean_in_degree},
        {"w_op_mix", cfg.oracle.synthetic.w_op_mix},
        {"bias", cfg.oracle.synthetic.bias},
        {"noise_sigma", cfg.oracle.synthetic.noise_sigma},
        {"seed", cfg.oracle.synthetic.rng_seed},
        {"hash_iterations", cfg.oracle.synthetic.hash_iterations}}},
      {"table_path", cfg.oracle.table_path},
      {"lambda", cfg.oracle.lambda},
      {"missing_policy", cfg.oracle.missing_policy == MissingPolicy::Fail ? "fail" : "skip"}};
  j["estimator"] = {{"sample_budget", cfg.estimator.sample_budget},
                    {"train", train_to_json(cfg.estimator.train)},
                    {"hidden", cfg.estimator.hidden},
                    {"finetune_epochs", cfg.estimator.finetune_epochs},
                    {"batch_epochs", cfg.estimator.batch_epochs}};
  j["search"] = {{"pool_size", cfg.search.pool_size},
                 {"evaluate_best", cfg.search.evaluate_best}};
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override,
                          std::optional<std::string> output_override,
                          std::optional<int> workers_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }

  RunConfig cfg;
  try {
    cfg = run_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field error in " + path.string() + ": " + e.what());
  }

  if (!j.contains("seed")) {
    if (const char* env = std::getenv("GEMNAS_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
  }
  if (seed_override) cfg.seed = *seed_override;
  if (output_override) cfg.output_dir = *output_override;
  if (workers_override) cfg.workers = *workers_override;
  return cfg;
}

void write_effective_config(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "effective_config.json");
  if (!out)
    throw std::runtime_error("cannot write effective config in " + out_dir.string());
  out << run_config_to_json(cfg).dump(2) << '\n';
}

}  // namespace gemnas
