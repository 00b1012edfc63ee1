#include "gemnas/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "gemnas/errors.hpp"
#include "gemnas/parallel.hpp"
#include "gemnas/wl_kernel.hpp"

namespace gemnas {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TrainConfig resolve_seed(TrainConfig cfg, std::uint64_t global, std::string_view tag) {
  // Block seed 0 means "derive from the run seed".
  if (cfg.rng_seed == 0) cfg.rng_seed = mix_seed(global, tag);
  return cfg;
}

EncoderTrainOptions encoder_options(const RunConfig& cfg) {
  EncoderTrainOptions opt;
  opt.pair_count = cfg.encoder.pair_count;
  opt.n = cfg.space.n;
  opt.d = cfg.encoder.d;
  opt.hidden = cfg.encoder.hidden;
  opt.train = resolve_seed(cfg.encoder.train, cfg.seed, "encoder-train");
  opt.wl = cfg.encoder.wl;
  opt.use_op_onehots = cfg.encoder.use_op_onehots;
  opt.op_vocab = cfg.space.op_palette;
  opt.palette = cfg.space.op_palette;
  opt.edge_prob_range = cfg.encoder.edge_prob_range;
  opt.pair_perturb_prob = cfg.encoder.pair_perturb_prob;
  opt.pair_permute_prob = cfg.encoder.pair_permute_prob;
  opt.perturb_flip_range = cfg.encoder.perturb_flip_range;
  opt.checkpoint_every = cfg.encoder.checkpoint_every;
  opt.workers = cfg.effective_workers();
  if (cfg.space.require_single_source) {
    auto palette = cfg.space.op_palette;
    auto range = cfg.encoder.edge_prob_range;
    int n = cfg.space.n;
    opt.base_sampler = [palette, range, n](Rng& rng) {
      while (true) {
        Dag dag = random_dag_from(rng, n, rng.next_uniform(range.first, range.second), palette);
        bool single = true;
        for (int v = 1; v < n && single; ++v) single = dag.in_degree(v) >= 1;
        if (single) return dag;
      }
    };
  }
  return opt;
}

}  // namespace

OracleHandle make_oracle(const RunConfig& cfg) {
  OracleHandle handle;
  if (cfg.oracle.kind == OracleKind::Synthetic) {
    handle.oracle = std::make_unique<SyntheticOracle>(cfg.oracle.synthetic, cfg.space.channels,
                                                      cfg.space.resolution);
  } else {
    handle.table = std::make_unique<BenchmarkTable>(BenchmarkTable::load(cfg.oracle.table_path));
    handle.oracle = std::make_unique<TabularOracle>(*handle.table);
  }
  return handle;
}

std::function<Dag(Rng&)> make_space_sampler(const SearchSpaceConfig& space) {
  SearchSpaceConfig s = space;
  return [s](Rng& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Dag dag = random_dag_from(rng, s.n, s.edge_prob, s.op_palette);
      if (s.require_single_source) {
        bool single = true;
        for (int v = 1; v < s.n && single; ++v) single = dag.in_degree(v) >= 1;
        if (!single) continue;
      }
      try {
        prune_to_cell(dag, s.channels, s.resolution);
        return dag;
      } catch (const DegenerateCellError&) {
        continue;
      }
    }
    throw std::runtime_error("space sampler: could not draw a non-degenerate cell");
  };
}

std::function<Dag(Rng&)> make_table_sampler(const BenchmarkTable& table) {
  std::vector<std::size_t> with_dags;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (table.entry(i).dag) with_dags.push_back(i);
  if (with_dags.empty())
    throw ConfigError("benchmark table carries no architectures to sample from");
  return [&table, with_dags](Rng& rng) {
    return *table.entry(with_dags[rng.next_index(with_dags.size())]).dag;
  };
}

std::function<Dag(Rng&)> make_run_sampler(const RunConfig& cfg, const OracleHandle& oracle) {
  if (oracle.table) {
    for (std::size_t i = 0; i < oracle.table->size(); ++i)
      if (oracle.table->entry(i).dag) return make_table_sampler(*oracle.table);
  }
  return make_space_sampler(cfg.space);
}

std::filesystem::path cmd_train_encoder(const RunConfig& cfg,
                                        const std::filesystem::path& out_dir) {
  write_effective_config(cfg, out_dir);
  EncoderTrainOptions opt = encoder_options(cfg);
  EncoderTrainResult result = train_encoder(opt);

  nlohmann::json meta;
  meta["seed"] = opt.train.rng_seed;
  meta["pair_count"] = opt.pair_count;
  std::filesystem::path bundle_dir = out_dir / "encoder";
  save_bundle(result.bundle, bundle_dir, meta);

  std::ofstream csv(out_dir / "loss_history.csv");
  if (!csv) throw std::runtime_error("cannot write loss history in " + out_dir.string());
  csv << "iteration,similarity_loss,reconstruction_loss,total_loss\n";
  for (const auto& cp : result.history)
    csv << cp.iteration << ',' << fmt_double(cp.similarity_loss) << ','
        << fmt_double(cp.reconstruction_loss) << ',' << fmt_double(cp.total_loss) << '\n';
  return bundle_dir;
}

void save_predictor(const Predictor& p, const std::filesystem::path& dir,
                    const nlohmann::json& meta) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "gemnas-predictor-v1";
  manifest["d"] = p.d;
  manifest["net_file"] = "predictor.mlp";
  if (!meta.is_null()) manifest["meta"] = meta;
  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("save_predictor: cannot write manifest in " + dir.string());
  mf << manifest.dump(2) << '\n';
  save_mlp(p.net, dir / "predictor.mlp", nlohmann::json());
}

Predictor load_predictor(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("load_predictor: cannot open manifest in " + dir.string());
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.value("format", "") != "gemnas-predictor-v1")
    throw std::runtime_error("load_predictor: unrecognized format");
  Predictor p;
  p.d = manifest.at("d").get<int>();
  p.net = load_mlp(dir / manifest.at("net_file").get<std::string>()).first;
  if (p.net.input_dim() != p.d)
    throw std::runtime_error("load_predictor: checkpoint dimensions are inconsistent");
  return p;
}

EstimatorRunStats cmd_build_estimator(const RunConfig& cfg,
                                      const std::filesystem::path& encoder_dir,
                                      const std::filesystem::path& out_dir) {
  write_effective_config(cfg, out_dir);
  EncoderBundle bundle = load_bundle(encoder_dir);
  OracleHandle oracle = make_oracle(cfg);

  std::ofstream log(out_dir / "samples.ndjson");
  if (!log) throw std::runtime_error("cannot write sample log in " + out_dir.string());

  EstimatorRunStats stats;
  EstimatorOptions opt;
  opt.sample_budget = cfg.estimator.sample_budget;
  opt.train = resolve_seed(cfg.estimator.train, cfg.seed, "estimator-train");
  opt.lambda = cfg.oracle.lambda;
  opt.hidden = cfg.estimator.hidden;
  opt.finetune_epochs = cfg.estimator.finetune_epochs;
  opt.skip_missing = cfg.oracle.missing_policy == MissingPolicy::Skip;
  opt.sampler = make_run_sampler(cfg, oracle);
  opt.on_sample = [&](int index, const Dag& dag, const Evaluation& eval, double score) {
    ++stats.accepted;
    nlohmann::json rec;
    rec["index"] = index;
    rec["dag"] = dag.to_json();
    rec["accuracy"] = eval.accuracy;
    rec["mac_millions"] = eval.mac_millions;
    rec["score"] = score;
    log << rec.dump() << '\n';
  };

  Predictor p = build_estimator(*oracle.oracle, bundle, opt);
  stats.skipped = cfg.estimator.sample_budget - stats.accepted;
  if (stats.skipped > 0)
    std::cerr << "warning: " << stats.skipped << " of " << cfg.estimator.sample_budget
              << " sampled architectures were missing from the table and skipped\n";

  nlohmann::json meta;
  meta["lambda"] = opt.lambda;
  meta["sample_budget"] = opt.sample_budget;
  meta["accepted_samples"] = stats.accepted;
  meta["seed"] = opt.train.rng_seed;
  meta["oracle"] = cfg.oracle.kind == OracleKind::Synthetic ? "synthetic" : "tabular";
  save_predictor(p, out_dir / "predictor", meta);
  return stats;
}

SearchResult cmd_search(const RunConfig& cfg, const std::filesystem::path& encoder_dir,
                        const std::filesystem::path& predictor_dir,
                        const std::filesystem::path& out_dir,
                        std::optional<std::filesystem::path> surface_csv) {
  write_effective_config(cfg, out_dir);
  EncoderBundle bundle = load_bundle(encoder_dir);
  Predictor p = load_predictor(predictor_dir);
  OracleHandle oracle = make_oracle(cfg);
  auto sampler = make_run_sampler(cfg, oracle);

  std::vector<PoolSample> pool;
  std::function<void(const PoolSample&)> on_scored;
  if (surface_csv) {
    pool.reserve(cfg.search.pool_size);
    on_scored = [&pool](const PoolSample& s) { pool.push_back(s); };
  }

  SearchResult result =
      bootstrap_optimize(bundle, p, sampler, cfg.search.pool_size, mix_seed(cfg.seed, "search-pool"),
                         cfg.effective_workers(), on_scored);

  if (cfg.search.evaluate_best)
    result.true_score = efficiency_score(oracle.oracle->evaluate(result.best_dag), cfg.oracle.lambda);

  std::ofstream out(out_dir / "result.json");
  if (!out) throw std::runtime_error("cannot write result in " + out_dir.string());
  out << result.to_json().dump(2) << '\n';

  if (surface_csv) {
    std::vector<Eigen::VectorXd> embeddings;
    embeddings.reserve(pool.size());
    for (const auto& s : pool) embeddings.push_back(s.embedding);
    PcaResult pca = pca_project(embeddings, 2);

    std::ofstream csv(*surface_csv);
    if (!csv) throw std::runtime_error("cannot write surface csv " + surface_csv->string());
    csv << "x,y,predicted_score\n";
    for (std::size_t i = 0; i < pool.size(); ++i)
      csv << fmt_double(pca.projected(static_cast<Eigen::Index>(i), 0)) << ','
          << fmt_double(pca.projected(static_cast<Eigen::Index>(i), 1)) << ','
          << fmt_double(pool[i].predicted_score) << '\n';
  }
  return result;
}

double record_score(const CorpusRecord& rec, double lambda) {
  return efficiency_score(rec.evaluation, lambda);
}

void cmd_make_corpus(const RunConfig& cfg, int count, const std::filesystem::path& out_path) {
  OracleHandle oracle = make_oracle(cfg);
  auto sampler = make_run_sampler(cfg, oracle);
  auto corpus = make_corpus(count, sampler, *oracle.oracle, cfg.oracle.synthetic.hash_iterations,
                            mix_seed(cfg.seed, "corpus"), cfg.effective_workers());
  save_corpus(corpus, out_path);
}

void cmd_make_table(const RunConfig& cfg, int count, const std::filesystem::path& out_path) {
  OracleHandle oracle = make_oracle(cfg);
  auto sampler = make_run_sampler(cfg, oracle);
  auto corpus = make_corpus(count, sampler, *oracle.oracle, cfg.oracle.synthetic.hash_iterations,
                            mix_seed(cfg.seed, "corpus"), cfg.effective_workers());
  BenchmarkTableMetadata meta;
  meta.n = cfg.space.n;
  meta.op_palette = cfg.space.op_palette;
  meta.hash_iterations = cfg.oracle.synthetic.hash_iterations;
  corpus_to_table(corpus, meta).save(out_path);
}

std::string method_name(EmbeddingMethod m) {
  switch (m) {
    case EmbeddingMethod::RawAdjacency:
      return "adjacency";
    case EmbeddingMethod::PlainAutoencoder:
      return "autoencoder";
    case EmbeddingMethod::KernelGuided:
      return "kernel-guided";
  }
  throw std::logic_error("method_name: bad value");
}

EmbeddingMethod parse_method(const std::string& name) {
  if (name == "adjacency") return EmbeddingMethod::RawAdjacency;
  if (name == "autoencoder") return EmbeddingMethod::PlainAutoencoder;
  if (name == "kernel-guided") return EmbeddingMethod::KernelGuided;
  throw ConfigError("unknown embedding method: '" + name + "'");
}

std::vector<CorrelationCell> correlation_protocol(const std::vector<CorpusRecord>& corpus,
                                                  const RunConfig& cfg, double split_fraction,
                                                  std::span<const int> proportions,
                                                  std::span<const EmbeddingMethod> methods,
                                                  std::uint64_t seed) {
  if (corpus.size() < 4) throw std::invalid_argument("correlation_protocol: corpus too small");
  if (split_fraction <= 0.0 || split_fraction >= 1.0)
    throw std::invalid_argument("correlation_protocol: split fraction must be in (0, 1)");
  for (int p : proportions)
    if (p < 1 || p > 100)
      throw std::invalid_argument("correlation_protocol: proportions must be in [1, 100]");

  // Seeded shuffle, then a fixed train/test split shared by all methods.
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(seed, "protocol-split"));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[shuffle_rng.next_index(i)]);

  const std::size_t n_train_pool =
      std::max<std::size_t>(1, static_cast<std::size_t>(split_fraction * corpus.size()));
  std::vector<std::size_t> train_pool(order.begin(), order.begin() + n_train_pool);
  std::vector<std::size_t> test_idx(order.begin() + n_train_pool, order.end());
  if (test_idx.empty()) throw std::invalid_argument("correlation_protocol: empty test split");

  std::vector<double> test_y;
  test_y.reserve(test_idx.size());
  for (std::size_t i : test_idx) test_y.push_back(record_score(corpus[i], cfg.oracle.lambda));

  std::vector<CorrelationCell> cells;
  for (EmbeddingMethod method : methods) {
    // Feature extractor per method; encoders are trained once and reused
    // across proportions.
    std::function<Eigen::VectorXd(const Dag&)> features;
    int feature_dim = 0;
    EncoderBundle bundle;
    if (method == EmbeddingMethod::RawAdjacency) {
      feature_dim = cfg.space.n * (cfg.space.n - 1) / 2;
      features = [](const Dag& dag) {
        std::vector<double> flat = flatten_upper_triangle(dag);
        return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()))
            .eval();
      };
    } else {
      EncoderTrainOptions opt = encoder_options(cfg);
      opt.kernel_guided = method == EmbeddingMethod::KernelGuided;
      opt.train.rng_seed = mix_seed(seed, "protocol-" + method_name(method));
      bundle = train_encoder(opt).bundle;
      feature_dim = prediction_feature_dim(bundle);
      features = [&bundle](const Dag& dag) { return prediction_features(dag, bundle); };
    }

    std::vector<Eigen::VectorXd> test_features;
    test_features.reserve(test_idx.size());
    for (std::size_t i : test_idx) test_features.push_back(features(corpus[i].dag));

    for (int proportion : proportions) {
      const std::size_t n_train = std::max<std::size_t>(
          1, static_cast<std::size_t>(train_pool.size() * proportion / 100.0));
      std::vector<ScoredSample> samples;
      samples.reserve(n_train);
      for (std::size_t k = 0; k < n_train; ++k) {
        const auto& rec = corpus[train_pool[k]];
        samples.push_back(
            ScoredSample{features(rec.dag), record_score(rec, cfg.oracle.lambda), rec.hash});
      }

      TrainConfig fit_cfg = cfg.estimator.train;
      fit_cfg.rng_seed = mix_seed(seed, method_name(method) + "-" + std::to_string(proportion));
      Predictor p = fit_predictor(std::move(samples), feature_dim, fit_cfg,
                                  cfg.estimator.hidden, cfg.estimator.batch_epochs);

      std::vector<double> predicted(test_idx.size());
      for (std::size_t i = 0; i < test_idx.size(); ++i) predicted[i] = predict(p, test_features[i]);

      CorrelationCell cell;
      cell.method = method;
      cell.proportion_percent = proportion;
      cell.n_train = static_cast<int>(n_train);
      cell.n_test = static_cast<int>(test_idx.size());
      try {
        cell.kendall_tau = kendall_tau(predicted, test_y);
        cell.pearson_r = pearson(predicted, test_y);
      } catch (const UndefinedStatisticError&) {
        // A collapsed predictor ranks nothing; score it as zero correlation.
        cell.kendall_tau = 0.0;
        cell.pearson_r = 0.0;
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<CorrelationCell> cmd_eval_correlation(const RunConfig& cfg,
                                                  const std::filesystem::path& corpus_path,
                                                  double split_fraction,
                                                  std::span<const int> proportions,
                                                  std::span<const EmbeddingMethod> methods,
                                                  const std::filesystem::path& out_csv) {
  if (!std::filesystem::exists(corpus_path))
    throw ConfigError("corpus file not found: " + corpus_path.string());
  std::vector<CorpusRecord> corpus = load_corpus(corpus_path);
  std::vector<CorrelationCell> cells =
      correlation_protocol(corpus, cfg, split_fraction, proportions, methods, cfg.seed);

  if (out_csv.has_parent_path()) std::filesystem::create_directories(out_csv.parent_path());
  std::ofstream csv(out_csv);
  if (!csv) throw std::runtime_error("cannot write correlation csv " + out_csv.string());
  csv << "method,proportion,kendall_tau,pearson_r,n_train,n_test\n";
  for (const auto& c : cells)
    csv << method_name(c.method) << ',' << c.proportion_percent << ','
        << fmt_double(c.kendall_tau) << ',' << fmt_double(c.pearson_r) << ',' << c.n_train << ','
        << c.n_test << '\n';
  return cells;
}

}  // namespace gemnas
