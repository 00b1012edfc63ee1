#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gemnas/commands.hpp"
#include "gemnas/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "run configuration file (json)")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out_dir, "override the config output directory");
  cmd->add_option("--workers", args.workers, "parallel worker bound (0 = auto)");
}

gemnas::RunConfig load(const CommonArgs& args) {
  return gemnas::load_run_config(args.config_path, args.seed, args.out_dir, args.workers);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gemnas: kernel-guided graph-embedding architecture search"};
  app.require_subcommand(1);

  CommonArgs train_args;
  auto* train = app.add_subcommand("train-encoder", "train the graph encoder/decoder pair");
  add_common(train, train_args);

  CommonArgs est_args;
  std::string est_encoder;
  auto* est = app.add_subcommand("build-estimator", "build the efficiency score predictor");
  add_common(est, est_args);
  est->add_option("--encoder", est_encoder, "encoder checkpoint directory (default <out>/encoder)");

  CommonArgs search_args;
  std::string search_encoder, search_predictor, surface_path;
  auto* search = app.add_subcommand("search", "bootstrap-optimize over a sampled pool");
  add_common(search, search_args);
  search->add_option("--encoder", search_encoder, "encoder checkpoint directory");
  search->add_option("--predictor", search_predictor, "predictor checkpoint directory");
  search->add_option("--surface", surface_path, "also write a 2-D PCA score surface csv");

  CommonArgs corr_args;
  std::string corpus_path, corr_out = "correlation.csv";
  double split_fraction = 0.6;
  std::vector<int> proportions = {10, 20, 30, 50, 70, 100};
  std::vector<std::string> method_names = {"adjacency", "autoencoder", "kernel-guided"};
  auto* corr = app.add_subcommand("eval-correlation",
                                  "train predictors per embedding method and data proportion");
  add_common(corr, corr_args);
  corr->add_option("--corpus", corpus_path, "evaluated corpus (ndjson)")->required();
  corr->add_option("--split", split_fraction, "train fraction of the corpus (default 0.6)");
  corr->add_option("--proportions", proportions, "training-data proportions in percent");
  corr->add_option("--methods", method_names, "methods: adjacency autoencoder kernel-guided");
  corr->add_option("--csv", corr_out, "output csv path");

  CommonArgs corpus_args;
  int corpus_count = 1000;
  std::string corpus_out = "corpus.ndjson";
  auto* mkcorpus = app.add_subcommand("make-corpus", "sample and evaluate a benchmark corpus");
  add_common(mkcorpus, corpus_args);
  mkcorpus->add_option("--count", corpus_count, "number of distinct architectures");
  mkcorpus->add_option("--file", corpus_out, "output ndjson path");

  CommonArgs table_args;
  int table_count = 10000;
  std::string table_out = "table.ndjson";
  auto* mktable = app.add_subcommand("make-table", "build a benchmark table from sampled cells");
  add_common(mktable, table_args);
  mktable->add_option("--count", table_count, "number of distinct entries");
  mktable->add_option("--file", table_out, "output table path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) {
      gemnas::RunConfig cfg = load(train_args);
      auto bundle_dir = gemnas::cmd_train_encoder(cfg, cfg.output_dir);
      std::cout << "encoder checkpoint: " << bundle_dir.string() << '\n';
    } else if (*est) {
      gemnas::RunConfig cfg = load(est_args);
      std::filesystem::path encoder_dir = est_encoder.empty()
                                              ? std::filesystem::path(cfg.output_dir) / "encoder"
                                              : std::filesystem::path(est_encoder);
      auto stats = gemnas::cmd_build_estimator(cfg, encoder_dir, cfg.output_dir);
      std::cout << "predictor checkpoint: "
                << (std::filesystem::path(cfg.output_dir) / "predictor").string() << " ("
                << stats.accepted << " samples)\n";
    } else if (*search) {
      gemnas::RunConfig cfg = load(search_args);
      std::filesystem::path encoder_dir =
          search_encoder.empty() ? std::filesystem::path(cfg.output_dir) / "encoder"
                                 : std::filesystem::path(search_encoder);
      std::filesystem::path predictor_dir =
          search_predictor.empty() ? std::filesystem::path(cfg.output_dir) / "predictor"
                                   : std::filesystem::path(search_predictor);
      std::optional<std::filesystem::path> surface;
      if (!surface_path.empty()) surface = surface_path;
      gemnas::SearchResult result =
          gemnas::cmd_search(cfg, encoder_dir, predictor_dir, cfg.output_dir, surface);
      std::cout << "result: " << (std::filesystem::path(cfg.output_dir) / "result.json").string()
                << " predicted_score=" << result.predicted_score;
      if (result.true_score) std::cout << " true_score=" << *result.true_score;
      std::cout << '\n';
    } else if (*corr) {
      gemnas::RunConfig cfg = load(corr_args);
      std::vector<gemnas::EmbeddingMethod> methods;
      for (const auto& name : method_names) methods.push_back(gemnas::parse_method(name));
      gemnas::cmd_eval_correlation(cfg, corpus_path, split_fraction, proportions, methods,
                                   corr_out);
      std::cout << "correlation table: " << corr_out << '\n';
    } else if (*mkcorpus) {
      gemnas::RunConfig cfg = load(corpus_args);
      gemnas::cmd_make_corpus(cfg, corpus_count, corpus_out);
      std::cout << "corpus: " << corpus_out << '\n';
    } else if (*mktable) {
      gemnas::RunConfig cfg = load(table_args);
      gemnas::cmd_make_table(cfg, table_count, table_out);
      std::cout << "table: " << table_out << '\n';
    }
  } catch (const gemnas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
