#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lxm/corpus.hpp"
#include "lxm/embeddings.hpp"
#include "lxm/seqmodel.hpp"
#include "lxm/synth.hpp"

namespace lxm::pipeline {

namespace fs = std::filesystem;

struct Artifact {
  std::string path;
  std::string sha256;
};

/// Inputs and outputs of one stage with their content hashes.
struct StageRecord {
  std::string name;
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;
  std::vector<std::string> notices;
  std::string started;
  std::string finished;
};

nlohmann::json to_json(const StageRecord& record);

// ---- stages; each reads and writes only files ----

/// Raw UTF-8 text, or CoNLL-U when `conllu` is set, to a token file. CoNLL-U
/// forms are cleaned one by one and keep their tags.
StageRecord clean_stage(const fs::path& input, const fs::path& out, const corpus::CleaningRules& rules,
                        bool conllu = false);

/// Writes tokens.txt and lexicon.tsv into `out_dir`.
StageRecord synth_stage(const synth::PcfgGrammar& grammar, std::size_t sentences, std::uint64_t seed,
                        const fs::path& out_dir);

/// Trains skip-gram vectors on the token files. Writes the table, and the
/// vocabulary when `out_vocab` is non-empty.
StageRecord embed_stage(const std::vector<fs::path>& token_files, const embed::SkipGramConfig& config,
                        const fs::path& out_table, const fs::path& out_vocab = {});

/// Validates an external word2vec text table and writes a normalized copy.
StageRecord import_embeddings_stage(const fs::path& input, const fs::path& out_table);

/// Train/test boundary: explicit test documents (by file stem) or the
/// fraction of windows, in stream order, used for training.
struct SplitConfig {
  std::vector<std::string> test_documents;
  double train_fraction = 0.8;
};

struct TrainStageConfig {
  std::vector<fs::path> tokens;
  fs::path embeddings;
  SplitConfig split;
  model::TrainConfig train;
};

/// Parses a training config; relative paths resolve against `base`.
TrainStageConfig train_stage_config_from_json(const nlohmann::json& j, const fs::path& base);

/// Writes model.lxm and loss.csv ("epoch,loss") into `out_dir`.
StageRecord train_stage(const TrainStageConfig& config, const fs::path& out_dir, bool verbose = false);

struct ProbeOptions {
  fs::path model;
  fs::path embeddings;
  std::vector<fs::path> test_tokens;
  /// Optional form -> tag lexicon; fills tokens that carry no tag.
  std::optional<fs::path> tags;
  /// Leading fraction of the window stream to skip (the training part of a
  /// fractional split). 0 keeps everything.
  double skip_fraction = 0.0;
  std::size_t cap = 2000;
  std::size_t min_count = 10;
  std::uint64_t seed = 1;
  int batch = 64;
};

/// Writes layer_<k>.csv for every layer into `out_dir`.
StageRecord probe_stage(const ProbeOptions& options, const fs::path& out_dir);

struct AnalyzeOptions {
  std::size_t min_count = 10;
  /// Pair labels (horizon 2) keep this many most frequent pairs; the rest
  /// become OTHER, which is plotted but left out of the GDV.
  std::size_t top_pairs = 10;
};

/// Reads layer_<k>.csv files and writes gdv.csv, mds_layer_<k>.csv and
/// analysis.json into `out_dir`.
StageRecord analyze_stage(const fs::path& activations_dir, const fs::path& out_dir, const AnalyzeOptions& options);

/// Renders scatter_layer_<k>.svg and gdv_curve.svg from an analysis directory.
StageRecord report_stage(const fs::path& run_dir, const fs::path& out_dir);

// ---- end to end ----

struct CorpusConfig {
  /// "bundled" or a grammar file; empty when the corpus comes from files.
  std::string grammar;
  std::size_t sentences = 3000;
  std::vector<fs::path> texts;
  std::vector<fs::path> conllu;
  std::optional<fs::path> lexicon;
  std::optional<fs::path> rules;
};

struct ExperimentConfig {
  CorpusConfig corpus;
  SplitConfig split;
  /// "train" or "load".
  std::string embedding_source = "train";
  std::optional<fs::path> embedding_path;
  embed::SkipGramConfig skipgram;
  model::TrainConfig train;
  std::size_t probe_cap = 2000;
  std::size_t min_count = 10;
  int probe_batch = 64;
  std::size_t top_pairs = 10;
  std::uint64_t seed = 1;
  fs::path output = "run";

  /// Throws ConfigError on bad values or a referenced file that is missing.
  void validate() const;
};

/// Accepts either a config object or a manifest (its "config" member).
/// Relative paths resolve against `base`. A top-level "seed" is the default
/// for every stage that draws random numbers.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const fs::path& base);
nlohmann::json experiment_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment(const fs::path& path);

/// Runs every stage into `config.output` and writes manifest.json there.
nlohmann::json run_experiment(const ExperimentConfig& config, bool verbose = false);

std::string layer_name(int index, int lstm_layers);

}  // namespace lxm::pipeline
