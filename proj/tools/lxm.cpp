// lxm: corpus preparation, BiLSTM training, layer probing and GDV/MDS reports.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lxm/corpus.hpp"
#include "lxm/error.hpp"
#include "lxm/pipeline.hpp"
#include "lxm/synth.hpp"
#include "lxm/util.hpp"

namespace fs = std::filesystem;
namespace pl = lxm::pipeline;

namespace {

void print(const pl::StageRecord& r) { std::cout << pl::to_json(r).dump(2) << '\n'; }

std::vector<fs::path> as_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train a BiLSTM next-word predictor and measure word-class clustering across its layers"};
  app.set_version_flag("--version", std::string(LXM_VERSION));
  app.require_subcommand(1);

  // clean
  auto* clean = app.add_subcommand("clean", "Tokenize and normalize a text (or CoNLL-U) file");
  std::string clean_in, clean_out, clean_rules;
  bool clean_conllu = false;
  clean->add_option("--in", clean_in, "UTF-8 input file")->required();
  clean->add_option("--out", clean_out, "token file to write")->required();
  clean->add_option("--rules", clean_rules, "cleaning rules (JSON); default: built-in table");
  clean->add_flag("--conllu", clean_conllu, "input is CoNLL-U; tags are kept");

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a tagged corpus from a sentence grammar");
  std::string syn_grammar, syn_out;
  std::size_t syn_sentences = 3000;
  std::uint64_t syn_seed = 1;
  syn->add_option("--grammar", syn_grammar, "grammar JSON; default: bundled 4-class grammar");
  syn->add_option("--sentences", syn_sentences, "number of sentences")->capture_default_str();
  syn->add_option("--seed", syn_seed, "random seed")->capture_default_str();
  syn->add_option("--out", syn_out, "output directory (tokens.txt, lexicon.tsv)")->required();

  // embed
  auto* emb = app.add_subcommand("embed", "Train skip-gram vectors, or import an existing table");
  std::vector<std::string> emb_tokens;
  std::string emb_out, emb_vocab, emb_load;
  lxm::embed::SkipGramConfig sg;
  emb->add_option("--tokens", emb_tokens, "token files, one per document");
  emb->add_option("--load", emb_load, "existing word2vec text table to import");
  emb->add_option("--out", emb_out, "embedding table to write")->required();
  emb->add_option("--vocab", emb_vocab, "also write the vocabulary here");
  emb->add_option("--dim", sg.dim, "vector dimension")->capture_default_str();
  emb->add_option("--window", sg.context_window, "context window")->capture_default_str();
  emb->add_option("--negatives", sg.negatives, "negative samples per pair")->capture_default_str();
  emb->add_option("--epochs", sg.epochs, "passes over the corpus")->capture_default_str();
  emb->add_option("--lr", sg.lr, "initial learning rate")->capture_default_str();
  emb->add_option("--seed", sg.seed, "random seed")->capture_default_str();

  // train
  auto* trn = app.add_subcommand("train", "Train the sequence model");
  std::string trn_config, trn_out;
  bool trn_verbose = false;
  trn->add_option("--config", trn_config, "training config (JSON)")->required();
  trn->add_option("--out", trn_out, "output directory (model.lxm, loss.csv)")->required();
  trn->add_flag("-v,--verbose", trn_verbose, "log every epoch");

  // probe
  auto* prb = app.add_subcommand("probe", "Record per-layer activations for held-out windows");
  pl::ProbeOptions po;
  std::string prb_model, prb_emb, prb_tags, prb_out;
  std::vector<std::string> prb_test;
  prb->add_option("--model", prb_model, "model checkpoint")->required();
  prb->add_option("--embeddings", prb_emb, "embedding table used in training")->required();
  prb->add_option("--test", prb_test, "token files")->required();
  prb->add_option("--tags", prb_tags, "form<TAB>TAG lexicon for untagged tokens");
  prb->add_option("--train-fraction", po.skip_fraction, "leading fraction of windows to skip")->capture_default_str();
  prb->add_option("--cap", po.cap, "maximum points per layer")->capture_default_str();
  prb->add_option("--min-count", po.min_count, "smallest class kept when subsampling")->capture_default_str();
  prb->add_option("--seed", po.seed, "subsampling seed")->capture_default_str();
  prb->add_option("--batch", po.batch, "forward batch size")->capture_default_str();
  prb->add_option("--out", prb_out, "output directory (layer_<k>.csv)")->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "GDV per layer and 2D MDS projections");
  std::string ana_in, ana_out;
  pl::AnalyzeOptions ao;
  ana->add_option("--activations", ana_in, "directory with layer_<k>.csv")->required();
  ana->add_option("--out", ana_out, "output directory")->required();
  ana->add_option("--min-count", ao.min_count, "smallest class scored in every layer")->capture_default_str();
  ana->add_option("--top-pairs", ao.top_pairs, "pair labels kept before grouping into OTHER")->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "Render SVG scatter plots and the GDV curve");
  std::string rep_run, rep_out;
  rep->add_option("--run", rep_run, "directory with gdv.csv and mds_layer_<k>.csv")->required();
  rep->add_option("--out", rep_out, "output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Run every stage from an experiment config or manifest");
  std::string run_config, run_out;
  bool run_verbose = false;
  run->add_option("--config", run_config, "experiment config or manifest.json")->required();
  run->add_option("--out", run_out, "output directory (overrides the config)");
  run->add_flag("-v,--verbose", run_verbose, "log progress");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*clean) {
      const auto rules = clean_rules.empty() ? lxm::corpus::CleaningRules::table_defaults()
                                             : lxm::corpus::load_rules(clean_rules);
      print(pl::clean_stage(clean_in, clean_out, rules, clean_conllu));
    } else if (*syn) {
      const auto grammar = syn_grammar.empty() ? lxm::synth::bundled_grammar() : lxm::synth::load_grammar(syn_grammar);
      print(pl::synth_stage(grammar, syn_sentences, syn_seed, syn_out));
    } else if (*emb) {
      if (emb_load.empty() == emb_tokens.empty()) throw lxm::ConfigError("embed needs exactly one of --tokens or --load");
      if (!emb_load.empty()) {
        print(pl::import_embeddings_stage(emb_load, emb_out));
      } else {
        print(pl::embed_stage(as_paths(emb_tokens), sg, emb_out, emb_vocab));
      }
    } else if (*trn) {
      if (!fs::exists(trn_config)) throw lxm::IoError("config file not found: " + trn_config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(lxm::read_file(trn_config));
      } catch (const nlohmann::json::parse_error& e) {
        throw lxm::ParseError(trn_config, 0, e.what());
      }
      const auto cfg = pl::train_stage_config_from_json(j, fs::path(trn_config).parent_path());
      print(pl::train_stage(cfg, trn_out, trn_verbose));
    } else if (*prb) {
      po.model = prb_model;
      po.embeddings = prb_emb;
      po.test_tokens = as_paths(prb_test);
      if (!prb_tags.empty()) po.tags = fs::path(prb_tags);
      print(pl::probe_stage(po, prb_out));
    } else if (*ana) {
      print(pl::analyze_stage(ana_in, ana_out, ao));
    } else if (*rep) {
      print(pl::report_stage(rep_run, rep_out));
    } else if (*run) {
      auto cfg = pl::load_experiment(run_config);
      if (!run_out.empty()) cfg.output = run_out;
      const auto manifest = pl::run_experiment(cfg, run_verbose);
      std::cout << (fs::path(cfg.output) / "manifest.json").string() << '\n';
    }
  } catch (const lxm::Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
