#include "lxm/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>
#include <set>

#include "lxm/error.hpp"
#include "lxm/geometry.hpp"
#include "lxm/probe.hpp"
#include "lxm/svg.hpp"
#include "lxm/util.hpp"

namespace lxm::pipeline {

using nlohmann::json;

namespace {

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Artifact hashed(const fs::path& path) { return {path.lexically_normal().string(), sha256_file(path)}; }

StageRecord begin(std::string name) {
  StageRecord r;
  r.name = std::move(name);
  r.started = now_utc();
  return r;
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw IoError(what + " not found: " + path.string());
}

corpus::Vocabulary table_vocab(const embed::EmbeddingTable& table) {
  corpus::Vocabulary v;
  for (const auto& f : table.forms()) v.add(f);
  return v;
}

std::vector<corpus::Document> read_documents(const std::vector<fs::path>& files) {
  std::vector<corpus::Document> docs;
  std::set<std::string> names;
  for (const auto& f : files) {
    require_file(f, "token file");
    docs.push_back(corpus::read_tagged_tokens(f));
    if (!names.insert(docs.back().name).second)
      throw ConfigError("two token files share the document name '" + docs.back().name + "'");
  }
  return docs;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : (base / path).lexically_normal();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!j.is_object()) throw ConfigError(section + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(section + ": unknown key '" + key + "'");
  }
}

fs::path layer_file(const fs::path& dir, const std::string& prefix, std::size_t k, const std::string& ext) {
  return dir / (prefix + std::to_string(k) + ext);
}

}  // namespace

json to_json(const StageRecord& r) {
  auto artifacts = [](const std::vector<Artifact>& list) {
    json a = json::array();
    for (const auto& x : list) a.push_back({{"path", x.path}, {"sha256", x.sha256}});
    return a;
  };
  return {{"name", r.name},       {"inputs", artifacts(r.inputs)}, {"outputs", artifacts(r.outputs)},
          {"notices", r.notices}, {"started", r.started},          {"finished", r.finished}};
}

std::string layer_name(int index, int lstm_layers) {
  if (index < lstm_layers) return "lstm" + std::to_string(index + 1);
  return index == lstm_layers ? "flatten" : "output";
}

StageRecord clean_stage(const fs::path& input, const fs::path& out, const corpus::CleaningRules& rules, bool conllu) {
  require_file(input, "input");
  rules.validate();
  auto rec = begin("clean");
  rec.inputs.push_back(hashed(input));
  std::vector<corpus::TaggedToken> tokens;
  if (conllu) {
    const auto parsed = corpus::read_conllu(input);
    if (parsed.unknown_tags)
      rec.notices.push_back(std::to_string(parsed.unknown_tags) + " rows with unknown UPOS mapped to X");
    for (const auto& t : parsed.tokens)
      for (auto& form : corpus::clean_text(t.form, rules)) tokens.push_back({std::move(form), t.tag});
  } else {
    for (auto& form : corpus::clean_text(read_file(input), rules)) tokens.push_back({std::move(form), std::nullopt});
  }
  corpus::write_tagged_tokens(tokens, out);
  rec.notices.push_back(std::to_string(tokens.size()) + " tokens");
  rec.outputs.push_back(hashed(out));
  rec.finished = now_utc();
  return rec;
}

StageRecord synth_stage(const synth::PcfgGrammar& grammar, std::size_t sentences, std::uint64_t seed,
                        const fs::path& out_dir) {
  auto rec = begin("synth");
  const auto tokens = synth::generate_corpus(grammar, sentences, seed);
  std::vector<std::string> forms;
  forms.reserve(tokens.size());
  for (const auto& t : tokens) forms.push_back(t.form);
  corpus::write_tokens(forms, out_dir / "tokens.txt");
  corpus::write_lexicon(grammar.tag_lexicon(), out_dir / "lexicon.tsv");
  rec.notices.push_back(std::to_string(tokens.size()) + " tokens from " + std::to_string(sentences) + " sentences");
  rec.outputs.push_back(hashed(out_dir / "tokens.txt"));
  rec.outputs.push_back(hashed(out_dir / "lexicon.tsv"));
  rec.finished = now_utc();
  return rec;
}

StageRecord embed_stage(const std::vector<fs::path>& token_files, const embed::SkipGramConfig& config,
                        const fs::path& out_table, const fs::path& out_vocab) {
  config.validate();
  auto rec = begin("embed");
  const auto docs = read_documents(token_files);
  for (const auto& f : token_files) rec.inputs.push_back(hashed(f));
  std::vector<std::vector<std::string>> forms;
  for (const auto& d : docs) {
    auto& v = forms.emplace_back();
    for (const auto& t : d.tokens) v.push_back(t.form);
  }
  const auto vocab = corpus::build_vocab(docs);
  const auto result = embed::train_skipgram(forms, vocab, config);
  embed::save_table(result.table, out_table);
  rec.outputs.push_back(hashed(out_table));
  if (!out_vocab.empty()) {
    corpus::write_vocab(vocab, out_vocab);
    rec.outputs.push_back(hashed(out_vocab));
  }
  rec.notices.push_back(std::to_string(vocab.type_count()) + " types, " + std::to_string(vocab.token_count()) +
                        " tokens");
  if (!result.epoch_loss.empty())
    rec.notices.push_back("final skip-gram loss " + format_double(result.epoch_loss.back()));
  rec.finished = now_utc();
  return rec;
}

StageRecord import_embeddings_stage(const fs::path& input, const fs::path& out_table) {
  auto rec = begin("embed");
  const auto table = embed::load_table(input);
  rec.inputs.push_back(hashed(input));
  embed::save_table(table, out_table);
  rec.outputs.push_back(hashed(out_table));
  rec.notices.push_back("loaded " + std::to_string(table.size()) + " vectors of dimension " +
                        std::to_string(table.dim()));
  rec.finished = now_utc();
  return rec;
}

namespace {

SplitConfig split_from_json(const json& j) {
  check_keys(j, {"train_fraction", "test_documents"}, "split");
  SplitConfig s;
  s.train_fraction = j.value("train_fraction", s.train_fraction);
  s.test_documents = j.value("test_documents", s.test_documents);
  if (s.test_documents.empty() && !(s.train_fraction > 0.0 && s.train_fraction < 1.0))
    throw ConfigError("split: train_fraction must lie in (0,1)");
  return s;
}

json split_to_json(const SplitConfig& s) {
  if (!s.test_documents.empty()) return {{"test_documents", s.test_documents}};
  return {{"train_fraction", s.train_fraction}};
}

corpus::SplitSpec split_spec(const SplitConfig& s, const std::vector<corpus::Document>& docs) {
  if (s.test_documents.empty()) return s.train_fraction;
  corpus::DocumentPartition p;
  for (const auto& name : s.test_documents) {
    bool found = false;
    for (std::size_t d = 0; d < docs.size(); ++d)
      if (docs[d].name == name) {
        p.test_documents.push_back(d);
        found = true;
      }
    if (!found) throw ConfigError("test document '" + name + "' is not among the token files");
  }
  return p;
}

}  // namespace

TrainStageConfig train_stage_config_from_json(const json& j, const fs::path& base) {
  TrainStageConfig c;
  try {
    check_keys(j, {"tokens", "embeddings", "split", "train"}, "training config");
    for (const auto& p : j.at("tokens").get<std::vector<std::string>>()) c.tokens.push_back(resolve(base, p));
    c.embeddings = resolve(base, j.at("embeddings").get<std::string>());
    if (j.contains("split")) c.split = split_from_json(j.at("split"));
    if (j.contains("train")) c.train = model::train_config_from_json(j.at("train"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  if (c.tokens.empty()) throw ConfigError("training config: no token files");
  return c;
}

StageRecord train_stage(const TrainStageConfig& config, const fs::path& out_dir, bool verbose) {
  config.train.validate();
  require_file(config.embeddings, "embedding file");
  auto rec = begin("train");
  const auto table = embed::load_table(config.embeddings);
  rec.inputs.push_back(hashed(config.embeddings));
  const auto docs = read_documents(config.tokens);
  for (const auto& f : config.tokens) rec.inputs.push_back(hashed(f));

  const auto vocab = table_vocab(table);
  auto seqs = corpus::make_sequences(docs, vocab, config.train.window, config.train.horizon);
  rec.notices.insert(rec.notices.end(), seqs.warnings.begin(), seqs.warnings.end());
  const auto split = corpus::split_samples(seqs.samples, split_spec(config.split, docs));
  if (split.train.empty()) throw ConfigError("no training windows");
  rec.notices.push_back(std::to_string(split.train.size()) + " training windows, " +
                        std::to_string(split.test.size()) + " held out");

  auto model = model::init_glorot(config.train.architecture(table.dim()), config.train.seed);
  const auto run = model::train(model, split.train, table, config.train,
                                [&](int epoch, double loss, const model::ModelParams&) {
                                  if (verbose)
                                    std::cerr << "[train] epoch " << epoch + 1 << '/' << config.train.epochs
                                              << " loss " << format_double(loss) << '\n';
                                });
  model::save_checkpoint(model, out_dir / "model.lxm");
  std::string loss = "epoch,loss\n";
  for (std::size_t e = 0; e < run.epoch_loss.size(); ++e)
    loss += std::to_string(e + 1) + ',' + format_double(run.epoch_loss[e]) + '\n';
  write_file(out_dir / "loss.csv", loss);
  rec.outputs.push_back(hashed(out_dir / "model.lxm"));
  rec.outputs.push_back(hashed(out_dir / "loss.csv"));
  rec.finished = now_utc();
  return rec;
}

StageRecord probe_stage(const ProbeOptions& o, const fs::path& out_dir) {
  if (!(o.skip_fraction >= 0.0 && o.skip_fraction < 1.0)) throw ConfigError("skip fraction must lie in [0,1)");
  if (o.batch <= 0) throw ConfigError("probe batch must be positive");
  require_file(o.model, "model checkpoint");
  require_file(o.embeddings, "embedding file");
  auto rec = begin("probe");
  const auto model = model::load_checkpoint(o.model);
  const auto table = embed::load_table(o.embeddings);
  rec.inputs.push_back(hashed(o.model));
  rec.inputs.push_back(hashed(o.embeddings));
  const auto& arch = model.arch();
  if (arch.input_dim != table.dim())
    throw ConfigError("model expects " + std::to_string(arch.input_dim) + "-dimensional vectors, table has " +
                      std::to_string(table.dim()));

  auto docs = read_documents(o.test_tokens);
  for (const auto& f : o.test_tokens) rec.inputs.push_back(hashed(f));
  if (o.tags) {
    require_file(*o.tags, "tag lexicon");
    const auto lexicon = corpus::read_lexicon(*o.tags);
    rec.inputs.push_back(hashed(*o.tags));
    for (auto& d : docs)
      for (auto& t : d.tokens)
        if (!t.tag)
          if (auto it = lexicon.find(t.form); it != lexicon.end()) t.tag = it->second;
  }

  auto seqs = corpus::make_sequences(docs, table_vocab(table), arch.window, arch.horizon);
  rec.notices.insert(rec.notices.end(), seqs.warnings.begin(), seqs.warnings.end());
  const std::size_t n = seqs.samples.size();
  const auto skip = static_cast<std::size_t>(std::llround(o.skip_fraction * static_cast<double>(n)));

  std::vector<std::size_t> labelled;
  std::vector<std::string> labels;
  for (std::size_t i = skip; i < n; ++i) {
    if (seqs.samples[i].label.empty()) continue;
    labelled.push_back(i - skip);
    labels.push_back(seqs.samples[i].label);
  }
  if (labelled.size() < n - skip)
    rec.notices.push_back(std::to_string(n - skip - labelled.size()) + " windows without a successor tag skipped");
  if (labelled.empty()) throw AnalysisError("no labelled test windows");

  auto picked = probe::stratified_indices(labels, o.cap, o.min_count, o.seed);
  rec.notices.insert(rec.notices.end(), picked.notices.begin(), picked.notices.end());
  std::vector<corpus::SequenceSample> chosen;
  std::vector<std::size_t> ids;
  for (std::size_t r : picked.rows) {
    chosen.push_back(seqs.samples[skip + labelled[r]]);
    ids.push_back(labelled[r]);
  }
  rec.notices.push_back(std::to_string(chosen.size()) + " of " + std::to_string(labelled.size()) +
                        " labelled test windows probed");

  auto sets = probe::extract_activations(model, chosen, table, o.batch);
  json names = json::array();
  for (std::size_t k = 0; k < sets.size(); ++k) {
    sets[k].sample_ids = ids;
    probe::dump_cloud(probe::to_cloud(sets[k]), layer_file(out_dir, "layer_", k, ".csv"));
    rec.outputs.push_back(hashed(layer_file(out_dir, "layer_", k, ".csv")));
    names.push_back(sets[k].layer_name);
  }
  write_file(out_dir / "layers.json", json{{"layers", names}, {"horizon", arch.horizon}}.dump(2) + "\n");
  rec.outputs.push_back(hashed(out_dir / "layers.json"));
  rec.finished = now_utc();
  return rec;
}

StageRecord analyze_stage(const fs::path& activations_dir, const fs::path& out_dir, const AnalyzeOptions& options) {
  auto rec = begin("analyze");
  std::vector<std::string> names;
  if (fs::exists(activations_dir / "layers.json")) {
    names = json::parse(read_file(activations_dir / "layers.json")).at("layers").get<std::vector<std::string>>();
  } else {
    for (std::size_t k = 0; fs::exists(layer_file(activations_dir, "layer_", k, ".csv")); ++k)
      names.push_back("layer" + std::to_string(k));
  }
  if (names.empty()) throw IoError("no layer_<k>.csv files in " + activations_dir.string());

  std::vector<probe::LabeledPointCloud> clouds;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto path = layer_file(activations_dir, "layer_", k, ".csv");
    require_file(path, "activation file");
    clouds.push_back(probe::load_cloud(path));
    rec.inputs.push_back(hashed(path));
  }

  bool pairs = false;
  for (const auto& c : clouds.front().class_names) pairs = pairs || c.find(corpus::kPairSeparator) != std::string::npos;
  std::vector<probe::LabeledPointCloud> scored;
  for (auto& c : clouds) {
    if (pairs) c = geometry::group_rare_classes(c, options.top_pairs);
    std::vector<std::string> keep;
    for (const auto& name : c.class_names)
      if (name != "OTHER" || !pairs) keep.push_back(name);
    scored.push_back(geometry::filter_classes(c, keep));
  }
  if (pairs)
    rec.notices.push_back("pair labels: top " + std::to_string(options.top_pairs) +
                          " kept, the rest plotted as OTHER and left out of the GDV");

  const auto report = geometry::gdv_curve(scored, options.min_count);
  for (const auto& d : report.dropped_classes)
    rec.notices.push_back("class '" + d + "' below min_count in some layer, left out of the GDV");

  std::vector<report::GdvRow> rows;
  json layers = json::array();
  for (std::size_t k = 0; k < clouds.size(); ++k) {
    const auto& g = report.layers[k];
    rows.push_back({static_cast<int>(k), g.gdv, g.n_points, g.n_classes, g.dims});

    const auto mds = geometry::mds_classical(geometry::distance_matrix(clouds[k].points));
    std::vector<report::MdsPoint> pts;
    for (std::size_t i = 0; i < clouds[k].size(); ++i)
      pts.push_back({clouds[k].sample_ids[i], clouds[k].class_names[static_cast<std::size_t>(clouds[k].labels[i])],
                     mds.coords(static_cast<Eigen::Index>(i), 0), mds.coords(static_cast<Eigen::Index>(i), 1)});
    const auto path = layer_file(out_dir, "mds_layer_", k, ".csv");
    report::write_mds_csv(pts, path);
    rec.outputs.push_back(hashed(path));
    if (g.constant_dims)
      rec.notices.push_back(names[k] + ": " + std::to_string(g.constant_dims) + " constant dimensions");

    json classes = json::array();
    for (std::size_t c = 0; c < g.classes.size(); ++c)
      classes.push_back({{"name", g.classes[c]}, {"count", g.class_counts[c]}});
    layers.push_back({{"layer", k},
                      {"name", names[k]},
                      {"gdv", g.gdv},
                      {"n_points", g.n_points},
                      {"dims", g.dims},
                      {"constant_dims", g.constant_dims},
                      {"classes", classes},
                      {"mds_eigenvalues", {mds.eigenvalues[0], mds.eigenvalues[1]}},
                      {"mds_trace", mds.trace},
                      {"mds_clipped_negative_mass", mds.clipped_negative_mass}});
  }
  report::write_gdv_csv(rows, out_dir / "gdv.csv");
  rec.outputs.insert(rec.outputs.begin(), hashed(out_dir / "gdv.csv"));
  write_file(out_dir / "analysis.json",
             json{{"layers", layers}, {"dropped_classes", report.dropped_classes}, {"pair_labels", pairs}}.dump(2) +
                 "\n");
  rec.outputs.push_back(hashed(out_dir / "analysis.json"));
  rec.finished = now_utc();
  return rec;
}

StageRecord report_stage(const fs::path& run_dir, const fs::path& out_dir) {
  auto rec = begin("report");
  require_file(run_dir / "gdv.csv", "GDV table");
  const auto rows = report::read_gdv_csv(run_dir / "gdv.csv");
  rec.inputs.push_back(hashed(run_dir / "gdv.csv"));
  std::vector<std::string> names;
  if (fs::exists(run_dir / "analysis.json")) {
    const json analysis = json::parse(read_file(run_dir / "analysis.json"));
    for (const auto& l : analysis.at("layers")) names.push_back(l.at("name").get<std::string>());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto k = static_cast<std::size_t>(rows[i].layer);
    const auto in = layer_file(run_dir, "mds_layer_", k, ".csv");
    require_file(in, "MDS table");
    const auto pts = report::read_mds_csv(in);
    rec.inputs.push_back(hashed(in));
    std::string title = "Layer " + std::to_string(k);
    if (i < names.size()) title += " (" + names[i] + ")";
    title += ": MDS by successor class, GDV " + format_double(std::round(rows[i].gdv * 1e4) / 1e4);
    const auto out = layer_file(out_dir, "scatter_layer_", k, ".svg");
    write_file(out, report::render_scatter(pts, title));
    rec.outputs.push_back(hashed(out));
  }
  write_file(out_dir / "gdv_curve.svg", report::render_gdv_curve(rows, names, "GDV per layer"));
  rec.outputs.push_back(hashed(out_dir / "gdv_curve.svg"));
  rec.finished = now_utc();
  return rec;
}

// ---- experiment config ----

void ExperimentConfig::validate() const {
  const bool synthetic = !corpus.grammar.empty();
  if (synthetic == (!corpus.texts.empty() || !corpus.conllu.empty()))
    throw ConfigError("corpus: give either a grammar or text/CoNLL-U files");
  if (synthetic && corpus.grammar != "bundled") require_file(corpus.grammar, "grammar file");
  if (synthetic && corpus.sentences == 0) throw ConfigError("corpus: sentences must be positive");
  for (const auto& p : corpus.texts) require_file(p, "text file");
  for (const auto& p : corpus.conllu) require_file(p, "CoNLL-U file");
  if (!corpus.texts.empty() && !corpus.lexicon) throw ConfigError("corpus: raw text needs a tag lexicon");
  if (corpus.lexicon) require_file(*corpus.lexicon, "tag lexicon");
  if (corpus.rules) require_file(*corpus.rules, "cleaning rules");
  if (split.test_documents.empty() && !(split.train_fraction > 0.0 && split.train_fraction < 1.0))
    throw ConfigError("split: train_fraction must lie in (0,1)");
  if (embedding_source == "train") {
    skipgram.validate();
  } else if (embedding_source == "load") {
    if (!embedding_path) throw ConfigError("embeddings: source 'load' needs a path");
    require_file(*embedding_path, "embedding file");
  } else {
    throw ConfigError("embeddings: source must be 'train' or 'load'");
  }
  train.validate();
  if (probe_cap < 3) throw ConfigError("probe: cap must be at least 3");
  if (min_count < 2) throw ConfigError("probe: min_count must be at least 2");
  if (probe_batch <= 0) throw ConfigError("probe: batch must be positive");
  if (top_pairs == 0) throw ConfigError("report: top_pairs must be positive");
}

ExperimentConfig experiment_from_json(const json& input, const fs::path& base) {
  const json& j = input.contains("config") ? input.at("config") : input;
  ExperimentConfig c;
  try {
    check_keys(j, {"corpus", "split", "embeddings", "train", "probe", "report", "seed", "output"}, "config");
    c.seed = j.value("seed", c.seed);
    if (j.contains("corpus")) {
      const auto& k = j.at("corpus");
      check_keys(k, {"grammar", "sentences", "texts", "conllu", "lexicon", "rules"}, "corpus");
      if (k.contains("grammar")) {
        const auto g = k.at("grammar").get<std::string>();
        c.corpus.grammar = g == "bundled" ? g : resolve(base, g).string();
      }
      c.corpus.sentences = k.value("sentences", c.corpus.sentences);
      for (const auto& p : k.value("texts", std::vector<std::string>{})) c.corpus.texts.push_back(resolve(base, p));
      for (const auto& p : k.value("conllu", std::vector<std::string>{})) c.corpus.conllu.push_back(resolve(base, p));
      if (k.contains("lexicon")) c.corpus.lexicon = resolve(base, k.at("lexicon").get<std::string>());
      if (k.contains("rules")) c.corpus.rules = resolve(base, k.at("rules").get<std::string>());
    }
    if (j.contains("split")) c.split = split_from_json(j.at("split"));
    c.skipgram.seed = c.seed;
    if (j.contains("embeddings")) {
      const auto& e = j.at("embeddings");
      check_keys(e, {"source", "path", "dim", "context_window", "negatives", "epochs", "lr", "seed"}, "embeddings");
      c.embedding_source = e.value("source", c.embedding_source);
      if (e.contains("path")) c.embedding_path = resolve(base, e.at("path").get<std::string>());
      c.skipgram.dim = e.value("dim", c.skipgram.dim);
      c.skipgram.context_window = e.value("context_window", c.skipgram.context_window);
      c.skipgram.negatives = e.value("negatives", c.skipgram.negatives);
      c.skipgram.epochs = e.value("epochs", c.skipgram.epochs);
      c.skipgram.lr = e.value("lr", c.skipgram.lr);
      c.skipgram.seed = e.value("seed", c.skipgram.seed);
    }
    c.train.seed = c.seed;
    if (j.contains("train")) {
      json t = j.at("train");
      check_keys(t, {"window", "horizon", "hidden_sizes", "lr", "epochs", "batch", "seed"}, "train");
      if (!t.contains("seed")) t["seed"] = c.seed;
      c.train = model::train_config_from_json(t);
    }
    if (j.contains("probe")) {
      const auto& p = j.at("probe");
      check_keys(p, {"cap", "min_count", "batch"}, "probe");
      c.probe_cap = p.value("cap", c.probe_cap);
      c.min_count = p.value("min_count", c.min_count);
      c.probe_batch = p.value("batch", c.probe_batch);
    }
    if (j.contains("report")) {
      check_keys(j.at("report"), {"top_pairs"}, "report");
      c.top_pairs = j.at("report").value("top_pairs", c.top_pairs);
    }
    if (j.contains("output")) c.output = resolve(base, j.at("output").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

json experiment_to_json(const ExperimentConfig& c) {
  auto paths = [](const std::vector<fs::path>& v) {
    std::vector<std::string> out;
    for (const auto& p : v) out.push_back(p.string());
    return out;
  };
  json corpus = json::object();
  if (!c.corpus.grammar.empty()) {
    corpus["grammar"] = c.corpus.grammar;
    corpus["sentences"] = c.corpus.sentences;
  }
  if (!c.corpus.texts.empty()) corpus["texts"] = paths(c.corpus.texts);
  if (!c.corpus.conllu.empty()) corpus["conllu"] = paths(c.corpus.conllu);
  if (c.corpus.lexicon) corpus["lexicon"] = c.corpus.lexicon->string();
  if (c.corpus.rules) corpus["rules"] = c.corpus.rules->string();

  json emb = {{"source", c.embedding_source}};
  if (c.embedding_source == "load") {
    emb["path"] = c.embedding_path ? c.embedding_path->string() : std::string();
  } else {
    emb.update({{"dim", c.skipgram.dim},
                {"context_window", c.skipgram.context_window},
                {"negatives", c.skipgram.negatives},
                {"epochs", c.skipgram.epochs},
                {"lr", c.skipgram.lr},
                {"seed", c.skipgram.seed}});
  }
  return {{"corpus", corpus},
          {"split", split_to_json(c.split)},
          {"embeddings", emb},
          {"train", model::train_config_to_json(c.train)},
          {"probe", {{"cap", c.probe_cap}, {"min_count", c.min_count}, {"batch", c.probe_batch}}},
          {"report", {{"top_pairs", c.top_pairs}}},
          {"seed", c.seed},
          {"output", c.output.string()}};
}

ExperimentConfig load_experiment(const fs::path& path) {
  require_file(path, "config file");
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

json run_experiment(const ExperimentConfig& config, bool verbose) {
  config.validate();
  const fs::path out = config.output;
  fs::create_directories(out / "corpus");
  fs::create_directories(out / "activations");
  const std::string started = now_utc();
  std::vector<StageRecord> records;
  auto log = [&](const StageRecord& r) {
    if (!verbose) return;
    std::cerr << "[" << r.name << "] done";
    for (const auto& n : r.notices) std::cerr << "; " << n;
    std::cerr << '\n';
  };

  std::vector<fs::path> docs;
  std::optional<fs::path> lexicon = config.corpus.lexicon;
  if (!config.corpus.grammar.empty()) {
    const auto grammar =
        config.corpus.grammar == "bundled" ? synth::bundled_grammar() : synth::load_grammar(config.corpus.grammar);
    records.push_back(synth_stage(grammar, config.corpus.sentences, config.seed, out / "corpus"));
    docs.push_back(out / "corpus" / "tokens.txt");
    lexicon = out / "corpus" / "lexicon.tsv";
  } else {
    const auto rules = config.corpus.rules ? corpus::load_rules(*config.corpus.rules)
                                           : corpus::CleaningRules::table_defaults();
    for (const auto& p : config.corpus.texts) {
      docs.push_back(out / "corpus" / (p.stem().string() + ".txt"));
      records.push_back(clean_stage(p, docs.back(), rules, false));
    }
    for (const auto& p : config.corpus.conllu) {
      docs.push_back(out / "corpus" / (p.stem().string() + ".txt"));
      records.push_back(clean_stage(p, docs.back(), rules, true));
    }
  }
  log(records.back());

  if (config.embedding_source == "train") {
    records.push_back(embed_stage(docs, config.skipgram, out / "embeddings.txt", out / "vocab.tsv"));
  } else {
    records.push_back(import_embeddings_stage(*config.embedding_path, out / "embeddings.txt"));
  }
  log(records.back());

  TrainStageConfig tc{docs, out / "embeddings.txt", config.split, config.train};
  records.push_back(train_stage(tc, out, verbose));
  log(records.back());

  ProbeOptions po;
  po.model = out / "model.lxm";
  po.embeddings = out / "embeddings.txt";
  po.tags = lexicon;
  po.cap = config.probe_cap;
  po.min_count = config.min_count;
  po.seed = config.seed;
  po.batch = config.probe_batch;
  if (config.split.test_documents.empty()) {
    po.test_tokens = docs;
    po.skip_fraction = config.split.train_fraction;
  } else {
    for (const auto& d : docs)
      for (const auto& name : config.split.test_documents)
        if (d.stem().string() == name) po.test_tokens.push_back(d);
  }
  records.push_back(probe_stage(po, out / "activations"));
  log(records.back());

  records.push_back(analyze_stage(out / "activations", out, {config.min_count, config.top_pairs}));
  log(records.back());
  records.push_back(report_stage(out, out));
  log(records.back());

  json stages = json::array();
  for (auto& r : records) {
    for (auto* list : {&r.inputs, &r.outputs})
      for (auto& a : *list) {
        const auto rel = fs::path(a.path).lexically_relative(out.lexically_normal());
        if (!rel.empty() && *rel.begin() != "..") a.path = rel.string();
      }
    stages.push_back(to_json(r));
  }
  json manifest = {{"tool", "lxm"},
                   {"version", LXM_VERSION},
                   {"config", experiment_to_json(config)},
                   {"stages", stages},
                   {"started", started},
                   {"finished", now_utc()}};
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace lxm::pipeline
