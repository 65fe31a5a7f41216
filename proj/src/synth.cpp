#include "lxm/synth.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "lxm/error.hpp"
#include "lxm/util.hpp"

namespace lxm::synth {

void PcfgGrammar::validate() const {
  if (classes.empty()) throw ConfigError("grammar declares no classes");
  if (patterns.empty()) throw ConfigError("grammar declares no patterns");
  std::set<std::string> declared(classes.begin(), classes.end());
  if (declared.size() != classes.size()) throw ConfigError("grammar class declared twice");

  std::set<std::string> seen_words;
  for (const auto& cls : classes) {
    auto it = lexicon.find(cls);
    if (it == lexicon.end() || it->second.empty()) throw ConfigError("empty lexicon for class " + cls);
    for (const auto& w : it->second) {
      if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos)
        throw ConfigError("invalid word '" + w + "' in class " + cls);
      if (!seen_words.insert(w).second) throw ConfigError("word '" + w + "' listed more than once");
    }
  }
  for (const auto& [cls, words] : lexicon) {
    if (!declared.count(cls)) throw ConfigError("lexicon class " + cls + " is not declared");
  }

  double total = 0.0;
  for (const auto& p : patterns) {
    if (p.classes.empty()) throw ConfigError("empty pattern");
    if (!(p.probability >= 0.0)) throw ConfigError("negative pattern probability");
    for (const auto& cls : p.classes) {
      if (!declared.count(cls)) throw ConfigError("pattern uses undeclared class " + cls);
    }
    total += p.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("pattern probabilities sum to " + format_double(total));
}

corpus::Lexicon PcfgGrammar::tag_lexicon() const {
  corpus::Lexicon lex;
  for (const auto& [cls, words] : lexicon)
    for (const auto& w : words) lex.emplace(w, cls);
  return lex;
}

PcfgGrammar grammar_from_json(const nlohmann::json& j) {
  PcfgGrammar g;
  try {
    g.classes = j.at("classes").get<std::vector<std::string>>();
    g.lexicon = j.at("lexicon").get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& p : j.at("patterns")) {
      g.patterns.push_back({p.at("classes").get<std::vector<std::string>>(), p.at("probability").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grammar: ") + e.what());
  }
  g.validate();
  return g;
}

nlohmann::json grammar_to_json(const PcfgGrammar& g) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : g.patterns) patterns.push_back({{"classes", p.classes}, {"probability", p.probability}});
  return {{"classes", g.classes}, {"lexicon", g.lexicon}, {"patterns", patterns}};
}

PcfgGrammar load_grammar(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return grammar_from_json(j);
}

PcfgGrammar bundled_grammar() {
  PcfgGrammar g;
  g.classes = {"DET", "NOUN", "VERB", "ADJ"};
  g.lexicon["DET"] = {"der",   "die",   "das",  "ein",   "eine", "dieser", "jene",   "kein",
                      "jeder", "mein",  "dein", "sein",  "ihr",  "unser",  "welche"};
  g.lexicon["NOUN"] = {"hund",  "katze", "haus",  "baum",  "stadt", "wald",  "fluss", "berg",
                       "vogel", "buch",  "tisch", "stuhl", "garten", "brief", "wolke"};
  g.lexicon["VERB"] = {"sieht", "liebt", "findet", "kennt", "sucht", "malt",  "baut",  "hört",
                       "trägt", "holt",  "teilt", "zählt", "fragt", "lobt",  "nennt"};
  g.lexicon["ADJ"] = {"alte",  "neue",  "kleine", "große", "rote", "blaue", "stille", "helle",
                      "dunkle", "weite", "kalte",  "warme", "leise", "wilde", "fremde"};
  g.patterns = {{{"DET", "NOUN", "VERB", "DET", "ADJ", "NOUN"}, 1.0}};
  return g;
}

std::vector<corpus::TaggedToken> generate_corpus(const PcfgGrammar& grammar, std::size_t sentences,
                                                 std::uint64_t seed) {
  grammar.validate();
  Rng rng(seed);
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& p : grammar.patterns) cumulative.push_back(acc += p.probability);

  std::vector<corpus::TaggedToken> tokens;
  for (std::size_t s = 0; s < sentences; ++s) {
    const double u = rng.uniform() * acc;
    std::size_t pick = 0;
    while (pick + 1 < cumulative.size() && u >= cumulative[pick]) ++pick;
    for (const auto& cls : grammar.patterns[pick].classes) {
      const auto& words = grammar.lexicon.at(cls);
      tokens.push_back({words[rng.below(words.size())], cls});
    }
  }
  return tokens;
}

}  // namespace lxm::synth
