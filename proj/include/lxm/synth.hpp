#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lxm/corpus.hpp"

namespace lxm::synth {

struct Pattern {
  std::vector<std::string> classes;
  double probability = 0.0;
};

/// Flat sentence grammar: a sentence picks one pattern, then one word per
/// class slot, uniformly from that class's lexicon.
struct PcfgGrammar {
  std::vector<std::string> classes;
  std::map<std::string, std::vector<std::string>> lexicon;
  std::vector<Pattern> patterns;

  /// Throws ConfigError on an empty lexicon class, a word listed under two
  /// classes, an undeclared pattern class, or probabilities not summing to 1.
  void validate() const;

  /// Word -> generating class.
  corpus::Lexicon tag_lexicon() const;
};

PcfgGrammar grammar_from_json(const nlohmann::json& j);
nlohmann::json grammar_to_json(const PcfgGrammar& grammar);
PcfgGrammar load_grammar(const std::filesystem::path& path);

/// Four classes of fifteen words each and a single six-slot pattern
/// (DET NOUN VERB DET ADJ NOUN). Within the running stream the class of
/// every next word is fixed by the two classes before it.
PcfgGrammar bundled_grammar();

std::vector<corpus::TaggedToken> generate_corpus(const PcfgGrammar& grammar, std::size_t sentences,
                                                 std::uint64_t seed);

}  // namespace lxm::synth
