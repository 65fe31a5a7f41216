#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lxm::corpus {

/// The thirteen universal part-of-speech classes used as successor labels.
enum class Upos : std::uint8_t { NUM, VERB, ADJ, X, PART, NOUN, SCONJ, ADP, DET, PRON, CONJ, AUX, ADV };

inline constexpr std::size_t kUposCount = 13;

std::string_view to_string(Upos tag);
std::span<const Upos> all_upos();
/// Exact match against the thirteen names.
std::optional<Upos> parse_upos(std::string_view name);

/// Maps a Universal Dependencies v2 tag onto the thirteen-tag set.
/// `.second` is false when the tag was not recognised and fell back to X.
std::pair<Upos, bool> reconcile_upos(std::string_view name);

struct CleaningRules {
  /// Literal words or phrases; matched case-insensitively as whole token
  /// sequences after character cleaning.
  std::vector<std::string> remove_words;
  /// Code points stripped from every token.
  std::u32string remove_chars;
  std::string number_replacement = "nummer";
  std::string email_replacement = "email";
  bool lowercase = true;

  /// The replacement table used for the German e-mail novel corpus.
  static CleaningRules table_defaults();

  /// Throws ConfigError when a replacement contains a removable character
  /// or whitespace, or is empty.
  void validate() const;
};

CleaningRules rules_from_json(const nlohmann::json& j);
nlohmann::json rules_to_json(const CleaningRules& rules);
CleaningRules load_rules(const std::filesystem::path& path);

/// Tokenizes and normalizes raw UTF-8 text. Throws DecodeError on invalid UTF-8.
std::vector<std::string> clean_text(std::string_view raw, const CleaningRules& rules);

/// Tag strings are free-form class names: the thirteen UPOS names for
/// natural corpora, grammar class names for synthetic ones.
struct TaggedToken {
  std::string form;
  std::optional<std::string> tag;

  bool operator==(const TaggedToken&) const = default;
};

/// One input file. Sliding windows never cross document boundaries.
struct Document {
  std::string name;
  std::vector<TaggedToken> tokens;
};

inline constexpr int kUnkId = -1;

class Vocabulary {
 public:
  /// Ids are assigned in first-occurrence order.
  void add(std::string_view form, std::int64_t count = 1);

  std::optional<int> find(std::string_view form) const;
  /// Known id, or kUnkId.
  int id_or_unk(std::string_view form) const;

  const std::string& form(int id) const { return forms_.at(static_cast<std::size_t>(id)); }
  std::int64_t count(int id) const { return counts_.at(static_cast<std::size_t>(id)); }
  std::size_t type_count() const { return forms_.size(); }
  std::int64_t token_count() const { return token_count_; }
  const std::vector<std::string>& forms() const { return forms_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

 private:
  std::unordered_map<std::string, int> type_to_id_;
  std::vector<std::string> forms_;
  std::vector<std::int64_t> counts_;
  std::int64_t token_count_ = 0;
};

Vocabulary build_vocab(std::span<const std::string> tokens);
Vocabulary build_vocab(std::span<const Document> documents);

/// "id<TAB>form<TAB>count" per line.
void write_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary read_vocab(const std::filesystem::path& path);

/// One token per line.
void write_tokens(std::span<const std::string> tokens, const std::filesystem::path& path);
std::vector<std::string> read_tokens(const std::filesystem::path& path);

/// One token per line, optionally followed by a TAB and its tag. The
/// document name is the file stem.
void write_tagged_tokens(std::span<const TaggedToken> tokens, const std::filesystem::path& path);
Document read_tagged_tokens(const std::filesystem::path& path);

struct ConlluResult {
  std::vector<TaggedToken> tokens;
  /// Rows whose UPOS was outside the UD tag set and got mapped to X.
  std::size_t unknown_tags = 0;
};

ConlluResult parse_conllu(std::string_view text, const std::string& source = "<conllu>");
ConlluResult read_conllu(const std::filesystem::path& path);

using Lexicon = std::unordered_map<std::string, std::string>;

/// "form<TAB>TAG" per line; later duplicates must agree with earlier ones.
Lexicon read_lexicon(const std::filesystem::path& path);
void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

std::vector<TaggedToken> apply_lexicon(std::span<const std::string> forms, const Lexicon& lexicon);

/// Successor-class label separator for multi-word horizons.
inline constexpr char kPairSeparator = '+';

struct SequenceSample {
  std::vector<int> input_ids;
  std::vector<int> target_ids;
  /// Tag of the successor (horizon 1) or "TAG+TAG" (horizon 2); empty when
  /// any successor token is untagged.
  std::string label;
  std::size_t document = 0;
  /// Index of the first window token within its document.
  std::size_t position = 0;
};

struct SequenceSet {
  std::vector<SequenceSample> samples;
  std::vector<std::string> warnings;
};

/// Stride-1 sliding windows, document by document.
SequenceSet make_sequences(std::span<const Document> documents, const Vocabulary& vocab,
                           int window = 9, int horizon = 1);

/// Either an explicit set of test documents, or the fraction of samples
/// (in stream order) that goes to training.
struct DocumentPartition {
  std::vector<std::size_t> test_documents;
};
using SplitSpec = std::variant<DocumentPartition, double>;

struct Split {
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> test;
};

Split split_samples(std::span<const SequenceSample> samples, const SplitSpec& spec);

}  // namespace lxm::corpus
