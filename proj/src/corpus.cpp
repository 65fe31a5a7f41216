#include "lxm/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "lxm/error.hpp"
#include "lxm/text.hpp"
#include "lxm/util.hpp"

namespace lxm::corpus {

namespace {

constexpr std::array<std::string_view, kUposCount> kUposNames = {
    "NUM", "VERB", "ADJ", "X", "PART", "NOUN", "SCONJ", "ADP", "DET", "PRON", "CONJ", "AUX", "ADV"};

constexpr std::array<Upos, kUposCount> kUposAll = {
    Upos::NUM,  Upos::VERB, Upos::ADJ, Upos::X,    Upos::PART, Upos::NOUN, Upos::SCONJ,
    Upos::ADP,  Upos::DET,  Upos::PRON, Upos::CONJ, Upos::AUX, Upos::ADV};

bool contains(std::u32string_view haystack, std::u32string_view needle) {
  return haystack.find(needle) != std::u32string_view::npos;
}

struct TokenNormalizer {
  const CleaningRules& rules;

  bool removable(char32_t c) const {
    return rules.remove_chars.find(c) != std::u32string::npos;
  }

  // Normalizes one whitespace-delimited chunk; may yield 0..n tokens.
  void operator()(std::u32string_view raw, std::vector<std::string>& out) const {
    std::u32string lower(raw);
    for (char32_t& c : lower) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));

    std::u32string stripped;
    stripped.reserve(lower.size());
    const std::u32string_view source = rules.lowercase ? std::u32string_view(lower) : raw;
    for (char32_t c : source) {
      if (!removable(c)) stripped.push_back(c);
    }
    std::u32string stripped_lower;
    for (char32_t c : stripped) stripped_lower.push_back(static_cast<char32_t>(u_tolower(static_cast<UChar32>(c))));

    if (contains(lower, U"@") || contains(lower, U"e-mail") || contains(stripped_lower, U"email")) {
      out.push_back(rules.email_replacement);
      return;
    }
    if (stripped.empty()) return;

    // digit runs become the number word; the rest stays as separate tokens
    std::u32string run;
    bool run_is_digit = false;
    auto flush = [&] {
      if (run.empty()) return;
      out.push_back(run_is_digit ? rules.number_replacement : text::to_utf8(run));
      run.clear();
    };
    for (char32_t c : stripped) {
      const bool digit = u_isdigit(static_cast<UChar32>(c));
      if (!run.empty() && digit != run_is_digit) flush();
      run_is_digit = digit;
      run.push_back(c);
    }
    flush();
  }
};

std::vector<std::string> tokenize_and_normalize(std::u32string_view text, const CleaningRules& rules) {
  TokenNormalizer normalize{rules};
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && u_isUWhiteSpace(static_cast<UChar32>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !u_isUWhiteSpace(static_cast<UChar32>(text[i]))) ++i;
    if (i > start) normalize(text.substr(start, i - start), tokens);
  }
  return tokens;
}

}  // namespace

std::string_view to_string(Upos tag) { return kUposNames[static_cast<std::size_t>(tag)]; }

std::span<const Upos> all_upos() { return kUposAll; }

std::optional<Upos> parse_upos(std::string_view name) {
  for (std::size_t i = 0; i < kUposCount; ++i) {
    if (kUposNames[i] == name) return kUposAll[i];
  }
  return std::nullopt;
}

std::pair<Upos, bool> reconcile_upos(std::string_view name) {
  if (auto exact = parse_upos(name)) return {*exact, true};
  if (name == "CCONJ") return {Upos::CONJ, true};
  if (name == "PROPN") return {Upos::NOUN, true};
  if (name == "INTJ" || name == "SYM" || name == "PUNCT") return {Upos::X, true};
  return {Upos::X, false};
}

CleaningRules CleaningRules::table_defaults() {
  CleaningRules rules;
  rules.remove_words = {"RE:",      "AW:",     "Eine",         "Zwei",         "Stunden",
                        "Sekunden", "später",  "Am nächsten",  "Kein Betreff", "Betreff"};
  rules.remove_chars =
      U".,;:!?'\"%&()[]{}<>/\\|-_*+=#~^`$@"
      U"´§°«»¿¡·"
      U"‘’‚“”„‹›–—…•";
  return rules;
}

void CleaningRules::validate() const {
  auto check = [&](const std::string& value, const char* field) {
    if (value.empty()) throw ConfigError(std::string(field) + " must not be empty");
    std::u32string cps = text::decode_utf8(value);
    for (char32_t c : cps) {
      if (u_isUWhiteSpace(static_cast<UChar32>(c)))
        throw ConfigError(std::string(field) + " contains whitespace");
      if (remove_chars.find(c) != std::u32string::npos)
        throw ConfigError(std::string(field) + " contains a removable character");
      if (u_isdigit(static_cast<UChar32>(c)) || c == U'@')
        throw ConfigError(std::string(field) + " contains a digit or '@'");
      if (lowercase && u_tolower(static_cast<UChar32>(c)) != static_cast<UChar32>(c))
        throw ConfigError(std::string(field) + " must be lowercase");
    }
  };
  check(number_replacement, "number_replacement");
  check(email_replacement, "email_replacement");
  if (text::lowercase_utf8(number_replacement).find("email") != std::string::npos)
    throw ConfigError("number_replacement must not look like an e-mail token");
}

CleaningRules rules_from_json(const nlohmann::json& j) {
  CleaningRules rules = CleaningRules::table_defaults();
  try {
    if (j.contains("remove_words")) rules.remove_words = j.at("remove_words").get<std::vector<std::string>>();
    if (j.contains("remove_chars")) rules.remove_chars = text::decode_utf8(j.at("remove_chars").get<std::string>());
    if (j.contains("number_replacement")) rules.number_replacement = j.at("number_replacement").get<std::string>();
    if (j.contains("email_replacement")) rules.email_replacement = j.at("email_replacement").get<std::string>();
    if (j.contains("lowercase")) rules.lowercase = j.at("lowercase").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cleaning rules: ") + e.what());
  }
  rules.validate();
  return rules;
}

nlohmann::json rules_to_json(const CleaningRules& rules) {
  return {{"remove_words", rules.remove_words},
          {"remove_chars", text::to_utf8(rules.remove_chars)},
          {"number_replacement", rules.number_replacement},
          {"email_replacement", rules.email_replacement},
          {"lowercase", rules.lowercase}};
}

CleaningRules load_rules(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return rules_from_json(j);
}

std::vector<std::string> clean_text(std::string_view raw, const CleaningRules& rules) {
  std::vector<std::string> tokens = tokenize_and_normalize(text::decode_utf8(raw), rules);

  std::vector<std::vector<std::string>> phrases;
  for (const std::string& word : rules.remove_words) {
    auto phrase = tokenize_and_normalize(text::decode_utf8(word), rules);
    if (!phrase.empty()) phrases.push_back(std::move(phrase));
  }
  if (phrases.empty()) return tokens;
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  // removing a phrase can join the neighbours into a new one, so repeat
  // until nothing matches
  while (true) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t matched = 0;
      for (const auto& phrase : phrases) {
        if (i + phrase.size() <= tokens.size() &&
            std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          matched = phrase.size();
          break;
        }
      }
      if (matched) {
        i += matched;
      } else {
        kept.push_back(std::move(tokens[i++]));
      }
    }
    const bool changed = kept.size() != tokens.size();
    tokens = std::move(kept);
    if (!changed) return tokens;
  }
}

void Vocabulary::add(std::string_view form, std::int64_t count) {
  auto it = type_to_id_.find(std::string(form));
  if (it == type_to_id_.end()) {
    it = type_to_id_.emplace(std::string(form), static_cast<int>(forms_.size())).first;
    forms_.emplace_back(form);
    counts_.push_back(0);
  }
  counts_[static_cast<std::size_t>(it->second)] += count;
  token_count_ += count;
}

std::optional<int> Vocabulary::find(std::string_view form) const {
  auto it = type_to_id_.find(std::string(form));
  if (it == type_to_id_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id_or_unk(std::string_view form) const { return find(form).value_or(kUnkId); }

Vocabulary build_vocab(std::span<const std::string> tokens) {
  Vocabulary vocab;
  for (const auto& t : tokens) vocab.add(t);
  return vocab;
}

Vocabulary build_vocab(std::span<const Document> documents) {
  Vocabulary vocab;
  for (const auto& doc : documents)
    for (const auto& t : doc.tokens) vocab.add(t.form);
  return vocab;
}

void write_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < vocab.type_count(); ++i) {
    out += std::to_string(i) + '\t' + vocab.forms()[i] + '\t' + std::to_string(vocab.counts()[i]) + '\n';
  }
  write_file(path, out);
}

Vocabulary read_vocab(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  Vocabulary vocab;
  std::size_t line_no = 0;
  for (std::string_view line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    long long id = 0, count = 0;
    if (fields.size() != 3 || !parse_int(fields[0], id) || !parse_int(fields[2], count) || fields[1].empty())
      throw ParseError(path.string(), line_no, "expected id<TAB>form<TAB>count");
    if (id != static_cast<long long>(vocab.type_count()))
      throw ParseError(path.string(), line_no, "ids must be dense and ascending");
    if (vocab.find(fields[1])) throw ParseError(path.string(), line_no, "duplicate form");
    vocab.add(fields[1], count);
  }
  return vocab;
}

void write_tokens(std::span<const std::string> tokens, const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : tokens) {
    out += t;
    out += '\n';
  }
  write_file(path, out);
}

std::vector<std::string> read_tokens(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<std::string> tokens;
  for (std::string_view line : split(content, '\n')) {
    line = trim(line);
    if (!line.empty()) tokens.emplace_back(line);
  }
  return tokens;
}

void write_tagged_tokens(std::span<const TaggedToken> tokens, const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : tokens) {
    out += t.form;
    if (t.tag) {
      out += '\t';
      out += *t.tag;
    }
    out += '\n';
  }
  write_file(path, out);
}

Document read_tagged_tokens(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  Document doc;
  doc.name = path.stem().string();
  std::size_t line_no = 0;
  for (std::string_view line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() > 2 || trim(fields[0]).empty() || (fields.size() == 2 && trim(fields[1]).empty()))
      throw ParseError(path.string(), line_no, "expected form or form<TAB>TAG");
    TaggedToken t{std::string(trim(fields[0])), std::nullopt};
    if (fields.size() == 2) t.tag = std::string(trim(fields[1]));
    doc.tokens.push_back(std::move(t));
  }
  return doc;
}

ConlluResult parse_conllu(std::string_view content, const std::string& source) {
  ConlluResult result;
  std::size_t line_no = 0;
  for (std::string_view line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 10)
      throw ParseError(source, line_no, "expected 10 tab-separated columns, got " + std::to_string(fields.size()));
    const std::string_view id = fields[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    long long numeric_id = 0;
    if (!parse_int(id, numeric_id) || numeric_id < 1) throw ParseError(source, line_no, "bad token id");
    if (fields[1].empty()) throw ParseError(source, line_no, "empty FORM");
    if (fields[3].empty()) throw ParseError(source, line_no, "empty UPOS");

    std::string form = text::lowercase_utf8(fields[1]);
    if (form.find_first_of(" \t") != std::string::npos)
      throw ParseError(source, line_no, "FORM contains whitespace");
    // punctuation is stripped from raw text before tagging as well
    if (fields[3] == "PUNCT") continue;

    TaggedToken token{std::move(form), std::nullopt};
    if (fields[3] != "_") {
      auto [tag, known] = reconcile_upos(fields[3]);
      if (!known) ++result.unknown_tags;
      token.tag = std::string(to_string(tag));
    }
    result.tokens.push_back(std::move(token));
  }
  return result;
}

ConlluResult read_conllu(const std::filesystem::path& path) {
  return parse_conllu(read_file(path), path.string());
}

Lexicon read_lexicon(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  Lexicon lexicon;
  std::size_t line_no = 0;
  for (std::string_view line : split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || trim(fields[1]).empty())
      throw ParseError(path.string(), line_no, "expected form<TAB>TAG");
    std::string form = text::lowercase_utf8(fields[0]);
    std::string tag(trim(fields[1]));
    auto [it, inserted] = lexicon.emplace(form, tag);
    if (!inserted && it->second != tag)
      throw ParseError(path.string(), line_no, "conflicting tag for '" + form + "'");
  }
  return lexicon;
}

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> rows(lexicon.begin(), lexicon.end());
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [form, tag] : rows) out += form + '\t' + tag + '\n';
  write_file(path, out);
}

std::vector<TaggedToken> apply_lexicon(std::span<const std::string> forms, const Lexicon& lexicon) {
  std::vector<TaggedToken> tokens;
  tokens.reserve(forms.size());
  for (const auto& f : forms) {
    auto it = lexicon.find(f);
    tokens.push_back({f, it == lexicon.end() ? std::nullopt : std::optional<std::string>(it->second)});
  }
  return tokens;
}

SequenceSet make_sequences(std::span<const Document> documents, const Vocabulary& vocab, int window,
                           int horizon) {
  if (window < 1) throw ConfigError("window must be positive");
  if (horizon != 1 && horizon != 2) throw ConfigError("horizon must be 1 or 2");
  SequenceSet set;
  const auto w = static_cast<std::size_t>(window);
  const auto h = static_cast<std::size_t>(horizon);
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const auto& tokens = documents[d].tokens;
    if (tokens.size() < w + h) {
      set.warnings.push_back("document '" + documents[d].name + "' has " + std::to_string(tokens.size()) +
                             " tokens, fewer than window+horizon=" + std::to_string(w + h) + "; no samples");
      continue;
    }
    std::vector<int> ids(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) ids[i] = vocab.id_or_unk(tokens[i].form);

    for (std::size_t p = 0; p + w + h <= tokens.size(); ++p) {
      SequenceSample s;
      s.input_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(p), ids.begin() + static_cast<std::ptrdiff_t>(p + w));
      s.target_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(p + w),
                          ids.begin() + static_cast<std::ptrdiff_t>(p + w + h));
      bool tagged = true;
      for (std::size_t k = 0; k < h; ++k) {
        const auto& tag = tokens[p + w + k].tag;
        if (!tag) {
          tagged = false;
          break;
        }
        if (k) s.label += kPairSeparator;
        s.label += *tag;
      }
      if (!tagged) s.label.clear();
      s.document = d;
      s.position = p;
      set.samples.push_back(std::move(s));
    }
  }
  return set;
}

Split split_samples(std::span<const SequenceSample> samples, const SplitSpec& spec) {
  Split split;
  if (const auto* partition = std::get_if<DocumentPartition>(&spec)) {
    std::set<std::size_t> test(partition->test_documents.begin(), partition->test_documents.end());
    for (const auto& s : samples) (test.count(s.document) ? split.test : split.train).push_back(s);
    return split;
  }
  const double fraction = std::get<double>(spec);
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("train fraction must lie in (0,1)");
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(samples.size())));
  split.train.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
  return split;
}

}  // namespace lxm::corpus
