#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace viewcap {

// Deterministic synthetic word-embedding table. Words, flags and synonym
// groups are fixed by the vocabulary tables; only the vectors depend on the
// seed. Same-group word pairs embed with cosine >= 0.8, nouns from different
// groups with cosine <= 0.5 (enforced at construction).
class Lexicon {
 public:
  static constexpr double kSynonymCosineMin = 0.8;
  static constexpr double kCrossGroupCosineMax = 0.5;

  const std::vector<std::string>& words() const { return words_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  int word_id(std::string_view w) const;  // -1 when absent
  bool contains(std::string_view w) const { return word_id(w) >= 0; }
  bool is_noun(int id) const { return is_noun_[size_t(id)] != 0; }
  bool is_stop(int id) const { return is_stop_[size_t(id)] != 0; }
  bool is_category(int id) const { return is_category_[size_t(id)] != 0; }

  std::span<const double> vector_of(int id) const;

  // Synonym groups partition the noun words; -1 for non-nouns.
  int group_of(int id) const { return group_of_[size_t(id)]; }
  const std::vector<std::vector<int>>& synonym_groups() const { return groups_; }

  // Object categories in canonical order; index into this list is the
  // category slot used by detection histograms. N = category_count().
  const std::vector<int>& category_ids() const { return category_ids_; }
  int category_count() const { return int(category_ids_.size()); }
  int category_slot(std::string_view category) const;  // -1 when absent

  // Non-stop vocabulary slots, in vocabulary order (BoW dimension).
  const std::vector<int>& nonstop_ids() const { return nonstop_ids_; }
  int bow_dim() const { return int(nonstop_ids_.size()); }

  friend Lexicon build_lexicon(std::uint64_t seed);
  friend Lexicon lexicon_from_json(const std::string& text);

 private:
  std::vector<std::string> words_;
  int dim_ = 16;
  std::uint64_t seed_ = 0;
  std::vector<double> vectors_;  // words x dim, row-major, unit rows
  std::vector<std::uint8_t> is_noun_, is_stop_, is_category_;
  std::vector<int> group_of_;
  std::vector<std::vector<int>> groups_;
  std::vector<int> category_ids_;
  std::vector<int> nonstop_ids_;
  std::unordered_map<std::string, int> index_;

  void rebuild_index();
};

// Deterministic for a fixed seed. Throws ConstructionFailed when the cosine
// constraints cannot be met within the retry budget.
Lexicon build_lexicon(std::uint64_t seed);

// Cosine similarity of two vocabulary words. Throws UnknownWord.
double cosine(const Lexicon& lex, std::string_view a, std::string_view b);

// In-vocabulary noun tokens in order of first appearance, duplicates kept.
// Unknown tokens are skipped.
std::vector<std::string> extract_nouns(const Lexicon& lex,
                                       std::span<const std::string> caption);

// Bag-of-words counts over the non-stop vocabulary. Unknown tokens ignored.
std::vector<int> bow(const Lexicon& lex, std::span<const std::string> caption);

std::string lexicon_to_json(const Lexicon& lex);
Lexicon lexicon_from_json(const std::string& text);

}  // namespace viewcap
