#include "viewcap/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "viewcap/errors.hpp"
#include "viewcap/rng.hpp"
#include "viewcap/vocab.hpp"

namespace viewcap {

namespace {

constexpr double kAnchorCosineMax = 0.30;  // between group anchors
constexpr double kMemberNoise = 0.015;     // per-coordinate sigma around anchor
constexpr int kAnchorTries = 100000;
constexpr int kBuildRounds = 50;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::span<double> v) {
  double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<size_t>(dim));
  for (double& x : v) x = rng.normal();
  normalize(v);
  return v;
}

}  // namespace

void Lexicon::rebuild_index() {
  index_.clear();
  for (size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = int(i);
  category_ids_.clear();
  nonstop_ids_.clear();
  for (size_t i = 0; i < words_.size(); ++i) {
    if (is_category_[i]) category_ids_.push_back(int(i));
    if (!is_stop_[i]) nonstop_ids_.push_back(int(i));
  }
}

int Lexicon::word_id(std::string_view w) const {
  auto it = index_.find(std::string(w));
  return it == index_.end() ? -1 : it->second;
}

std::span<const double> Lexicon::vector_of(int id) const {
  return {vectors_.data() + size_t(id) * size_t(dim_), size_t(dim_)};
}

int Lexicon::category_slot(std::string_view category) const {
  int id = word_id(category);
  if (id < 0) return -1;
  auto it = std::find(category_ids_.begin(), category_ids_.end(), id);
  return it == category_ids_.end() ? -1 : int(it - category_ids_.begin());
}

Lexicon build_lexicon(std::uint64_t seed) {
  const auto& groups = vocab::noun_groups();
  Rng rng(hash_all({seed, 0x1e5c0ULL}));

  Lexicon lex;
  lex.seed_ = seed;
  lex.dim_ = 16;

  // Fixed vocabulary order: noun groups first, then room-agnostic words.
  std::set<std::string> category_set;
  for (const auto& g : groups)
    for (int k = 0; k < g.category_count; ++k)
      category_set.insert(std::string(g.words[size_t(k)]));

  for (const auto& g : groups) {
    std::vector<int> ids;
    for (auto w : g.words) {
      lex.words_.emplace_back(w);
      lex.is_noun_.push_back(1);
      lex.is_stop_.push_back(0);
      lex.is_category_.push_back(category_set.count(std::string(w)) ? 1 : 0);
      lex.group_of_.push_back(int(lex.groups_.size()));
      ids.push_back(int(lex.words_.size()) - 1);
    }
    lex.groups_.push_back(std::move(ids));
  }
  for (auto w : vocab::stop_words()) {
    lex.words_.emplace_back(w);
    lex.is_noun_.push_back(0);
    lex.is_stop_.push_back(1);
    lex.is_category_.push_back(0);
    lex.group_of_.push_back(-1);
  }
  lex.rebuild_index();

  const int dim = lex.dim_;
  const int n_groups = int(lex.groups_.size());

  for (int round = 0; round < kBuildRounds; ++round) {
    // Group anchors by sequential rejection: signed cosine below the margin
    // against every earlier anchor.
    std::vector<std::vector<double>> anchors;
    anchors.reserve(size_t(n_groups));
    bool anchors_ok = true;
    for (int g = 0; g < n_groups && anchors_ok; ++g) {
      bool placed = false;
      for (int t = 0; t < kAnchorTries; ++t) {
        auto cand = random_unit(rng, dim);
        bool ok = true;
        for (const auto& a : anchors)
          if (dot(cand, a) > kAnchorCosineMax) {
            ok = false;
            break;
          }
        if (ok) {
          anchors.push_back(std::move(cand));
          placed = true;
          break;
        }
      }
      anchors_ok = placed;
    }
    if (!anchors_ok) continue;

    lex.vectors_.assign(lex.words_.size() * size_t(dim), 0.0);
    for (size_t w = 0; w < lex.words_.size(); ++w) {
      std::span<double> out(lex.vectors_.data() + w * size_t(dim), size_t(dim));
      int g = lex.group_of_[w];
      if (g < 0) {
        auto v = random_unit(rng, dim);
        std::copy(v.begin(), v.end(), out.begin());
      } else {
        for (int k = 0; k < dim; ++k)
          out[size_t(k)] = anchors[size_t(g)][size_t(k)] + kMemberNoise * rng.normal();
        normalize(out);
      }
    }

    // Exhaustive verification over noun pairs; the vocabulary is small.
    bool ok = true;
    for (size_t a = 0; a < lex.words_.size() && ok; ++a) {
      if (!lex.is_noun_[a]) continue;
      for (size_t b = a + 1; b < lex.words_.size() && ok; ++b) {
        if (!lex.is_noun_[b]) continue;
        double c = dot(lex.vector_of(int(a)), lex.vector_of(int(b)));
        if (lex.group_of_[a] == lex.group_of_[b])
          ok = c >= Lexicon::kSynonymCosineMin;
        else
          ok = c <= Lexicon::kCrossGroupCosineMax;
      }
    }
    if (ok) return lex;
  }
  throw ConstructionFailed("lexicon embedding constraints not met after retries");
}

double cosine(const Lexicon& lex, std::string_view a, std::string_view b) {
  int ia = lex.word_id(a);
  if (ia < 0) throw UnknownWord(std::string(a));
  int ib = lex.word_id(b);
  if (ib < 0) throw UnknownWord(std::string(b));
  double c = dot(lex.vector_of(ia), lex.vector_of(ib));
  return std::clamp(c, -1.0, 1.0);
}

std::vector<std::string> extract_nouns(const Lexicon& lex,
                                       std::span<const std::string> caption) {
  std::vector<std::string> out;
  for (const auto& tok : caption) {
    int id = lex.word_id(tok);
    if (id >= 0 && lex.is_noun(id) && !lex.is_stop(id)) out.push_back(tok);
  }
  return out;
}

std::vector<int> bow(const Lexicon& lex, std::span<const std::string> caption) {
  std::vector<int> counts(size_t(lex.bow_dim()), 0);
  // slot lookup: position of id within nonstop_ids_ (vocabulary order).
  for (const auto& tok : caption) {
    int id = lex.word_id(tok);
    if (id < 0 || lex.is_stop(id)) continue;
    auto& ids = lex.nonstop_ids();
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    counts[size_t(it - ids.begin())] += 1;
  }
  return counts;
}

std::string lexicon_to_json(const Lexicon& lex) {
  nlohmann::json j;
  j["dim"] = lex.dim();
  j["seed"] = lex.seed();
  j["words"] = lex.words();
  nlohmann::json flags = nlohmann::json::array();
  for (size_t i = 0; i < lex.words().size(); ++i) {
    flags.push_back({{"noun", lex.is_noun(int(i))},
                     {"stop", lex.is_stop(int(i))},
                     {"category", lex.is_category(int(i))}});
  }
  j["flags"] = flags;
  j["groups"] = lex.synonym_groups();
  nlohmann::json vecs = nlohmann::json::array();
  for (size_t i = 0; i < lex.words().size(); ++i) {
    auto v = lex.vector_of(int(i));
    vecs.push_back(std::vector<double>(v.begin(), v.end()));
  }
  j["vectors"] = vecs;
  return j.dump(2);
}

Lexicon lexicon_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("lexicon", e.what());
  }
  Lexicon lex;
  try {
    lex.dim_ = j.at("dim").get<int>();
    lex.seed_ = j.at("seed").get<std::uint64_t>();
    lex.words_ = j.at("words").get<std::vector<std::string>>();
    const auto& flags = j.at("flags");
    if (flags.size() != lex.words_.size())
      throw ParseError("lexicon.flags", "length mismatch with words");
    for (const auto& f : flags) {
      lex.is_noun_.push_back(f.at("noun").get<bool>() ? 1 : 0);
      lex.is_stop_.push_back(f.at("stop").get<bool>() ? 1 : 0);
      lex.is_category_.push_back(f.at("category").get<bool>() ? 1 : 0);
    }
    lex.groups_ = j.at("groups").get<std::vector<std::vector<int>>>();
    lex.group_of_.assign(lex.words_.size(), -1);
    for (size_t g = 0; g < lex.groups_.size(); ++g)
      for (int id : lex.groups_[g]) {
        if (id < 0 || size_t(id) >= lex.words_.size())
          throw ParseError("lexicon.groups", "word id out of range");
        lex.group_of_[size_t(id)] = int(g);
      }
    const auto& vecs = j.at("vectors");
    if (vecs.size() != lex.words_.size())
      throw ParseError("lexicon.vectors", "length mismatch with words");
    for (const auto& v : vecs) {
      auto row = v.get<std::vector<double>>();
      if (int(row.size()) != lex.dim_)
        throw ParseError("lexicon.vectors", "row has wrong dimension");
      lex.vectors_.insert(lex.vectors_.end(), row.begin(), row.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("lexicon", e.what());
  }
  lex.rebuild_index();
  for (size_t i = 0; i < lex.words_.size(); ++i) {
    double n = std::sqrt(dot(lex.vector_of(int(i)), lex.vector_of(int(i))));
    if (std::abs(n - 1.0) > 1e-9)
      throw ParseError("lexicon.vectors[" + std::to_string(i) + "]",
                       "vector is not unit norm");
  }
  return lex;
}

}  // namespace viewcap
