#include "viewcap/langmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "viewcap/errors.hpp"

namespace viewcap {

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  if (int(tokens.size()) < n) return counts;
  for (size_t i = 0; i + size_t(n) <= tokens.size(); ++i) {
    std::vector<std::string> g(tokens.begin() + long(i),
                               tokens.begin() + long(i) + n);
    counts[g] += 1;
  }
  return counts;
}

}  // namespace

ReferenceSet make_reference_set(std::vector<Tokens> refs) {
  ReferenceSet out;
  for (auto& r : refs) {
    if (r.empty()) continue;
    if (std::find(out.references.begin(), out.references.end(), r) ==
        out.references.end())
      out.references.push_back(std::move(r));
  }
  return out;
}

int lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double bleu(const Tokens& candidate, const ReferenceSet& refs, int n) {
  if (candidate.empty() || refs.references.empty()) return 0.0;
  const int c = int(candidate.size());

  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    NgramCounts cand = ngrams(candidate, k);
    int total = 0, clipped = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      int max_ref = 0;
      for (const auto& r : refs.references) {
        auto rc = ngrams(r, k);
        auto it = rc.find(gram);
        if (it != rc.end()) max_ref = std::max(max_ref, it->second);
      }
      clipped += std::min(count, max_ref);
    }
    if (total == 0 || clipped == 0) return 0.0;
    log_sum += std::log(double(clipped) / double(total));
  }

  // Closest reference length; ties prefer the shorter reference.
  int r = int(refs.references.front().size());
  for (const auto& ref : refs.references) {
    int len = int(ref.size());
    if (std::abs(len - c) < std::abs(r - c) ||
        (std::abs(len - c) == std::abs(r - c) && len < r))
      r = len;
  }
  double bp = std::exp(std::min(0.0, 1.0 - double(r) / double(c)));
  return bp * std::exp(log_sum / double(n));
}

double rouge_l(const Tokens& candidate, const ReferenceSet& refs) {
  if (candidate.empty()) return 0.0;
  constexpr double beta = 1.2;
  double best = 0.0;
  for (const auto& ref : refs.references) {
    int lcs = lcs_length(candidate, ref);
    if (lcs == 0) continue;
    double p = double(lcs) / double(candidate.size());
    double r = double(lcs) / double(ref.size());
    double f = (1.0 + beta * beta) * p * r / (r + beta * beta * p);
    best = std::max(best, f);
  }
  return best;
}

double meteor_lite(const Tokens& candidate, const ReferenceSet& refs,
                   const Lexicon& lex) {
  if (candidate.empty()) return 0.0;
  double best = 0.0;
  for (const auto& ref : refs.references) {
    // alignment[i] = reference position matched to candidate token i.
    std::vector<int> alignment(candidate.size(), -1);
    std::vector<char> ref_used(ref.size(), false);
    // Stage 1: exact matches, leftmost reference token first.
    for (size_t i = 0; i < candidate.size(); ++i)
      for (size_t j = 0; j < ref.size(); ++j)
        if (!ref_used[j] && candidate[i] == ref[j]) {
          alignment[i] = int(j);
          ref_used[j] = true;
          break;
        }
    // Stage 2: same-synonym-group matches for what is left.
    for (size_t i = 0; i < candidate.size(); ++i) {
      if (alignment[i] >= 0) continue;
      int ci = lex.word_id(candidate[i]);
      if (ci < 0 || !lex.is_noun(ci)) continue;
      for (size_t j = 0; j < ref.size(); ++j) {
        if (ref_used[j]) continue;
        int rj = lex.word_id(ref[j]);
        if (rj < 0 || !lex.is_noun(rj)) continue;
        if (lex.group_of(ci) == lex.group_of(rj)) {
          alignment[i] = int(j);
          ref_used[j] = true;
          break;
        }
      }
    }

    int matches = 0;
    for (int a : alignment)
      if (a >= 0) ++matches;
    if (matches == 0) continue;

    // Chunks: maximal runs of adjacent candidate tokens aligned to adjacent,
    // increasing reference positions.
    int chunks = 0;
    int prev = -2;
    bool in_chunk = false;
    for (size_t i = 0; i < candidate.size(); ++i) {
      if (alignment[i] < 0) {
        in_chunk = false;
        prev = -2;
        continue;
      }
      if (!in_chunk || alignment[i] != prev + 1) ++chunks;
      in_chunk = true;
      prev = alignment[i];
    }

    double p = double(matches) / double(candidate.size());
    double r = double(matches) / double(ref.size());
    double f = 10.0 * p * r / (r + 9.0 * p);
    double frag = double(chunks) / double(matches);
    double score = f * (1.0 - 0.5 * frag * frag * frag);
    best = std::max(best, score);
  }
  return best;
}

CiderResult cider(std::span<const CiderItem> corpus) {
  if (corpus.size() < 2)
    throw CorpusTooSmall("cider needs a corpus of at least 2 items");
  constexpr int kMaxN = 4;
  const double logN = std::log(double(corpus.size()));

  CiderResult result;
  result.per_item.assign(corpus.size(), 0.0);

  for (int n = 1; n <= kMaxN; ++n) {
    // Document frequency over reference sets.
    std::map<std::vector<std::string>, int> df;
    std::vector<std::vector<NgramCounts>> ref_counts(corpus.size());
    std::vector<NgramCounts> cand_counts(corpus.size());
    for (size_t it = 0; it < corpus.size(); ++it) {
      cand_counts[it] = ngrams(corpus[it].candidate, n);
      std::set<std::vector<std::string>> seen;
      for (const auto& ref : corpus[it].refs.references) {
        ref_counts[it].push_back(ngrams(ref, n));
        for (const auto& [gram, cnt] : ref_counts[it].back()) seen.insert(gram);
      }
      for (const auto& gram : seen) df[gram] += 1;
    }
    auto idf = [&](const std::vector<std::string>& gram) {
      auto it = df.find(gram);
      if (it == df.end()) return logN;  // unseen in any reference
      return logN - std::log(double(it->second));
    };

    for (size_t it = 0; it < corpus.size(); ++it) {
      const auto& cand = cand_counts[it];
      double cand_norm = 0.0;
      for (const auto& [gram, cnt] : cand) {
        double wt = double(cnt) * idf(gram);
        cand_norm += wt * wt;
      }
      cand_norm = std::sqrt(cand_norm);

      double acc = 0.0;
      for (const auto& rc : ref_counts[it]) {
        double ref_norm = 0.0;
        for (const auto& [gram, cnt] : rc) {
          double wt = double(cnt) * idf(gram);
          ref_norm += wt * wt;
        }
        ref_norm = std::sqrt(ref_norm);
        if (cand_norm == 0.0 || ref_norm == 0.0) continue;
        // Clipped cosine: candidate counts capped by reference counts.
        double num = 0.0;
        for (const auto& [gram, cnt] : cand) {
          auto f = rc.find(gram);
          if (f == rc.end()) continue;
          double gi = idf(gram);
          num += double(std::min(cnt, f->second)) * gi * double(f->second) * gi;
        }
        acc += num / (cand_norm * ref_norm);
      }
      const size_t refs_n = corpus[it].refs.references.size();
      if (refs_n > 0) result.per_item[it] += acc / double(refs_n) / double(kMaxN);
    }
  }

  for (double& s : result.per_item) s *= 10.0;
  double sum = 0.0;
  for (double s : result.per_item) sum += s;
  result.mean = corpus.empty() ? 0.0 : sum / double(corpus.size());
  return result;
}

}  // namespace viewcap
