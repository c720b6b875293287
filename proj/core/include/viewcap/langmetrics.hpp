#pragma once

#include <span>
#include <string>
#include <vector>

#include "viewcap/lexicon.hpp"

namespace viewcap {

using Tokens = std::vector<std::string>;

// Non-empty, deduplicated reference captions.
struct ReferenceSet {
  std::vector<Tokens> references;
};

// Dedups while keeping first-appearance order; drops empty references.
ReferenceSet make_reference_set(std::vector<Tokens> refs);

int lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// Multi-reference BLEU-n: geometric mean of clipped k-gram precisions for
// k = 1..n times the brevity penalty (closest reference length). Zero
// precision at any order yields 0; no smoothing.
double bleu(const Tokens& candidate, const ReferenceSet& refs, int n);

// LCS-based F-score, beta = 1.2, best reference.
double rouge_l(const Tokens& candidate, const ReferenceSet& refs);

// Greedy unigram alignment (exact first, then synonym-group), F10 score
// with a chunk fragmentation penalty, best reference. Simplified variant,
// reported as "Meteor-lite".
double meteor_lite(const Tokens& candidate, const ReferenceSet& refs,
                   const Lexicon& lex);

struct CiderItem {
  Tokens candidate;
  ReferenceSet refs;
};

struct CiderResult {
  std::vector<double> per_item;
  double mean = 0.0;
};

// Corpus-level CIDEr on n-grams up to 4: clipped TF-IDF cosine against each
// reference, averaged over references and n, scaled by 10. Throws
// CorpusTooSmall for fewer than 2 items.
CiderResult cider(std::span<const CiderItem> corpus);

}  // namespace viewcap
