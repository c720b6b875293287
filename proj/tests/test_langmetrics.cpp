#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "viewcap/errors.hpp"
#include "viewcap/langmetrics.hpp"
#include "viewcap/rng.hpp"

using namespace viewcap;

namespace {

Tokens tok(std::initializer_list<const char*> words) {
  Tokens t;
  for (const char* w : words) t.emplace_back(w);
  return t;
}

const Lexicon& lex() {
  static Lexicon l = build_lexicon(33);
  return l;
}

}  // namespace

TEST_CASE("lcs_length") {
  Tokens x = tok({"a", "b", "c", "d"});
  CHECK(lcs_length(x, x) == 4);
  CHECK(lcs_length(x, {}) == 0);
  CHECK(lcs_length(x, tok({"b", "d"})) == 2);
  CHECK(lcs_length(tok({"a", "b", "c"}), tok({"a", "c", "d"})) == 2);
  // symmetry and shared-suffix monotonicity
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    Tokens a, b, suffix;
    const char* alpha[] = {"u", "v", "w", "x"};
    for (int i = 0; i < int(rng.below(6)); ++i) a.emplace_back(alpha[rng.below(4)]);
    for (int i = 0; i < int(rng.below(6)); ++i) b.emplace_back(alpha[rng.below(4)]);
    for (int i = 0; i < int(rng.below(4)); ++i)
      suffix.emplace_back(alpha[rng.below(4)]);
    CHECK(lcs_length(a, b) == lcs_length(b, a));
    Tokens a2 = a, b2 = b;
    a2.insert(a2.end(), suffix.begin(), suffix.end());
    b2.insert(b2.end(), suffix.begin(), suffix.end());
    CHECK(lcs_length(a2, b2) == lcs_length(a, b) + int(suffix.size()));
  }
}

TEST_CASE("bleu hand cases") {
  ReferenceSet refs = make_reference_set({tok({"a", "b", "c", "d"})});

  // identity
  CHECK(bleu(tok({"a", "b", "c", "d"}), refs, 4) == doctest::Approx(1.0));
  CHECK(bleu(tok({"a", "b", "c", "d"}), refs, 1) == doctest::Approx(1.0));

  // brevity penalty: candidate "a b" vs ref of length 4 -> exp(1 - 4/2)
  CHECK(bleu(tok({"a", "b"}), refs, 1) == doctest::Approx(std::exp(-1.0)));

  // clipping: "a a a" vs "a b" -> unigram precision 1/3, no brevity penalty
  ReferenceSet ab = make_reference_set({tok({"a", "b"})});
  CHECK(bleu(tok({"a", "a", "a"}), ab, 1) == doctest::Approx(1.0 / 3.0));

  // zero n-gram overlap -> 0, empty candidate -> 0
  CHECK(bleu(tok({"x", "y"}), refs, 1) == 0.0);
  CHECK(bleu({}, refs, 1) == 0.0);
  // candidate shorter than n -> no n-grams -> 0
  CHECK(bleu(tok({"a"}), refs, 2) == 0.0);
}

TEST_CASE("bleu uses the closest reference length") {
  ReferenceSet refs =
      make_reference_set({tok({"a", "b"}), tok({"a", "b", "c", "d", "e", "f"})});
  // candidate length 2 matches the length-2 reference: no brevity penalty
  CHECK(bleu(tok({"a", "b"}), refs, 1) == doctest::Approx(1.0));
}

TEST_CASE("rouge_l hand cases") {
  ReferenceSet refs = make_reference_set({tok({"a", "b", "c", "d"})});
  CHECK(rouge_l(tok({"a", "b", "c", "d"}), refs) == doctest::Approx(1.0));
  CHECK(rouge_l(tok({"x", "y"}), refs) == 0.0);
  CHECK(rouge_l({}, refs) == 0.0);

  // candidate "a c", ref "a b c d": lcs 2, P = 1, R = 1/2
  double p = 1.0, r = 0.5, beta = 1.2;
  double f = (1 + beta * beta) * p * r / (r + beta * beta * p);
  CHECK(rouge_l(tok({"a", "c"}), refs) == doctest::Approx(f));
}

TEST_CASE("meteor_lite hand cases") {
  // identical 4-token sentences: F = 1, chunks = 1, matches = 4
  ReferenceSet refs = make_reference_set({tok({"a", "couch", "and", "table"})});
  double expect = 1.0 - 0.5 / (4.0 * 4.0 * 4.0);
  CHECK(meteor_lite(tok({"a", "couch", "and", "table"}), refs, lex()) ==
        doctest::Approx(expect));

  // no overlap at all
  ReferenceSet other = make_reference_set({tok({"x", "y", "z"})});
  CHECK(meteor_lite(tok({"p", "q"}), other, lex()) == 0.0);

  // synonym alignment: desk vs table share a group
  ReferenceSet table = make_reference_set({tok({"table"})});
  CHECK(meteor_lite(tok({"desk"}), table, lex()) > 0.0);
  ReferenceSet couch = make_reference_set({tok({"couch"})});
  CHECK(meteor_lite(tok({"desk"}), couch, lex()) == 0.0);
}

TEST_CASE("meteor_lite counts chunks") {
  // candidate reverses two halves: 2 chunks of aligned runs
  ReferenceSet refs = make_reference_set({tok({"a", "b", "c", "d"})});
  double got = meteor_lite(tok({"c", "d", "a", "b"}), refs, lex());
  // matches 4, P = R = 1 -> F = 1; chunks = 2 -> penalty 0.5*(2/4)^3
  CHECK(got == doctest::Approx(1.0 - 0.5 * 0.125));
}

TEST_CASE("cider identity and disjoint cases") {
  std::vector<CiderItem> corpus;
  corpus.push_back({tok({"a", "b", "c", "d", "e"}),
                    make_reference_set({tok({"a", "b", "c", "d", "e"})})});
  corpus.push_back({tok({"f", "g", "h", "i"}),
                    make_reference_set({tok({"f", "g", "h", "i", "j"})})});
  corpus.push_back({tok({"k", "l", "m", "n"}),
                    make_reference_set({tok({"n", "m", "l", "k"})})});
  CiderResult res = cider(corpus);
  REQUIRE(res.per_item.size() == 3);
  // item 0 is identical to its only reference and shares no n-gram with
  // other items: every idf positive -> maximal score 10
  CHECK(res.per_item[0] == doctest::Approx(10.0).epsilon(1e-9));

  // a candidate sharing no n-gram with its refs scores 0
  std::vector<CiderItem> miss;
  miss.push_back({tok({"x", "y"}), make_reference_set({tok({"a", "b"})})});
  miss.push_back({tok({"a", "b"}), make_reference_set({tok({"a", "b"})})});
  CiderResult r2 = cider(miss);
  CHECK(r2.per_item[0] == 0.0);

  CHECK_THROWS_AS((void)cider(std::vector<CiderItem>{
                      {tok({"a"}), make_reference_set({tok({"a"})})}}),
                  CorpusTooSmall);
}

TEST_CASE("cider is invariant to corpus order") {
  std::vector<CiderItem> corpus;
  corpus.push_back({tok({"a", "b", "c"}), make_reference_set({tok({"a", "b", "c"})})});
  corpus.push_back({tok({"d", "e"}), make_reference_set({tok({"d", "e", "f"})})});
  corpus.push_back({tok({"a", "e"}), make_reference_set({tok({"a", "e"})})});
  CiderResult fwd = cider(corpus);
  std::vector<CiderItem> rev(corpus.rbegin(), corpus.rend());
  CiderResult bwd = cider(rev);
  for (size_t i = 0; i < corpus.size(); ++i)
    CHECK(fwd.per_item[i] == doctest::Approx(bwd.per_item[corpus.size() - 1 - i]));
}

TEST_CASE("metrics stay in range under fuzz") {
  Rng rng(99);
  const char* alpha[] = {"a", "b", "c", "d", "e", "couch", "table", "wall"};
  auto random_tokens = [&](int max_len) {
    Tokens t;
    int len = 1 + int(rng.below(std::uint64_t(max_len)));
    for (int i = 0; i < len; ++i) t.emplace_back(alpha[rng.below(8)]);
    return t;
  };
  for (int trial = 0; trial < 2000; ++trial) {
    Tokens cand = random_tokens(8);
    std::vector<Tokens> rr;
    for (int r = 0; r < 1 + int(rng.below(3)); ++r) rr.push_back(random_tokens(8));
    ReferenceSet refs = make_reference_set(rr);
    for (int n = 1; n <= 4; ++n) {
      double b = bleu(cand, refs, n);
      CHECK(b >= 0.0);
      CHECK(b <= 1.0 + 1e-12);
    }
    double r = rouge_l(cand, refs);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0 + 1e-12);
    double m = meteor_lite(cand, refs, lex());
    CHECK(m >= 0.0);
    CHECK(m <= 1.0 + 1e-12);
  }
  // corpus-level cider fuzz
  for (int round = 0; round < 50; ++round) {
    std::vector<CiderItem> corpus;
    for (int i = 0; i < 2 + int(rng.below(6)); ++i) {
      std::vector<Tokens> rr;
      for (int r = 0; r < 1 + int(rng.below(3)); ++r) rr.push_back(random_tokens(6));
      corpus.push_back({random_tokens(6), make_reference_set(rr)});
    }
    CiderResult res = cider(corpus);
    for (double s : res.per_item) {
      CHECK(s >= 0.0);
      CHECK(s <= 10.0 + 1e-9);
    }
  }
}

TEST_CASE("reference sets deduplicate") {
  ReferenceSet refs = make_reference_set(
      {tok({"a", "b"}), tok({"a", "b"}), tok({"c"}), {}});
  CHECK(refs.references.size() == 2);
}
