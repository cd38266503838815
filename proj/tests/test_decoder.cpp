#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "avsr/decoder.hpp"
#include "oracles.hpp"

using namespace avsr;

namespace {

PosteriorGrid grid_from(const std::vector<std::vector<double>>& probs) {
  Matrix m(probs.size(), probs[0].size());
  for (std::size_t t = 0; t < probs.size(); ++t) {
    for (std::size_t s = 0; s < probs[t].size(); ++s) m(t, s) = probs[t][s];
  }
  return PosteriorGrid::from_probabilities(m);
}

// V = {A, B, blank, EOS}
const Vocabulary& ab() {
  static const Vocabulary v({"A", "B", "[blank]", "[EOS/SOS]"});
  return v;
}

}  // namespace

TEST(Decode, SingleCertainFrame) {
  const auto grid = grid_from({{1.0, 0.0, 0.0, 0.0}});
  const UniformScorer scorer(ab());
  for (double alpha : {0.1, 0.5, 1.0}) {
    DecoderConfig cfg;
    cfg.alpha = alpha;
    const auto r = decode(grid, scorer, cfg);
    EXPECT_EQ(decode_tokens(r.best, ab()), "A") << alpha;
    EXPECT_EQ(exhaustive_oracle(grid, scorer, cfg).best, r.best);
  }
}

TEST(Decode, RankingHoldsEveryFinishedHypothesis) {
  std::mt19937_64 rng(1);
  const auto grid = oracle::random_grid(rng, 3, 4);
  const oracle::RandomScorer scorer(ab(), 7);
  const auto r = decode(grid, scorer, {});
  ASSERT_FALSE(r.ranked.empty());
  for (std::size_t i = 1; i < r.ranked.size(); ++i) EXPECT_GE(r.ranked[i - 1].joint_score, r.ranked[i].joint_score);
  for (const auto& h : r.ranked) {
    EXPECT_EQ(h.tokens.ids.back(), ab().eos_sos_id());
    if (std::isinf(h.ctc_score)) {
      EXPECT_TRUE(std::isinf(h.joint_score));  // unalignable
    } else {
      EXPECT_NEAR(h.joint_score, 0.1 * h.ctc_score + 0.9 * h.attn_score, 1e-12);
    }
  }
  EXPECT_EQ(r.score, r.ranked.front().joint_score);
}

TEST(Decode, BigramResolvesDoubledLetter) {
  // Argmax reads A blank A B; the summed paths favour "AAB" (0.6) over
  // "AB" (0.4). A bigram that never saw "AA" flips the joint decision.
  const double lo = 1e-30;
  const auto grid = grid_from({{1, lo, lo, lo}, {0.4, lo, 0.6, lo}, {1, lo, lo, lo}, {lo, 1, lo, lo}});
  const BigramScorer scorer(ab(), {"AB", "AB", "BA", "AB"});
  DecoderConfig cfg;  // alpha 0.1, W 5
  const auto joint = decode(grid, scorer, cfg);
  EXPECT_EQ(decode_tokens(joint.best, ab()), "AB");
  EXPECT_EQ(exhaustive_oracle(grid, scorer, cfg).best, joint.best);
  cfg.alpha = 1.0;
  const auto ctc = decode(grid, scorer, cfg);
  EXPECT_EQ(decode_tokens(ctc.best, ab()), "AAB");
  EXPECT_EQ(exhaustive_oracle(grid, scorer, cfg).best, ctc.best);
}

TEST(Decode, ReachesSequencesOfLengthLmax) {
  const auto grid = grid_from({{1, 0, 0, 0}, {0, 1, 0, 0}});
  const UniformScorer scorer(ab());
  DecoderConfig cfg;
  cfg.alpha = 1.0;
  const auto r = decode(grid, scorer, cfg);
  EXPECT_EQ(decode_tokens(r.best, ab()), "AB");
  EXPECT_GT(r.closing_completions, 0u);
}

TEST(Decode, EmptyOutputWhenEverythingIsBlank) {
  const auto grid = grid_from({{0, 0, 1, 0}, {0, 0, 1, 0}});
  const UniformScorer scorer(ab());
  const auto r = decode(grid, scorer, {});
  EXPECT_TRUE(r.best.empty());
}

TEST(Decode, RejectsBadInputs) {
  const UniformScorer scorer(ab());
  const auto grid = grid_from({{1, 0, 0, 0}});
  DecoderConfig cfg;
  cfg.beam_width = 0;
  EXPECT_THROW(decode(grid, scorer, cfg), Error);
  cfg = {};
  cfg.alpha = 1.5;
  EXPECT_THROW(decode(grid, scorer, cfg), Error);
  const UniformScorer wide(Vocabulary::standard());
  try {
    decode(grid, wide, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScorerMismatch);
  }
}

TEST(Oracle, RefusesHugeSearch) {
  const auto grid = PosteriorGrid(Matrix(30, 40, -std::log(40.0)));
  const UniformScorer scorer(Vocabulary::standard());
  try {
    exhaustive_oracle(grid, scorer, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSearchSpaceTooLarge);
  }
}

TEST(Oracle, LibraryOracleAgreesWithTestOracle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) {
    const std::size_t t_len = 1 + rng() % 4;
    const auto grid = oracle::random_grid(rng, t_len, 4);
    const oracle::RandomScorer scorer(ab(), rng());
    DecoderConfig cfg;
    cfg.alpha = 0.3;
    EXPECT_EQ(exhaustive_oracle(grid, scorer, cfg).best.ids,
              oracle::exhaustive_decode(grid, scorer, 0.3, t_len).labels);
  }
}

TEST(Greedy, CollapseRule) {
  EXPECT_TRUE(greedy_ctc(grid_from({{0, 0, 1, 0}, {0, 0, 1, 0}}), 2).empty());
  const auto g = greedy_ctc(grid_from({{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}}), 2);
  EXPECT_EQ(decode_tokens(g, ab()), "AB");
}

TEST(Greedy, MatchesArgmaxOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto grid = oracle::random_grid(rng, 1 + rng() % 10, 4);
    std::vector<TokenId> path;
    for (std::size_t t = 0; t < grid.frame_count(); ++t) {
      const auto row = grid.row(t);
      path.push_back(static_cast<TokenId>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    EXPECT_EQ(greedy_ctc(grid, 2).ids, oracle::collapse(path, 2));
  }
}

TEST(Modes, EndpointsMatchAlpha) {
  std::mt19937_64 rng(4);
  const auto grid = oracle::random_grid(rng, 4, 4);
  const oracle::RandomScorer scorer(ab(), 5);
  DecoderConfig one;
  one.alpha = 1.0;
  EXPECT_EQ(decode_with_mode(grid, scorer, {}, DecodeMode::kCtc).best, decode(grid, scorer, one).best);
  DecoderConfig zero;
  zero.alpha = 0.0;
  EXPECT_EQ(decode_with_mode(grid, scorer, {}, DecodeMode::kAttention).best, decode(grid, scorer, zero).best);
  EXPECT_EQ(parse_decode_mode("greedy"), DecodeMode::kGreedy);
  EXPECT_THROW(parse_decode_mode("beam"), Error);
}
