#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avsr/ctc.hpp"
#include "avsr/error.hpp"
#include "avsr/logmath.hpp"
#include "avsr/posterior_grid.hpp"
#include "avsr/scorer.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

struct DecoderConfig {
  double alpha = 0.1;             // CTC weight in the fused score
  std::size_t beam_width = 5;     // W
  std::optional<std::size_t> l_max;  // longest label sequence; unset means T
};

/// A prefix under expansion. `tokens` excludes [SOS].
struct Hypothesis {
  TokenSequence tokens;
  PrefixState prefix;
  ScorerState attn;
  double ctc_score = 0.0;
  double attn_score = 0.0;
  double joint_score = 0.0;
};

/// A finished hypothesis; `tokens` ends with [EOS].
struct CompletedHypothesis {
  TokenSequence tokens;
  double ctc_score = 0.0;
  double attn_score = 0.0;
  double joint_score = 0.0;
};

struct DecodeResult {
  TokenSequence best;  // without the trailing [EOS]
  double score = kLogZero;
  std::vector<CompletedHypothesis> ranked;  // all of the finished set, best first
  // Survivors of the last level closed with [EOS] after the l_max levels.
  std::size_t closing_completions = 0;
};

inline double joint_score(double alpha, double ctc_score, double attn_score) {
  return weighted_log(alpha, ctc_score) + weighted_log(1.0 - alpha, attn_score);
}

/// Ranking order: higher score first, then shorter, then lexicographically
/// smaller token ids.
inline bool ranks_before(double score_a, const std::vector<TokenId>& a, double score_b,
                         const std::vector<TokenId>& b) {
  if (score_a != score_b) return score_a > score_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

namespace decoder_detail {

inline void check_inputs(const PosteriorGrid& grid, const Scorer& scorer, const DecoderConfig& config) {
  if (grid.frame_count() == 0) throw Error(ErrorCode::kEmptyGrid, "grid has no frames");
  if (grid.vocab_size() != scorer.vocabulary().size()) {
    throw Error(ErrorCode::kScorerMismatch, "scorer vocabulary does not match grid width");
  }
  if (!scorer.deterministic()) throw Error(ErrorCode::kScorerMismatch, "scorer is not deterministic");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (config.beam_width == 0) throw Error(ErrorCode::kInvalidArgument, "beam width must be positive");
}

inline CompletedHypothesis complete(const Hypothesis& g, TokenId eos, double alpha, double eos_logp) {
  CompletedHypothesis h;
  h.tokens.ids = g.tokens.ids;
  h.tokens.ids.push_back(eos);
  h.ctc_score = prefix_eos_score(g.prefix);
  h.attn_score = g.attn.cumulative + eos_logp;
  h.joint_score = joint_score(alpha, h.ctc_score, h.attn_score);
  return h;
}

}  // namespace decoder_detail

/// Joint CTC/attention one-pass beam search with shallow fusion.
///
/// Level l expands every survivor of level l-1 by every decodable symbol.
/// An [EOS] extension moves the hypothesis to the finished set scored by the
/// complete-sequence CTC probability; any other symbol keeps it active,
/// scored by the CTC prefix probability. Each level is pruned to the W best.
/// After l_max levels the remaining survivors are closed with [EOS], so
/// outputs of exactly l_max labels are reachable. Returns the best finished
/// hypothesis by raw fused score (no length normalization).
inline DecodeResult decode(const PosteriorGrid& grid, const Scorer& scorer, const DecoderConfig& config = {}) {
  decoder_detail::check_inputs(grid, scorer, config);
  const Vocabulary& vocab = scorer.vocabulary();
  const TokenId blank = vocab.blank_id();
  const TokenId eos = vocab.eos_sos_id();
  const std::vector<TokenId> symbols = vocab.decodable();
  const std::size_t l_max = config.l_max.value_or(grid.frame_count());
  const double alpha = config.alpha;

  std::vector<Hypothesis> active(1);
  active[0].prefix = prefix_init(grid, blank);
  active[0].attn = scorer.start(grid);

  DecodeResult result;
  std::vector<Hypothesis> candidates;
  for (std::size_t level = 1; level <= l_max && !active.empty(); ++level) {
    candidates.clear();
    candidates.reserve(active.size() * symbols.size());
    for (const Hypothesis& g : active) {
      const std::vector<double> attn_step = scorer.step_log_probs(g.attn);
      const TokenId last = g.tokens.empty() ? blank : g.tokens.ids.back();
      for (TokenId c : symbols) {
        const double step_logp = attn_step[static_cast<std::size_t>(c)];
        if (c == eos) {
          result.ranked.push_back(decoder_detail::complete(g, eos, alpha, step_logp));
          continue;
        }
        Hypothesis h;
        h.tokens.ids.reserve(g.tokens.size() + 1);
        h.tokens.ids = g.tokens.ids;
        h.tokens.ids.push_back(c);
        h.prefix = ctc_detail::extend(grid, g.prefix, last, c, blank);
        h.attn = scorer.advance(g.attn, c, step_logp);
        h.ctc_score = h.prefix.psi;
        h.attn_score = h.attn.cumulative;
        h.joint_score = joint_score(alpha, h.ctc_score, h.attn_score);
        candidates.push_back(std::move(h));
      }
    }
    const std::size_t keep = std::min(config.beam_width, candidates.size());
    const auto order = [](const Hypothesis& a, const Hypothesis& b) {
      return ranks_before(a.joint_score, a.tokens.ids, b.joint_score, b.tokens.ids);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), order);
    candidates.resize(keep);
    active.swap(candidates);
  }

  for (const Hypothesis& g : active) {
    const double eos_logp = scorer.step_log_probs(g.attn)[static_cast<std::size_t>(eos)];
    result.ranked.push_back(decoder_detail::complete(g, eos, alpha, eos_logp));
    ++result.closing_completions;
  }
  if (result.ranked.empty()) throw Error(ErrorCode::kEmptyResult, "no finished hypotheses");

  std::sort(result.ranked.begin(), result.ranked.end(),
            [](const CompletedHypothesis& a, const CompletedHypothesis& b) {
              return ranks_before(a.joint_score, a.tokens.ids, b.joint_score, b.tokens.ids);
            });
  result.best = result.ranked.front().tokens;
  result.best.ids.pop_back();
  result.score = result.ranked.front().joint_score;
  return result;
}

struct OracleResult {
  TokenSequence best;
  double score = kLogZero;
};

/// Scores every label sequence of length <= l_max by
/// alpha * log p_ctc(seq) + (1 - alpha) * log p_att(seq . EOS) and returns
/// the best under the decoder's ranking order. CTC scores come from the full
/// forward recursion, not the prefix recursion used by `decode`.
inline OracleResult exhaustive_oracle(const PosteriorGrid& grid, const Scorer& scorer,
                                      const DecoderConfig& config = {}, std::size_t max_sequences = 1'000'000) {
  decoder_detail::check_inputs(grid, scorer, config);
  const Vocabulary& vocab = scorer.vocabulary();
  const TokenId eos = vocab.eos_sos_id();
  std::vector<TokenId> labels;
  for (TokenId c : vocab.decodable()) {
    if (c != eos) labels.push_back(c);
  }
  const std::size_t l_max = config.l_max.value_or(grid.frame_count());

  double total = 0.0;
  double level_count = 1.0;
  for (std::size_t l = 0; l <= l_max; ++l) {
    total += level_count;
    level_count *= static_cast<double>(labels.size());
  }
  if (total > static_cast<double>(max_sequences)) {
    throw Error(ErrorCode::kSearchSpaceTooLarge, "search space exceeds " + std::to_string(max_sequences));
  }

  OracleResult best;
  bool have_best = false;
  std::vector<TokenId> seq;
  std::size_t combos = 1;
  for (std::size_t len = 0; len <= l_max; ++len) {
    seq.resize(len);
    for (std::size_t index = 0; index < combos; ++index) {
      std::size_t rest = index;
      for (std::size_t i = len; i-- > 0;) {
        seq[i] = labels[rest % labels.size()];
        rest /= labels.size();
      }
      double ctc = kLogZero;
      if (min_alignable_frames(seq) <= grid.frame_count()) ctc = ctc_log_likelihood(grid, seq, vocab.blank_id());
      ScorerState state = scorer.start(grid);
      for (TokenId c : seq) state = scorer.step(state, c).first;
      const double attn = state.cumulative + scorer.step(state, eos).second;
      const double score = joint_score(config.alpha, ctc, attn);
      if (!have_best || ranks_before(score, seq, best.score, best.best.ids)) {
        best.best.ids = seq;
        best.score = score;
        have_best = true;
      }
    }
    combos *= labels.size();
  }
  return best;
}

/// Per-frame argmax, collapse repeats, drop blanks.
inline TokenSequence greedy_ctc(const PosteriorGrid& grid, TokenId blank) {
  TokenSequence out;
  TokenId previous = blank;
  for (std::size_t t = 0; t < grid.frame_count(); ++t) {
    const auto row = grid.row(t);
    const auto best = static_cast<TokenId>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != blank && best != previous) out.ids.push_back(best);
    previous = best;
  }
  return out;
}

enum class DecodeMode { kJoint, kCtc, kAttention, kGreedy };

inline DecodeMode parse_decode_mode(const std::string& s) {
  if (s == "joint") return DecodeMode::kJoint;
  if (s == "ctc") return DecodeMode::kCtc;
  if (s == "attention") return DecodeMode::kAttention;
  if (s == "greedy") return DecodeMode::kGreedy;
  throw Error(ErrorCode::kInvalidArgument, "unknown decode mode '" + s + "'");
}

inline const char* mode_name(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kJoint: return "joint";
    case DecodeMode::kCtc: return "ctc";
    case DecodeMode::kAttention: return "attention";
    case DecodeMode::kGreedy: return "greedy";
  }
  return "joint";
}

/// Dispatches one of the four decoding modes; ctc and attention are the
/// alpha = 1 and alpha = 0 endpoints of the joint search.
inline DecodeResult decode_with_mode(const PosteriorGrid& grid, const Scorer& scorer, DecoderConfig config,
                                     DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kJoint: break;
    case DecodeMode::kCtc: config.alpha = 1.0; break;
    case DecodeMode::kAttention: config.alpha = 0.0; break;
    case DecodeMode::kGreedy: {
      if (grid.frame_count() == 0) throw Error(ErrorCode::kEmptyGrid, "grid has no frames");
      DecodeResult r;
      r.best = greedy_ctc(grid, scorer.vocabulary().blank_id());
      CompletedHypothesis h;
      h.tokens = r.best;
      h.tokens.ids.push_back(scorer.vocabulary().eos_sos_id());
      h.ctc_score = ctc_log_likelihood(grid, r.best.ids, scorer.vocabulary().blank_id());
      h.attn_score = kLogZero;
      h.joint_score = h.ctc_score;
      r.score = h.ctc_score;
      r.ranked.push_back(std::move(h));
      return r;
    }
  }
  return decode(grid, scorer, config);
}

}  // namespace avsr
