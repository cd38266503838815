#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "avsr/error.hpp"

namespace avsr {

struct WerBreakdown {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }

  double wer() const {
    if (ref_len == 0) throw Error(ErrorCode::kEmptyReference, "WER undefined for an empty reference");
    return static_cast<double>(errors()) / static_cast<double>(ref_len);
  }

  WerBreakdown& operator+=(const WerBreakdown& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
  friend bool operator==(const WerBreakdown&, const WerBreakdown&) = default;
};

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

inline const char* edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::kMatch: return "match";
    case EditOp::kSubstitution: return "sub";
    case EditOp::kDeletion: return "del";
    case EditOp::kInsertion: return "ins";
  }
  return "?";
}

struct AlignedPair {
  std::optional<std::string> ref;
  std::optional<std::string> hyp;
  EditOp op = EditOp::kMatch;
};

using AlignmentTrace = std::vector<AlignedPair>;

inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) words.push_back(std::move(w));
  return words;
}

/// Minimum edit-distance alignment over words with unit costs. Among the
/// optimal alignments the one with the most substitutions is taken, which
/// fixes S, D and I independently of tie-breaking; the backtrace then
/// prefers substitution/match, then insertion, then deletion.
inline std::pair<WerBreakdown, AlignmentTrace> align_words(const std::vector<std::string>& ref,
                                                           const std::vector<std::string>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  struct Cell {
    std::size_t cost;
    std::size_t subs;
  };
  // better: lower cost, then more substitutions
  const auto better = [](Cell a, Cell b) { return a.cost < b.cost || (a.cost == b.cost && a.subs > b.subs); };
  std::vector<Cell> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = {i, 0};
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = {j, 0};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cell best{at(i - 1, j - 1).cost + (same ? 0 : 1), at(i - 1, j - 1).subs + (same ? 0 : 1)};
      const Cell ins{at(i, j - 1).cost + 1, at(i, j - 1).subs};
      const Cell del{at(i - 1, j).cost + 1, at(i - 1, j).subs};
      if (better(ins, best)) best = ins;
      if (better(del, best)) best = del;
      at(i, j) = best;
    }
  }

  WerBreakdown counts;
  counts.ref_len = n;
  AlignmentTrace trace;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Cell here = at(i, j);
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      const Cell prev = at(i - 1, j - 1);
      if (prev.cost + (same ? 0 : 1) == here.cost && prev.subs + (same ? 0 : 1) == here.subs) {
        trace.push_back({ref[i - 1], hyp[j - 1], same ? EditOp::kMatch : EditOp::kSubstitution});
        if (!same) ++counts.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && at(i, j - 1).cost + 1 == here.cost && at(i, j - 1).subs == here.subs) {
      trace.push_back({std::nullopt, hyp[j - 1], EditOp::kInsertion});
      ++counts.insertions;
      --j;
      continue;
    }
    trace.push_back({ref[i - 1], std::nullopt, EditOp::kDeletion});
    ++counts.deletions;
    --i;
  }
  std::reverse(trace.begin(), trace.end());
  return {counts, trace};
}

inline std::pair<WerBreakdown, AlignmentTrace> align_words(std::string_view ref, std::string_view hyp) {
  return align_words(split_words(ref), split_words(hyp));
}

struct UtteranceScore {
  std::string id;
  std::string reference;
  std::string hypothesis;
  WerBreakdown counts;
  std::optional<std::string> error;  // set when this utterance's WER is undefined
};

struct CorpusScore {
  WerBreakdown total;
  std::vector<UtteranceScore> utterances;

  /// Sum of errors over sum of reference words.
  double wer() const { return total.wer(); }
};

struct ScoringPair {
  std::string id;
  std::string reference;
  std::string hypothesis;
};

inline CorpusScore corpus_wer(const std::vector<ScoringPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "corpus has no utterances");
  CorpusScore score;
  for (const auto& p : pairs) {
    UtteranceScore u{p.id, p.reference, p.hypothesis, align_words(p.reference, p.hypothesis).first, std::nullopt};
    if (u.counts.ref_len == 0) u.error = "EmptyReference";
    score.total += u.counts;
    score.utterances.push_back(std::move(u));
  }
  return score;
}

}  // namespace avsr
