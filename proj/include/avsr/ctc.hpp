#pragma once

#include <optional>
#include <span>
#include <vector>

#include "avsr/error.hpp"
#include "avsr/logmath.hpp"
#include "avsr/matrix.hpp"
#include "avsr/posterior_grid.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

namespace ctc_detail {

inline void check_target(const PosteriorGrid& grid, std::span<const TokenId> target, TokenId blank) {
  if (grid.frame_count() == 0) throw Error(ErrorCode::kEmptyGrid, "grid has no frames");
  for (TokenId id : target) {
    if (id == blank) throw Error(ErrorCode::kInvalidArgument, "target contains blank");
    if (id < 0 || static_cast<std::size_t>(id) >= grid.vocab_size()) {
      throw Error(ErrorCode::kInvalidArgument, "target id " + std::to_string(id) + " outside grid");
    }
  }
}

// Blank-augmented label string: blank, y1, blank, y2, ..., yL, blank.
inline std::vector<TokenId> augment(std::span<const TokenId> target, TokenId blank) {
  std::vector<TokenId> ext(2 * target.size() + 1, blank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

// Position s may be entered from s-2 when it is a label differing from s-2.
inline bool can_skip(const std::vector<TokenId>& ext, std::size_t s, TokenId blank) {
  return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
}

inline Matrix forward_variables(const PosteriorGrid& grid, const std::vector<TokenId>& ext, TokenId blank) {
  const std::size_t frames = grid.frame_count();
  const std::size_t states = ext.size();
  Matrix alpha(frames, states, kLogZero);
  alpha(0, 0) = grid(0, ext[0]);
  if (states > 1) alpha(0, 1) = grid(0, ext[1]);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(ext, s, blank)) acc = log_add(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc == kLogZero ? kLogZero : acc + grid(t, ext[s]);
    }
  }
  return alpha;
}

// beta(t, s): log probability of emitting frames t+1..T-1 given state s at t
// (excludes the frame-t emission, so alpha * beta is the state occupancy).
inline Matrix backward_variables(const PosteriorGrid& grid, const std::vector<TokenId>& ext, TokenId blank) {
  const std::size_t frames = grid.frame_count();
  const std::size_t states = ext.size();
  Matrix beta(frames, states, kLogZero);
  beta(frames - 1, states - 1) = 0.0;
  if (states > 1) beta(frames - 1, states - 2) = 0.0;
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < states; ++s) {
      double acc = beta(t + 1, s) + grid(t + 1, ext[s]);
      if (s + 1 < states) acc = log_add(acc, beta(t + 1, s + 1) + grid(t + 1, ext[s + 1]));
      if (s + 2 < states && can_skip(ext, s + 2, blank)) {
        acc = log_add(acc, beta(t + 1, s + 2) + grid(t + 1, ext[s + 2]));
      }
      beta(t, s) = acc;
    }
  }
  return beta;
}

}  // namespace ctc_detail

/// Fewest frames that can emit `target`: one per label plus one blank
/// between every pair of identical neighbours.
inline std::size_t min_alignable_frames(std::span<const TokenId> target) {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++n;
  }
  return n;
}

/// log p_CTC(target | grid) by the blank-augmented forward recursion.
/// Returns kLogZero when every alignment passes through a zero entry.
inline double ctc_log_likelihood(const PosteriorGrid& grid, std::span<const TokenId> target, TokenId blank) {
  ctc_detail::check_target(grid, target, blank);
  if (grid.frame_count() < min_alignable_frames(target)) {
    throw Error(ErrorCode::kUnalignable, std::to_string(target.size()) + " labels need at least " +
                                             std::to_string(min_alignable_frames(target)) + " frames, grid has " +
                                             std::to_string(grid.frame_count()));
  }
  const auto ext = ctc_detail::augment(target, blank);
  const Matrix alpha = ctc_detail::forward_variables(grid, ext, blank);
  const std::size_t last = grid.frame_count() - 1;
  double total = alpha(last, ext.size() - 1);
  if (ext.size() > 1) total = log_add(total, alpha(last, ext.size() - 2));
  return total;
}

/// Negative log-likelihood of `target` under the grid (the CTC loss).
inline double ctc_forward_loss(const PosteriorGrid& grid, const TokenSequence& target, TokenId blank) {
  return -ctc_log_likelihood(grid, target.ids, blank);
}

/// d(loss)/d(log_probs[t][v]) treating every grid entry as independent.
/// Equals minus the posterior occupancy of symbol v at frame t.
inline Matrix ctc_gradient(const PosteriorGrid& grid, const TokenSequence& target, TokenId blank) {
  const double log_p = ctc_log_likelihood(grid, target.ids, blank);
  Matrix grad(grid.frame_count(), grid.vocab_size(), 0.0);
  if (log_p == kLogZero) {
    throw Error(ErrorCode::kUnalignable, "target has zero probability; gradient undefined");
  }
  const auto ext = ctc_detail::augment(target.ids, blank);
  const Matrix alpha = ctc_detail::forward_variables(grid, ext, blank);
  const Matrix beta = ctc_detail::backward_variables(grid, ext, blank);
  for (std::size_t t = 0; t < grid.frame_count(); ++t) {
    for (std::size_t s = 0; s < ext.size(); ++s) {
      const double occ = alpha(t, s) + beta(t, s) - log_p;
      if (occ != kLogZero) grad(t, static_cast<std::size_t>(ext[s])) -= std::exp(occ);
    }
  }
  return grad;
}

/// Forward variables of one decoding prefix: gamma_n[t] / gamma_b[t] are the
/// log probabilities that frames 0..t emit the prefix ending in a label /
/// a blank; psi is the log prefix probability.
struct PrefixState {
  std::vector<double> gamma_n;
  std::vector<double> gamma_b;
  double psi = 0.0;
};

/// State of the [SOS] root: no label emitted, gamma_b a running blank product.
inline PrefixState prefix_init(const PosteriorGrid& grid, TokenId blank) {
  if (grid.frame_count() == 0) throw Error(ErrorCode::kEmptyGrid, "grid has no frames");
  const std::size_t frames = grid.frame_count();
  PrefixState root;
  root.gamma_n.assign(frames, kLogZero);
  root.gamma_b.resize(frames);
  double running = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    running += grid(t, blank);
    root.gamma_b[t] = running;
  }
  root.psi = 0.0;
  return root;
}

/// Log probability that the grid emits exactly the prefix held by `state`.
inline double prefix_eos_score(const PrefixState& state) {
  return log_add(state.gamma_n.back(), state.gamma_b.back());
}

namespace ctc_detail {

// `last` is the prefix's final label, or blank for the bare [SOS] prefix;
// c is never blank, so it can't count as a repeat of [SOS].
inline PrefixState extend(const PosteriorGrid& grid, const PrefixState& parent, TokenId last, TokenId c,
                          TokenId blank) {
  if (c == blank) throw Error(ErrorCode::kBlankExtension, "cannot extend a prefix by blank");
  const std::size_t frames = grid.frame_count();
  PrefixState child;
  child.gamma_n.resize(frames);
  child.gamma_b.resize(frames);
  child.gamma_n[0] = last == blank ? grid(0, c) : kLogZero;
  child.gamma_b[0] = kLogZero;
  double psi = child.gamma_n[0];
  const bool repeat = last == c;
  for (std::size_t t = 1; t < frames; ++t) {
    const double phi = repeat ? parent.gamma_b[t - 1] : log_add(parent.gamma_b[t - 1], parent.gamma_n[t - 1]);
    const double emit_c = grid(t, c);
    child.gamma_n[t] = log_add(child.gamma_n[t - 1], phi) + emit_c;
    child.gamma_b[t] = log_add(child.gamma_b[t - 1], child.gamma_n[t - 1]) + grid(t, blank);
    psi = log_add(psi, phi + emit_c);
  }
  child.psi = psi;
  return child;
}

}  // namespace ctc_detail

/// Extends the prefix g (whose forward variables are `parent` and whose last
/// label is `parent_last`, nullopt for [SOS]) by label c.
inline PrefixState prefix_extend(const PosteriorGrid& grid, const PrefixState& parent,
                                 std::optional<TokenId> parent_last, TokenId c, TokenId blank) {
  return ctc_detail::extend(grid, parent, parent_last.has_value() ? *parent_last : blank, c, blank);
}

struct PrefixExtension {
  std::optional<PrefixState> state;  // empty for the [EOS] case
  double score = kLogZero;           // psi of the child, or the complete-sequence score
};

/// Single entry point covering both branches of the expansion step.
inline PrefixExtension prefix_extend(const PosteriorGrid& grid, const PrefixState& parent,
                                     std::optional<TokenId> parent_last, TokenId c, bool c_is_eos,
                                     TokenId blank) {
  if (c_is_eos) return {std::nullopt, prefix_eos_score(parent)};
  PrefixState child = prefix_extend(grid, parent, parent_last, c, blank);
  const double psi = child.psi;
  return {std::move(child), psi};
}

}  // namespace avsr
