#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avsr/error.hpp"
#include "avsr/logmath.hpp"
#include "avsr/matrix.hpp"
#include "avsr/posterior_grid.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

/// Continuation handle for one prefix of an autoregressive scorer.
struct ScorerState {
  std::vector<TokenId> prefix;  // labels after [SOS]
  double cumulative = 0.0;      // log p_att(prefix)
};

/// Autoregressive label scorer p(y_l | y_<l). Implementations supply the
/// next-symbol distribution for a prefix; the base class owns bookkeeping.
class Scorer {
 public:
  explicit Scorer(Vocabulary vocab) : vocab_(std::move(vocab)) {}
  virtual ~Scorer() = default;

  const Vocabulary& vocabulary() const { return vocab_; }
  virtual std::string name() const = 0;
  // Steps must be a pure function of (state, symbol); the decoder refuses
  // scorers that report otherwise.
  virtual bool deterministic() const { return true; }

  ScorerState start() const { return {}; }

  ScorerState start(const PosteriorGrid& grid) const {
    if (grid.vocab_size() != vocab_.size()) {
      throw Error(ErrorCode::kContextMismatch, name() + " scorer has " + std::to_string(vocab_.size()) +
                                                   " symbols, grid has " + std::to_string(grid.vocab_size()));
    }
    return start();
  }

  /// Log-probabilities of every symbol following `state`; blank is kLogZero
  /// and the [EOS] entry terminates the sequence.
  std::vector<double> step_log_probs(const ScorerState& state) const {
    std::vector<double> dist = distribution(state.prefix);
    dist[static_cast<std::size_t>(vocab_.blank_id())] = kLogZero;
    return dist;
  }

  std::pair<ScorerState, double> step(const ScorerState& state, TokenId c) const {
    check_symbol(c);
    const double logp = step_log_probs(state)[static_cast<std::size_t>(c)];
    return {advance(state, c, logp), logp};
  }

  /// Child state once the caller already holds the step log-probability.
  ScorerState advance(const ScorerState& state, TokenId c, double step_logp) const {
    check_symbol(c);
    ScorerState next;
    next.prefix.reserve(state.prefix.size() + 1);
    next.prefix = state.prefix;
    next.prefix.push_back(c);
    next.cumulative = state.cumulative + step_logp;
    return next;
  }

 protected:
  virtual std::vector<double> distribution(const std::vector<TokenId>& prefix) const = 0;

  double uniform_log_prob() const { return -std::log(static_cast<double>(vocab_.size() - 1)); }

 private:
  void check_symbol(TokenId c) const {
    if (c == vocab_.blank_id()) throw Error(ErrorCode::kBlankToken, "scorer cannot emit blank");
    if (c < 0 || static_cast<std::size_t>(c) >= vocab_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "symbol " + std::to_string(c) + " out of range");
    }
  }

  Vocabulary vocab_;
};

/// Equal mass on every decodable symbol.
class UniformScorer final : public Scorer {
 public:
  using Scorer::Scorer;
  std::string name() const override { return "uniform"; }

 protected:
  std::vector<double> distribution(const std::vector<TokenId>&) const override {
    return std::vector<double>(vocabulary().size(), uniform_log_prob());
  }
};

/// Per-step lookup table keyed by the rendered prefix text. Prefixes absent
/// from the table fall back to the uniform distribution.
///
/// File format: {"steps": [ {"<prefix>": <row>, ...}, ... ]} where steps[l]
/// holds prefixes of length l and a row is either an array of V
/// log-probabilities or an object mapping symbol labels to log-probabilities
/// (missing symbols get zero probability).
class TableScorer final : public Scorer {
 public:
  using Table = std::vector<std::map<std::string, std::vector<double>>>;

  TableScorer(Vocabulary vocab, Table steps) : Scorer(std::move(vocab)), steps_(std::move(steps)) {
    for (std::size_t l = 0; l < steps_.size(); ++l) {
      for (auto& [prefix, row] : steps_[l]) validate_row(prefix, row);
    }
  }

  static TableScorer from_json(const Vocabulary& vocab, const nlohmann::json& j) {
    Table steps;
    try {
      for (const auto& level : j.at("steps")) {
        auto& out = steps.emplace_back();
        for (const auto& [prefix, row] : level.items()) {
          std::vector<double> values(vocab.size(), kLogZero);
          if (row.is_array()) {
            if (row.size() != vocab.size()) {
              throw Error(ErrorCode::kParseError, "row for '" + prefix + "' has wrong length");
            }
            for (std::size_t v = 0; v < row.size(); ++v) {
              values[v] = row[v].is_null() ? kLogZero : row[v].get<double>();
            }
          } else {
            for (const auto& [label, value] : row.items()) {
              const auto id = vocab.find(label);
              if (!id) throw Error(ErrorCode::kParseError, "unknown symbol '" + label + "' in table");
              values[static_cast<std::size_t>(*id)] = value.is_null() ? kLogZero : value.get<double>();
            }
          }
          out.emplace(prefix, std::move(values));
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, e.what());
    }
    return TableScorer(vocab, std::move(steps));
  }

  static TableScorer load(const Vocabulary& vocab, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open table " + path);
    try {
      return from_json(vocab, nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path + ": " + e.what());
    }
  }

  std::string name() const override { return "table"; }

 protected:
  std::vector<double> distribution(const std::vector<TokenId>& prefix) const override {
    if (prefix.size() < steps_.size()) {
      const auto& level = steps_[prefix.size()];
      auto it = level.find(render(prefix));
      if (it != level.end()) return it->second;
    }
    return std::vector<double>(vocabulary().size(), uniform_log_prob());
  }

 private:
  std::string render(const std::vector<TokenId>& prefix) const {
    std::string s;
    for (TokenId id : prefix) s += vocabulary().render(id);
    return s;
  }

  void validate_row(const std::string& prefix, std::vector<double>& row) const {
    if (row.size() != vocabulary().size()) {
      throw Error(ErrorCode::kParseError, "row for '" + prefix + "' has wrong length");
    }
    row[static_cast<std::size_t>(vocabulary().blank_id())] = kLogZero;
    const double total = log_sum_exp(row);
    if (!(std::abs(total) <= 1e-6)) {
      throw Error(ErrorCode::kParseError, "row for '" + prefix + "' does not sum to one");
    }
  }

  Table steps_;
};

/// Character bigram p(next | previous) with add-k smoothing, where the
/// previous symbol of the first label is [SOS] and every line ends in [EOS].
class BigramScorer final : public Scorer {
 public:
  BigramScorer(Vocabulary vocab, const std::vector<std::string>& corpus, double add_k = 1.0)
      : Scorer(std::move(vocab)), add_k_(add_k) {
    const std::size_t v = vocabulary().size();
    counts_ = Matrix(v, v, 0.0);
    const TokenId eos = vocabulary().eos_sos_id();
    for (const std::string& line : corpus) {
      const TokenSequence ids = encode_text(line, vocabulary());
      TokenId prev = eos;
      for (TokenId id : ids.ids) {
        counts_(static_cast<std::size_t>(prev), static_cast<std::size_t>(id)) += 1.0;
        prev = id;
      }
      counts_(static_cast<std::size_t>(prev), static_cast<std::size_t>(eos)) += 1.0;
    }
    log_probs_ = Matrix(v, v, kLogZero);
    const double support = static_cast<double>(v - 1);
    for (std::size_t prev = 0; prev < v; ++prev) {
      double total = 0.0;
      for (std::size_t next = 0; next < v; ++next) total += counts_(prev, next);
      for (std::size_t next = 0; next < v; ++next) {
        if (static_cast<TokenId>(next) == vocabulary().blank_id()) continue;
        log_probs_(prev, next) = std::log((counts_(prev, next) + add_k_) / (total + add_k_ * support));
      }
    }
  }

  static BigramScorer fit_file(const Vocabulary& vocab, const std::string& path, double add_k = 1.0) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open corpus " + path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
    return BigramScorer(vocab, lines, add_k);
  }

  std::string name() const override { return "bigram"; }
  double count(TokenId prev, TokenId next) const {
    return counts_(static_cast<std::size_t>(prev), static_cast<std::size_t>(next));
  }

 protected:
  std::vector<double> distribution(const std::vector<TokenId>& prefix) const override {
    const TokenId prev = prefix.empty() ? vocabulary().eos_sos_id() : prefix.back();
    const auto row = log_probs_.row(static_cast<std::size_t>(prev));
    return {row.begin(), row.end()};
  }

 private:
  double add_k_;
  Matrix counts_;
  Matrix log_probs_;
};

/// Builds a scorer from "uniform", "table:<path>" or "bigram:<corpus path>".
inline std::unique_ptr<Scorer> make_scorer(const std::string& spec, const Vocabulary& vocab) {
  if (spec == "uniform") return std::make_unique<UniformScorer>(vocab);
  if (spec.starts_with("table:")) return std::make_unique<TableScorer>(TableScorer::load(vocab, spec.substr(6)));
  if (spec.starts_with("bigram:")) {
    return std::make_unique<BigramScorer>(BigramScorer::fit_file(vocab, spec.substr(7)));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scorer spec '" + spec + "'");
}

struct HybridLossConfig {
  double lambda = 0.2;
  double smoothing = 0.01;
};

/// Teacher-forced cross-entropy with uniform label smoothing over the
/// decodable set. Row l of `step_log_probs` is the V-wide distribution
/// predicted for target position l; the blank column is ignored.
inline double cross_entropy_loss(const Matrix& step_log_probs, const TokenSequence& target, double smoothing,
                                 const Vocabulary& vocab) {
  if (step_log_probs.rows() != target.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(step_log_probs.rows()) + " prediction rows for " +
                                                std::to_string(target.size()) + " targets");
  }
  if (step_log_probs.cols() != vocab.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction width does not match vocabulary");
  }
  if (target.empty() || target.ids.back() != vocab.eos_sos_id()) {
    throw Error(ErrorCode::kInvalidArgument, "teacher-forcing target must end with [EOS]");
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing must lie in [0, 1)");
  }
  const auto decodable = vocab.decodable();
  double loss = 0.0;
  for (std::size_t l = 0; l < target.size(); ++l) {
    const auto row = step_log_probs.row(l);
    const double nll = -row[static_cast<std::size_t>(target.ids[l])];
    if (smoothing == 0.0) {
      loss += nll;
      continue;
    }
    double mean = 0.0;
    for (TokenId v : decodable) mean += row[static_cast<std::size_t>(v)];
    mean /= static_cast<double>(decodable.size());
    loss += (1.0 - smoothing) * nll - smoothing * mean;
  }
  return loss;
}

/// lambda * CTC + (1 - lambda) * CE, both given as negative log-likelihoods.
inline double hybrid_loss(double ctc_nll, double ce_nll, const HybridLossConfig& config = {}) {
  return config.lambda * ctc_nll + (1.0 - config.lambda) * ce_nll;
}

}  // namespace avsr
