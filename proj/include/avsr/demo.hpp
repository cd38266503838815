#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "avsr/decoder.hpp"
#include "avsr/logmath.hpp"
#include "avsr/posterior_grid.hpp"
#include "avsr/rng.hpp"
#include "avsr/scorer.hpp"
#include "avsr/vocab.hpp"
#include "avsr/wer.hpp"

// Synthetic end-to-end corpus: transcripts -> posterior grids -> four
// decoding modes -> WER table.
namespace avsr::demo {

inline constexpr double kOffTargetLogProb = -80.0;

inline const std::vector<std::string>& word_list() {
  static const std::vector<std::string> words = {
      "THE",  "CAT",  "SAT",    "GOOD", "MORNING", "SEE",   "YOU",    "SOON", "HELLO", "WORLD",
      "BOOK", "TIME", "COFFEE", "AT",   "ONE",     "POINT", "LETTER", "MY",   "OWN",   "STAR"};
  return words;
}

struct DemoUtterance {
  std::string id;
  std::string transcript;
  PosteriorGrid grid;
};

namespace detail {

inline void normalize_row(std::span<double> row) {
  const double total = log_sum_exp(row);
  for (double& x : row) x -= total;
}

// Frame with one dominant symbol; every other symbol sits at the floor.
inline std::vector<double> certain_frame(std::size_t v, TokenId symbol) {
  std::vector<double> row(v, kOffTargetLogProb);
  row[static_cast<std::size_t>(symbol)] = 0.0;
  normalize_row(row);
  return row;
}

inline std::vector<double> two_way_frame(std::size_t v, TokenId a, double pa, TokenId b, double pb) {
  std::vector<double> row(v, kOffTargetLogProb);
  row[static_cast<std::size_t>(a)] = std::log(pa);
  row[static_cast<std::size_t>(b)] = std::log(pb);
  normalize_row(row);
  return row;
}

inline PosteriorGrid to_grid(const std::vector<std::vector<double>>& rows, std::size_t v) {
  Matrix m(rows.size(), v);
  for (std::size_t t = 0; t < rows.size(); ++t) std::copy(rows[t].begin(), rows[t].end(), m.row(t).begin());
  return PosteriorGrid(std::move(m));
}

}  // namespace detail

/// Near-deterministic grid for `text`: a blank frame, then per symbol two
/// frames of the symbol followed by a blank frame. Symbols whose index is in
/// `traps` get three frames instead ([c], [blank .51, c .49], [c .6, blank .4]):
/// the per-frame argmax reads "c blank c" so greedy decoding doubles the
/// symbol, while the single-symbol paths sum to 0.694 against 0.306 for the
/// doubled one. The certain first frame makes dropping the symbol cost
/// alpha * 80 nats, more than any bigram can pay back.
inline PosteriorGrid fixture_grid(const std::string& text, const std::vector<std::size_t>& traps,
                                  const Vocabulary& vocab) {
  const TokenSequence ids = encode_text(text, vocab);
  const std::size_t v = vocab.size();
  const TokenId blank = vocab.blank_id();
  std::vector<std::vector<double>> rows;
  rows.push_back(detail::certain_frame(v, blank));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId c = ids.ids[i];
    if (std::find(traps.begin(), traps.end(), i) != traps.end()) {
      rows.push_back(detail::certain_frame(v, c));
      rows.push_back(detail::two_way_frame(v, blank, 0.51, c, 0.49));
      rows.push_back(detail::two_way_frame(v, c, 0.6, blank, 0.4));
    } else {
      rows.push_back(detail::certain_frame(v, c));
      rows.push_back(detail::certain_frame(v, c));
    }
    rows.push_back(detail::certain_frame(v, blank));
  }
  return detail::to_grid(rows, v);
}

/// The bundled fixture: grids where greedy CTC doubles a symbol at each trap
/// and joint decoding at the default settings recovers the transcript.
inline std::vector<DemoUtterance> fixture_corpus(const Vocabulary& vocab = Vocabulary::standard()) {
  struct Spec {
    const char* text;
    std::vector<std::size_t> traps;
  };
  const std::vector<Spec> specs = {
      {"THE CAT SAT", {5}},       {"GOOD MORNING", {7}}, {"SEE YOU SOON", {4}}, {"HELLO WORLD", {6}},
      {"BOOK LETTER", {}},        {"COFFEE TIME", {9}},  {"AT ONE POINT", {}},  {"MY OWN STAR", {3, 8}},
  };
  std::vector<DemoUtterance> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "fixture-%02zu", i);
    out.push_back({id, specs[i].text, fixture_grid(specs[i].text, specs[i].traps, vocab)});
  }
  return out;
}

inline std::string random_transcript(Rng& rng, std::size_t min_words = 2, std::size_t max_words = 4) {
  const auto& words = word_list();
  const std::size_t count = min_words + uniform_index(rng, max_words - min_words + 1);
  std::string s;
  for (std::size_t w = 0; w < count; ++w) {
    if (w) s += ' ';
    s += words[uniform_index(rng, words.size())];
  }
  return s;
}

/// Noisy grid: per frame, logits of `sharpness` on the intended symbol plus
/// N(0, noise_sd) on every symbol, softmax-normalized. noise_sd = 0 gives
/// the near-deterministic fixture layout.
inline PosteriorGrid synthetic_grid(const std::string& text, const Vocabulary& vocab, Rng& rng, double sharpness,
                                    double noise_sd) {
  const TokenSequence ids = encode_text(text, vocab);
  const TokenId blank = vocab.blank_id();
  std::vector<TokenId> layout{blank};
  for (TokenId c : ids.ids) {
    layout.push_back(c);
    layout.push_back(c);
    layout.push_back(blank);
  }
  const std::size_t v = vocab.size();
  std::vector<std::vector<double>> rows;
  for (TokenId target : layout) {
    if (noise_sd == 0.0) {
      rows.push_back(detail::certain_frame(v, target));
      continue;
    }
    std::vector<double> row(v);
    for (std::size_t s = 0; s < v; ++s) {
      row[s] = noise_sd * standard_normal(rng) + (static_cast<TokenId>(s) == target ? sharpness : 0.0);
    }
    detail::normalize_row(row);
    rows.push_back(std::move(row));
  }
  return detail::to_grid(rows, v);
}

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t utterances = 20;
  double sharpness = 6.0;
  double noise_sd = 1.5;
  std::size_t scorer_corpus = 200;  // transcripts drawn to fit the bigram
};

inline std::vector<DemoUtterance> synthetic_corpus(const SyntheticConfig& config, const Vocabulary& vocab) {
  std::vector<DemoUtterance> out;
  for (std::size_t i = 0; i < config.utterances; ++i) {
    Rng rng(derive_seed(config.seed, i));
    char id[24];
    std::snprintf(id, sizeof id, "synth-%04zu", i);
    const std::string text = random_transcript(rng);
    out.push_back({id, text, synthetic_grid(text, vocab, rng, config.sharpness, config.noise_sd)});
  }
  return out;
}

/// Transcripts drawn from the same distribution as the corpus, under a
/// separate seed, for fitting the bigram scorer.
inline std::vector<std::string> scorer_training_text(const SyntheticConfig& config) {
  Rng rng(derive_seed(config.seed, "bigram-corpus"));
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < config.scorer_corpus; ++i) lines.push_back(random_transcript(rng));
  return lines;
}

inline constexpr DecodeMode kModes[] = {DecodeMode::kGreedy, DecodeMode::kCtc, DecodeMode::kAttention,
                                        DecodeMode::kJoint};

struct ModeOutcome {
  DecodeMode mode;
  std::vector<std::string> hypotheses;
  CorpusScore score;
};

struct DemoReport {
  DecoderConfig decoder;
  std::vector<DemoUtterance> corpus;
  std::vector<ModeOutcome> modes;

  const ModeOutcome& outcome(DecodeMode m) const {
    for (const auto& o : modes) {
      if (o.mode == m) return o;
    }
    throw Error(ErrorCode::kInvalidArgument, "mode not run");
  }
};

inline DemoReport run_demo(std::vector<DemoUtterance> corpus, const Scorer& scorer, const DecoderConfig& config) {
  DemoReport report{config, std::move(corpus), {}};
  const Vocabulary& vocab = scorer.vocabulary();
  for (DecodeMode mode : kModes) {
    ModeOutcome outcome{mode, {}, {}};
    std::vector<ScoringPair> pairs;
    for (const auto& utt : report.corpus) {
      const DecodeResult r = decode_with_mode(utt.grid, scorer, config, mode);
      outcome.hypotheses.push_back(decode_tokens(r.best, vocab));
      pairs.push_back({utt.id, utt.transcript, outcome.hypotheses.back()});
    }
    outcome.score = corpus_wer(pairs);
    report.modes.push_back(std::move(outcome));
  }
  return report;
}

inline std::string fixed(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string format_report(const DemoReport& report, const HybridLossConfig& loss = {}) {
  std::string s;
  s += "# decoding comparison\n";
  s += "settings: alpha=" + fixed(report.decoder.alpha, 2) + " beam_width=" + std::to_string(report.decoder.beam_width) +
       " l_max=T lambda=" + fixed(loss.lambda, 2) + " label_smoothing=" + fixed(loss.smoothing, 2) + "\n";
  s += "utterances: " + std::to_string(report.corpus.size()) + "\n\n";
  s += "mode        WER      S    D    I    N\n";
  for (const auto& o : report.modes) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s  %.4f  %3zu  %3zu  %3zu  %3zu\n", mode_name(o.mode), o.score.wer(),
                  o.score.total.substitutions, o.score.total.deletions, o.score.total.insertions,
                  o.score.total.ref_len);
    s += line;
  }
  s += "\n";
  for (std::size_t i = 0; i < report.corpus.size(); ++i) {
    s += report.corpus[i].id + "  REF: " + report.corpus[i].transcript + "\n";
    for (const auto& o : report.modes) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "  %-10s ", mode_name(o.mode));
      s += std::string(tag) + o.hypotheses[i] + "\n";
    }
  }
  return s;
}

inline nlohmann::json report_json(const DemoReport& report, const HybridLossConfig& loss = {}) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& o : report.modes) {
    nlohmann::json utts = nlohmann::json::array();
    for (std::size_t i = 0; i < report.corpus.size(); ++i) {
      const auto& c = o.score.utterances[i].counts;
      utts.push_back({{"id", report.corpus[i].id},
                      {"hypothesis", o.hypotheses[i]},
                      {"S", c.substitutions},
                      {"D", c.deletions},
                      {"I", c.insertions},
                      {"N", c.ref_len}});
    }
    modes.push_back({{"mode", mode_name(o.mode)},
                     {"wer", o.score.wer()},
                     {"S", o.score.total.substitutions},
                     {"D", o.score.total.deletions},
                     {"I", o.score.total.insertions},
                     {"N", o.score.total.ref_len},
                     {"utterances", std::move(utts)}});
  }
  return {{"settings",
           {{"alpha", report.decoder.alpha},
            {"beam_width", report.decoder.beam_width},
            {"l_max", "T"},
            {"lambda", loss.lambda},
            {"label_smoothing", loss.smoothing}}},
          {"modes", std::move(modes)}};
}

}  // namespace avsr::demo
