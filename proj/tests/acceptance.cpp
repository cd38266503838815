// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and
// instance counts are pinned below; exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "avsr/avsr.hpp"
#include "oracles.hpp"

namespace {

using namespace avsr;

constexpr double kLatticeTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kPrefixTol = 1e-9;
constexpr double kSnrTolDb = 0.01;
constexpr double kFuseMeanTol = 1e-6;
constexpr double kFuseVarTol = 1e-4;
constexpr double kConvTol = 1e-12;
constexpr double kGeometryTol = 1e-9;
constexpr double kLinearityTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. CTC lattice vs exhaustive path sum.
Outcome ctc_forward() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t t_len = 1 + rng() % 6;
    const std::size_t v = 2 + rng() % 3;  // blank included
    const auto grid = oracle::random_grid(rng, t_len, v);
    const TokenId blank = static_cast<TokenId>(rng() % v);
    std::vector<TokenId> letters;
    for (TokenId s = 0; s < static_cast<TokenId>(v); ++s) {
      if (s != blank) letters.push_back(s);
    }
    std::vector<TokenId> target;
    do {
      target.assign(rng() % (t_len + 1), 0);
      for (auto& c : target) c = letters[rng() % letters.size()];
    } while (min_alignable_frames(target) > t_len);
    const double lattice = ctc_log_likelihood(grid, target, blank);
    const double brute = oracle::ctc_log_prob(grid, target, blank);
    worst = std::max(worst, std::abs(lattice - brute));
  }
  return {worst <= kLatticeTol, "200 instances, max |diff| = " + fmt("%.3g", worst)};
}

// 2. Gradient w.r.t. log-prob entries vs central differences of the loss.
Outcome ctc_grad() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t t_len = 1 + rng() % 5;
    const std::size_t v = 2 + rng() % 3;
    const auto grid = oracle::random_grid(rng, t_len, v);
    const TokenId blank = 0;
    std::vector<TokenId> target;
    do {
      target.assign(rng() % (t_len + 1), 0);
      for (auto& c : target) c = static_cast<TokenId>(1 + rng() % (v - 1));
    } while (min_alignable_frames(target) > t_len);
    const TokenSequence seq{target, SequenceRole::kReference};
    const Matrix g = ctc_gradient(grid, seq, blank);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t s = 0; s < v; ++s) {
        Matrix up = grid.log_probs(), down = grid.log_probs();
        up(t, s) += kFdStep;
        down(t, s) -= kFdStep;
        const double fd = (ctc_forward_loss(PosteriorGrid(up), seq, blank) -
                           ctc_forward_loss(PosteriorGrid(down), seq, blank)) /
                          (2 * kFdStep);
        const double scale = std::max(std::abs(g(t, s)), std::abs(fd));
        if (scale == 0.0) continue;
        worst = std::max(worst, std::abs(g(t, s) - fd) / scale);
      }
    }
  }
  return {worst <= kGradRelTol, "50 instances, max relative error = " + fmt("%.3g", worst)};
}

// 3. Prefix probability vs enumerated prefix mass.
Outcome prefix_identity() {
  std::mt19937_64 rng(303);
  double worst_inclusive = 0.0, worst_split = 0.0;
  std::size_t prefixes = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t t_len = 1 + rng() % 5;
    const std::size_t letters = 1 + rng() % 3;
    const Vocabulary vocab = oracle::tiny_vocab(letters);
    const TokenId blank = vocab.blank_id();
    const auto grid = oracle::random_grid(rng, t_len, vocab.size());
    // Walk every prefix of length <= 3 depth first.
    std::function<void(const std::vector<TokenId>&, const PrefixState&)> walk = [&](const std::vector<TokenId>& h,
                                                                                    const PrefixState& st) {
      const auto mass = oracle::prefix_mass(grid, h, blank);
      const double psi = std::exp(st.psi);
      const double eos = std::exp(prefix_eos_score(st));
      worst_inclusive = std::max(worst_inclusive, std::abs(psi - mass.inclusive));
      // Strict extensions plus the exact sequence make up the full mass.
      worst_split = std::max(worst_split, std::abs((psi - eos) + eos - (mass.strict + mass.exact)));
      worst_split = std::max(worst_split, std::abs(eos - mass.exact));
      ++prefixes;
      if (h.size() == 3) return;
      for (TokenId c = 0; c < static_cast<TokenId>(letters); ++c) {
        auto next = h;
        next.push_back(c);
        walk(next, h.empty() ? prefix_extend(grid, st, std::nullopt, c, blank)
                             : prefix_extend(grid, st, h.back(), c, blank));
      }
    };
    walk({}, prefix_init(grid, blank));
  }
  const double worst = std::max(worst_inclusive, worst_split);
  return {worst <= kPrefixTol, std::to_string(prefixes) + " prefixes, max |exp(psi) - mass| = " +
                                   fmt("%.3g", worst_inclusive) + ", strict/eos split = " + fmt("%.3g", worst_split)};
}

// 4. Unbounded beam equals exhaustive enumeration.
Outcome decoder_oracle() {
  const double alphas[] = {0.0, 0.1, 0.5, 1.0};
  std::size_t agree = 0, total = 0;
  std::string first_miss;
  for (double alpha : alphas) {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 100; ++i) {
      const std::size_t t_len = 1 + rng() % 4;
      const std::size_t letters = 1 + rng() % 3;
      const Vocabulary vocab = oracle::tiny_vocab(letters);
      const auto grid = oracle::random_grid(rng, t_len, vocab.size());
      const oracle::RandomScorer scorer(vocab, rng());
      DecoderConfig cfg;
      cfg.alpha = alpha;
      cfg.beam_width = 1'000'000;
      const auto got = decode(grid, scorer, cfg);
      const auto want = oracle::exhaustive_decode(grid, scorer, alpha, t_len);
      ++total;
      if (got.best.ids == want.labels) {
        ++agree;
      } else if (first_miss.empty()) {
        first_miss = " (first miss: alpha " + fmt("%.1f", alpha) + " instance " + std::to_string(i) + ")";
      }
    }
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) +
                              " identical over alpha in {0, 0.1, 0.5, 1}" + first_miss};
}

// 5. Endpoint invariances and beam monotonicity.
Outcome endpoints() {
  std::mt19937_64 rng(505);
  const Vocabulary vocab = oracle::tiny_vocab(3);
  bool ok = true;
  std::size_t alpha1 = 0, alpha0 = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t t_len = 2 + rng() % 5;
    const auto grid = oracle::random_grid(rng, t_len, vocab.size());
    const UniformScorer s0(vocab);
    const oracle::RandomScorer s1(vocab, rng()), s2(vocab, rng());
    DecoderConfig cfg;
    cfg.alpha = 1.0;
    const auto a = decode(grid, s0, cfg), b = decode(grid, s1, cfg), c = decode(grid, s2, cfg);
    if (a.best == b.best && b.best == c.best && a.score == b.score && b.score == c.score) ++alpha1;
    const auto g1 = oracle::random_grid(rng, t_len, vocab.size());
    const auto g2 = oracle::random_grid(rng, t_len, vocab.size());
    cfg.alpha = 0.0;
    const auto x = decode(grid, s1, cfg), y = decode(g1, s1, cfg), z = decode(g2, s1, cfg);
    if (x.best == y.best && y.best == z.best && x.score == y.score && y.score == z.score) ++alpha0;
  }
  ok = alpha1 == 20 && alpha0 == 20;

  std::size_t monotone = 0;
  const std::size_t widths[] = {1, 2, 4, 8, 16};
  for (int i = 0; i < 50; ++i) {
    const std::size_t t_len = 3 + rng() % 6;
    const auto grid = oracle::random_grid(rng, t_len, vocab.size());
    const oracle::RandomScorer scorer(vocab, rng());
    double prev = -INFINITY;
    bool inst_ok = true;
    for (std::size_t w : widths) {
      DecoderConfig cfg;
      cfg.beam_width = w;
      const double s = decode(grid, scorer, cfg).score;
      if (s < prev) inst_ok = false;
      prev = std::max(prev, s);
    }
    if (inst_ok) ++monotone;
  }
  ok = ok && monotone == 50;
  return {ok, "alpha=1 invariant " + std::to_string(alpha1) + "/20, alpha=0 invariant " + std::to_string(alpha0) +
                  "/20, monotone over W " + std::to_string(monotone) + "/50"};
}

// 6. WER fixtures and fuzzed agreement with a plain edit distance.
Outcome wer_checks() {
  struct Fixture {
    const char* ref;
    const char* hyp;
    std::size_t s, d, i;
  };
  const Fixture fixtures[] = {
      {"WHATEVER YOU ARE", "WHATEVER YOU ASK", 1, 0, 0},
      {"TRAVEL THREE MILES FURTHER WEST AND YOU DO GET MORE FOR YOUR MONEY HERE",
       "TRAVEL THREE MILES URBER WEST AND YOU DO GET MORE FOR YOUR MONEY HERE", 1, 0, 0},
      {"IT COULD BE YOUR PASSPORT TO A SMALL FORTUNE", "IT COULD BE YOUR PASSPORT FOR A SMALL FORTUNE", 1, 0, 0},
      {"NOT TO THINK FOR THEMSELVES", "NOT WHAT THINK FOR THEMSELVES", 1, 0, 0},
      {"NOT FOR SUBJECT MATTER", "NOT THE SUBJECT MATTERING", 2, 0, 0},
      {"I WOULDN'T SAY I'M A STAR", "I WOULDN'T SAY I'M THE STAR", 1, 0, 0},
      {"CHRISTMAS PUDDING THAT NOBODY REALLY LIKES", "CRISPAS PUDDING THAT NOBODY REALLY LIKES", 1, 0, 0},
      {"AT THE SAME TIME", "BUT AT THE SAME TIME", 0, 0, 1},
      {"BEING MY OWN", "BEING ON MY OWN", 0, 0, 1},
      {"AT ONE POINT", "SO AT ONE POINT", 0, 0, 1},
  };
  std::size_t fixture_ok = 0;
  for (const auto& f : fixtures) {
    const auto c = align_words(f.ref, f.hyp).first;
    if (c.substitutions == f.s && c.deletions == f.d && c.insertions == f.i) ++fixture_ok;
  }
  const bool third = std::abs(align_words("WHATEVER YOU ARE", "WHATEVER YOU ASK").first.wer() - 1.0 / 3.0) < 1e-15;

  std::mt19937_64 rng(606);
  const char* words[] = {"A", "B", "C", "D", "E"};
  std::size_t agree = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> r(rng() % 9), h(rng() % 9);
    for (auto& w : r) w = words[rng() % 5];
    for (auto& w : h) w = words[rng() % 5];
    const auto c = align_words(r, h).first;
    if (c.errors() == oracle::edit_distance(r, h) && c.ref_len == r.size()) ++agree;
  }
  return {fixture_ok == std::size(fixtures) && third && agree == 1000,
          std::to_string(fixture_ok) + "/10 fixtures, WER(WHATEVER YOU ASK) = 1/3 " + (third ? "ok" : "wrong") +
              ", fuzz " + std::to_string(agree) + "/1000"};
}

// 7. Mixing hits the requested SNR; the apply rate matches p_n.
Outcome snr_checks() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double snr = -20.0 + 60.0 * static_cast<double>(i) / 99.0;
    AudioSignal sig, noise;
    sig.samples.resize(800 + rng() % 800);
    noise.samples.resize(400 + rng() % 2000);
    const double gs = std::exp(n(rng)), gn = std::exp(n(rng));
    for (auto& x : sig.samples) x = gs * n(rng);
    for (auto& x : noise.samples) x = gn * n(rng);
    const auto mixed = mix_at_snr(sig, noise, snr, rng());
    worst = std::max(worst, std::abs(oracle::measured_snr_db(sig.samples, mixed.samples) - snr));
  }

  std::vector<Utterance> corpus(10'000);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    corpus[i].id = "u" + std::to_string(i);
    corpus[i].audio.samples = {0.5, -0.25, 0.125, -0.5};
  }
  NoiseSpec spec;
  spec.kind = NoiseKind::kFile;
  spec.seed = 7;
  const std::vector<AudioSignal> pool{AudioSignal{{0.1, -0.3, 0.2, 0.05, -0.1}, kCanonicalSampleRate}};
  const auto report = augment_corpus(corpus, spec, pool);
  std::size_t noised = 0;
  for (const auto& e : report.entries) noised += e.noised ? 1 : 0;
  const double mean = 10'000 * 0.25, sigma = std::sqrt(10'000 * 0.25 * 0.75);
  const bool rate_ok = std::abs(static_cast<double>(noised) - mean) <= 3 * sigma;
  return {worst <= kSnrTolDb && rate_ok, "max SNR error " + fmt("%.3g", worst) + " dB over [-20, 40]; applied " +
                                             std::to_string(noised) + "/10000 (bounds 2500 +/- " +
                                             fmt("%.1f", 3 * sigma) + ")"};
}

// 8. Rate plan postcondition, fusion normalization, stride-2 convolution.
Outcome fusion_checks() {
  std::size_t plans = 0, plan_bad = 0;
  for (std::size_t tf = 1; tf <= 500; ++tf) {
    for (long delta = -600; delta <= 600; delta += 40) {
      const long samples = static_cast<long>(640 * tf) + delta;
      if (samples <= 0) continue;
      try {
        const auto p = plan_rate_alignment(static_cast<std::size_t>(samples), tf);
        ++plans;
        if (p.aligned_frames() != 2 * tf) ++plan_bad;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasiblePlan) ++plan_bad;
      }
    }
  }

  std::mt19937_64 rng(808);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_mean = 0.0, worst_var = 0.0;
  bool width_ok = true;
  for (int i = 0; i < 10; ++i) {
    const std::size_t frames = 1 + rng() % 30;
    FeatureSequence a{Modality::kAudio, Matrix(frames, kModalityDim), kFusionRateHz};
    FeatureSequence v{Modality::kVisual, Matrix(frames, kModalityDim), kFusionRateHz};
    // Per-frame spread between 0.5 and 20: the epsilon inside the square root
    // shrinks the output variance by sigma^2 / (sigma^2 + 1e-5).
    std::uniform_real_distribution<double> spread(0.5, 20.0);
    const double sa = spread(rng), sv = spread(rng);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t d = 0; d < kModalityDim; ++d) {
        a.frames(t, d) = 3.0 + sa * n(rng);
        v.frames(t, d) = -1.0 + sv * n(rng);
      }
    }
    const auto f = fuse(a, v);
    width_ok = width_ok && f.dim() == 2 * kModalityDim && f.frame_count() == frames;
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t half = 0; half < 2; ++half) {
        double m = 0.0, q = 0.0;
        for (std::size_t d = 0; d < kModalityDim; ++d) m += f.frames(t, half * kModalityDim + d);
        m /= kModalityDim;
        for (std::size_t d = 0; d < kModalityDim; ++d) {
          const double e = f.frames(t, half * kModalityDim + d) - m;
          q += e * e;
        }
        q /= kModalityDim;
        worst_mean = std::max(worst_mean, std::abs(m));
        worst_var = std::max(worst_var, std::abs(q - 1.0));
      }
    }
  }

  double worst_conv = 0.0;
  bool halves = true;
  for (int i = 0; i < 50; ++i) {
    const std::size_t frames = 2 * (1 + rng() % 20);
    const std::size_t din = 1 + rng() % 6, dout = 1 + rng() % 6, taps = 1 + 2 * (rng() % 3);
    FeatureSequence x{Modality::kAudio, Matrix(frames, din), 50.0};
    for (double& e : x.frames.data()) e = n(rng);
    ConvKernel k{taps, din, dout, std::vector<double>(taps * din * dout)};
    for (double& w : k.weights) w = n(rng);
    const auto y = strided_downsample(x, k);
    halves = halves && y.frame_count() == frames / 2 && y.rate_hz == 25.0;
    const Matrix want = oracle::naive_conv(x.frames, k);
    for (std::size_t r = 0; r < want.rows(); ++r) {
      for (std::size_t c = 0; c < want.cols(); ++c) worst_conv = std::max(worst_conv, std::abs(want(r, c) - y.frames(r, c)));
    }
  }
  const bool ok = plan_bad == 0 && plans > 0 && width_ok && worst_mean <= kFuseMeanTol && worst_var <= kFuseVarTol &&
                  halves && worst_conv <= kConvTol;
  return {ok, std::to_string(plans) + " feasible plans, " + std::to_string(plan_bad) + " violations; fused 1024-wide " +
                  (width_ok ? "ok" : "wrong") + ", max |mean| " + fmt("%.2g", worst_mean) + ", max |var-1| " +
                  fmt("%.2g", worst_var) + "; conv max diff " + fmt("%.2g", worst_conv)};
}

LandmarkTrack random_track(std::mt19937_64& rng, std::size_t frames, double drop) {
  std::uniform_real_distribution<double> u(0.0, 200.0);
  std::bernoulli_distribution miss(drop);
  LandmarkTrack tr{std::vector<LandmarkFrame>(frames), std::vector<bool>(frames, true)};
  for (std::size_t t = 0; t < frames; ++t) {
    for (auto& p : tr.frames[t]) p = {u(rng), u(rng)};
    tr.valid[t] = !miss(rng);
  }
  tr.valid[rng() % frames] = true;
  return tr;
}

// 9. Similarity recovery, smoothing linearity, interpolation idempotence,
// sequence-level augmentation.
Outcome geometry_checks() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  SimilarityTransform truth;
  truth.scale = 2.0;
  truth.rotation = std::numbers::pi / 6.0;
  truth.translation = {12.5, -7.25};
  std::vector<Point2> src(kLandmarkCount), ref(kLandmarkCount);
  for (std::size_t i = 0; i < src.size(); ++i) {
    src[i] = {u(rng), u(rng)};
    ref[i] = truth.apply(src[i]);
  }
  const auto est = estimate_similarity(src, ref);
  const double geo_err = std::max({std::abs(est.scale - 2.0), std::abs(est.rotation - truth.rotation),
                                   std::abs(est.translation.x - 12.5), std::abs(est.translation.y + 7.25)});

  double lin_err = 0.0;
  std::size_t idempotent = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t frames = 1 + rng() % 40;
    const auto x = random_track(rng, frames, 0.0), y = random_track(rng, frames, 0.0);
    const double a = u(rng) / 10.0, b = u(rng) / 10.0;
    LandmarkTrack combo = x;
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t p = 0; p < kLandmarkCount; ++p) {
        combo.frames[t][p] = {a * x.frames[t][p].x + b * y.frames[t][p].x, a * x.frames[t][p].y + b * y.frames[t][p].y};
      }
    }
    const auto sx = smooth(x), sy = smooth(y), sc = smooth(combo);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t p = 0; p < kLandmarkCount; ++p) {
        lin_err = std::max(lin_err, std::abs(sc.frames[t][p].x - (a * sx.frames[t][p].x + b * sy.frames[t][p].x)));
        lin_err = std::max(lin_err, std::abs(sc.frames[t][p].y - (a * sx.frames[t][p].y + b * sy.frames[t][p].y)));
      }
    }
    const auto gappy = random_track(rng, frames, 0.4);
    const auto once = interpolate_gaps(gappy);
    if (interpolate_gaps(once) == once) ++idempotent;
  }

  std::size_t consistent = 0;
  for (int i = 0; i < 100; ++i) {
    CropPlan plan;
    plan.roi_x0 = static_cast<int>(rng() % 20);
    plan.roi_y0 = static_cast<int>(rng() % 20);
    plan = with_augmentation(plan, rng());
    const std::size_t frames = 1 + rng() % 6;
    // Each frame is one base image plus a per-frame constant, so a shared
    // crop and flip leaves the outputs differing by exactly that constant.
    FrameTensor in{frames, 150, 150, 1, std::vector<double>(frames * 150 * 150)};
    std::vector<double> base(150 * 150);
    for (double& p : base) p = u(rng);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t k = 0; k < base.size(); ++k) in.data[t * base.size() + k] = base[k] + static_cast<double>(t);
    }
    const auto out = apply_frames(in, plan);
    bool same = true;
    const std::size_t plane = out.height * out.width;
    for (std::size_t t = 1; t < frames && same; ++t) {
      for (std::size_t k = 0; k < plane; ++k) {
        if (out.data[t * plane + k] - static_cast<double>(t) != out.data[k]) {
          same = false;
          break;
        }
      }
    }
    for (const auto& p : per_frame_plans(plan, frames)) same = same && p.aug_offset == plan.aug_offset && p.flip == plan.flip;
    if (same) ++consistent;
  }
  const bool ok = geo_err <= kGeometryTol && lin_err <= kLinearityTol && idempotent == 100 && consistent == 100;
  return {ok, "similarity error " + fmt("%.2g", geo_err) + ", smoothing linearity " + fmt("%.2g", lin_err) +
                  ", idempotent " + std::to_string(idempotent) + "/100, augmentation shared " +
                  std::to_string(consistent) + "/100"};
}

// 10. Fixture demo: joint <= greedy, joint fixes a greedy error, reproducible.
Outcome demo_checks() {
  const Vocabulary vocab = Vocabulary::standard();
  auto run = [&] {
    const auto corpus = demo::fixture_corpus(vocab);
    std::vector<std::string> text;
    for (const auto& u : corpus) text.push_back(u.transcript);
    const BigramScorer scorer(vocab, text);
    return demo::run_demo(corpus, scorer, DecoderConfig{});
  };
  const auto r1 = run(), r2 = run();
  const auto& greedy = r1.outcome(DecodeMode::kGreedy);
  const auto& joint = r1.outcome(DecodeMode::kJoint);
  std::size_t corrected = 0;
  for (std::size_t i = 0; i < r1.corpus.size(); ++i) {
    if (greedy.hypotheses[i] != r1.corpus[i].transcript && joint.hypotheses[i] == r1.corpus[i].transcript) ++corrected;
  }
  const bool identical = demo::format_report(r1) == demo::format_report(r2) &&
                         demo::report_json(r1).dump() == demo::report_json(r2).dump();

  demo::SyntheticConfig sc;
  sc.seed = 42;
  auto synth = [&] {
    const BigramScorer scorer(vocab, demo::scorer_training_text(sc));
    return demo::format_report(demo::run_demo(demo::synthetic_corpus(sc, vocab), scorer, DecoderConfig{}));
  };
  const bool seeded = synth() == synth();
  const bool ok = joint.score.wer() <= greedy.score.wer() && corrected >= 1 && identical && seeded;
  return {ok, "joint WER " + fmt("%.4f", joint.score.wer()) + " vs greedy " + fmt("%.4f", greedy.score.wer()) +
                  ", corrected " + std::to_string(corrected) + "/" + std::to_string(r1.corpus.size()) +
                  ", reports byte-identical " + (identical && seeded ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
    double budget_s;
  };
  const Criterion criteria[] = {
      {"ctc forward vs brute force", ctc_forward, 60},
      {"ctc gradient vs finite differences", ctc_grad, 60},
      {"prefix probability vs enumerated mass", prefix_identity, 60},
      {"decoder vs exhaustive oracle", decoder_oracle, 60},
      {"endpoint invariance and beam monotonicity", endpoints, 60},
      {"word error rate fixtures and fuzz", wer_checks, 60},
      {"snr exactness and apply rate", snr_checks, 60},
      {"fusion and rate contracts", fusion_checks, 60},
      {"geometry suite", geometry_checks, 60},
      {"end-to-end demo", demo_checks, 120},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-44s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
