#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avsr/avsr.hpp"

namespace avsr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// AVSR_LOG_LEVEL: 0 silent (default), 1 progress messages on stderr.
inline int log_level() {
  const char* env = std::getenv("AVSR_LOG_LEVEL");
  return env ? std::atoi(env) : 0;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << text;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

inline nlohmann::json score_json(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;  // log zero
}

struct Options {
  std::string vocab_path;

  // decode
  std::string grid_path;
  std::string manifest_path;
  std::string scorer_spec = "uniform";
  double alpha = 0.1;
  std::size_t beam_width = 5;
  std::size_t l_max = 0;
  std::string mode = "joint";
  std::string report_path;
  std::size_t jobs = 1;

  // ctc-loss
  std::string target;
  std::string ce_path;
  double lambda = 0.2;
  double smoothing = 0.01;
  std::string gradient_path;

  // wer
  std::string ref_path;
  std::string hyp_path;
  std::string per_utt_path;

  // mix-noise
  std::string in_path;
  std::string out_path;
  std::string out_dir;
  double snr_db = 5.0;
  std::string noise = "babble";
  double prob = 0.25;
  std::uint64_t seed = 0;
  std::vector<std::string> sources;
  bool eval_phase = false;

  // prep-landmarks
  std::string track_path;
  std::string reference_path;
  std::size_t window = kSmoothingWindow;
  int roi_size = kRoiSize;
  bool aug = false;
  std::vector<int> image_size;

  // align-rate
  std::size_t visual_frames = 0;
  std::size_t samples = 0;
  std::size_t fe_window = 400;
  std::size_t fe_hop = 320;

  // demo
  bool fixture = false;
  std::size_t utterances = 20;
  double sharpness = 6.0;
  double noise_sd = 1.5;
  std::string json_path;
  std::string export_dir;
};

inline Vocabulary vocabulary(const Options& o) {
  return o.vocab_path.empty() ? Vocabulary::standard() : Vocabulary::load(o.vocab_path);
}

inline nlohmann::json decode_json(const std::string& id, const DecodeResult& r, const Vocabulary& vocab) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& h : r.ranked) {
    TokenSequence labels = h.tokens;
    labels.ids.pop_back();
    ranked.push_back({{"text", decode_tokens(labels, vocab)},
                      {"joint", score_json(h.joint_score)},
                      {"ctc", score_json(h.ctc_score)},
                      {"attention", score_json(h.attn_score)}});
  }
  return {{"utterance_id", id},
          {"best", decode_tokens(r.best, vocab)},
          {"score", score_json(r.score)},
          {"closing_completions", r.closing_completions},
          {"ranked", std::move(ranked)}};
}

inline int cmd_decode(const Options& o, std::ostream& out) {
  const Vocabulary vocab = vocabulary(o);
  const auto scorer = make_scorer(o.scorer_spec, vocab);
  DecoderConfig config;
  config.alpha = o.alpha;
  config.beam_width = o.beam_width;
  if (o.l_max > 0) config.l_max = o.l_max;
  const DecodeMode mode = parse_decode_mode(o.mode);

  struct Job {
    std::string id;
    std::string grid;
    std::optional<std::string> transcript;
  };
  std::vector<Job> jobs;
  if (!o.manifest_path.empty()) {
    for (const auto& r : load_manifest(o.manifest_path)) {
      if (!r.grid_path) throw Error(ErrorCode::kParseError, "manifest record " + r.utterance_id + " has no grid_path");
      jobs.push_back({r.utterance_id, *r.grid_path, r.transcript});
    }
  } else {
    jobs.push_back({std::filesystem::path(o.grid_path).stem().string(), o.grid_path, std::nullopt});
  }

  // Utterances are independent, so workers pull indices and write into
  // per-utterance slots; output order never depends on scheduling.
  std::vector<std::optional<DecodeResult>> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const PosteriorGrid grid = load_grid(jobs[i].grid);
        grid.validate_for(vocab);
        results[i] = decode_with_mode(grid, *scorer, config, mode);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min<std::size_t>(o.jobs, jobs.size()); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  nlohmann::json report = nlohmann::json::array();
  std::vector<ScoringPair> pairs;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (failures[i]) std::rethrow_exception(failures[i]);
    const auto& job = jobs[i];
    const DecodeResult& r = *results[i];
    const std::string text = decode_tokens(r.best, vocab);
    if (o.manifest_path.empty()) {
      out << text << '\n';
    } else {
      out << job.id << '\t' << text << '\n';
    }
    if (job.transcript) pairs.push_back({job.id, *job.transcript, text});
    report.push_back(decode_json(job.id, r, vocab));
    if (log_level() > 0) std::cerr << "decoded " << job.id << '\n';
  }
  if (!o.report_path.empty()) {
    nlohmann::json doc{{"mode", mode_name(mode)},
                       {"alpha", config.alpha},
                       {"beam_width", config.beam_width},
                       {"l_max", o.l_max > 0 ? nlohmann::json(o.l_max) : nlohmann::json("T")},
                       {"scorer", o.scorer_spec},
                       {"utterances", std::move(report)}};
    if (!pairs.empty()) {
      const CorpusScore score = corpus_wer(pairs);
      doc["wer"] = score.total.ref_len ? nlohmann::json(score.wer()) : nlohmann::json(nullptr);
    }
    write_text(o.report_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto& rows = j.is_object() ? j.at("log_probs") : j;
  Matrix m(rows.size(), rows.empty() ? 0 : rows.at(0).size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (rows[r].size() != m.cols()) throw Error(ErrorCode::kParseError, "ragged matrix");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c].is_null() ? kLogZero : rows[r][c].get<double>();
  }
  return m;
}

inline int cmd_ctc_loss(const Options& o, std::ostream& out) {
  const Vocabulary vocab = vocabulary(o);
  const PosteriorGrid grid = load_grid(o.grid_path);
  grid.validate_for(vocab);
  const TokenSequence target = encode_text(o.target, vocab);
  const double ctc = ctc_forward_loss(grid, target, vocab.blank_id());
  nlohmann::json result{{"target", o.target}, {"frames", grid.frame_count()}, {"ctc_nll", ctc}};
  if (!o.ce_path.empty()) {
    const Matrix predictions = matrix_from_json(load_json(o.ce_path));
    const double ce = cross_entropy_loss(predictions, teacher_forcing_target(o.target, vocab), o.smoothing, vocab);
    const HybridLossConfig config{o.lambda, o.smoothing};
    result["ce_nll"] = ce;
    result["lambda"] = o.lambda;
    result["label_smoothing"] = o.smoothing;
    result["hybrid"] = hybrid_loss(ctc, ce, config);
  }
  if (!o.gradient_path.empty()) {
    const Matrix grad = ctc_gradient(grid, target, vocab.blank_id());
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < grad.rows(); ++t) rows.push_back(std::vector<double>(grad.row(t).begin(), grad.row(t).end()));
    write_text(o.gradient_path, nlohmann::json{{"gradient", std::move(rows)}}.dump() + "\n");
  }
  out << result.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_wer(const Options& o, std::ostream& out) {
  const auto refs = read_lines(o.ref_path);
  const auto hyps = read_lines(o.hyp_path);
  if (refs.size() != hyps.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(refs.size()) + " reference lines, " +
                                                std::to_string(hyps.size()) + " hypothesis lines");
  }
  std::vector<ScoringPair> pairs;
  for (std::size_t i = 0; i < refs.size(); ++i) pairs.push_back({std::to_string(i + 1), refs[i], hyps[i]});
  const CorpusScore score = corpus_wer(pairs);
  const WerBreakdown& t = score.total;
  out << "WER " << demo::fixed(score.wer()) << " (S=" << t.substitutions << " D=" << t.deletions
      << " I=" << t.insertions << " N=" << t.ref_len << ")\n";
  if (!o.per_utt_path.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& u : score.utterances) {
      nlohmann::json row{{"line", std::stoul(u.id)},
                         {"S", u.counts.substitutions},
                         {"D", u.counts.deletions},
                         {"I", u.counts.insertions},
                         {"N", u.counts.ref_len}};
      row["wer"] = u.error ? nlohmann::json(nullptr) : nlohmann::json(u.counts.wer());
      if (u.error) row["error"] = *u.error;
      rows.push_back(std::move(row));
    }
    nlohmann::json doc{{"wer", score.wer()},
                       {"S", t.substitutions},
                       {"D", t.deletions},
                       {"I", t.insertions},
                       {"N", t.ref_len},
                       {"utterances", std::move(rows)}};
    write_text(o.per_utt_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

inline std::vector<AudioSignal> load_sources(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.path().extension() == ".wav") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<AudioSignal> out;
  for (const auto& f : files) out.push_back(load_wav(f));
  return out;
}

inline int cmd_mix_noise(const Options& o, std::ostream& out) {
  NoiseSpec spec;
  spec.snr_db = o.snr_db;
  spec.apply_prob = o.prob;
  spec.seed = o.seed;
  spec.phase = o.eval_phase ? NoisePhase::kEval : NoisePhase::kTrain;
  std::vector<AudioSignal> pool;
  if (o.noise == "babble") {
    spec.kind = NoiseKind::kBabble;
    pool = load_sources(o.sources);
  } else if (o.noise == "human") {
    spec.kind = NoiseKind::kHuman;
    pool = load_sources(o.sources);
  } else if (o.noise.starts_with("file:")) {
    spec.kind = NoiseKind::kFile;
    pool.push_back(load_wav(o.noise.substr(5)));
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--noise must be babble, human or file:<path>");
  }

  std::vector<Utterance> corpus;
  std::vector<std::string> outputs;
  if (!o.manifest_path.empty()) {
    if (o.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--manifest needs --out-dir");
    std::filesystem::create_directories(o.out_dir);
    for (const auto& r : load_manifest(o.manifest_path)) {
      if (!r.audio_path) throw Error(ErrorCode::kParseError, "record " + r.utterance_id + " has no audio_path");
      corpus.push_back({r.utterance_id, load_wav(*r.audio_path)});
      outputs.push_back((std::filesystem::path(o.out_dir) / (r.utterance_id + ".wav")).string());
    }
  } else {
    if (o.in_path.empty() || o.out_path.empty()) throw Error(ErrorCode::kInvalidArgument, "need --in and --out");
    corpus.push_back({std::filesystem::path(o.in_path).stem().string(), load_wav(o.in_path)});
    outputs.push_back(o.out_path);
  }

  const AugmentReport report = augment_corpus(corpus, spec, pool);
  nlohmann::json entries = nlohmann::json::array();
  bool failed = false;
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    save_wav(outputs[i], report.utterances[i].audio);
    nlohmann::json row{{"utterance_id", e.id}, {"noised", e.noised}, {"output", outputs[i]}};
    if (e.error) {
      row["error"] = *e.error;
      failed = true;
    }
    entries.push_back(std::move(row));
  }
  nlohmann::json doc{{"noise", o.noise},
                     {"snr_db", spec.snr_db},
                     {"apply_prob", spec.apply_prob},
                     {"seed", spec.seed},
                     {"phase", o.eval_phase ? "eval" : "train"},
                     {"babble_sources", report.babble_sources},
                     {"babble_source_policy", "fixed per corpus seed"},
                     {"utterances", std::move(entries)}};
  out << doc.dump(2) << '\n';
  return failed ? kExitData : kExitOk;
}

inline nlohmann::json plan_json(const CropPlan& p) {
  nlohmann::json j{{"roi", {{"x0", p.roi_x0}, {"y0", p.roi_y0}, {"size", p.roi_size}}},
                   {"flip", p.flip},
                   {"clamped", p.clamped},
                   {"output_size", p.output_size()}};
  if (p.aug_offset) j["aug_crop"] = {{"dx", (*p.aug_offset)[0]}, {"dy", (*p.aug_offset)[1]}, {"size", p.aug_size}};
  return j;
}

inline int cmd_prep_landmarks(const Options& o, std::ostream& out, std::ostream& err) {
  const LandmarkTrack raw = load_landmarks(o.track_path);
  const LandmarkTrack reference_track = load_landmarks(o.reference_path);
  if (reference_track.size() != 1) throw Error(ErrorCode::kParseError, "reference must hold exactly one frame");
  const LandmarkTrack smoothed = smooth(interpolate_gaps(raw), o.window);
  LandmarkTrack aligned;
  const auto transforms = align_track(smoothed, reference_track.frames.front(), &aligned);
  std::optional<std::array<int, 2>> image;
  if (o.image_size.size() == 2) image = std::array<int, 2>{o.image_size[0], o.image_size[1]};
  CropPlan plan = mouth_roi(aligned, o.roi_size, image);
  if (plan.clamped) err << "warning: OutOfFrame: ROI clamped to image bounds\n";
  if (o.aug) plan = with_augmentation(plan, o.seed);

  nlohmann::json frames = nlohmann::json::array();
  for (std::size_t t = 0; t < transforms.size(); ++t) {
    const auto& tf = transforms[t];
    frames.push_back({{"frame", t},
                      {"detected", static_cast<bool>(raw.valid[t])},
                      {"scale", tf.scale},
                      {"rotation", tf.rotation},
                      {"translation", {tf.translation.x, tf.translation.y}},
                      {"residual", tf.residual}});
  }
  nlohmann::json doc{{"frames", std::move(frames)},
                     {"window", o.window},
                     {"crop_plan", plan_json(plan)},
                     {"applies_to_all_frames", true}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_align_rate(const Options& o, std::ostream& out) {
  const RateAlignmentPlan plan = plan_rate_alignment(o.samples, o.visual_frames, o.fe_window, o.fe_hop);
  nlohmann::json doc{{"sample_count", plan.sample_count},
                     {"visual_frames", plan.visual_frames},
                     {"window", plan.window},
                     {"hop", plan.hop},
                     {"pad_front", plan.pad_front},
                     {"pad_back", plan.pad_back},
                     {"truncate_frames", plan.truncate_frames},
                     {"front_end_frames", plan.aligned_frames()},
                     {"fused_frames", plan.aligned_frames() / 2},
                     {"fused_dim", 2 * kModalityDim}};
  out << "front-end frames: " << plan.aligned_frames() << "\n"
      << "fused frames: " << plan.aligned_frames() / 2 << "\n"
      << doc.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_demo(const Options& o, std::ostream& out) {
  const Vocabulary vocab = Vocabulary::standard();
  std::vector<demo::DemoUtterance> corpus;
  std::vector<std::string> scorer_text;
  if (o.fixture) {
    corpus = demo::fixture_corpus(vocab);
    for (const auto& u : corpus) scorer_text.push_back(u.transcript);
  } else {
    demo::SyntheticConfig sc;
    sc.seed = o.seed;
    sc.utterances = o.utterances;
    sc.sharpness = o.sharpness;
    sc.noise_sd = o.noise_sd;
    corpus = demo::synthetic_corpus(sc, vocab);
    scorer_text = demo::scorer_training_text(sc);
  }
  const BigramScorer scorer(vocab, scorer_text);
  DecoderConfig config;
  config.alpha = o.alpha;
  config.beam_width = o.beam_width;
  if (o.l_max > 0) config.l_max = o.l_max;

  if (!o.export_dir.empty()) {
    std::filesystem::create_directories(o.export_dir);
    std::string manifest;
    for (const auto& u : corpus) {
      save_grid((std::filesystem::path(o.export_dir) / (u.id + ".grid")).string(), u.grid);
      manifest += to_json(ManifestRecord{u.id, std::nullopt, u.id + ".grid", std::nullopt, u.transcript}).dump() + "\n";
    }
    write_text((std::filesystem::path(o.export_dir) / "manifest.jsonl").string(), manifest);
    write_text((std::filesystem::path(o.export_dir) / "scorer_corpus.txt").string(),
               [&] {
                 std::string s;
                 for (const auto& l : scorer_text) s += l + "\n";
                 return s;
               }());
  }

  const demo::DemoReport report = demo::run_demo(std::move(corpus), scorer, config);
  const HybridLossConfig loss{o.lambda, o.smoothing};
  const std::string text = demo::format_report(report, loss);
  out << text;
  if (!o.out_path.empty()) write_text(o.out_path, text);
  if (!o.json_path.empty()) write_text(o.json_path, demo::report_json(report, loss).dump(2) + "\n");
  return kExitOk;
}

/// Parses `argv` and runs one subcommand. Usage errors return 2; data
/// errors return 1 and print {"error": ..., "message": ...} on `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Audio-visual speech recognition decoding and evaluation toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--vocab", o.vocab_path, "Vocabulary JSON (array of symbol labels); default: built-in 40 symbols");

  auto* decode = app.add_subcommand("decode", "Joint CTC/attention beam search over a posterior grid");
  auto* grid_opt = decode->add_option("--grid", o.grid_path, "Posterior grid (CTCGRID1 binary or JSON)");
  auto* manifest_opt = decode->add_option("--manifest", o.manifest_path, "JSON-lines manifest with grid_path records");
  grid_opt->excludes(manifest_opt);
  decode->add_option("--scorer", o.scorer_spec, "uniform | table:<file> | bigram:<corpus file>");
  decode->add_option("--alpha", o.alpha, "CTC weight in the fused score (default 0.1)")->check(CLI::Range(0.0, 1.0));
  decode->add_option("--beam-width", o.beam_width, "Beam width W (default 5)")->check(CLI::PositiveNumber);
  decode->add_option("--l-max", o.l_max, "Maximum output length; 0 means T, the frame count");
  decode->add_option("--mode", o.mode, "joint | ctc | attention | greedy")
      ->check(CLI::IsMember({"joint", "ctc", "attention", "greedy"}));
  decode->add_option("--report", o.report_path, "Write the ranked finished hypotheses as JSON");
  decode->add_option("--jobs", o.jobs, "Worker threads for manifest decoding; output is identical for any value")
      ->check(CLI::PositiveNumber);

  auto* loss = app.add_subcommand("ctc-loss", "CTC negative log-likelihood, gradient, and hybrid loss");
  loss->add_option("--grid", o.grid_path, "Posterior grid")->required();
  loss->add_option("--target", o.target, "Target transcript")->required();
  loss->add_option("--ce-log-probs", o.ce_path, "JSON L x V decoder log-probabilities for teacher forcing");
  loss->add_option("--lambda", o.lambda, "CTC weight in the hybrid loss (default 0.2)")->check(CLI::Range(0.0, 1.0));
  loss->add_option("--smoothing", o.smoothing, "Label smoothing mass (default 0.01)");
  loss->add_option("--gradient", o.gradient_path, "Write d loss / d log-probs as JSON");

  auto* wer = app.add_subcommand("wer", "Word error rate between line-aligned text files");
  wer->add_option("--ref", o.ref_path, "Reference transcripts, one per line")->required();
  wer->add_option("--hyp", o.hyp_path, "Hypothesis transcripts, one per line")->required();
  wer->add_option("--per-utt", o.per_utt_path, "Write per-line S/D/I/N as JSON");

  auto* mix = app.add_subcommand("mix-noise", "Additive noise at a target SNR");
  mix->add_option("--in", o.in_path, "Input WAV (mono 16-bit PCM)");
  mix->add_option("--out", o.out_path, "Output WAV");
  mix->add_option("--manifest", o.manifest_path, "JSON-lines manifest with audio_path records");
  mix->add_option("--out-dir", o.out_dir, "Output directory in manifest mode");
  mix->add_option("--snr-db", o.snr_db, "Target SNR in dB (default 5)");
  mix->add_option("--noise", o.noise, "babble | human | file:<path>");
  mix->add_option("--prob", o.prob, "Probability of noising each utterance (default 0.25)")
      ->check(CLI::Range(0.0, 1.0));
  mix->add_option("--seed", o.seed, "Corpus seed");
  mix->add_option("--sources", o.sources, "Noise source WAVs or directories (babble needs 20)");
  mix->add_flag("--eval", o.eval_phase, "Use the evaluation seed namespace");

  auto* prep = app.add_subcommand("prep-landmarks", "Landmark interpolation, smoothing, alignment and mouth ROI");
  prep->add_option("--track", o.track_path, "Landmark CSV (frame,point,x,y,valid)")->required();
  prep->add_option("--reference", o.reference_path, "Reference landmark CSV, one frame")->required();
  prep->add_option("--window", o.window, "Smoothing window in frames (default 12)")->check(CLI::PositiveNumber);
  prep->add_option("--roi-size", o.roi_size, "Mouth ROI size in pixels (default 120)")->check(CLI::PositiveNumber);
  prep->add_flag("--aug", o.aug, "Draw a 112x112 crop offset and a p=0.5 flip for the whole sequence");
  prep->add_option("--seed", o.seed, "Augmentation seed");
  prep->add_option("--image-size", o.image_size, "Image width and height for ROI clamping")->expected(2);

  auto* rate = app.add_subcommand("align-rate", "Audio padding/truncation for a 1:2 visual:audio frame ratio");
  rate->add_option("--visual-frames", o.visual_frames, "Visual frame count T_f")->required()->check(CLI::PositiveNumber);
  rate->add_option("--samples", o.samples, "Audio sample count at 16 kHz")->required();
  rate->add_option("--window", o.fe_window, "Front-end receptive field in samples");
  rate->add_option("--hop", o.fe_hop, "Front-end hop in samples (20 ms)");

  auto* demo_cmd = app.add_subcommand("demo", "Synthetic corpus: greedy vs CTC vs attention vs joint decoding");
  demo_cmd->add_option("--seed", o.seed, "Corpus seed");
  demo_cmd->add_flag("--fixture", o.fixture, "Use the bundled fixture corpus instead of random transcripts");
  demo_cmd->add_option("--utterances", o.utterances, "Number of synthetic utterances");
  demo_cmd->add_option("--sharpness", o.sharpness, "Logit boost of the intended symbol");
  demo_cmd->add_option("--noise-sd", o.noise_sd, "Std-dev of Gaussian logit noise");
  demo_cmd->add_option("--alpha", o.alpha, "CTC weight (default 0.1)")->check(CLI::Range(0.0, 1.0));
  demo_cmd->add_option("--beam-width", o.beam_width, "Beam width (default 5)")->check(CLI::PositiveNumber);
  demo_cmd->add_option("--l-max", o.l_max, "Maximum output length; 0 means T");
  demo_cmd->add_option("--lambda", o.lambda, "Hybrid loss weight, echoed in the report (default 0.2)");
  demo_cmd->add_option("--smoothing", o.smoothing, "Label smoothing, echoed in the report (default 0.01)");
  demo_cmd->add_option("--out", o.out_path, "Write the text report");
  demo_cmd->add_option("--json", o.json_path, "Write the JSON report");
  demo_cmd->add_option("--export", o.export_dir, "Write grids, manifest and scorer corpus to a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*decode) {
      if (o.grid_path.empty() && o.manifest_path.empty()) {
        err << "decode: one of --grid or --manifest is required\n";
        return kExitUsage;
      }
      return cmd_decode(o, out);
    }
    if (*loss) return cmd_ctc_loss(o, out);
    if (*wer) return cmd_wer(o, out);
    if (*mix) return cmd_mix_noise(o, out);
    if (*prep) return cmd_prep_landmarks(o, out, err);
    if (*rate) return cmd_align_rate(o, out);
    if (*demo_cmd) return cmd_demo(o, out);
  } catch (const Error& e) {
    err << nlohmann::json{{"error", error_name(e.code())}, {"message", e.what()}}.dump() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace avsr::cli
