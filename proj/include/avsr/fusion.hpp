#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "avsr/binary_io.hpp"
#include "avsr/error.hpp"
#include "avsr/matrix.hpp"

namespace avsr {

enum class Modality : std::uint8_t { kAudio = 0, kVisual = 1, kFused = 2 };

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::kAudio: return "audio";
    case Modality::kVisual: return "visual";
    case Modality::kFused: return "fused";
  }
  return "unknown";
}

/// N x D per-frame features of one stream, tagged with its frame rate.
struct FeatureSequence {
  Modality modality = Modality::kAudio;
  Matrix frames;
  double rate_hz = 25.0;

  std::size_t frame_count() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
};

inline constexpr double kFusionRateHz = 25.0;
inline constexpr std::size_t kModalityDim = 512;

struct NormParams {
  std::vector<double> gain;  // empty means all ones
  std::vector<double> bias;  // empty means all zeros
  double epsilon = 1e-5;
};

/// Per-frame LayerNorm: (x - mean) / sqrt(var + epsilon) * gain + bias with
/// the population variance over the D features. Frames whose variance does
/// not exceed epsilon are reported through `degenerate_frames`.
inline FeatureSequence layer_norm(const FeatureSequence& seq, const NormParams& params = {},
                                  std::vector<std::size_t>* degenerate_frames = nullptr) {
  const std::size_t d = seq.dim();
  if (d < 2) throw Error(ErrorCode::kInvalidArgument, "layer_norm needs at least two features");
  if ((!params.gain.empty() && params.gain.size() != d) || (!params.bias.empty() && params.bias.size() != d)) {
    throw Error(ErrorCode::kInvalidArgument, "gain/bias length does not match feature width");
  }
  FeatureSequence out{seq.modality, Matrix(seq.frame_count(), d), seq.rate_hz};
  for (std::size_t n = 0; n < seq.frame_count(); ++n) {
    const auto in = seq.frames.row(n);
    double mean = 0.0;
    for (double x : in) mean += x;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double x : in) var += (x - mean) * (x - mean);
    var /= static_cast<double>(d);
    if (degenerate_frames && var <= params.epsilon) degenerate_frames->push_back(n);
    const double inv_std = 1.0 / std::sqrt(var + params.epsilon);
    auto row = out.frames.row(n);
    for (std::size_t i = 0; i < d; ++i) {
      double y = (in[i] - mean) * inv_std;
      if (!params.gain.empty()) y *= params.gain[i];
      if (!params.bias.empty()) y += params.bias[i];
      row[i] = y;
    }
  }
  return out;
}

/// [layer_norm(visual) | layer_norm(audio)] along the feature axis.
inline FeatureSequence fuse(const FeatureSequence& audio, const FeatureSequence& visual,
                            const NormParams& audio_params = {}, const NormParams& visual_params = {}) {
  if (audio.frame_count() != visual.frame_count()) {
    throw Error(ErrorCode::kFrameCountMismatch, "audio has " + std::to_string(audio.frame_count()) +
                                                    " frames, visual has " + std::to_string(visual.frame_count()));
  }
  if (audio.rate_hz != visual.rate_hz) {
    throw Error(ErrorCode::kRateMismatch, "audio at " + std::to_string(audio.rate_hz) + " Hz, visual at " +
                                              std::to_string(visual.rate_hz) + " Hz");
  }
  const FeatureSequence v = layer_norm(visual, visual_params);
  const FeatureSequence a = layer_norm(audio, audio_params);
  FeatureSequence out{Modality::kFused, Matrix(audio.frame_count(), v.dim() + a.dim()), audio.rate_hz};
  for (std::size_t n = 0; n < out.frame_count(); ++n) {
    auto row = out.frames.row(n);
    std::copy(v.frames.row(n).begin(), v.frames.row(n).end(), row.begin());
    std::copy(a.frames.row(n).begin(), a.frames.row(n).end(), row.begin() + static_cast<std::ptrdiff_t>(v.dim()));
  }
  return out;
}

/// Padding and truncation that make the audio front-end emit exactly two
/// vectors per visual frame.
struct RateAlignmentPlan {
  std::size_t sample_count = 0;
  std::size_t visual_frames = 0;
  std::size_t pad_front = 0;
  std::size_t pad_back = 0;
  std::size_t truncate_frames = 0;
  std::size_t window = 400;
  std::size_t hop = 320;

  std::size_t raw_frames() const { return front_end_frames(sample_count + pad_front + pad_back, window, hop); }
  std::size_t aligned_frames() const { return raw_frames() - truncate_frames; }

  static std::size_t front_end_frames(std::size_t samples, std::size_t window, std::size_t hop) {
    if (samples < window) return 0;
    return (samples - window) / hop + 1;
  }
};

/// Smallest total padding (split front-first) that yields 2*T_f front-end
/// frames, or no padding plus one dropped trailing vector when the audio
/// yields exactly one frame too many. Total padding is capped at
/// window + 2*hop (one visual frame period past the receptive field).
inline RateAlignmentPlan plan_rate_alignment(std::size_t sample_count, std::size_t visual_frames,
                                             std::size_t window = 400, std::size_t hop = 320) {
  if (visual_frames == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one visual frame");
  if (hop == 0 || window < hop) throw Error(ErrorCode::kInvalidArgument, "need window >= hop >= 1");
  RateAlignmentPlan plan;
  plan.sample_count = sample_count;
  plan.visual_frames = visual_frames;
  plan.window = window;
  plan.hop = hop;
  const std::size_t target = 2 * visual_frames;
  const std::size_t natural = RateAlignmentPlan::front_end_frames(sample_count, window, hop);
  if (natural > target + 1) {
    throw Error(ErrorCode::kInfeasiblePlan, std::to_string(sample_count) + " samples give " +
                                                std::to_string(natural) + " frames, more than " +
                                                std::to_string(target + 1) + " for " +
                                                std::to_string(visual_frames) + " visual frames");
  }
  if (natural == target + 1) {
    plan.truncate_frames = 1;
    return plan;
  }
  if (natural == target) return plan;
  const std::size_t needed = (target - 1) * hop + window - sample_count;
  if (needed > window + 2 * hop) {
    throw Error(ErrorCode::kInfeasiblePlan, std::to_string(sample_count) + " samples need " +
                                                std::to_string(needed) + " padding samples for " +
                                                std::to_string(visual_frames) + " visual frames");
  }
  plan.pad_front = (needed + 1) / 2;
  plan.pad_back = needed / 2;
  return plan;
}

/// Time-axis convolution weights: taps x D_in x D_out.
struct ConvKernel {
  std::size_t taps = 1;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;  // [k][i][o] row-major

  double operator()(std::size_t k, std::size_t i, std::size_t o) const {
    return weights[(k * in_dim + i) * out_dim + o];
  }
  double& operator()(std::size_t k, std::size_t i, std::size_t o) { return weights[(k * in_dim + i) * out_dim + o]; }
};

/// Stride-2 cross-correlation along time with (K-1)/2 zeros on each side;
/// output frame n is centred on input frame 2n.
inline FeatureSequence strided_downsample(const FeatureSequence& seq, const ConvKernel& kernel) {
  const std::size_t n_in = seq.frame_count();
  if (n_in % 2 != 0) throw Error(ErrorCode::kOddFrameCount, std::to_string(n_in) + " input frames");
  if (kernel.taps % 2 == 0) throw Error(ErrorCode::kInvalidArgument, "kernel width must be odd");
  if (kernel.in_dim != seq.dim() || kernel.weights.size() != kernel.taps * kernel.in_dim * kernel.out_dim) {
    throw Error(ErrorCode::kInvalidArgument, "kernel shape does not match input");
  }
  const auto half = static_cast<std::ptrdiff_t>(kernel.taps / 2);
  FeatureSequence out{seq.modality, Matrix(n_in / 2, kernel.out_dim, 0.0), seq.rate_hz / 2.0};
  for (std::size_t n = 0; n < n_in / 2; ++n) {
    auto row = out.frames.row(n);
    for (std::size_t k = 0; k < kernel.taps; ++k) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(2 * n + k) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n_in)) continue;
      const auto in = seq.frames.row(static_cast<std::size_t>(src));
      for (std::size_t i = 0; i < kernel.in_dim; ++i) {
        const double x = in[i];
        if (x == 0.0) continue;
        const double* w = &kernel.weights[(k * kernel.in_dim + i) * kernel.out_dim];
        for (std::size_t o = 0; o < kernel.out_dim; ++o) row[o] += x * w[o];
      }
    }
  }
  return out;
}

// FEATSEQ1 container: magic, u32 N, u32 D, u8 modality, f64 rate, N*D f64.
inline constexpr std::string_view kFeatureMagic = "FEATSEQ1";

inline void write_features(std::ostream& os, const FeatureSequence& seq) {
  binary::write_magic(os, kFeatureMagic);
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(seq.frame_count()));
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(seq.dim()));
  binary::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(seq.modality));
  binary::write_f64(os, seq.rate_hz);
  for (double x : seq.frames.data()) binary::write_f64(os, x);
}

inline FeatureSequence read_features(std::istream& is) {
  binary::expect_magic(is, kFeatureMagic);
  const auto n = binary::read_le<std::uint32_t>(is);
  const auto d = binary::read_le<std::uint32_t>(is);
  const auto modality = binary::read_le<std::uint8_t>(is);
  if (modality > 2) throw Error(ErrorCode::kParseError, "unknown modality code " + std::to_string(modality));
  FeatureSequence seq{static_cast<Modality>(modality), Matrix(n, d), binary::read_f64(is)};
  for (double& x : seq.frames.data()) x = binary::read_f64(is);
  return seq;
}

inline FeatureSequence load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return read_features(in);
}

inline void save_features(const std::string& path, const FeatureSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write_features(out, seq);
}

}  // namespace avsr
