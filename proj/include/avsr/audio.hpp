#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "avsr/binary_io.hpp"
#include "avsr/error.hpp"
#include "avsr/rng.hpp"

namespace avsr {

inline constexpr int kCanonicalSampleRate = 16000;

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  friend bool operator==(const AudioSignal&, const AudioSignal&) = default;
};

/// Mean of squared samples over the whole signal.
inline double signal_power(const std::vector<double>& samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (double x : samples) sum += x * x;
  return sum / static_cast<double>(samples.size());
}

inline double signal_power(const AudioSignal& s) { return signal_power(s.samples); }

// ---------------------------------------------------------------------------
// RIFF/WAVE, mono 16-bit PCM. Samples map to [-1, 1) by x / 32768.

inline AudioSignal read_wav(std::istream& is) {
  binary::expect_magic(is, "RIFF");
  binary::read_le<std::uint32_t>(is);
  binary::expect_magic(is, "WAVE");
  std::optional<int> rate;
  std::uint16_t channels = 0, bits = 0, format = 0;
  while (true) {
    std::string id(4, '\0');
    is.read(id.data(), 4);
    if (!is) throw Error(ErrorCode::kParseError, "WAV file has no data chunk");
    const auto size = binary::read_le<std::uint32_t>(is);
    if (id == "fmt ") {
      format = binary::read_le<std::uint16_t>(is);
      channels = binary::read_le<std::uint16_t>(is);
      rate = static_cast<int>(binary::read_le<std::uint32_t>(is));
      binary::read_le<std::uint32_t>(is);  // byte rate
      binary::read_le<std::uint16_t>(is);  // block align
      bits = binary::read_le<std::uint16_t>(is);
      is.ignore(static_cast<std::streamsize>(size - 16 + (size & 1)));
    } else if (id == "data") {
      if (!rate) throw Error(ErrorCode::kParseError, "WAV data chunk precedes fmt chunk");
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error(ErrorCode::kParseError, "only mono 16-bit PCM WAV is supported");
      }
      AudioSignal out;
      out.sample_rate = *rate;
      out.samples.resize(size / 2);
      for (double& x : out.samples) {
        x = static_cast<double>(static_cast<std::int16_t>(binary::read_le<std::uint16_t>(is))) / 32768.0;
      }
      return out;
    } else {
      is.ignore(static_cast<std::streamsize>(size + (size & 1)));
    }
  }
}

inline void write_wav(std::ostream& os, const AudioSignal& signal) {
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  binary::write_magic(os, "RIFF");
  binary::write_le<std::uint32_t>(os, 36 + data_bytes);
  binary::write_magic(os, "WAVE");
  binary::write_magic(os, "fmt ");
  binary::write_le<std::uint32_t>(os, 16);
  binary::write_le<std::uint16_t>(os, 1);
  binary::write_le<std::uint16_t>(os, 1);
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(signal.sample_rate));
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(signal.sample_rate * 2));
  binary::write_le<std::uint16_t>(os, 2);
  binary::write_le<std::uint16_t>(os, 16);
  binary::write_magic(os, "data");
  binary::write_le<std::uint32_t>(os, data_bytes);
  for (double x : signal.samples) {
    const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    binary::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
}

inline AudioSignal load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return read_wav(in);
}

inline void save_wav(const std::string& path, const AudioSignal& signal) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write_wav(out, signal);
}

// ---------------------------------------------------------------------------

/// Zero mean, unit (population) variance.
inline AudioSignal normalize(const AudioSignal& signal) {
  const std::size_t n = signal.samples.size();
  if (n < 2) throw Error(ErrorCode::kConstantSignal, "need at least two samples");
  double mean = 0.0;
  for (double x : signal.samples) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : signal.samples) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) throw Error(ErrorCode::kConstantSignal, "signal is constant");
  const double inv_std = 1.0 / std::sqrt(var);
  AudioSignal out{std::vector<double>(n), signal.sample_rate};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = (signal.samples[i] - mean) * inv_std;
  return out;
}

/// `length` samples of `source` starting at `offset`, wrapping cyclically.
inline std::vector<double> cyclic_slice(const std::vector<double>& source, std::size_t offset, std::size_t length) {
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = source[(offset + i) % source.size()];
  return out;
}

/// Fits noise to `length`: tiles cyclically from 0 when shorter, takes a
/// seeded random window when longer.
inline std::vector<double> fit_noise(const std::vector<double>& noise, std::size_t length, std::uint64_t seed) {
  if (noise.size() <= length) return cyclic_slice(noise, 0, length);
  Rng rng(seed);
  const std::size_t offset = uniform_index(rng, noise.size() - length + 1);
  return {noise.begin() + static_cast<std::ptrdiff_t>(offset),
          noise.begin() + static_cast<std::ptrdiff_t>(offset + length)};
}

/// signal + k * noise' with k chosen so that P_signal / P_{k noise'} equals
/// 10^(snr_db / 10) exactly (up to rounding).
inline AudioSignal mix_at_snr(const AudioSignal& signal, const AudioSignal& noise, double snr_db,
                              std::uint64_t crop_seed = 0) {
  if (signal.sample_rate != noise.sample_rate) {
    throw Error(ErrorCode::kRateMismatch, "signal at " + std::to_string(signal.sample_rate) + " Hz, noise at " +
                                              std::to_string(noise.sample_rate) + " Hz");
  }
  if (noise.samples.empty()) throw Error(ErrorCode::kSilentNoise, "noise is empty");
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::kInvalidArgument, "SNR must be finite");
  const std::vector<double> fitted = fit_noise(noise.samples, signal.samples.size(), crop_seed);
  const double noise_power = signal_power(fitted);
  if (!(noise_power > 0.0)) throw Error(ErrorCode::kSilentNoise, "noise has zero power");
  const double k = std::sqrt(signal_power(signal) / (noise_power * std::pow(10.0, snr_db / 10.0)));
  AudioSignal out{signal.samples, signal.sample_rate};
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += k * fitted[i];
  return out;
}

inline std::vector<double> unit_power(std::vector<double> samples) {
  const double p = signal_power(samples);
  if (!(p > 0.0)) throw Error(ErrorCode::kSilentNoise, "synthesized noise has zero power");
  const double scale = 1.0 / std::sqrt(p);
  for (double& x : samples) x *= scale;
  return samples;
}

inline constexpr std::size_t kBabbleSources = 20;

namespace audio_detail {

inline void check_sources(const std::vector<AudioSignal>& sources, std::size_t needed) {
  if (sources.size() < needed) {
    throw Error(ErrorCode::kInsufficientSources,
                std::to_string(sources.size()) + " sources, need " + std::to_string(needed));
  }
  for (const auto& s : sources) {
    if (s.sample_rate != sources.front().sample_rate) throw Error(ErrorCode::kRateMismatch, "mixed sample rates");
    if (!(signal_power(s) > 0.0)) throw Error(ErrorCode::kSilentNoise, "silent noise source");
  }
}

}  // namespace audio_detail

/// Babble: 20 seeded sources (drawn without replacement), each a seeded
/// random crop of `target_len` samples (cyclic when the source is short),
/// summed and scaled to unit power.
inline AudioSignal synth_babble(const std::vector<AudioSignal>& sources, std::size_t target_len,
                                std::uint64_t seed) {
  audio_detail::check_sources(sources, kBabbleSources);
  Rng rng(seed);
  std::vector<std::size_t> order(sources.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);
  std::vector<double> mix(target_len, 0.0);
  for (std::size_t pick = 0; pick < kBabbleSources; ++pick) {
    const auto& src = sources[order[pick]].samples;
    std::size_t offset = 0;
    if (src.size() > target_len) {
      offset = uniform_index(rng, src.size() - target_len + 1);
    } else if (src.size() < target_len) {
      offset = uniform_index(rng, src.size());
    }
    for (std::size_t i = 0; i < target_len; ++i) mix[i] += src[(offset + i) % src.size()];
  }
  return {unit_power(std::move(mix)), sources.front().sample_rate};
}

/// Where one segment of human noise came from.
struct NoiseCrop {
  std::size_t source = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Human noise: consecutive 1-second crops from distinct seeded sources,
/// concatenated to `target_len` (last crop truncated), unit power.
inline AudioSignal synth_human_noise(const std::vector<AudioSignal>& sources, std::size_t target_len,
                                     std::uint64_t seed, std::vector<NoiseCrop>* crops = nullptr) {
  if (sources.empty()) throw Error(ErrorCode::kInsufficientSources, "no sources");
  const auto segment = static_cast<std::size_t>(sources.front().sample_rate);
  const std::size_t segments = (target_len + segment - 1) / segment;
  for (const auto& s : sources) {
    if (s.samples.size() < segment) {
      throw Error(ErrorCode::kSourceTooShort, "source of " + std::to_string(s.samples.size()) +
                                                  " samples is shorter than one second");
    }
  }
  audio_detail::check_sources(sources, segments);
  Rng rng(seed);
  std::vector<std::size_t> order(sources.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);
  std::vector<double> out;
  out.reserve(target_len);
  for (std::size_t seg = 0; seg < segments; ++seg) {
    const auto& src = sources[order[seg]].samples;
    const std::size_t offset = uniform_index(rng, src.size() - segment + 1);
    const std::size_t take = std::min(segment, target_len - out.size());
    out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(offset),
               src.begin() + static_cast<std::ptrdiff_t>(offset + take));
    if (crops) crops->push_back({order[seg], offset, take});
  }
  return {unit_power(std::move(out)), sources.front().sample_rate};
}

enum class NoiseKind { kBabble, kHuman, kFile };

/// Seed namespaces keep evaluation-time noise disjoint from training noise.
enum class NoisePhase : std::uint64_t { kTrain = 0x7452414Eull, kEval = 0x4556414Cull };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kBabble;
  double snr_db = 5.0;
  double apply_prob = 0.25;
  std::uint64_t seed = 0;
  NoisePhase phase = NoisePhase::kTrain;
};

struct Utterance {
  std::string id;
  AudioSignal audio;
};

struct AugmentEntry {
  std::string id;
  bool noised = false;
  std::optional<std::string> error;
};

struct AugmentReport {
  std::vector<Utterance> utterances;  // same order as the input
  std::vector<AugmentEntry> entries;
  std::vector<std::size_t> babble_sources;  // pool indices fixed for the corpus
};

/// Noises each utterance with probability `apply_prob`. The decision and the
/// noise draw use a seed derived from (corpus seed, phase, utterance id) so
/// results do not depend on processing order. Babble sources are drawn once
/// per corpus seed. Failures are recorded per utterance.
inline AugmentReport augment_corpus(const std::vector<Utterance>& corpus, const NoiseSpec& spec,
                                    const std::vector<AudioSignal>& noise_pool) {
  const std::uint64_t corpus_seed = splitmix64(spec.seed ^ static_cast<std::uint64_t>(spec.phase));
  AugmentReport report;
  std::vector<AudioSignal> babble;
  std::optional<std::string> pool_error;
  if (spec.kind == NoiseKind::kBabble) {
    if (noise_pool.size() < kBabbleSources) {
      pool_error = std::to_string(noise_pool.size()) + " sources, need 20";
    } else {
      Rng rng(derive_seed(corpus_seed, "babble-sources"));
      std::vector<std::size_t> order(noise_pool.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      shuffle(order, rng);
      order.resize(kBabbleSources);
      std::sort(order.begin(), order.end());
      report.babble_sources = order;
      for (std::size_t i : order) babble.push_back(noise_pool[i]);
    }
  }
  for (const Utterance& utt : corpus) {
    AugmentEntry entry{utt.id, false, std::nullopt};
    Utterance out = utt;
    const std::uint64_t utt_seed = derive_seed(corpus_seed, utt.id);
    Rng rng(utt_seed);
    if (bernoulli(rng, spec.apply_prob)) {
      try {
        if (pool_error) throw Error(ErrorCode::kInsufficientSources, *pool_error);
        const std::uint64_t noise_seed = rng();
        AudioSignal noise;
        switch (spec.kind) {
          case NoiseKind::kBabble: noise = synth_babble(babble, utt.audio.size(), noise_seed); break;
          case NoiseKind::kHuman: noise = synth_human_noise(noise_pool, utt.audio.size(), noise_seed); break;
          case NoiseKind::kFile:
            if (noise_pool.empty()) throw Error(ErrorCode::kInsufficientSources, "no noise file");
            noise = noise_pool.front();
            break;
        }
        out.audio = mix_at_snr(utt.audio, noise, spec.snr_db, rng());
        entry.noised = true;
      } catch (const Error& e) {
        entry.error = e.what();
      }
    }
    report.utterances.push_back(std::move(out));
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace avsr
