#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "avsr/binary_io.hpp"
#include "avsr/error.hpp"
#include "avsr/logmath.hpp"
#include "avsr/matrix.hpp"
#include "avsr/vocab.hpp"

namespace avsr {

/// T x V lattice of per-frame natural-log symbol probabilities.
class PosteriorGrid {
 public:
  PosteriorGrid() = default;
  explicit PosteriorGrid(Matrix log_probs) : log_probs_(std::move(log_probs)) {}

  static PosteriorGrid from_probabilities(const Matrix& probs) {
    Matrix logs(probs.rows(), probs.cols());
    for (std::size_t i = 0; i < probs.data().size(); ++i) {
      const double p = probs.data()[i];
      if (p < 0.0) throw Error(ErrorCode::kInvalidGrid, "negative probability");
      logs.data()[i] = p == 0.0 ? kLogZero : std::log(p);
    }
    return PosteriorGrid(std::move(logs));
  }

  std::size_t frame_count() const { return log_probs_.rows(); }
  std::size_t vocab_size() const { return log_probs_.cols(); }
  double operator()(std::size_t t, TokenId v) const {
    return log_probs_(t, static_cast<std::size_t>(v));
  }
  std::span<const double> row(std::size_t t) const { return log_probs_.row(t); }
  const Matrix& log_probs() const { return log_probs_; }
  Matrix& log_probs() { return log_probs_; }

  /// Throws kInvalidGrid unless every entry is <= 0 (or kLogZero), no entry
  /// is NaN, and every row log-sum-exps to 0 within `tolerance`; kEmptyGrid
  /// when there are no frames.
  void validate(double tolerance = 1e-6) const {
    if (frame_count() == 0) throw Error(ErrorCode::kEmptyGrid, "grid has no frames");
    for (std::size_t t = 0; t < frame_count(); ++t) {
      for (double x : row(t)) {
        if (std::isnan(x) || x > 1e-12 || x == std::numeric_limits<double>::infinity()) {
          throw Error(ErrorCode::kInvalidGrid, "entry out of range at frame " + std::to_string(t));
        }
      }
      const double total = log_sum_exp(row(t));
      if (!(std::abs(total) <= tolerance)) {
        throw Error(ErrorCode::kInvalidGrid,
                    "row " + std::to_string(t) + " is not normalized (log-sum " + std::to_string(total) + ")");
      }
    }
  }

  void validate_for(const Vocabulary& vocab) const {
    if (vocab_size() != vocab.size()) {
      throw Error(ErrorCode::kInvalidGrid, "grid has " + std::to_string(vocab_size()) +
                                               " columns, vocabulary has " + std::to_string(vocab.size()));
    }
    validate();
  }

  friend bool operator==(const PosteriorGrid&, const PosteriorGrid&) = default;

 private:
  Matrix log_probs_;
};

// CTCGRID1 container: magic, u32 T, u32 V, u8 log-domain flag, T*V f64.
inline constexpr std::string_view kGridMagic = "CTCGRID1";

inline void write_grid_binary(std::ostream& os, const PosteriorGrid& grid) {
  binary::write_magic(os, kGridMagic);
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.frame_count()));
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.vocab_size()));
  binary::write_le<std::uint8_t>(os, 1);
  for (double x : grid.log_probs().data()) binary::write_f64(os, x);
}

inline PosteriorGrid read_grid_binary(std::istream& is) {
  binary::expect_magic(is, kGridMagic);
  const auto frames = binary::read_le<std::uint32_t>(is);
  const auto cols = binary::read_le<std::uint32_t>(is);
  const auto log_domain = binary::read_le<std::uint8_t>(is);
  Matrix m(frames, cols);
  for (double& x : m.data()) x = binary::read_f64(is);
  if (log_domain == 1) return PosteriorGrid(std::move(m));
  if (log_domain == 0) return PosteriorGrid::from_probabilities(m);
  throw Error(ErrorCode::kParseError, "unknown domain flag " + std::to_string(log_domain));
}

// JSON mirror: {"log_domain": bool, "frames": [[...], ...]}. Log-domain files
// may spell exact zero as null or "-inf".
inline nlohmann::json grid_to_json(const PosteriorGrid& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < grid.frame_count(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (double x : grid.row(t)) {
      if (is_log_zero(x)) {
        row.push_back(nullptr);
      } else {
        row.push_back(x);
      }
    }
    rows.push_back(std::move(row));
  }
  return {{"log_domain", true}, {"frames", std::move(rows)}};
}

inline PosteriorGrid grid_from_json(const nlohmann::json& j) {
  try {
    const bool log_domain = j.value("log_domain", true);
    const auto& frames = j.at("frames");
    const std::size_t t_count = frames.size();
    const std::size_t v_count = t_count == 0 ? 0 : frames.at(0).size();
    Matrix m(t_count, v_count);
    for (std::size_t t = 0; t < t_count; ++t) {
      if (frames[t].size() != v_count) throw Error(ErrorCode::kParseError, "ragged grid rows");
      for (std::size_t v = 0; v < v_count; ++v) {
        const auto& cell = frames[t][v];
        if (cell.is_null() || (cell.is_string() && cell.get<std::string>() == "-inf")) {
          if (!log_domain) throw Error(ErrorCode::kParseError, "null entry in probability-domain grid");
          m(t, v) = kLogZero;
        } else {
          m(t, v) = cell.get<double>();
        }
      }
    }
    return log_domain ? PosteriorGrid(std::move(m)) : PosteriorGrid::from_probabilities(m);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

/// Loads either container, sniffing the binary magic.
inline PosteriorGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open grid " + path);
  std::string head(kGridMagic.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  in.clear();
  in.seekg(0);
  if (head == kGridMagic) return read_grid_binary(in);
  try {
    return grid_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

inline void save_grid(const std::string& path, const PosteriorGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write grid " + path);
  if (path.ends_with(".json")) {
    out << grid_to_json(grid).dump() << '\n';
  } else {
    write_grid_binary(out, grid);
  }
}

}  // namespace avsr
