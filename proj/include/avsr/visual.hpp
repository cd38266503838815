#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "avsr/error.hpp"
#include "avsr/rng.hpp"

namespace avsr {

inline constexpr std::size_t kLandmarkCount = 68;
inline constexpr std::size_t kMouthFirst = 48;  // points 48..67 outline the lips
inline constexpr std::size_t kSmoothingWindow = 12;
inline constexpr int kRoiSize = 120;
inline constexpr int kAugCropSize = 112;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

using LandmarkFrame = std::array<Point2, kLandmarkCount>;

struct LandmarkTrack {
  std::vector<LandmarkFrame> frames;
  std::vector<bool> valid;

  std::size_t size() const { return frames.size(); }
  friend bool operator==(const LandmarkTrack&, const LandmarkTrack&) = default;
};

/// Fills invalid frames by per-coordinate linear interpolation between the
/// nearest valid neighbours; leading and trailing gaps copy the nearest
/// valid frame.
inline LandmarkTrack interpolate_gaps(const LandmarkTrack& track) {
  std::vector<std::size_t> anchors;
  for (std::size_t t = 0; t < track.size(); ++t) {
    if (track.valid[t]) anchors.push_back(t);
  }
  if (anchors.empty()) throw Error(ErrorCode::kAllInvalid, "no frame has detected landmarks");
  LandmarkTrack out{track.frames, std::vector<bool>(track.size(), true)};
  for (std::size_t t = 0; t < anchors.front(); ++t) out.frames[t] = track.frames[anchors.front()];
  for (std::size_t t = anchors.back() + 1; t < track.size(); ++t) out.frames[t] = track.frames[anchors.back()];
  for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
    const std::size_t lo = anchors[a], hi = anchors[a + 1];
    for (std::size_t t = lo + 1; t < hi; ++t) {
      const double w = static_cast<double>(t - lo) / static_cast<double>(hi - lo);
      for (std::size_t p = 0; p < kLandmarkCount; ++p) {
        const Point2& a0 = track.frames[lo][p];
        const Point2& a1 = track.frames[hi][p];
        out.frames[t][p] = {a0.x + w * (a1.x - a0.x), a0.y + w * (a1.y - a0.y)};
      }
    }
  }
  return out;
}

/// Centred moving average: window/2 frames back, window-1-window/2 forward
/// (6 and 5 for the default 12), shrinking at the sequence ends.
inline LandmarkTrack smooth(const LandmarkTrack& track, std::size_t window = kSmoothingWindow) {
  if (window == 0) throw Error(ErrorCode::kInvalidArgument, "window must be positive");
  const std::size_t back = window / 2;
  const std::size_t forward = window - 1 - back;
  const std::size_t n = track.size();
  LandmarkTrack out{std::vector<LandmarkFrame>(n), std::vector<bool>(n, true)};
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= back ? t - back : 0;
    const std::size_t hi = std::min(n - 1, t + forward);
    const double count = static_cast<double>(hi - lo + 1);
    for (std::size_t p = 0; p < kLandmarkCount; ++p) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t u = lo; u <= hi; ++u) {
        sx += track.frames[u][p].x;
        sy += track.frames[u][p].y;
      }
      out.frames[t][p] = {sx / count, sy / count};
    }
  }
  return out;
}

/// x -> scale * R(rotation) * x + translation
struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;
  Point2 translation;
  double residual = 0.0;  // sum of squared alignment errors at the estimate

  Point2 apply(const Point2& p) const {
    const double c = std::cos(rotation), s = std::sin(rotation);
    return {scale * (c * p.x - s * p.y) + translation.x, scale * (s * p.x + c * p.y) + translation.y};
  }
};

inline double similarity_residual(const SimilarityTransform& tf, std::span<const Point2> source,
                                  std::span<const Point2> reference) {
  double r = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Point2 q = tf.apply(source[i]);
    r += (q.x - reference[i].x) * (q.x - reference[i].x) + (q.y - reference[i].y) * (q.y - reference[i].y);
  }
  return r;
}

/// Least-squares similarity mapping `source` onto `reference` (Procrustes
/// with scale, closed form in 2-D).
inline SimilarityTransform estimate_similarity(std::span<const Point2> source, std::span<const Point2> reference) {
  if (source.size() != reference.size() || source.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "point sets must be non-empty and the same size");
  }
  const double n = static_cast<double>(source.size());
  Point2 ms, mr;
  for (std::size_t i = 0; i < source.size(); ++i) {
    ms.x += source[i].x;
    ms.y += source[i].y;
    mr.x += reference[i].x;
    mr.y += reference[i].y;
  }
  ms = {ms.x / n, ms.y / n};
  mr = {mr.x / n, mr.y / n};
  double a = 0.0, b = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const double sx = source[i].x - ms.x, sy = source[i].y - ms.y;
    const double rx = reference[i].x - mr.x, ry = reference[i].y - mr.y;
    a += sx * rx + sy * ry;
    b += sx * ry - sy * rx;
    norm += sx * sx + sy * sy;
  }
  if (!(norm > 1e-12)) throw Error(ErrorCode::kDegenerateSource, "source points coincide");
  SimilarityTransform tf;
  tf.rotation = std::atan2(b, a);
  tf.scale = std::hypot(a, b) / norm;
  const double c = std::cos(tf.rotation), s = std::sin(tf.rotation);
  tf.translation = {mr.x - tf.scale * (c * ms.x - s * ms.y), mr.y - tf.scale * (s * ms.x + c * ms.y)};
  tf.residual = similarity_residual(tf, source, reference);
  return tf;
}

/// Per-frame alignment of a track to reference landmarks.
inline std::vector<SimilarityTransform> align_track(const LandmarkTrack& track, const LandmarkFrame& reference,
                                                    LandmarkTrack* aligned = nullptr) {
  std::vector<SimilarityTransform> transforms;
  transforms.reserve(track.size());
  if (aligned) *aligned = track;
  for (std::size_t t = 0; t < track.size(); ++t) {
    transforms.push_back(estimate_similarity(track.frames[t], reference));
    if (aligned) {
      for (std::size_t p = 0; p < kLandmarkCount; ++p) aligned->frames[t][p] = transforms.back().apply(track.frames[t][p]);
    }
  }
  return transforms;
}

/// One crop decision shared by every frame of a sequence.
struct CropPlan {
  int roi_x0 = 0;  // top-left of the ROI box
  int roi_y0 = 0;
  int roi_size = kRoiSize;
  std::optional<std::array<int, 2>> aug_offset;  // (dx, dy) of the training crop inside the ROI
  int aug_size = kAugCropSize;
  bool flip = false;
  bool clamped = false;  // the box was moved to fit the image

  int output_size() const { return aug_offset ? aug_size : roi_size; }
  friend bool operator==(const CropPlan&, const CropPlan&) = default;
};

inline double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

inline Point2 mouth_centroid(const LandmarkFrame& frame) {
  Point2 c;
  for (std::size_t p = kMouthFirst; p < kLandmarkCount; ++p) {
    c.x += frame[p].x;
    c.y += frame[p].y;
  }
  const double n = static_cast<double>(kLandmarkCount - kMouthFirst);
  return {c.x / n, c.y / n};
}

/// Fixed box centred on the sequence median of the mouth centroid, rounded
/// to whole pixels. With an image size the box is clamped inside it and the
/// plan flagged.
inline CropPlan mouth_roi(const LandmarkTrack& track, int roi_size = kRoiSize,
                          std::optional<std::array<int, 2>> image_size = std::nullopt) {
  if (track.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty track");
  std::vector<double> xs, ys;
  for (const auto& frame : track.frames) {
    const Point2 c = mouth_centroid(frame);
    xs.push_back(c.x);
    ys.push_back(c.y);
  }
  CropPlan plan;
  plan.roi_size = roi_size;
  plan.roi_x0 = static_cast<int>(std::lround(median(xs))) - roi_size / 2;
  plan.roi_y0 = static_cast<int>(std::lround(median(ys))) - roi_size / 2;
  if (image_size) {
    const auto [width, height] = *image_size;
    if (roi_size > width || roi_size > height) throw Error(ErrorCode::kBoundsError, "ROI larger than image");
    const int x0 = std::clamp(plan.roi_x0, 0, width - roi_size);
    const int y0 = std::clamp(plan.roi_y0, 0, height - roi_size);
    plan.clamped = x0 != plan.roi_x0 || y0 != plan.roi_y0;
    plan.roi_x0 = x0;
    plan.roi_y0 = y0;
  }
  return plan;
}

/// Training augmentation: uniform crop offset inside the ROI and a flip with
/// probability 0.5, drawn once per sequence.
inline CropPlan with_augmentation(CropPlan plan, std::uint64_t seed, int crop_size = kAugCropSize,
                                  double flip_prob = 0.5) {
  if (crop_size > plan.roi_size) throw Error(ErrorCode::kBoundsError, "augmentation crop exceeds ROI");
  Rng rng(seed);
  const auto slack = static_cast<std::uint64_t>(plan.roi_size - crop_size + 1);
  const int dx = static_cast<int>(uniform_index(rng, slack));
  const int dy = static_cast<int>(uniform_index(rng, slack));
  plan.aug_offset = std::array<int, 2>{dx, dy};
  plan.aug_size = crop_size;
  plan.flip = bernoulli(rng, flip_prob);
  return plan;
}

/// Crop decision for each of `frames` frames.
inline std::vector<CropPlan> per_frame_plans(const CropPlan& plan, std::size_t frames) {
  return std::vector<CropPlan>(frames, plan);
}

/// Image coordinates of the output crop's pixel grid origin.
inline std::array<int, 2> crop_origin(const CropPlan& plan) {
  int x0 = plan.roi_x0, y0 = plan.roi_y0;
  if (plan.aug_offset) {
    x0 += (*plan.aug_offset)[0];
    y0 += (*plan.aug_offset)[1];
  }
  return {x0, y0};
}

/// Maps an image-space landmark into output-crop coordinates (pixel centres
/// at integers), mirroring it when the plan flips.
inline Point2 crop_point(const CropPlan& plan, const Point2& p) {
  const auto [x0, y0] = crop_origin(plan);
  Point2 q{p.x - x0, p.y - y0};
  if (plan.flip) q.x = static_cast<double>(plan.output_size() - 1) - q.x;
  return q;
}

/// T x H x W x C frames, row-major.
struct FrameTensor {
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<double> data;

  double& at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) {
    return data[((t * height + y) * width + x) * channels + c];
  }
  double at(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
    return data[((t * height + y) * width + x) * channels + c];
  }
  friend bool operator==(const FrameTensor&, const FrameTensor&) = default;
};

/// Crop -> optional flip -> grayscale (0.299 R + 0.587 G + 0.114 B) ->
/// (x - mean) / sqrt(var), with one plan for every frame.
inline FrameTensor apply_frames(const FrameTensor& in, const CropPlan& plan, bool grayscale = true,
                                double mean = 0.0, double var = 1.0) {
  if (in.channels != 1 && in.channels != 3) throw Error(ErrorCode::kInvalidArgument, "channels must be 1 or 3");
  if (!(var > 0.0)) throw Error(ErrorCode::kInvalidArgument, "variance must be positive");
  const auto [x0, y0] = crop_origin(plan);
  const int size = plan.output_size();
  if (x0 < 0 || y0 < 0 || x0 + size > static_cast<int>(in.width) || y0 + size > static_cast<int>(in.height)) {
    throw Error(ErrorCode::kBoundsError, "crop box lies outside the frame");
  }
  const std::size_t out_channels = (grayscale || in.channels == 1) ? 1 : 3;
  FrameTensor out{in.frames, static_cast<std::size_t>(size), static_cast<std::size_t>(size), out_channels, {}};
  out.data.resize(out.frames * out.height * out.width * out.channels);
  const double inv_std = 1.0 / std::sqrt(var);
  for (std::size_t t = 0; t < in.frames; ++t) {
    for (std::size_t y = 0; y < out.height; ++y) {
      for (std::size_t x = 0; x < out.width; ++x) {
        const std::size_t src_x = static_cast<std::size_t>(x0) + (plan.flip ? out.width - 1 - x : x);
        const std::size_t src_y = static_cast<std::size_t>(y0) + y;
        if (out_channels == 1) {
          const double v = in.channels == 1 ? in.at(t, src_y, src_x, 0)
                                            : 0.299 * in.at(t, src_y, src_x, 0) + 0.587 * in.at(t, src_y, src_x, 1) +
                                                  0.114 * in.at(t, src_y, src_x, 2);
          out.at(t, y, x, 0) = (v - mean) * inv_std;
        } else {
          for (std::size_t c = 0; c < 3; ++c) out.at(t, y, x, c) = (in.at(t, src_y, src_x, c) - mean) * inv_std;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV landmarks: header `frame,point,x,y,valid`, one row per point.

inline LandmarkTrack read_landmarks_csv(std::istream& is) {
  std::map<std::size_t, std::pair<LandmarkFrame, bool>> rows;
  std::map<std::size_t, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("frame")) continue;
    std::istringstream fields(line);
    std::string f, p, x, y, v;
    if (!std::getline(fields, f, ',') || !std::getline(fields, p, ',') || !std::getline(fields, x, ',') ||
        !std::getline(fields, y, ',') || !std::getline(fields, v, ',')) {
      throw Error(ErrorCode::kParseError, "landmark CSV line " + std::to_string(line_no) + " has too few fields");
    }
    try {
      const auto frame = static_cast<std::size_t>(std::stoul(f));
      const auto point = static_cast<std::size_t>(std::stoul(p));
      if (point >= kLandmarkCount) throw Error(ErrorCode::kParseError, "point index out of range");
      auto& slot = rows[frame];
      slot.first[point] = {std::stod(x), std::stod(y)};
      slot.second = std::stoi(v) != 0;
      ++seen[frame];
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParseError, "landmark CSV line " + std::to_string(line_no) + " is malformed");
    }
  }
  LandmarkTrack track;
  std::size_t expected = 0;
  for (const auto& [frame, slot] : rows) {
    if (frame != expected++) throw Error(ErrorCode::kParseError, "landmark frames are not contiguous from 0");
    if (slot.second && seen[frame] != kLandmarkCount) {
      throw Error(ErrorCode::kParseError, "valid frame " + std::to_string(frame) + " lacks 68 points");
    }
    track.frames.push_back(slot.first);
    track.valid.push_back(slot.second);
  }
  return track;
}

inline LandmarkTrack load_landmarks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return read_landmarks_csv(in);
}

inline void write_landmarks_csv(std::ostream& os, const LandmarkTrack& track) {
  os << "frame,point,x,y,valid\n";
  os.precision(17);
  for (std::size_t t = 0; t < track.size(); ++t) {
    for (std::size_t p = 0; p < kLandmarkCount; ++p) {
      os << t << ',' << p << ',' << track.frames[t][p].x << ',' << track.frames[t][p].y << ','
         << (track.valid[t] ? 1 : 0) << '\n';
    }
  }
}

}  // namespace avsr
