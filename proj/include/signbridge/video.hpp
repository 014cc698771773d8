#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "signbridge/image.hpp"

namespace signbridge {

constexpr int kAtlasSide = 128;

// Letter index 0..25 -> 128x128 frame, plus an all-black frame for SPACE.
class GestureAtlas {
 public:
  explicit GestureAtlas(std::array<GrayImage, 26> letters);

  // Shapes from the dataset generator, rendered at 128x128.
  static GestureAtlas synthetic();
  // <dir>/<LETTER>/ holding at least one PGM; the first file in name order is
  // used and resized to 128x128 if needed.
  static GestureAtlas load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  const GrayImage& letter(int index) const;
  const GrayImage& blank() const { return blank_; }

 private:
  std::array<GrayImage, 26> letters_;
  GrayImage blank_;
};

struct FrameSequence {
  std::vector<GrayImage> frames;
  int fps = 1;
  std::size_t source_keyframes = 0;  // n

  // Same dimensions, fps in {1, 24, 60}, frames.size() == fps * n.
  void validate() const;
};

// Per-pixel displacement in pixels.
struct FlowMap {
  int width = 0;
  int height = 0;
  std::vector<double> dx, dy;

  FlowMap() = default;
  FlowMap(int w, int h) : width(w), height(h), dx(std::size_t(w) * h, 0.0), dy(std::size_t(w) * h, 0.0) {}
  bool is_zero() const;
  FlowMap scaled(double s) const;
};

struct FlowField {
  FlowMap to0;  // F_t->0
  FlowMap to1;  // F_t->1
};

struct ContextFeatures {
  int width = 0;
  int height = 0;
  std::vector<double> c0, c1;
};

enum class InterpolationMethod { crossfade, flow };

std::string_view method_name(InterpolationMethod m);
InterpolationMethod parse_method(std::string_view name);

constexpr int kFlowBlock = 8;
constexpr int kFlowRadius = 8;
constexpr double kOcclusionThreshold = 24.0;

// 1 fps, one frame per character; throws std::invalid_argument naming the
// first character outside A-Z and space.
FrameSequence text_to_keyframes(std::string_view text, const GestureAtlas& atlas);

// 24 fps: frame i copies source floor(i / 24).
FrameSequence duplicate_frames(const FrameSequence& seq);

// Block-matching F_0->1: 8x8 blocks of I0 searched within +-8 px in I1 by SAD.
// Ties prefer the smaller |dx| + |dy|, then smaller dy, then smaller dx.
FlowMap block_match(const GrayImage& i0, const GrayImage& i1);

// F_t->0 = -t F_0->1 and F_t->1 = (1 - t) F_0->1. t in (0, 1).
FlowField estimate_flow(const GrayImage& i0, const GrayImage& i1, double t);
FlowField scale_flow(const FlowMap& f01, double t);

// 3x3 mean maps with edge clamp.
ContextFeatures extract_context(const GrayImage& i0, const GrayImage& i1);

// Backward-warps both endpoints (bilinear, edge clamp) and fuses them as
// (1 - t) w0 + t w1. Where flow is nonzero and the warped contexts differ by
// more than kOcclusionThreshold, the warp travelling further gets half weight.
GrayImage synthesize_frame(const GrayImage& i0, const GrayImage& i1, const FlowField& flows,
                           const ContextFeatures& contexts, double t);

GrayImage crossfade(const GrayImage& i0, const GrayImage& i1, double t);

// 60 fps from 24 fps. Output j sits at source time 2j/5; aligned frames are
// copied, the rest synthesized between the bracketing frames. Beyond the last
// source frame the last frame is held.
FrameSequence interpolate_sequence(const FrameSequence& seq, InterpolationMethod method, unsigned threads = 1);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// frame_000000.pgm ... plus manifest.json; returns the manifest path.
std::filesystem::path write_sequence(const FrameSequence& seq, const std::filesystem::path& dir);
// Verifies every frame checksum; DataError on any mismatch.
FrameSequence read_sequence(const std::filesystem::path& dir);

}  // namespace signbridge
