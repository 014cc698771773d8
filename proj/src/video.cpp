#include "signbridge/video.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <stdexcept>
#include <tuple>

#include "signbridge/binary_io.hpp"
#include "signbridge/datagen.hpp"
#include "signbridge/error.hpp"
#include "signbridge/kernels/kernels.hpp"
#include "signbridge/parallel.hpp"
#include "signbridge/vision.hpp"

namespace signbridge {

namespace fs = std::filesystem;
using json = nlohmann::json;

GestureAtlas::GestureAtlas(std::array<GrayImage, 26> letters)
    : letters_(std::move(letters)), blank_(kAtlasSide, kAtlasSide, 0) {
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (letters_[i].width() != kAtlasSide || letters_[i].height() != kAtlasSide)
      throw std::invalid_argument("atlas frame for " + std::string(1, char('A' + i)) + " is not 128x128");
  }
}

GestureAtlas GestureAtlas::synthetic() {
  auto shapes = synth_atlas(kAtlasSide);
  std::array<GrayImage, 26> letters;
  for (std::size_t i = 0; i < 26; ++i) letters[i] = std::move(shapes.at(i));
  return GestureAtlas(std::move(letters));
}

GestureAtlas GestureAtlas::load(const fs::path& dir) {
  std::array<GrayImage, 26> letters;
  for (int i = 0; i < 26; ++i) {
    const fs::path sub = dir / std::string(1, char('A' + i));
    std::vector<fs::path> files;
    if (fs::is_directory(sub)) {
      for (const auto& e : fs::directory_iterator(sub))
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    if (files.empty()) throw DataError(sub.string() + ": no atlas image for letter " + std::string(1, char('A' + i)));
    std::sort(files.begin(), files.end());
    GrayImage img = read_pgm(files.front());
    if (img.width() != kAtlasSide || img.height() != kAtlasSide) img = resize(img, kAtlasSide, kAtlasSide);
    letters[i] = std::move(img);
  }
  return GestureAtlas(std::move(letters));
}

void GestureAtlas::save(const fs::path& dir) const {
  for (int i = 0; i < 26; ++i) {
    const fs::path sub = dir / std::string(1, char('A' + i));
    fs::create_directories(sub);
    write_pgm(letters_[i], sub / "0000.pgm");
  }
}

const GrayImage& GestureAtlas::letter(int index) const {
  if (index < 0 || index >= 26) throw std::out_of_range("atlas letter index out of range");
  return letters_[index];
}

void FrameSequence::validate() const {
  if (fps != 1 && fps != 24 && fps != 60) throw std::invalid_argument("fps must be 1, 24 or 60");
  if (frames.size() != std::size_t(fps) * source_keyframes)
    throw std::invalid_argument("frame count " + std::to_string(frames.size()) + " does not equal fps * n");
  for (const auto& f : frames) {
    if (f.width() != frames.front().width() || f.height() != frames.front().height())
      throw std::invalid_argument("frames differ in size");
  }
}

bool FlowMap::is_zero() const {
  return std::all_of(dx.begin(), dx.end(), [](double v) { return v == 0.0; }) &&
         std::all_of(dy.begin(), dy.end(), [](double v) { return v == 0.0; });
}

FlowMap FlowMap::scaled(double s) const {
  FlowMap out = *this;
  for (auto& v : out.dx) v = v == 0.0 ? 0.0 : v * s;
  for (auto& v : out.dy) v = v == 0.0 ? 0.0 : v * s;
  return out;
}

std::string_view method_name(InterpolationMethod m) {
  return m == InterpolationMethod::flow ? "flow" : "crossfade";
}

InterpolationMethod parse_method(std::string_view name) {
  if (name == "flow") return InterpolationMethod::flow;
  if (name == "crossfade") return InterpolationMethod::crossfade;
  throw std::invalid_argument("unknown interpolation method: " + std::string(name));
}

FrameSequence text_to_keyframes(std::string_view text, const GestureAtlas& atlas) {
  if (text.empty()) throw std::invalid_argument("nothing to render: empty text");
  FrameSequence seq;
  seq.fps = 1;
  for (char ch : text) {
    if (ch == ' ') {
      seq.frames.push_back(atlas.blank());
    } else if (ch >= 'A' && ch <= 'Z') {
      seq.frames.push_back(atlas.letter(ch - 'A'));
    } else {
      throw std::invalid_argument("cannot render character '" + std::string(1, ch) + "'");
    }
  }
  seq.source_keyframes = seq.frames.size();
  return seq;
}

FrameSequence duplicate_frames(const FrameSequence& seq) {
  if (seq.fps != 1) throw std::invalid_argument("duplicate_frames expects a 1 fps sequence");
  seq.validate();
  FrameSequence out;
  out.fps = 24;
  out.source_keyframes = seq.source_keyframes;
  out.frames.reserve(seq.frames.size() * 24);
  for (std::size_t i = 0; i < seq.frames.size() * 24; ++i) out.frames.push_back(seq.frames[i / 24]);
  return out;
}

namespace {

void require_same_size(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("frames differ in size");
}

double sample(const double* map, int w, int h, double x, double y) {
  x = std::clamp(x, 0.0, double(w - 1));
  y = std::clamp(y, 0.0, double(h - 1));
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = (1.0 - fx) * map[y0 * w + x0] + fx * map[y0 * w + x1];
  const double bot = (1.0 - fx) * map[y1 * w + x0] + fx * map[y1 * w + x1];
  return (1.0 - fy) * top + fy * bot;
}

std::vector<double> as_doubles(const GrayImage& img) {
  return std::vector<double>(img.pixels().begin(), img.pixels().end());
}

std::vector<double> box3(const GrayImage& img) {
  const int w = img.width(), h = img.height();
  std::vector<double> out(std::size_t(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int sum = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          sum += img.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
      out[std::size_t(y) * w + x] = sum / 9.0;
    }
  }
  return out;
}

void check_t(double t) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0, 1)");
}

}  // namespace

FlowMap block_match(const GrayImage& i0, const GrayImage& i1) {
  require_same_size(i0, i1);
  const int w = i0.width(), h = i0.height();
  FlowMap f(w, h);
  if (i0 == i1) return f;
  const auto& k = kernels::active();
  for (int by = 0; by < h; by += kFlowBlock) {
    for (int bx = 0; bx < w; bx += kFlowBlock) {
      const int bw = std::min(kFlowBlock, w - bx), bh = std::min(kFlowBlock, h - by);
      std::uint32_t best = k.sad_u8(i0.row(by) + bx, w, i1.row(by) + bx, w, bw, bh);
      int best_dx = 0, best_dy = 0;
      for (int dy = -kFlowRadius; dy <= kFlowRadius; ++dy) {
        if (by + dy < 0 || by + dy + bh > h) continue;
        for (int dx = -kFlowRadius; dx <= kFlowRadius; ++dx) {
          if (bx + dx < 0 || bx + dx + bw > w) continue;
          const std::uint32_t sad = k.sad_u8(i0.row(by) + bx, w, i1.row(by + dy) + bx + dx, w, bw, bh);
          const int mag = std::abs(dx) + std::abs(dy), best_mag = std::abs(best_dx) + std::abs(best_dy);
          if (sad < best || (sad == best && std::tie(mag, dy, dx) < std::tie(best_mag, best_dy, best_dx))) {
            best = sad;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      for (int y = by; y < by + bh; ++y) {
        for (int x = bx; x < bx + bw; ++x) {
          f.dx[std::size_t(y) * w + x] = best_dx;
          f.dy[std::size_t(y) * w + x] = best_dy;
        }
      }
    }
  }
  return f;
}

FlowField scale_flow(const FlowMap& f01, double t) {
  check_t(t);
  return FlowField{f01.scaled(-t), f01.scaled(1.0 - t)};
}

FlowField estimate_flow(const GrayImage& i0, const GrayImage& i1, double t) {
  check_t(t);
  return scale_flow(block_match(i0, i1), t);
}

ContextFeatures extract_context(const GrayImage& i0, const GrayImage& i1) {
  require_same_size(i0, i1);
  return ContextFeatures{i0.width(), i0.height(), box3(i0), box3(i1)};
}

GrayImage crossfade(const GrayImage& i0, const GrayImage& i1, double t) {
  require_same_size(i0, i1);
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must lie in [0, 1]");
  GrayImage out(i0.width(), i0.height());
  kernels::active().blend_u8(i0.pixels().data(), i1.pixels().data(), t, out.pixels().data(), out.pixels().size());
  return out;
}

GrayImage synthesize_frame(const GrayImage& i0, const GrayImage& i1, const FlowField& flows,
                           const ContextFeatures& contexts, double t) {
  require_same_size(i0, i1);
  const int w = i0.width(), h = i0.height();
  const std::size_t n = std::size_t(w) * h;
  for (const FlowMap* f : {&flows.to0, &flows.to1}) {
    if (f->width != w || f->height != h || f->dx.size() != n || f->dy.size() != n)
      throw std::invalid_argument("flow field does not match frame size");
  }
  if (contexts.width != w || contexts.height != h || contexts.c0.size() != n || contexts.c1.size() != n)
    throw std::invalid_argument("context maps do not match frame size");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("t must lie in [0, 1]");

  if (flows.to0.is_zero() && flows.to1.is_zero()) return crossfade(i0, i1, t);

  const std::vector<double> p0 = as_doubles(i0), p1 = as_doubles(i1);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = std::size_t(y) * w + x;
      const double x0 = x + flows.to0.dx[idx], y0 = y + flows.to0.dy[idx];
      const double x1 = x + flows.to1.dx[idx], y1 = y + flows.to1.dy[idx];
      const double v0 = sample(p0.data(), w, h, x0, y0);
      const double v1 = sample(p1.data(), w, h, x1, y1);
      double a = 1.0 - t, b = t;
      const double m0 = std::hypot(flows.to0.dx[idx], flows.to0.dy[idx]);
      const double m1 = std::hypot(flows.to1.dx[idx], flows.to1.dy[idx]);
      if ((m0 > 0.0 || m1 > 0.0) && m0 != m1) {
        const double c0 = sample(contexts.c0.data(), w, h, x0, y0);
        const double c1 = sample(contexts.c1.data(), w, h, x1, y1);
        if (std::abs(c0 - c1) > kOcclusionThreshold) {
          if (m0 > m1) a *= 0.5; else b *= 0.5;
          const double s = a + b;
          a /= s;
          b /= s;
        }
      }
      const double v = std::floor(a * v0 + b * v1 + 0.5);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

FrameSequence interpolate_sequence(const FrameSequence& seq, InterpolationMethod method, unsigned threads) {
  if (seq.fps != 24) throw std::invalid_argument("interpolate_sequence expects a 24 fps sequence");
  seq.validate();
  FrameSequence out;
  out.fps = 60;
  out.source_keyframes = seq.source_keyframes;
  const std::size_t count = seq.source_keyframes * 60;
  const std::size_t last = seq.frames.empty() ? 0 : seq.frames.size() - 1;
  out.frames.resize(count);

  // F_0->1 per distinct source pair, computed once up front.
  std::map<std::size_t, FlowMap> flows;
  std::map<std::size_t, ContextFeatures> contexts;
  if (method == InterpolationMethod::flow) {
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t i = (2 * j) / 5;
      if ((2 * j) % 5 == 0 || i >= last || seq.frames[i] == seq.frames[i + 1] || flows.count(i)) continue;
      flows.emplace(i, block_match(seq.frames[i], seq.frames[i + 1]));
      contexts.emplace(i, extract_context(seq.frames[i], seq.frames[i + 1]));
    }
  }

  parallel_for(count, threads, [&](std::size_t j) {
    const std::size_t i = (2 * j) / 5;
    const std::size_t rem = (2 * j) % 5;
    if (rem == 0 || i >= last) {
      out.frames[j] = seq.frames[std::min(i, last)];
      return;
    }
    const GrayImage& a = seq.frames[i];
    const GrayImage& b = seq.frames[i + 1];
    if (a == b) {
      out.frames[j] = a;
      return;
    }
    const double t = double(rem) / 5.0;
    if (method == InterpolationMethod::crossfade) {
      out.frames[j] = crossfade(a, b, t);
    } else {
      out.frames[j] = synthesize_frame(a, b, scale_flow(flows.at(i), t), contexts.at(i), t);
    }
  });
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace {

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.pgm", i);
  return buf;
}

}  // namespace

fs::path write_sequence(const FrameSequence& seq, const fs::path& dir) {
  seq.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(dir.string() + ": " + ec.message());
  json frames = json::array();
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto bytes = encode_pgm(seq.frames[i]);
    const std::string name = frame_name(i);
    binio::write_file(dir / name, bytes);
    frames.push_back({{"file", name}, {"sha256", sha256_hex(bytes)}});
  }
  json manifest = {
      {"schema_version", 1},
      {"fps", seq.fps},
      {"frame_count", seq.frames.size()},
      {"width", seq.frames.empty() ? 0 : seq.frames.front().width()},
      {"height", seq.frames.empty() ? 0 : seq.frames.front().height()},
      {"source_keyframes", seq.source_keyframes},
      {"frames", frames},
  };
  const fs::path path = dir / "manifest.json";
  const std::string text = manifest.dump(2) + "\n";
  binio::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
  return path;
}

FrameSequence read_sequence(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  const auto raw = binio::read_file(path);
  json manifest;
  try {
    manifest = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  FrameSequence seq;
  try {
    if (manifest.at("schema_version").get<int>() != 1) throw DataError(path.string() + ": unsupported schema_version");
    seq.fps = manifest.at("fps").get<int>();
    seq.source_keyframes = manifest.at("source_keyframes").get<std::size_t>();
    const auto& frames = manifest.at("frames");
    if (frames.size() != manifest.at("frame_count").get<std::size_t>())
      throw DataError(path.string() + ": frame_count disagrees with frame list");
    const int w = manifest.at("width").get<int>(), h = manifest.at("height").get<int>();
    for (const auto& entry : frames) {
      const fs::path file = dir / entry.at("file").get<std::string>();
      const auto bytes = binio::read_file(file);
      if (sha256_hex(bytes) != entry.at("sha256").get<std::string>())
        throw DataError(file.string() + ": checksum mismatch");
      GrayImage img = decode_pgm(bytes, file.string());
      if (img.width() != w || img.height() != h) throw DataError(file.string() + ": size disagrees with manifest");
      seq.frames.push_back(std::move(img));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    seq.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return seq;
}

}  // namespace signbridge
