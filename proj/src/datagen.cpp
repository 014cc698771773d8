#include "signbridge/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "signbridge/labels.hpp"
#include "signbridge/rng.hpp"
#include "signbridge/vision.hpp"

namespace signbridge {

namespace {

// Fixed key for class geometry (centroids, shapes), independent of dataset seeds.
constexpr std::uint64_t kUniverse = 0x5349474E42524447ULL;

struct Bar {
  double angle;
  double length;  // in units of the shape radius
  double half_width;
};

struct ShapeParams {
  std::vector<double> radii;  // star polygon radii at evenly spaced angles
  double phase = 0.0;
  std::vector<Bar> bars;
};

ShapeParams class_shape(std::string_view stream, int class_index) {
  Rng rng = make_rng(kUniverse, stream, static_cast<std::uint64_t>(class_index));
  std::uniform_int_distribution<int> vertices(5, 9);
  std::uniform_real_distribution<double> radius(0.35, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> bar_count(0, 2);
  std::uniform_real_distribution<double> bar_len(0.3, 0.7);
  std::uniform_real_distribution<double> bar_w(0.08, 0.16);
  ShapeParams p;
  p.radii.resize(static_cast<std::size_t>(vertices(rng)));
  for (double& r : p.radii) r = radius(rng);
  p.phase = angle(rng);
  const int bars = bar_count(rng);
  for (int i = 0; i < bars; ++i) p.bars.push_back({angle(rng), bar_len(rng), bar_w(rng)});
  return p;
}

struct Placement {
  double cx, cy, radius, rotation;
  double radius_jitter[16];
};

bool inside_polygon(const std::vector<std::pair<double, double>>& poly, double px, double py) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double u = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const double dx = px - (ax + u * vx), dy = py - (ay + u * vy);
  return std::sqrt(dx * dx + dy * dy);
}

// Foreground mask of a shape at a placement, one sample per pixel centre.
std::vector<bool> rasterize(const ShapeParams& shape, const Placement& at, int side) {
  std::vector<std::pair<double, double>> poly;
  const std::size_t k = shape.radii.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double a = shape.phase + at.rotation + 2.0 * std::numbers::pi * double(i) / double(k);
    const double r = at.radius * shape.radii[i] * at.radius_jitter[i % 16];
    poly.emplace_back(at.cx + r * std::cos(a), at.cy + r * std::sin(a));
  }
  std::vector<bool> mask(static_cast<std::size_t>(side) * side, false);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      bool fg = inside_polygon(poly, px, py);
      for (const Bar& b : shape.bars) {
        if (fg) break;
        const double a = b.angle + at.rotation;
        const double r0 = 0.4 * at.radius, r1 = (0.4 + b.length + 0.5) * at.radius;
        fg = segment_distance(px, py, at.cx + r0 * std::cos(a), at.cy + r0 * std::sin(a),
                              at.cx + r1 * std::cos(a), at.cy + r1 * std::sin(a)) <=
             b.half_width * at.radius * 2.0;
      }
      mask[static_cast<std::size_t>(y) * side + x] = fg;
    }
  }
  return mask;
}

std::array<double, 3> landmark_centroid_point(Rng& rng) {
  std::uniform_real_distribution<double> xy(0.0, 1.0);
  std::uniform_real_distribution<double> z(-0.2, 0.2);
  const double x = xy(rng);
  const double y = xy(rng);
  return {x, y, z(rng)};
}

LandmarkFrame sample_around(std::string_view centroid_stream, std::uint64_t centroid_index,
                            double spread, Rng& sample_rng) {
  Rng centroid_rng = make_rng(kUniverse, centroid_stream, centroid_index);
  std::normal_distribution<double> noise(0.0, 1.0);
  LandmarkFrame f;
  f.points.resize(kLandmarkCount);
  for (auto& p : f.points) {
    const auto c = landmark_centroid_point(centroid_rng);
    p.x = c[0] + spread * noise(sample_rng);
    p.y = c[1] + spread * noise(sample_rng);
    p.z = c[2] + spread * noise(sample_rng);
  }
  return f;
}

}  // namespace

void LandmarkDatasetSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("landmark dataset needs >= 2 classes");
  if (per_class < 1) throw std::invalid_argument("landmark dataset needs >= 1 sample per class");
  if (!(spread > 0.0)) throw std::invalid_argument("landmark spread must be > 0");
}

void SilhouetteDatasetSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("silhouette dataset needs >= 2 classes");
  if (per_class < 1) throw std::invalid_argument("silhouette dataset needs >= 1 sample per class");
  if (side < 8) throw std::invalid_argument("silhouette side must be >= 8");
}

void ErrorMix::validate() const {
  const double ps[] = {p_substitution, p_missing, p_extra, p_word_order};
  double sum = 0.0;
  for (double p : ps) {
    if (!(p >= 0.0)) throw std::invalid_argument("error mix probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("error mix probabilities must sum to 1");
}

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::substitution: return "substitution";
    case ErrorKind::missing: return "missing";
    case ErrorKind::extra: return "extra";
    case ErrorKind::word_order: return "word_order";
  }
  return "unknown";
}

LandmarkFrame synth_landmark_sample(int class_index, double spread, std::uint64_t seed,
                                    std::uint64_t index) {
  Rng rng = make_rng(seed, "landmark-sample",
                     (static_cast<std::uint64_t>(class_index) << 32) | (index & 0xFFFFFFFFULL));
  return sample_around("landmark-centroid", static_cast<std::uint64_t>(class_index), spread, rng);
}

LandmarkFrame synth_rest_landmarks(double spread, std::uint64_t seed, std::uint64_t index) {
  // Hands lowered out of signing position: the tracker still reports 42
  // points, but they follow no class geometry and change from frame to frame.
  Rng rng = make_rng(seed, "landmark-rest-sample", index);
  std::normal_distribution<double> noise(0.0, 1.0);
  LandmarkFrame f;
  f.points.resize(kLandmarkCount);
  for (auto& p : f.points) {
    const auto c = landmark_centroid_point(rng);
    p.x = c[0] + spread * noise(rng);
    p.y = c[1] + spread * noise(rng);
    p.z = c[2] + spread * noise(rng);
  }
  f.label = std::string(labels::kBlank);
  return f;
}

std::vector<LandmarkFrame> synth_landmarks(const LandmarkDatasetSpec& spec) {
  spec.validate();
  const auto names = labels::landmark_classes(static_cast<std::size_t>(spec.num_classes));
  std::vector<LandmarkFrame> out;
  out.reserve(static_cast<std::size_t>(spec.num_classes) * spec.per_class);
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int i = 0; i < spec.per_class; ++i) {
      LandmarkFrame f = synth_landmark_sample(c, spec.spread, spec.seed, static_cast<std::uint64_t>(i));
      f.label = names[static_cast<std::size_t>(c)];
      out.push_back(std::move(f));
    }
  }
  return out;
}

GrayImage synth_silhouette_sample(int class_index, int num_classes, int side,
                                  std::uint64_t seed, std::uint64_t index) {
  if (class_index == num_classes - 1) return GrayImage(side, side, 0);
  const ShapeParams shape = class_shape("silhouette-class", class_index);
  Rng rng = make_rng(seed, "silhouette-sample",
                     (static_cast<std::uint64_t>(class_index) << 32) | (index & 0xFFFFFFFFULL));
  std::uniform_real_distribution<double> shift(-1.5, 1.5);
  std::uniform_real_distribution<double> scale(0.9, 1.1);
  std::uniform_real_distribution<double> rot(-0.15, 0.15);
  std::uniform_real_distribution<double> rj(0.95, 1.05);
  Placement at{};
  at.cx = side / 2.0 + shift(rng);
  at.cy = side / 2.0 + shift(rng);
  at.radius = 0.28 * side * scale(rng);
  at.rotation = rot(rng);
  for (double& j : at.radius_jitter) j = rj(rng);
  const auto mask = rasterize(shape, at, side);

  // Simulated capture: lit hand over a darker, shaded background; the
  // silhouette is recovered by Otsu thresholding.
  std::uniform_real_distribution<double> bg_level(30.0, 70.0);
  std::uniform_real_distribution<double> fg_level(160.0, 210.0);
  std::normal_distribution<double> noise(0.0, 8.0);
  const double bg = bg_level(rng), fg = fg_level(rng);
  GrayImage capture(side, side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double base = mask[static_cast<std::size_t>(y) * side + x] ? fg : bg + 10.0 * x / side;
      const double v = std::floor(base + noise(rng) + 0.5);
      capture.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return binarize(capture, otsu_threshold(capture));
}

std::vector<LabeledImage> synth_silhouettes(const SilhouetteDatasetSpec& spec) {
  spec.validate();
  const auto names = labels::silhouette_classes(static_cast<std::size_t>(spec.num_classes));
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(spec.num_classes) * spec.per_class);
  for (int c = 0; c < spec.num_classes; ++c) {
    for (int i = 0; i < spec.per_class; ++i) {
      out.push_back({synth_silhouette_sample(c, spec.num_classes, spec.side, spec.seed,
                                             static_cast<std::uint64_t>(i)),
                     names[static_cast<std::size_t>(c)]});
    }
  }
  return out;
}

std::vector<GrayImage> synth_atlas(int side) {
  std::vector<GrayImage> frames;
  for (int c = 0; c < 26; ++c) {
    const ShapeParams shape = class_shape("atlas-class", c);
    Placement at{};
    at.cx = side / 2.0;
    at.cy = side / 2.0;
    at.radius = 0.3 * side;
    at.rotation = 0.0;
    for (double& j : at.radius_jitter) j = 1.0;
    const auto mask = rasterize(shape, at, side);
    GrayImage img(side, side);
    for (std::size_t i = 0; i < mask.size(); ++i) img.pixels()[i] = mask[i] ? 255 : 0;
    frames.push_back(std::move(img));
  }
  return frames;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace

Corruption corrupt_text(const std::string& clean, const ErrorMix& mix, std::uint64_t seed) {
  mix.validate();
  bool has_letter = false;
  for (char ch : clean) {
    if (ch >= 'A' && ch <= 'Z') has_letter = true;
    else if (ch != ' ') throw std::invalid_argument("corrupt_text: input must be uppercase A-Z and spaces");
  }
  if (!has_letter) throw std::invalid_argument("corrupt_text: input has no letters");

  std::vector<std::string> words = split_words(clean);
  std::vector<std::pair<std::size_t, std::size_t>> deletable;  // (word, char)
  std::size_t letter_count = 0;
  for (std::size_t w = 0; w < words.size(); ++w) {
    letter_count += words[w].size();
    if (words[w].size() >= 2) {
      for (std::size_t c = 0; c < words[w].size(); ++c) deletable.emplace_back(w, c);
    }
  }

  double weights[4] = {mix.p_substitution, mix.p_missing, mix.p_extra, mix.p_word_order};
  if (deletable.empty()) weights[1] = 0.0;
  if (words.size() < 2) weights[3] = 0.0;
  if (weights[0] + weights[1] + weights[2] + weights[3] <= 0.0) {
    throw std::invalid_argument("corrupt_text: no error category in the mix applies to this input");
  }

  Rng rng = make_rng(seed, "corruption");
  // Rejection sampling over the full mix keeps the nominal frequencies on
  // inputs where every category applies.
  ErrorKind kind;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (;;) {
    const double u = u01(rng);
    const double cum[4] = {mix.p_substitution, mix.p_substitution + mix.p_missing,
                           mix.p_substitution + mix.p_missing + mix.p_extra, 1.0};
    int k = 3;
    for (int i = 0; i < 3; ++i) {
      if (u < cum[i]) {
        k = i;
        break;
      }
    }
    // Redraw when the draw lands on a category that cannot apply here.
    if (weights[k] > 0.0) {
      kind = static_cast<ErrorKind>(k);
      break;
    }
  }

  std::uniform_int_distribution<int> letter_dist(0, 25);
  switch (kind) {
    case ErrorKind::substitution: {
      std::uniform_int_distribution<std::size_t> pick(0, letter_count - 1);
      std::size_t target = pick(rng);
      for (auto& w : words) {
        if (target < w.size()) {
          char replacement;
          do {
            replacement = static_cast<char>('A' + letter_dist(rng));
          } while (replacement == w[target]);
          w[target] = replacement;
          break;
        }
        target -= w.size();
      }
      break;
    }
    case ErrorKind::missing: {
      std::uniform_int_distribution<std::size_t> pick(0, deletable.size() - 1);
      const auto [w, c] = deletable[pick(rng)];
      words[w].erase(c, 1);
      break;
    }
    case ErrorKind::extra: {
      // insertion slots: word w, position 0..len
      std::size_t slots = 0;
      for (const auto& w : words) slots += w.size() + 1;
      std::uniform_int_distribution<std::size_t> pick(0, slots - 1);
      std::size_t target = pick(rng);
      const char inserted = static_cast<char>('A' + letter_dist(rng));
      for (auto& w : words) {
        if (target <= w.size()) {
          w.insert(w.begin() + static_cast<std::ptrdiff_t>(target), inserted);
          break;
        }
        target -= w.size() + 1;
      }
      break;
    }
    case ErrorKind::word_order: {
      std::uniform_int_distribution<std::size_t> pick(0, words.size() - 2);
      const std::size_t i = pick(rng);
      std::swap(words[i], words[i + 1]);
      break;
    }
  }
  return {join_words(words), kind};
}

std::vector<CorpusEntry> make_correction_corpus(const std::vector<std::string>& phrases,
                                                std::size_t count, const ErrorMix& mix,
                                                std::uint64_t seed) {
  if (phrases.empty()) throw std::invalid_argument("make_correction_corpus: no phrases");
  std::vector<CorpusEntry> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, "corpus-phrase", i);
    std::uniform_int_distribution<std::size_t> pick(0, phrases.size() - 1);
    const std::string& clean = phrases[pick(rng)];
    Corruption c = corrupt_text(clean, mix, derive_seed(seed, "corpus-error", i));
    out.push_back({std::move(c.text), clean, c.kind});
  }
  return out;
}

}  // namespace signbridge
