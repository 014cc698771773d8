#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "signbridge/error.hpp"
#include "signbridge/video.hpp"

using namespace signbridge;
namespace fs = std::filesystem;

namespace {

GrayImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = std::uint8_t(u(rng));
  return img;
}

// I1(x, y) = I0(x - sx, y - sy), fresh noise where nothing moves in
GrayImage shifted(const GrayImage& src, int sx, int sy, std::uint64_t seed) {
  GrayImage out = noise_image(src.width(), src.height(), seed);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const int ox = x - sx, oy = y - sy;
      if (ox >= 0 && oy >= 0 && ox < src.width() && oy < src.height()) out.at(x, y) = src.at(ox, oy);
    }
  }
  return out;
}

FrameSequence sequence_of(std::vector<GrayImage> keys) {
  FrameSequence s;
  s.fps = 1;
  s.source_keyframes = keys.size();
  s.frames = std::move(keys);
  return s;
}

ContextFeatures flat_context(int w, int h, double c0, double c1) {
  ContextFeatures c;
  c.width = w;
  c.height = h;
  c.c0.assign(std::size_t(w) * h, c0);
  c.c1.assign(std::size_t(w) * h, c1);
  return c;
}

FlowMap constant_flow(int w, int h, double dx, double dy) {
  FlowMap f(w, h);
  std::fill(f.dx.begin(), f.dx.end(), dx);
  std::fill(f.dy.begin(), f.dy.end(), dy);
  return f;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("sb_video_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("video: atlas") {
  const GestureAtlas atlas = GestureAtlas::synthetic();
  for (int i = 0; i < 26; ++i) {
    CHECK(atlas.letter(i).width() == kAtlasSide);
    CHECK(atlas.letter(i).height() == kAtlasSide);
  }
  CHECK(atlas.letter(0) != atlas.letter(1));
  for (auto p : atlas.blank().pixels()) REQUIRE(p == 0);
  CHECK_THROWS_AS(atlas.letter(26), std::out_of_range);

  std::array<GrayImage, 26> wrong;
  wrong.fill(GrayImage(64, 64));
  CHECK_THROWS_AS(GestureAtlas{wrong}, std::invalid_argument);

  TempDir dir;
  atlas.save(dir.path);
  const GestureAtlas back = GestureAtlas::load(dir.path);
  for (int i = 0; i < 26; ++i) CHECK(back.letter(i) == atlas.letter(i));

  // smaller images are resized
  write_pgm(GrayImage(32, 32, 200), dir.path / "C" / "0000.pgm");
  const GestureAtlas resized = GestureAtlas::load(dir.path);
  CHECK(resized.letter(2) == GrayImage(128, 128, 200));

  fs::remove_all(dir.path / "Q");
  CHECK_THROWS_AS(GestureAtlas::load(dir.path), DataError);
}

TEST_CASE("video: keyframes") {
  const GestureAtlas atlas = GestureAtlas::synthetic();
  const auto ab = text_to_keyframes("AB", atlas);
  REQUIRE(ab.frames.size() == 2);
  CHECK(ab.fps == 1);
  CHECK(ab.source_keyframes == 2);
  CHECK(ab.frames[0] == atlas.letter(0));
  CHECK(ab.frames[1] == atlas.letter(1));

  const auto spaced = text_to_keyframes("A A", atlas);
  REQUIRE(spaced.frames.size() == 3);
  CHECK(spaced.frames[1] == atlas.blank());
  CHECK(spaced.frames[2] == atlas.letter(0));

  try {
    text_to_keyframes("A1", atlas);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("'1'") != std::string::npos);
  }
  CHECK_THROWS_AS(text_to_keyframes("ab", atlas), std::invalid_argument);
  CHECK_THROWS_AS(text_to_keyframes("", atlas), std::invalid_argument);
}

TEST_CASE("video: duplication") {
  const GestureAtlas atlas = GestureAtlas::synthetic();
  const auto two = duplicate_frames(text_to_keyframes("HI", atlas));
  REQUIRE(two.frames.size() == 48);
  CHECK(two.fps == 24);
  CHECK(two.frames[30] == atlas.letter(8));
  CHECK(two.frames[0] == atlas.letter(7));
  for (std::size_t i = 0; i < 48; ++i) CHECK(two.frames[i] == atlas.letter(i < 24 ? 7 : 8));

  const auto one = duplicate_frames(text_to_keyframes("Z", atlas));
  REQUIRE(one.frames.size() == 24);
  for (const auto& f : one.frames) CHECK(f == atlas.letter(25));

  std::mt19937_64 rng(2);
  for (int n = 1; n <= 7; ++n) {
    std::vector<GrayImage> keys;
    for (int k = 0; k < n; ++k) keys.push_back(noise_image(16, 16, rng()));
    const auto d = duplicate_frames(sequence_of(keys));
    REQUIRE(d.frames.size() == std::size_t(24 * n));
    for (std::size_t i = 0; i < d.frames.size(); ++i) REQUIRE(d.frames[i] == keys[i / 24]);
  }
  auto bad = sequence_of({GrayImage(4, 4)});
  bad.fps = 24;
  CHECK_THROWS_AS(duplicate_frames(bad), std::invalid_argument);
}

TEST_CASE("video: block matching") {
  const GrayImage i0 = noise_image(64, 64, 9);
  SUBCASE("identical frames") {
    const FlowMap f = block_match(i0, i0);
    CHECK(f.is_zero());
    CHECK(estimate_flow(i0, i0, 0.5).to0.is_zero());
  }
  SUBCASE("flat frames") {
    CHECK(block_match(GrayImage(64, 64, 90), GrayImage(64, 64, 90)).is_zero());
    CHECK(block_match(GrayImage(64, 64, 90), GrayImage(64, 64, 10)).is_zero());
  }
  SUBCASE("integer shifts are recovered") {
    for (auto [sx, sy] : {std::pair{2, 0}, std::pair{-3, 1}, std::pair{0, -5}, std::pair{7, 7}}) {
      const GrayImage i1 = shifted(i0, sx, sy, 77);
      const FlowMap f = block_match(i0, i1);
      int interior = 0, hit = 0;
      for (int by = 1; by < 64 / kFlowBlock - 1; ++by) {
        for (int bx = 1; bx < 64 / kFlowBlock - 1; ++bx) {
          const std::size_t idx = std::size_t(by * kFlowBlock + 3) * 64 + std::size_t(bx * kFlowBlock + 3);
          ++interior;
          hit += f.dx[idx] == sx && f.dy[idx] == sy;
        }
      }
      CAPTURE(sx);
      CAPTURE(sy);
      CHECK(double(hit) >= 0.9 * interior);
    }
  }
  SUBCASE("scaling to intermediate time") {
    const FlowMap f = constant_flow(8, 8, 4.0, -2.0);
    const FlowField ff = scale_flow(f, 0.25);
    CHECK(ff.to0.dx[0] == -1.0);
    CHECK(ff.to0.dy[0] == 0.5);
    CHECK(ff.to1.dx[0] == 3.0);
    CHECK(ff.to1.dy[0] == -1.5);
    CHECK_THROWS_AS(scale_flow(f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(scale_flow(f, 1.0), std::invalid_argument);
  }
  CHECK_THROWS_AS(block_match(i0, GrayImage(32, 64)), std::invalid_argument);
}

TEST_CASE("video: context maps") {
  GrayImage img(3, 3, 0);
  img.at(1, 1) = 90;
  const auto c = extract_context(img, GrayImage(3, 3, 7));
  CHECK(c.c0[4] == doctest::Approx(10.0));
  // corner (0,0) window with clamp: (0,0)x4, (1,0)x2, (0,1)x2, (1,1)x1
  CHECK(c.c0[0] == doctest::Approx(10.0));
  for (double v : c.c1) CHECK(v == doctest::Approx(7.0));
}

TEST_CASE("video: frame synthesis") {
  const int w = 16, h = 12;
  const FlowField zero{FlowMap(w, h), FlowMap(w, h)};
  const GrayImage a = noise_image(w, h, 1);

  SUBCASE("fixed point and endpoints") {
    CHECK(synthesize_frame(a, a, zero, extract_context(a, a), 0.37) == a);
    const GrayImage b = noise_image(w, h, 2);
    CHECK(synthesize_frame(a, b, zero, extract_context(a, b), 0.0) == a);
    CHECK(synthesize_frame(a, b, zero, extract_context(a, b), 1.0) == b);
  }
  SUBCASE("half way between black and white") {
    const GrayImage k(w, h, 0), wh(w, h, 255);
    const GrayImage mid = synthesize_frame(k, wh, zero, extract_context(k, wh), 0.5);
    for (auto p : mid.pixels()) REQUIRE(p == 128);
    CHECK(crossfade(k, wh, 0.5) == mid);
  }
  SUBCASE("constant frames are fixed under any flow") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    const GrayImage c(w, h, 77);
    for (int trial = 0; trial < 20; ++trial) {
      FlowField ff{FlowMap(w, h), FlowMap(w, h)};
      for (auto* f : {&ff.to0, &ff.to1}) {
        for (auto& v : f->dx) v = u(rng);
        for (auto& v : f->dy) v = u(rng);
      }
      CHECK(synthesize_frame(c, c, ff, extract_context(c, c), 0.4) == c);
    }
  }
  SUBCASE("a pure shift is reconstructed in the interior") {
    const GrayImage big = noise_image(48, 48, 5);
    const GrayImage moved = shifted(big, 4, 0, 6);
    // half way, true content sits 2 px right of I0
    const FlowField ff = scale_flow(constant_flow(48, 48, 4.0, 0.0), 0.5);
    const auto out = synthesize_frame(big, moved, ff, extract_context(big, moved), 0.5);
    for (int y = 0; y < 48; ++y) {
      for (int x = 6; x < 44; ++x) REQUIRE(out.at(x, y) == big.at(x - 2, y));
    }
  }
  SUBCASE("occlusion halves the longer warp") {
    const GrayImage k(w, h, 0), g(w, h, 200);
    const FlowField ff{constant_flow(w, h, 1.0, 0.0), constant_flow(w, h, 3.0, 0.0)};
    // contexts far apart: weights (0.5, 0.25) renormalized to (2/3, 1/3)
    const auto occluded = synthesize_frame(k, g, ff, flat_context(w, h, 0.0, 200.0), 0.5);
    for (auto p : occluded.pixels()) REQUIRE(p == 67);
    // contexts agree: plain average
    const auto clear = synthesize_frame(k, g, ff, flat_context(w, h, 100.0, 110.0), 0.5);
    for (auto p : clear.pixels()) REQUIRE(p == 100);
    // equal motion: no preference
    const FlowField even{constant_flow(w, h, 2.0, 0.0), constant_flow(w, h, -2.0, 0.0)};
    const auto same = synthesize_frame(k, g, even, flat_context(w, h, 0.0, 200.0), 0.5);
    for (auto p : same.pixels()) REQUIRE(p == 100);
  }
  SUBCASE("size checks") {
    CHECK_THROWS_AS(synthesize_frame(a, GrayImage(w, h + 1), zero, extract_context(a, a), 0.5), std::invalid_argument);
    const FlowField small{FlowMap(2, 2), FlowMap(2, 2)};
    CHECK_THROWS_AS(synthesize_frame(a, a, small, extract_context(a, a), 0.5), std::invalid_argument);
  }
}

TEST_CASE("video: crossfade bounds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const GrayImage a = noise_image(20, 20, rng()), b = noise_image(20, 20, rng());
    const double t = u(rng);
    const GrayImage c = crossfade(a, b, t);
    for (std::size_t i = 0; i < c.pixels().size(); ++i) {
      const auto lo = std::min(a.pixels()[i], b.pixels()[i]), hi = std::max(a.pixels()[i], b.pixels()[i]);
      REQUIRE(c.pixels()[i] >= lo);
      REQUIRE(c.pixels()[i] <= hi);
      REQUIRE(c.pixels()[i] == std::uint8_t(std::floor((1 - t) * a.pixels()[i] + t * b.pixels()[i] + 0.5)));
    }
  }
}

TEST_CASE("video: 60 fps resampling") {
  const GestureAtlas atlas = GestureAtlas::synthetic();
  const auto d24 = duplicate_frames(text_to_keyframes("AB", atlas));

  for (auto method : {InterpolationMethod::crossfade, InterpolationMethod::flow}) {
    CAPTURE(method_name(method));
    const auto d60 = interpolate_sequence(d24, method, 2);
    REQUIRE(d60.frames.size() == 120);
    CHECK(d60.fps == 60);
    CHECK(d60.frames[0] == d24.frames[0]);
    CHECK(d60.frames[5] == d24.frames[2]);
    for (std::size_t j = 0; j < 120; ++j) {
      if ((24 * j) % 60 == 0) REQUIRE(d60.frames[j] == d24.frames[24 * j / 60]);
    }
    // the only distinct pair is source frames 23 and 24 (output 58..61)
    for (std::size_t j = 0; j < 120; ++j) {
      if (j >= 58 && j <= 61) continue;
      REQUIRE(d60.frames[j] == d24.frames[std::min<std::size_t>(2 * j / 5, 47)]);
    }
    CHECK(d60.frames[58] != d24.frames[23]);
    CHECK(d60.frames[58] != d24.frames[24]);
    // threads do not change the result
    CHECK(interpolate_sequence(d24, method, 1).frames == d60.frames);
  }

  // crossfade stays between its brackets
  const auto cf = interpolate_sequence(d24, InterpolationMethod::crossfade, 1);
  for (std::size_t j = 58; j <= 59; ++j) {
    const auto& lo = d24.frames[23];
    const auto& hi = d24.frames[24];
    for (std::size_t p = 0; p < lo.pixels().size(); ++p) {
      REQUIRE(cf.frames[j].pixels()[p] >= std::min(lo.pixels()[p], hi.pixels()[p]));
      REQUIRE(cf.frames[j].pixels()[p] <= std::max(lo.pixels()[p], hi.pixels()[p]));
    }
  }

  const auto flat = duplicate_frames(sequence_of({GrayImage(16, 16, 40), GrayImage(16, 16, 40)}));
  for (auto method : {InterpolationMethod::crossfade, InterpolationMethod::flow}) {
    for (const auto& f : interpolate_sequence(flat, method).frames) REQUIRE(f == GrayImage(16, 16, 40));
  }
  CHECK_THROWS_AS(interpolate_sequence(text_to_keyframes("AB", atlas), InterpolationMethod::flow),
                  std::invalid_argument);
  CHECK(parse_method("flow") == InterpolationMethod::flow);
  CHECK(parse_method("crossfade") == InterpolationMethod::crossfade);
  CHECK_THROWS_AS(parse_method("optical"), std::invalid_argument);
}

TEST_CASE("video: sequence files") {
  TempDir dir;
  std::vector<GrayImage> keys = {noise_image(10, 6, 1), noise_image(10, 6, 2)};
  const auto seq = duplicate_frames(sequence_of(keys));
  const fs::path manifest = write_sequence(seq, dir.path);
  CHECK(manifest == dir.path / "manifest.json");
  CHECK(fs::exists(dir.path / "frame_000000.pgm"));
  CHECK(fs::exists(dir.path / "frame_000047.pgm"));

  std::ifstream in(manifest);
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("frame_count") == 48);
  CHECK(j.at("fps") == 24);
  CHECK(j.at("width") == 10);
  CHECK(j.at("height") == 6);
  CHECK(j.at("frames").size() == 48);
  CHECK(j.at("frames")[0].at("sha256") == sha256_hex(encode_pgm(keys[0])));

  const auto back = read_sequence(dir.path);
  CHECK(back.frames == seq.frames);
  CHECK(back.fps == 24);
  CHECK(back.source_keyframes == 2);

  // flip one pixel
  GrayImage tampered = seq.frames[7];
  tampered.at(0, 0) ^= 1;
  write_pgm(tampered, dir.path / "frame_000007.pgm");
  CHECK_THROWS_AS(read_sequence(dir.path), DataError);
  fs::remove(dir.path / "frame_000007.pgm");
  CHECK_THROWS_AS(read_sequence(dir.path), DataError);
  CHECK_THROWS_AS(read_sequence(dir.path / "nope"), DataError);
}

TEST_CASE("video: sha256 known answers") {
  CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  CHECK(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size())) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
