#include "signbridge/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "signbridge/error.hpp"

namespace signbridge {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be >= 1");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be >= 1");
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("pixel buffer size does not match image dimensions");
  }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

namespace {

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int next_int() {
    skip_space_and_comments();
    std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 24)) fail("header value too large");
      ++pos_;
    }
    if (pos_ == start) fail("malformed header");
    return static_cast<int>(value);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(origin_ + ": " + what);
  }

  std::size_t pos_ = 0;
  std::span<const std::uint8_t> bytes_;
  std::string origin_;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& origin) {
  HeaderReader r(bytes, origin);
  if (bytes.size() < 2 || bytes[0] != 'P') r.fail("not a PNM file");
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '5' && kind != '2' && kind != '6') r.fail(std::string("unsupported PNM type P") + kind);
  r.pos_ = 2;
  const int w = r.next_int();
  const int h = r.next_int();
  const int maxval = r.next_int();
  if (w < 1 || h < 1) r.fail("bad dimensions");
  if (maxval < 1 || maxval > 255) r.fail("only 8-bit maxval is supported");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> px(n);
  auto rescale = [maxval](int v) {
    return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  };
  if (kind == '2') {
    for (std::size_t i = 0; i < n; ++i) {
      const int v = r.next_int();
      if (v > maxval) r.fail("sample exceeds maxval");
      px[i] = rescale(v);
    }
    return GrayImage(w, h, std::move(px));
  }
  // exactly one whitespace byte separates the header from raster data
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_])) r.fail("malformed header");
  ++r.pos_;
  const std::size_t channels = kind == '6' ? 3 : 1;
  if (bytes.size() - r.pos_ < n * channels) r.fail("truncated raster data");
  const std::uint8_t* data = bytes.data() + r.pos_;
  for (std::size_t i = 0; i < n; ++i) {
    if (channels == 1) {
      px[i] = rescale(data[i]);
    } else {
      const int rr = data[3 * i], gg = data[3 * i + 1], bb = data[3 * i + 2];
      px[i] = rescale((299 * rr + 587 * gg + 114 * bb + 500) / 1000);
    }
  }
  return GrayImage(w, h, std::move(px));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes, path.string());
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  auto bytes = encode_pgm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace signbridge
