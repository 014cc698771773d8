#include "signbridge/pipeline/landmark_csv.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "signbridge/binary_io.hpp"
#include "signbridge/error.hpp"

namespace signbridge::pipeline {

namespace {

constexpr std::size_t kColumns = 1 + kFeatureCount;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string landmark_csv_header() {
  std::string h = "label";
  for (std::size_t i = 1; i <= kLandmarkCount; ++i) {
    const auto n = std::to_string(i);
    h += ",x" + n + ",y" + n + ",z" + n;
  }
  return h;
}

std::vector<LandmarkFrame> parse_landmark_csv_text(std::string_view text, const std::string& origin) {
  std::vector<LandmarkFrame> frames;
  std::size_t line_no = 0, pos = 0;
  bool seen_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    if (!seen_header) {
      if (line != landmark_csv_header()) throw DataError(where + "bad header, expected label,x1,y1,z1,...,z42");
      seen_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split_commas(line);
    if (cols.size() != kColumns)
      throw DataError(where + "expected " + std::to_string(kColumns) + " columns, got " + std::to_string(cols.size()));
    if (cols[0].empty()) throw DataError(where + "empty label");
    LandmarkFrame f;
    f.label = std::string(cols[0]);
    f.points.resize(kLandmarkCount);
    for (std::size_t c = 1; c < kColumns; ++c) {
      double v = 0.0;
      const auto s = cols[c];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw DataError(where + "column " + std::to_string(c + 1) + " is not a number: '" + std::string(s) + "'");
      Landmark& p = f.points[(c - 1) / 3];
      ((c - 1) % 3 == 0 ? p.x : (c - 1) % 3 == 1 ? p.y : p.z) = v;
    }
    try {
      f.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError(where + e.what());
    }
    frames.push_back(std::move(f));
  }
  if (!seen_header) throw DataError(origin + ": empty file, missing header");
  return frames;
}

std::vector<LandmarkFrame> parse_landmark_csv(const std::filesystem::path& path) {
  const auto bytes = binio::read_file(path);
  return parse_landmark_csv_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                            path.string());
}

std::string format_landmark_csv(std::span<const LandmarkFrame> frames) {
  std::string out = landmark_csv_header() + "\n";
  char buf[40];
  for (const auto& f : frames) {
    f.validate();
    if (!f.label || f.label->empty() || f.label->find_first_of(",\n\r") != std::string::npos)
      throw std::invalid_argument("landmark CSV rows need a label without commas or newlines");
    out += *f.label;
    for (const auto& p : f.points) {
      for (double v : {p.x, p.y, p.z}) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

void write_landmark_csv(const std::filesystem::path& path, std::span<const LandmarkFrame> frames) {
  const std::string text = format_landmark_csv(frames);
  binio::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace signbridge::pipeline
