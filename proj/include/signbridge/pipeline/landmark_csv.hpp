#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signbridge/landmarks.hpp"

namespace signbridge::pipeline {

// "label,x1,y1,z1,...,x42,y42,z42"
std::string landmark_csv_header();

// One labelled frame per row, exactly 127 columns. DataError names the line.
std::vector<LandmarkFrame> parse_landmark_csv_text(std::string_view text, const std::string& origin = "<memory>");
std::vector<LandmarkFrame> parse_landmark_csv(const std::filesystem::path& path);

// Coordinates are printed with 17 significant digits so parsing restores them exactly.
std::string format_landmark_csv(std::span<const LandmarkFrame> frames);
void write_landmark_csv(const std::filesystem::path& path, std::span<const LandmarkFrame> frames);

}  // namespace signbridge::pipeline
