#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace signbridge::labels {

inline constexpr std::string_view kSpace = "SPACE";
inline constexpr std::string_view kDelete = "DELETE";
inline constexpr std::string_view kBlank = "BLANK";

// 26 letters A-Z, then SPACE, DELETE, BLANK.
inline constexpr std::size_t kSharedClassCount = 29;
inline constexpr std::size_t kSpaceIndex = 26;
inline constexpr std::size_t kDeleteIndex = 27;
inline constexpr std::size_t kBlankIndex = 28;

inline std::string letter(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

inline const std::vector<std::string>& shared_space() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < 26; ++i) v.push_back(letter(i));
    v.emplace_back(kSpace);
    v.emplace_back(kDelete);
    v.emplace_back(kBlank);
    return v;
  }();
  return names;
}

inline std::optional<std::size_t> shared_index(std::string_view name) {
  const auto& names = shared_space();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

// Landmark classifier labels: letters, then SPACE and DELETE (28 by default).
// Counts beyond 28 get synthetic names.
inline std::vector<std::string> landmark_classes(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < 26) v.push_back(letter(i));
    else if (i == 26) v.emplace_back(kSpace);
    else if (i == 27) v.emplace_back(kDelete);
    else v.push_back("CLASS_" + std::to_string(i));
  }
  return v;
}

// Silhouette classifier labels: the first n - 1 letters, then BLANK (27 by
// default).
inline std::vector<std::string> silhouette_classes(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i + 1 < n; ++i) v.push_back(i < 26 ? letter(i) : "CLASS_" + std::to_string(i));
  v.emplace_back(kBlank);
  return v;
}

}  // namespace signbridge::labels
