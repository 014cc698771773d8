#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace signbridge {

// Uppercase vocabulary with word and ordered word-pair counts.
class Lexicon {
 public:
  Lexicon() = default;

  // Each phrase adds 1 to its words and adjacent pairs; each extra word adds 1.
  static Lexicon from_phrases(std::span<const std::string> phrases, std::span<const std::string> extra_words = {});
  // Built-in phrase bank plus vocabulary.
  static Lexicon builtin();

  // Text format, one entry per line: "W <word> <count>" or "B <word> <word> <count>".
  static Lexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void add_word(const std::string& word, std::uint64_t count = 1);
  void add_bigram(const std::string& a, const std::string& b, std::uint64_t count = 1);

  bool contains(std::string_view word) const;
  std::uint64_t frequency(std::string_view word) const;
  std::uint64_t bigram(std::string_view a, std::string_view b) const;
  const std::map<std::string, std::uint64_t, std::less<>>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

 private:
  std::map<std::string, std::uint64_t, std::less<>> words_;
  std::map<std::pair<std::string, std::string>, std::uint64_t, std::less<>> bigrams_;
};

// Unrestricted Damerau-Levenshtein distance (insert, delete, substitute,
// transpose adjacent).
std::size_t damerau_levenshtein(std::string_view a, std::string_view b);

enum class CorrectionSource { offline, remote };

struct CorrectionResult {
  std::array<std::string, 3> candidates;
  CorrectionSource source = CorrectionSource::offline;

  // Three non-empty uppercase candidates; throws std::invalid_argument otherwise.
  void validate() const;
};

struct WordCandidate {
  std::string word;
  std::size_t distance = 0;
  std::uint64_t frequency = 0;
};

// Lexicon words within distance 2, ranked by (distance, -frequency, alphabetical).
std::vector<WordCandidate> word_candidates(std::string_view word, const Lexicon& lexicon, std::size_t limit = 6);

// Uppercases, trims and collapses runs of spaces.
std::string normalize_text(std::string_view text);

// Per-word lexicon lookup followed by an adjacent-swap reordering pass. Whole
// strings rank by (total edit distance, -bigram score, -frequency score,
// alphabetical); fewer than three distinct strings are padded with the best.
CorrectionResult correct_offline(std::string_view text, const Lexicon& lexicon);

struct CorrectorMetrics {
  double top1_accuracy = 0.0;
  double top3_accuracy = 0.0;
  std::size_t samples = 0;
};

using Corrector = std::function<CorrectionResult(const std::string&)>;

// pairs are (corrupted, clean); a hit is an exact match within the first k candidates.
CorrectorMetrics evaluate_corrector(const Corrector& corrector,
                                    std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace signbridge
