#include "signbridge/correction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <optional>
#include <tuple>

#include "signbridge/datagen.hpp"
#include "signbridge/error.hpp"

namespace signbridge {

Lexicon Lexicon::from_phrases(std::span<const std::string> phrases, std::span<const std::string> extra_words) {
  Lexicon lex;
  for (const auto& phrase : phrases) {
    std::istringstream in(phrase);
    std::string prev, word;
    while (in >> word) {
      lex.add_word(word);
      if (!prev.empty()) lex.add_bigram(prev, word);
      prev = word;
    }
  }
  for (const auto& w : extra_words) lex.add_word(w);
  return lex;
}

Lexicon Lexicon::builtin() { return from_phrases(builtin_phrases(), builtin_words()); }

void Lexicon::add_word(const std::string& word, std::uint64_t count) {
  if (word.empty()) throw std::invalid_argument("lexicon words must be non-empty");
  if (count == 0) throw std::invalid_argument("lexicon counts must be >= 1");
  words_[word] += count;
}

void Lexicon::add_bigram(const std::string& a, const std::string& b, std::uint64_t count) {
  if (count == 0) throw std::invalid_argument("lexicon counts must be >= 1");
  bigrams_[{a, b}] += count;
}

bool Lexicon::contains(std::string_view word) const { return words_.find(word) != words_.end(); }

std::uint64_t Lexicon::frequency(std::string_view word) const {
  const auto it = words_.find(word);
  return it == words_.end() ? 0 : it->second;
}

std::uint64_t Lexicon::bigram(std::string_view a, std::string_view b) const {
  const auto it = bigrams_.find(std::pair<std::string, std::string>(a, b));
  return it == bigrams_.end() ? 0 : it->second;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open lexicon");
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag, a, b;
    std::uint64_t count = 0;
    ls >> tag;
    bool ok = false;
    if (tag == "W") {
      ok = static_cast<bool>(ls >> a >> count) && count > 0;
      if (ok) lex.add_word(a, count);
    } else if (tag == "B") {
      ok = static_cast<bool>(ls >> a >> b >> count) && count > 0;
      if (ok) lex.add_bigram(a, b, count);
    }
    if (!ok) throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed lexicon entry");
  }
  if (lex.words_.empty()) throw DataError(path.string() + ": lexicon has no words");
  return lex;
}

void Lexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  for (const auto& [w, c] : words_) out << "W " << w << ' ' << c << '\n';
  for (const auto& [ab, c] : bigrams_) out << "B " << ab.first << ' ' << ab.second << ' ' << c << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

std::size_t damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  const std::size_t inf = n + m;
  // (n + 2) x (m + 2) table; row/column 0 hold the sentinel.
  std::vector<std::size_t> d((n + 2) * (m + 2));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 2) + j]; };
  at(0, 0) = inf;
  for (std::size_t i = 0; i <= n; ++i) {
    at(i + 1, 0) = inf;
    at(i + 1, 1) = i;
  }
  for (std::size_t j = 0; j <= m; ++j) {
    at(0, j + 1) = inf;
    at(1, j + 1) = j;
  }
  std::array<std::size_t, 256> last_row{};
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_match_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t i1 = last_row[static_cast<unsigned char>(b[j - 1])];
      const std::size_t j1 = last_match_col;
      std::size_t cost = 1;
      if (a[i - 1] == b[j - 1]) {
        cost = 0;
        last_match_col = j;
      }
      at(i + 1, j + 1) = std::min({at(i, j) + cost, at(i + 1, j) + 1, at(i, j + 1) + 1,
                                   at(i1, j1) + (i - i1 - 1) + 1 + (j - j1 - 1)});
    }
    last_row[static_cast<unsigned char>(a[i - 1])] = i;
  }
  return at(n + 1, m + 1);
}

void CorrectionResult::validate() const {
  for (const auto& c : candidates) {
    if (c.empty()) throw std::invalid_argument("correction candidates must be non-empty");
    for (char ch : c) {
      if (std::islower(static_cast<unsigned char>(ch))) throw std::invalid_argument("correction candidates must be uppercase");
    }
  }
}

std::string normalize_text(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  return out;
}

std::vector<WordCandidate> word_candidates(std::string_view word, const Lexicon& lexicon, std::size_t limit) {
  std::vector<WordCandidate> out;
  for (const auto& [w, freq] : lexicon.words()) {
    // length difference bounds the distance from below
    const std::size_t len_gap = w.size() > word.size() ? w.size() - word.size() : word.size() - w.size();
    if (len_gap > 2) continue;
    const std::size_t dist = damerau_levenshtein(word, w);
    if (dist <= 2) out.push_back({w, dist, freq});
  }
  std::sort(out.begin(), out.end(), [](const WordCandidate& a, const WordCandidate& b) {
    return std::tie(a.distance, b.frequency, a.word) < std::tie(b.distance, a.frequency, b.word);
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

namespace {

constexpr std::size_t kUnknownWordDistance = 3;
constexpr std::size_t kBeamWidth = 64;

struct Sentence {
  std::vector<std::string> words;
  std::size_t distance = 0;
  double bigram = 0.0;
  double frequency = 0.0;
  std::string text;

  void finish() {
    text.clear();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text.push_back(' ');
      text += words[i];
    }
  }
};

bool better(const Sentence& a, const Sentence& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.bigram != b.bigram) return a.bigram > b.bigram;
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return a.text < b.text;
}

double pair_score(const Lexicon& lex, const std::string& a, const std::string& b) {
  return std::log1p(static_cast<double>(lex.bigram(a, b)));
}

double bigram_score(const Lexicon& lex, const std::vector<std::string>& words) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) s += pair_score(lex, words[i], words[i + 1]);
  return s;
}

}  // namespace

CorrectionResult correct_offline(std::string_view text, const Lexicon& lexicon) {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw std::invalid_argument("correct_offline: empty text");
  std::vector<std::string> tokens;
  {
    std::istringstream in(norm);
    std::string w;
    while (in >> w) tokens.push_back(w);
  }

  std::vector<Sentence> beam{Sentence{}};
  for (const auto& token : tokens) {
    auto options = word_candidates(token, lexicon);
    if (options.empty()) options.push_back({token, kUnknownWordDistance, 0});
    std::vector<Sentence> next;
    for (const Sentence& s : beam) {
      for (const auto& opt : options) {
        Sentence e = s;
        if (!e.words.empty()) e.bigram += pair_score(lexicon, e.words.back(), opt.word);
        e.words.push_back(opt.word);
        e.distance += opt.distance;
        e.frequency += opt.frequency ? std::log(static_cast<double>(opt.frequency)) : 0.0;
        e.finish();
        next.push_back(std::move(e));
      }
    }
    std::sort(next.begin(), next.end(), better);
    if (next.size() > kBeamWidth) next.resize(kBeamWidth);
    beam = std::move(next);
  }

  // Reorder pass: every adjacent swap that raises the bigram score becomes a
  // candidate, and each string is hill-climbed through its best swaps.
  std::vector<Sentence> pool = beam;
  for (const Sentence& s : beam) {
    Sentence cur = s;
    for (std::size_t guard = 0; guard < cur.words.size() * cur.words.size(); ++guard) {
      std::optional<Sentence> best_swap;
      for (std::size_t i = 0; i + 1 < cur.words.size(); ++i) {
        Sentence sw = cur;
        std::swap(sw.words[i], sw.words[i + 1]);
        sw.bigram = bigram_score(lexicon, sw.words);
        if (sw.bigram <= cur.bigram + 1e-12) continue;
        sw.finish();
        pool.push_back(sw);
        if (!best_swap || sw.bigram > best_swap->bigram) best_swap = std::move(sw);
      }
      if (!best_swap) break;
      cur = std::move(*best_swap);
    }
  }
  std::sort(pool.begin(), pool.end(), better);

  CorrectionResult result;
  result.source = CorrectionSource::offline;
  std::set<std::string> seen;
  std::size_t filled = 0;
  for (const Sentence& s : pool) {
    if (filled == 3) break;
    if (seen.insert(s.text).second) result.candidates[filled++] = s.text;
  }
  for (; filled < 3; ++filled) result.candidates[filled] = result.candidates[0];
  return result;
}

CorrectorMetrics evaluate_corrector(const Corrector& corrector,
                                    std::span<const std::pair<std::string, std::string>> pairs) {
  if (pairs.empty()) throw std::invalid_argument("evaluate_corrector: no samples");
  CorrectorMetrics m;
  std::size_t top1 = 0, top3 = 0;
  for (const auto& [corrupted, clean] : pairs) {
    const CorrectionResult r = corrector(corrupted);
    if (r.candidates[0] == clean) ++top1;
    if (std::find(r.candidates.begin(), r.candidates.end(), clean) != r.candidates.end()) ++top3;
  }
  m.samples = pairs.size();
  m.top1_accuracy = double(top1) / double(pairs.size());
  m.top3_accuracy = double(top3) / double(pairs.size());
  return m;
}

}  // namespace signbridge
