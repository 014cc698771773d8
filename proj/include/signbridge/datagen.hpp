#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "signbridge/image.hpp"
#include "signbridge/landmarks.hpp"

namespace signbridge {

struct LandmarkDatasetSpec {
  int num_classes = 28;
  int per_class = 100;
  double spread = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SilhouetteDatasetSpec {
  int num_classes = 27;  // last class is BLANK
  int per_class = 100;
  int side = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledImage {
  GrayImage image;
  std::string label;
};

enum class ErrorKind { substitution, missing, extra, word_order };

const char* error_kind_name(ErrorKind kind);

// Probabilities of the four corruption categories.
struct ErrorMix {
  double p_substitution = 0.35;
  double p_missing = 0.25;
  double p_extra = 0.20;
  double p_word_order = 0.20;

  void validate() const;
};

struct Corruption {
  std::string text;
  ErrorKind kind;
};

struct CorpusEntry {
  std::string corrupted;
  std::string clean;
  ErrorKind kind;
};

// Class centroids depend only on the class index, so datasets drawn with
// different seeds share one class geometry; the seed drives per-sample noise.
std::vector<LandmarkFrame> synth_landmarks(const LandmarkDatasetSpec& spec);

// A neutral "hands at rest" observation, used for BLANK stretches in
// synthetic gesture streams.
LandmarkFrame synth_rest_landmarks(double spread, std::uint64_t seed, std::uint64_t index);

// One landmark observation of class_index drawn with the same geometry as
// synth_landmarks; `index` selects the sample stream.
LandmarkFrame synth_landmark_sample(int class_index, double spread, std::uint64_t seed,
                                    std::uint64_t index);

std::vector<LabeledImage> synth_silhouettes(const SilhouetteDatasetSpec& spec);

// One silhouette of class_index (num_classes - 1 is BLANK).
GrayImage synth_silhouette_sample(int class_index, int num_classes, int side,
                                  std::uint64_t seed, std::uint64_t index);

// 26 letter frames (A-Z) for the synthetic target-language atlas, side x side,
// white on black.
std::vector<GrayImage> synth_atlas(int side);

// Applies exactly one error drawn from `mix`. Categories that cannot apply to
// `clean` (word order on one word, deleting from one-letter words) are
// resampled from the remaining mass.
Corruption corrupt_text(const std::string& clean, const ErrorMix& mix, std::uint64_t seed);

// Corruptions of phrases drawn uniformly from `phrases`; entry i uses sub-stream i.
std::vector<CorpusEntry> make_correction_corpus(const std::vector<std::string>& phrases,
                                                std::size_t count, const ErrorMix& mix,
                                                std::uint64_t seed);

// Built-in English phrase bank and vocabulary (uppercase).
const std::vector<std::string>& builtin_phrases();
const std::vector<std::string>& builtin_words();

}  // namespace signbridge
