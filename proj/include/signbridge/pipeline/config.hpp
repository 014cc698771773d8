#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "signbridge/cnn.hpp"
#include "signbridge/datagen.hpp"
#include "signbridge/forest.hpp"
#include "signbridge/remote.hpp"
#include "signbridge/video.hpp"

namespace signbridge::pipeline {

// Bad flags, unknown config keys, unparsable values (CLI exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat "key = value" text; '#' starts a comment, blank lines are ignored.
struct KeyValues {
  std::map<std::string, std::string> values;

  static KeyValues parse(std::string_view text, const std::string& origin = "<memory>");
  static KeyValues load(const std::filesystem::path& path);
  // "key=value"
  void assign(std::string_view assignment);
};

enum class CorrectorKind { offline, remote };

struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;

  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "out";
  // Empty paths resolve under data_dir / out_dir (see the accessors below).
  std::filesystem::path landmarks, silhouettes, atlas, corpus, lexicon, stream, stream_frames;
  std::filesystem::path rfc_model, cnn_model, ensemble_file, frames_dir;

  // datagen
  int landmark_classes = 28;
  int landmark_per_class = 100;
  double landmark_spread = 0.1;
  int silhouette_classes = 27;
  int silhouette_per_class = 100;
  std::size_t corpus_size = 500;
  std::string stream_text = "TOY BOK";
  int stream_hold = 6;
  int stream_rest = 4;

  // random forest
  bool rfc_grid = false;
  int rfc_folds = 5;
  ForestHyperparams rfc = table_best_hyperparams();
  double test_fraction = 0.2;

  // cnn
  cnn::TrainConfig cnn{1e-3, 32, 15, 5};

  // ensemble
  bool ensemble_optimize = true;
  double w_rfc = 0.5;
  int debounce = 3;

  // correction
  CorrectorKind corrector = CorrectorKind::offline;
  RemoteCorrectorConfig remote;

  // video
  InterpolationMethod method = InterpolationMethod::flow;
  int fps = 60;

  bool report_timings = false;

  // Every key in `kv` must be known; throws UsageError otherwise.
  static PipelineConfig from(const KeyValues& kv);
  // All keys with their effective values, in the same syntax.
  KeyValues to_values() const;

  std::filesystem::path landmarks_path() const;
  std::filesystem::path silhouettes_path() const;
  std::filesystem::path atlas_path() const;
  std::filesystem::path corpus_path() const;
  std::filesystem::path lexicon_path() const;
  std::filesystem::path stream_path() const;
  std::filesystem::path stream_frames_path() const;
  std::filesystem::path rfc_model_path() const;
  std::filesystem::path scaler_path() const;  // rfc model path + ".scaler"
  std::filesystem::path cnn_model_path() const;
  std::filesystem::path ensemble_path() const;
  std::filesystem::path frames_path() const;
  std::filesystem::path reports_dir() const;
};

}  // namespace signbridge::pipeline
