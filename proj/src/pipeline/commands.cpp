#include "signbridge/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "signbridge/binary_io.hpp"
#include "signbridge/cnn.hpp"
#include "signbridge/correction.hpp"
#include "signbridge/datagen.hpp"
#include "signbridge/ensemble.hpp"
#include "signbridge/error.hpp"
#include "signbridge/forest.hpp"
#include "signbridge/labels.hpp"
#include "signbridge/landmarks.hpp"
#include "signbridge/pipeline/config.hpp"
#include "signbridge/pipeline/landmark_csv.hpp"
#include "signbridge/pipeline/metrics.hpp"
#include "signbridge/remote.hpp"
#include "signbridge/rng.hpp"
#include "signbridge/video.hpp"
#include "signbridge/vision.hpp"

namespace signbridge::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kCnnSide = 32;

struct Context {
  PipelineConfig cfg;
  bool lexicon_explicit = false;
  bool atlas_explicit = false;
  std::ostream& out;
  std::ostream& err;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  binio::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = binio::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

fs::path write_report(const Context& ctx, const std::string& command, json body) {
  body["schema_version"] = kReportSchemaVersion;
  body["command"] = command;
  body["config"] = ctx.cfg.to_values().values;
  const fs::path path = ctx.cfg.reports_dir() / (command + ".json");
  write_text(path, body.dump(2) + "\n");
  return path;
}

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw DataError(p.string() + ": " + what + " not found");
}

json hyperparams_json(const ForestHyperparams& p) {
  return {{"n_estimators", p.n_estimators},
          {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
          {"min_samples_split", p.min_samples_split},
          {"min_samples_leaf", p.min_samples_leaf},
          {"bootstrap", p.bootstrap},
          {"max_features", p.max_features ? json(*p.max_features) : json("sqrt")}};
}

// ---- datasets -------------------------------------------------------------

// Per class, a seeded shuffle sends round(fraction * count) samples (at least
// one when the class has two or more) to the held-out side.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, double fraction, std::uint64_t seed, std::string_view stream) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<std::size_t> train, held;
  for (auto& [cls, idx] : by_class) {
    Rng rng = make_rng(seed, stream, static_cast<std::uint64_t>(cls));
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t n_held = static_cast<std::size_t>(std::llround(fraction * double(idx.size())));
    if (idx.size() >= 2) n_held = std::clamp<std::size_t>(n_held, 1, idx.size() - 1);
    else n_held = 0;
    held.insert(held.end(), idx.begin(), idx.begin() + n_held);
    train.insert(train.end(), idx.begin() + n_held, idx.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(held.begin(), held.end());
  return {train, held};
}

std::vector<std::string> ordered_labels(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!labels::shared_index(n)) throw DataError("label '" + n + "' is not in the label space");
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
  std::sort(out.begin(), out.end(),
            [](const std::string& a, const std::string& b) { return *labels::shared_index(a) < *labels::shared_index(b); });
  return out;
}

struct LandmarkData {
  std::vector<std::string> classes;
  std::vector<FeatureVector> features;
  std::vector<int> y;
  std::vector<std::size_t> train, test;
};

LandmarkData load_landmark_data(const PipelineConfig& cfg) {
  require_exists(cfg.landmarks_path(), "landmark CSV");
  const auto frames = parse_landmark_csv(cfg.landmarks_path());
  if (frames.empty()) throw DataError(cfg.landmarks_path().string() + ": no samples");
  LandmarkData d;
  std::vector<std::string> names;
  for (const auto& f : frames) names.push_back(*f.label);
  d.classes = ordered_labels(names);
  for (const auto& f : frames) {
    d.features.push_back(flatten(f));
    d.y.push_back(int(std::find(d.classes.begin(), d.classes.end(), *f.label) - d.classes.begin()));
  }
  std::tie(d.train, d.test) = stratified_split(d.y, cfg.test_fraction, cfg.seed, "rfc-split");
  return d;
}

TrainingSet make_training_set(const LandmarkData& d, std::span<const std::size_t> rows, const ScalerParams& scaler) {
  TrainingSet t;
  t.n_features = kFeatureCount;
  t.classes = d.classes;
  for (std::size_t i : rows) t.add(apply_scaler(scaler, d.features[i]).values(), d.y[i]);
  return t;
}

ScalerParams fit_on(const LandmarkData& d, std::span<const std::size_t> rows) {
  std::vector<FeatureVector> sel;
  for (std::size_t i : rows) sel.push_back(d.features[i]);
  return fit_scaler(sel);
}

struct SilhouetteData {
  std::vector<std::string> classes;
  std::vector<cnn::Sample> samples;
  std::vector<int> y;
  std::vector<std::size_t> train, val;
};

GrayImage to_cnn_input(GrayImage img) {
  if (img.width() != kCnnSide || img.height() != kCnnSide) img = resize(img, kCnnSide, kCnnSide);
  return img;
}

SilhouetteData load_silhouette_data(const PipelineConfig& cfg) {
  const fs::path root = cfg.silhouettes_path();
  if (!fs::is_directory(root)) throw DataError(root.string() + ": silhouette directory not found");
  std::vector<std::string> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path().filename().string());
  if (dirs.size() < 2) throw DataError(root.string() + ": need at least two class directories");
  SilhouetteData d;
  d.classes = ordered_labels(dirs);
  const auto expected = labels::silhouette_classes(d.classes.size());
  if (d.classes != expected)
    throw DataError(root.string() + ": class directories must be the first " + std::to_string(d.classes.size() - 1) +
                    " letters plus BLANK");
  for (std::size_t c = 0; c < d.classes.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / d.classes[c]))
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError((root / d.classes[c]).string() + ": no images");
    for (const auto& f : files) {
      d.samples.push_back({cnn::to_tensor(to_cnn_input(read_pgm(f))), int(c)});
      d.y.push_back(int(c));
    }
  }
  std::tie(d.train, d.val) = stratified_split(d.y, cfg.test_fraction, cfg.seed, "cnn-split");
  return d;
}

std::vector<cnn::Sample> pick(const std::vector<cnn::Sample>& all, std::span<const std::size_t> idx) {
  std::vector<cnn::Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

// ---- stages ---------------------------------------------------------------

json stage_datagen(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  fs::create_directories(cfg.data_dir);

  LandmarkDatasetSpec lspec{cfg.landmark_classes, cfg.landmark_per_class, cfg.landmark_spread,
                            derive_seed(cfg.seed, "dataset-landmarks")};
  const auto landmarks = synth_landmarks(lspec);
  write_landmark_csv(cfg.landmarks_path(), landmarks);

  SilhouetteDatasetSpec sspec{cfg.silhouette_classes, cfg.silhouette_per_class, kCnnSide,
                              derive_seed(cfg.seed, "dataset-silhouettes")};
  const auto silhouettes = synth_silhouettes(sspec);
  std::map<std::string, int> counters;
  fs::remove_all(cfg.silhouettes_path());
  for (const auto& s : silhouettes) {
    const fs::path dir = cfg.silhouettes_path() / s.label;
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof name, "%04d.pgm", counters[s.label]++);
    write_pgm(s.image, dir / name);
  }

  GestureAtlas::synthetic().save(cfg.atlas_path());

  const auto corpus = make_correction_corpus(builtin_phrases(), cfg.corpus_size, ErrorMix{},
                                             derive_seed(cfg.seed, "corruption"));
  std::string tsv = "corrupted\tclean\tkind\n";
  for (const auto& e : corpus) tsv += e.corrupted + "\t" + e.clean + "\t" + error_kind_name(e.kind) + "\n";
  write_text(cfg.corpus_path(), tsv);
  Lexicon::builtin().save(cfg.lexicon_path());

  // Gesture stream for translate: each character held for stream_hold frames,
  // separated by stream_rest frames of hands at rest.
  const auto lnames = labels::landmark_classes(std::size_t(cfg.landmark_classes));
  const int blank_silhouette = cfg.silhouette_classes - 1;
  const std::uint64_t stream_seed = derive_seed(cfg.seed, "stream");
  std::vector<LandmarkFrame> stream;
  std::vector<GrayImage> stream_images;
  std::uint64_t frame = 0;
  auto push_rest = [&] {
    for (int r = 0; r < cfg.stream_rest; ++r, ++frame) {
      stream.push_back(synth_rest_landmarks(cfg.landmark_spread, stream_seed, frame));
      stream_images.push_back(synth_silhouette_sample(blank_silhouette, cfg.silhouette_classes, kCnnSide, stream_seed, frame));
    }
  };
  const std::string text = normalize_text(cfg.stream_text);
  for (char ch : text) {
    int lclass = 0, sclass = blank_silhouette;
    if (ch == ' ') {
      lclass = int(labels::kSpaceIndex);
    } else if (ch >= 'A' && ch <= 'Z') {
      lclass = ch - 'A';
      sclass = ch - 'A';
    } else {
      throw DataError("datagen.stream_text: cannot sign character '" + std::string(1, ch) + "'");
    }
    if (lclass >= cfg.landmark_classes || sclass > blank_silhouette)
      throw DataError("datagen.stream_text: '" + std::string(1, ch) + "' is outside the generated class set");
    push_rest();
    for (int h = 0; h < cfg.stream_hold; ++h, ++frame) {
      LandmarkFrame f = synth_landmark_sample(lclass, cfg.landmark_spread, stream_seed, frame);
      f.label = lnames[std::size_t(lclass)];
      stream.push_back(std::move(f));
      stream_images.push_back(synth_silhouette_sample(sclass, cfg.silhouette_classes, kCnnSide, stream_seed, frame));
    }
  }
  push_rest();
  write_landmark_csv(cfg.stream_path(), stream);
  fs::remove_all(cfg.stream_frames_path());
  fs::create_directories(cfg.stream_frames_path());
  for (std::size_t i = 0; i < stream_images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    write_pgm(stream_images[i], cfg.stream_frames_path() / name);
  }

  return {{"landmark_samples", landmarks.size()},
          {"landmark_classes", cfg.landmark_classes},
          {"silhouette_samples", silhouettes.size()},
          {"silhouette_classes", cfg.silhouette_classes},
          {"corpus_entries", corpus.size()},
          {"stream_text", text},
          {"stream_frames", stream.size()},
          {"data_dir", cfg.data_dir.string()}};
}

EvalReport rfc_report(const ForestModel& model, const TrainingSet& test) {
  std::vector<int> preds;
  for (std::size_t i = 0; i < test.size(); ++i) preds.push_back(model.predict_class(test.row(i)));
  return confusion_and_metrics(preds, test.y, test.classes);
}

json stage_train_rfc(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto start = Clock::now();
  const LandmarkData d = load_landmark_data(cfg);
  const ScalerParams scaler = fit_on(d, d.train);
  const TrainingSet train = make_training_set(d, d.train, scaler);
  const TrainingSet test = make_training_set(d, d.test, scaler);

  ForestHyperparams params = cfg.rfc;
  json grid = nullptr;
  if (cfg.rfc_grid) {
    const auto gs = grid_search(train, SearchSpace{}, cfg.rfc_folds, derive_seed(cfg.seed, "rfc-grid"), cfg.threads);
    params = gs.best;
    grid = {{"configurations", gs.table.size()}, {"best_cv_accuracy", gs.best_accuracy}};
  }
  const ForestModel model = train_forest(train, params, derive_seed(cfg.seed, "forest"), cfg.threads);
  fs::create_directories(cfg.rfc_model_path().parent_path());
  model.save(cfg.rfc_model_path());
  save_scaler(scaler, cfg.scaler_path());

  EvalReport report = rfc_report(model, test);
  if (cfg.report_timings) report.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  ctx.out << "train-rfc: test accuracy " << report.accuracy << " on " << test.size() << " samples\n";
  return {{"hyperparameters", hyperparams_json(params)},
          {"grid_search", grid},
          {"train_samples", train.size()},
          {"test_samples", test.size()},
          {"model", cfg.rfc_model_path().string()},
          {"test", report.to_json()}};
}

EvalReport cnn_report(const cnn::Network& model, std::span<const cnn::Sample> data, std::vector<std::string> classes) {
  std::vector<int> preds, truth;
  for (const auto& s : data) {
    preds.push_back(cnn::argmax(model.forward(s.input)));
    truth.push_back(s.label);
  }
  return confusion_and_metrics(preds, truth, std::move(classes));
}

json stage_train_cnn(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto start = Clock::now();
  const SilhouetteData d = load_silhouette_data(cfg);
  const auto train_set = pick(d.samples, d.train);
  const auto val_set = pick(d.samples, d.val);
  cnn::TrainConfig tc = cfg.cnn;
  tc.seed = derive_seed(cfg.seed, "cnn");
  const auto initial = cnn::build_model(int(d.classes.size()), derive_seed(cfg.seed, "cnn-init"));
  const auto result = cnn::train(initial, train_set, val_set, tc);
  fs::create_directories(cfg.cnn_model_path().parent_path());
  result.model.save(cfg.cnn_model_path());

  EvalReport report = cnn_report(result.model, val_set, d.classes);
  if (cfg.report_timings) report.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  json history = json::array();
  for (const auto& e : result.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"train_accuracy", e.train_accuracy},
                       {"val_loss", e.val_loss},
                       {"val_accuracy", e.val_accuracy}});
  }
  ctx.out << "train-cnn: validation accuracy " << report.accuracy << " (best epoch " << result.best_epoch << ")\n";
  return {{"train_samples", train_set.size()},
          {"validation_samples", val_set.size()},
          {"best_epoch", result.best_epoch},
          {"history", history},
          {"model", cfg.cnn_model_path().string()},
          {"validation", report.to_json()}};
}

json stage_tune(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const LandmarkData d = load_landmark_data(cfg);
  const ScalerParams scaler = fit_on(d, d.train);
  const TrainingSet train = make_training_set(d, d.train, scaler);
  const auto gs = grid_search(train, SearchSpace{}, cfg.rfc_folds, derive_seed(cfg.seed, "rfc-grid"), cfg.threads);
  ctx.out << "n_estimators\tmax_depth\tmin_samples_split\tmin_samples_leaf\tbootstrap\tcv_accuracy\n";
  json rows = json::array();
  char acc[32];
  for (const auto& row : gs.table) {
    const auto& p = row.params;
    std::snprintf(acc, sizeof acc, "%.6f", row.accuracy);
    ctx.out << p.n_estimators << '\t' << (p.max_depth ? std::to_string(*p.max_depth) : "None") << '\t'
            << p.min_samples_split << '\t' << p.min_samples_leaf << '\t' << (p.bootstrap ? "True" : "False") << '\t'
            << acc << '\n';
    json r = hyperparams_json(p);
    r["cv_accuracy"] = row.accuracy;
    rows.push_back(r);
  }
  ctx.err << "tune: best " << gs.best.describe() << " cv accuracy " << gs.best_accuracy << "\n";
  return {{"folds", cfg.rfc_folds}, {"rows", rows}, {"best", hyperparams_json(gs.best)}, {"best_cv_accuracy", gs.best_accuracy}};
}

struct Models {
  ForestModel rfc;
  ScalerParams scaler;
  cnn::Network cnn;
  std::vector<std::string> cnn_classes;
};

Models load_models(const PipelineConfig& cfg) {
  require_exists(cfg.rfc_model_path(), "forest model");
  require_exists(cfg.scaler_path(), "feature scaler");
  require_exists(cfg.cnn_model_path(), "CNN model");
  Models m{ForestModel::load(cfg.rfc_model_path()), load_scaler(cfg.scaler_path()),
           cnn::Network::load(cfg.cnn_model_path()), {}};
  if (m.rfc.n_features() != kFeatureCount)
    throw DataError(cfg.rfc_model_path().string() + ": forest expects " + std::to_string(m.rfc.n_features()) +
                    " features, landmarks give " + std::to_string(kFeatureCount));
  for (const auto& c : m.rfc.classes())
    if (!labels::shared_index(c)) throw DataError(cfg.rfc_model_path().string() + ": unknown class '" + c + "'");
  if (m.cnn.input_shape() != cnn::Shape3{kCnnSide, kCnnSide, 1})
    throw DataError(cfg.cnn_model_path().string() + ": CNN input is not 32x32x1");
  m.cnn_classes = labels::silhouette_classes(m.cnn.num_classes());
  return m;
}

ClassProbabilities rfc_probs(const Models& m, const FeatureVector& raw) {
  const auto x = apply_scaler(m.scaler, raw);
  const auto p = m.rfc.predict_proba(x.values());
  return ClassProbabilities::from_model(m.rfc.classes(), p);
}

ClassProbabilities cnn_probs(const Models& m, const cnn::Tensor3& input) {
  return ClassProbabilities::from_model(m.cnn_classes, m.cnn.forward(input));
}

json weights_json(const EnsembleWeights& w) { return {{"w_rfc", w.w_rfc}, {"w_cnn", w.w_cnn}}; }

json stage_eval(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto start = Clock::now();
  const Models m = load_models(cfg);
  const LandmarkData ld = load_landmark_data(cfg);
  const SilhouetteData sd = load_silhouette_data(cfg);

  if (m.rfc.classes() != ld.classes)
    throw DataError("forest model label space (" + std::to_string(m.rfc.classes().size()) +
                    " classes) does not match the landmark dataset (" + std::to_string(ld.classes.size()) + " classes)");
  if (m.cnn_classes != sd.classes)
    throw DataError("CNN label space (" + std::to_string(m.cnn_classes.size()) +
                    " classes) does not match the silhouette dataset (" + std::to_string(sd.classes.size()) + " classes)");

  // Held-out predictions per model.
  std::vector<int> rfc_pred, rfc_true;
  std::vector<ClassProbabilities> rfc_p;
  for (std::size_t i : ld.test) {
    rfc_p.push_back(rfc_probs(m, ld.features[i]));
    rfc_pred.push_back(m.rfc.predict_class(apply_scaler(m.scaler, ld.features[i]).values()));
    rfc_true.push_back(ld.y[i]);
  }
  std::map<std::size_t, std::vector<ClassProbabilities>> cnn_by_class;  // shared index -> probabilities
  std::vector<int> cnn_pred, cnn_true;
  for (std::size_t i : sd.val) {
    const auto p = m.cnn.forward(sd.samples[i].input);
    cnn_pred.push_back(cnn::argmax(p));
    cnn_true.push_back(sd.y[i]);
    cnn_by_class[*labels::shared_index(sd.classes[std::size_t(sd.y[i])])].push_back(
        ClassProbabilities::from_model(m.cnn_classes, p));
  }
  EvalReport rfc_eval = confusion_and_metrics(rfc_pred, rfc_true, ld.classes);
  EvalReport cnn_eval = confusion_and_metrics(cnn_pred, cnn_true, sd.classes);

  // Joint validation set. Letters pair a landmark sample with a silhouette of
  // the same letter; SPACE and DELETE pair with a blank silhouette; hands at
  // rest pair with a blank silhouette and are labelled BLANK.
  std::vector<ValidationPair> pairs;
  std::map<std::size_t, std::size_t> used;
  const auto& blanks = cnn_by_class[labels::kBlankIndex];
  for (std::size_t k = 0; k < ld.test.size(); ++k) {
    const std::size_t truth = *labels::shared_index(ld.classes[std::size_t(ld.y[ld.test[k]])]);
    const bool control = truth == labels::kSpaceIndex || truth == labels::kDeleteIndex;
    const auto it = cnn_by_class.find(control ? labels::kBlankIndex : truth);
    if (it == cnn_by_class.end() || it->second.empty()) continue;
    const std::size_t key = control ? labels::kBlankIndex : truth;
    const auto& pool = it->second;
    pairs.push_back({rfc_p[k], pool[used[key]++ % pool.size()], truth});
  }
  const std::uint64_t rest_seed = derive_seed(cfg.seed, "eval-rest");
  for (std::size_t k = 0; k < blanks.size(); ++k) {
    const auto rest = flatten(synth_rest_landmarks(cfg.landmark_spread, rest_seed, k));
    pairs.push_back({rfc_probs(m, rest), blanks[k], labels::kBlankIndex});
  }
  if (pairs.empty()) throw DataError("no joint validation pairs: the two label spaces do not overlap");

  EnsembleWeights weights = EnsembleWeights::from_rfc(cfg.w_rfc);
  json table = json::array();
  double ensemble_acc = ensemble_accuracy(pairs, weights);
  if (cfg.ensemble_optimize) {
    const auto search = optimize_weights(pairs);
    weights = search.weights;
    ensemble_acc = search.accuracy;
    for (const auto& row : search.table) table.push_back({{"w_rfc", row.w_rfc}, {"accuracy", row.accuracy}});
  }
  const double rfc_only = ensemble_accuracy(pairs, EnsembleWeights::from_rfc(1.0));
  const double cnn_only = ensemble_accuracy(pairs, EnsembleWeights::from_rfc(0.0));

  json weights_doc = weights_json(weights);
  weights_doc["schema_version"] = kReportSchemaVersion;
  write_text(cfg.ensemble_path(), weights_doc.dump(2) + "\n");

  if (cfg.report_timings) rfc_eval.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  ctx.out << "eval: rfc " << rfc_eval.accuracy << ", cnn " << cnn_eval.accuracy << ", ensemble " << ensemble_acc
          << " at w_rfc=" << weights.w_rfc << "\n";
  return {{"rfc", rfc_eval.to_json()},
          {"cnn", cnn_eval.to_json()},
          {"ensemble",
           {{"weights", weights_json(weights)},
            {"optimized", cfg.ensemble_optimize},
            {"joint_samples", pairs.size()},
            {"accuracy", ensemble_acc},
            {"rfc_only_accuracy", rfc_only},
            {"cnn_only_accuracy", cnn_only},
            {"weight_table", table}}}};
}

Lexicon load_lexicon(const Context& ctx) {
  const fs::path p = ctx.cfg.lexicon_path();
  if (fs::exists(p)) return Lexicon::load(p);
  if (ctx.lexicon_explicit) throw DataError(p.string() + ": lexicon not found");
  return Lexicon::builtin();
}

json result_json(const CorrectionResult& r) {
  return {{"candidates", r.candidates}, {"source", r.source == CorrectionSource::remote ? "remote" : "offline"}};
}

CorrectionResult run_correction(const Context& ctx, const std::string& text, bool fallback, const Lexicon& lex) {
  if (ctx.cfg.corrector == CorrectorKind::offline) return correct_offline(text, lex);
  try {
    return correct_remote(text, ctx.cfg.remote);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("remote corrector config: ") + e.what());
  } catch (const std::exception& e) {
    if (!fallback) throw;
    ctx.err << "warning: remote corrector failed (" << e.what() << "); using offline correction\n";
    return correct_offline(text, lex);
  }
}

json stage_correct(const Context& ctx, const std::string& text, bool fallback, bool evaluate) {
  const Lexicon lex = load_lexicon(ctx);
  json body;
  if (!text.empty()) {
    const auto r = run_correction(ctx, text, fallback, lex);
    for (std::size_t i = 0; i < 3; ++i) ctx.out << (i + 1) << ". " << r.candidates[i] << "\n";
    body["input"] = normalize_text(text);
    body["result"] = result_json(r);
  }
  if (evaluate) {
    require_exists(ctx.cfg.corpus_path(), "correction corpus");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream in(read_text(ctx.cfg.corpus_path()));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      if (++line_no == 1 || line.empty()) continue;
      const auto a = line.find('\t');
      const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
      if (b == std::string::npos)
        throw DataError(ctx.cfg.corpus_path().string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated columns");
      pairs.emplace_back(line.substr(0, a), line.substr(a + 1, b - a - 1));
    }
    if (pairs.empty()) throw DataError(ctx.cfg.corpus_path().string() + ": no samples");
    const Corrector corrector = [&](const std::string& s) { return run_correction(ctx, s, fallback, lex); };
    const auto m = evaluate_corrector(corrector, pairs);
    ctx.out << "correct: top-1 " << m.top1_accuracy << ", top-3 " << m.top3_accuracy << " on " << m.samples
            << " samples\n";
    body["evaluation"] = {{"samples", m.samples}, {"top1_accuracy", m.top1_accuracy}, {"top3_accuracy", m.top3_accuracy}};
  }
  return body;
}

GestureAtlas load_atlas(const Context& ctx) {
  const fs::path p = ctx.cfg.atlas_path();
  if (fs::exists(p)) return GestureAtlas::load(p);
  if (ctx.atlas_explicit) throw DataError(p.string() + ": atlas directory not found");
  return GestureAtlas::synthetic();
}

json stage_synthesize(const Context& ctx, const std::string& raw_text) {
  const auto& cfg = ctx.cfg;
  const std::string text = normalize_text(raw_text);
  if (text.empty()) throw DataError("nothing to synthesize: empty text");
  const GestureAtlas atlas = load_atlas(ctx);
  FrameSequence seq;
  try {
    seq = text_to_keyframes(text, atlas);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  if (cfg.fps >= 24) seq = duplicate_frames(seq);
  if (cfg.fps == 60) seq = interpolate_sequence(seq, cfg.method, cfg.threads);
  fs::remove_all(cfg.frames_path());
  const fs::path manifest = write_sequence(seq, cfg.frames_path());
  const auto bytes = binio::read_file(manifest);
  ctx.out << "synthesize: " << seq.frames.size() << " frames at " << seq.fps << " fps -> " << cfg.frames_path().string()
          << "\n";
  return {{"text", text},
          {"fps", seq.fps},
          {"keyframes", seq.source_keyframes},
          {"frame_count", seq.frames.size()},
          {"method", cfg.fps == 60 ? json(std::string(method_name(cfg.method))) : json(nullptr)},
          {"manifest", manifest.string()},
          {"manifest_sha256", sha256_hex(bytes)}};
}

EnsembleWeights load_weights(const PipelineConfig& cfg) {
  if (!cfg.ensemble_optimize) return EnsembleWeights::from_rfc(cfg.w_rfc);
  require_exists(cfg.ensemble_path(), "ensemble weights (run eval first)");
  try {
    const json doc = json::parse(read_text(cfg.ensemble_path()));
    EnsembleWeights w{doc.at("w_rfc").get<double>(), doc.at("w_cnn").get<double>()};
    w.validate();
    return w;
  } catch (const std::exception& e) {
    throw DataError(cfg.ensemble_path().string() + ": " + e.what());
  }
}

json stage_translate(const Context& ctx, bool fallback, bool reuse_models) {
  const auto& cfg = ctx.cfg;
  json stages = json::object();
  if (!reuse_models) {
    stages["train-rfc"] = write_report(ctx, "train-rfc", stage_train_rfc(ctx)).string();
    stages["train-cnn"] = write_report(ctx, "train-cnn", stage_train_cnn(ctx)).string();
    stages["eval"] = write_report(ctx, "eval", stage_eval(ctx)).string();
  }
  const Models m = load_models(cfg);
  const EnsembleWeights w = load_weights(cfg);

  require_exists(cfg.stream_path(), "gesture stream");
  const auto frames = parse_landmark_csv(cfg.stream_path());
  std::vector<std::size_t> classes;
  json per_frame = json::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
    const fs::path img = cfg.stream_frames_path() / name;
    require_exists(img, "stream frame");
    const auto p = combine(rfc_probs(m, flatten(frames[i])), cnn_probs(m, cnn::to_tensor(to_cnn_input(read_pgm(img)))), w);
    classes.push_back(p.argmax());
    per_frame.push_back(labels::shared_space()[classes.back()]);
  }
  const std::string raw = decode_stream(classes, StreamDecodeConfig{cfg.debounce});
  const std::string recognized = normalize_text(raw);
  if (recognized.empty()) throw DataError(cfg.stream_path().string() + ": no text recognized in the gesture stream");
  ctx.out << "translate: recognized '" << recognized << "'\n";

  const Lexicon lex = load_lexicon(ctx);
  const CorrectionResult corrected = run_correction(ctx, recognized, fallback, lex);
  ctx.out << "translate: corrected to '" << corrected.candidates[0] << "'\n";
  const json video = stage_synthesize(ctx, corrected.candidates[0]);

  return {{"stages", stages},
          {"weights", weights_json(w)},
          {"frame_predictions", per_frame},
          {"recognized", recognized},
          {"correction", result_json(corrected)},
          {"text", corrected.candidates[0]},
          {"video", video}};
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fingerspelling recognition, correction and sign video synthesis", "signbridge"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("--set", overrides, "override a config key (key=value), repeatable");
  app.add_option("--seed", seed, "master seed (overrides the config)");

  auto* datagen = app.add_subcommand("datagen", "generate synthetic datasets, atlas, corpus and gesture stream");
  auto* train_rfc = app.add_subcommand("train-rfc", "train the landmark random forest");
  auto* train_cnn = app.add_subcommand("train-cnn", "train the silhouette CNN");
  auto* tune = app.add_subcommand("tune", "cross-validated grid search over forest hyperparameters");
  auto* eval = app.add_subcommand("eval", "evaluate both models and fit ensemble weights");
  auto* correct = app.add_subcommand("correct", "rank three corrections of a text");
  auto* synthesize = app.add_subcommand("synthesize", "render text as a sign frame sequence");
  auto* translate = app.add_subcommand("translate", "train, recognize the gesture stream, correct and synthesize");

  std::string text;
  bool fallback = false, evaluate = false, reuse = false;
  correct->add_option("-t,--text", text, "text to correct");
  correct->add_flag("--fallback", fallback, "use offline correction when the remote corrector fails");
  correct->add_flag("--evaluate", evaluate, "report top-1/top-3 accuracy over the corpus");
  synthesize->add_option("-t,--text", text, "text to render")->required();
  translate->add_flag("--fallback", fallback, "use offline correction when the remote corrector fails");
  translate->add_flag("--reuse-models", reuse, "skip training and load existing models and weights");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (correct->parsed() && text.empty() && !evaluate) throw CLI::ValidationError("correct needs --text or --evaluate");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "signbridge: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    KeyValues kv;
    if (!config_path.empty()) kv = KeyValues::load(config_path);
    for (const auto& o : overrides) kv.assign(o);
    if (seed) kv.values["seed"] = std::to_string(*seed);
    Context ctx{PipelineConfig::from(kv), kv.values.count("lexicon") > 0, kv.values.count("atlas") > 0, out, err};

    std::string name;
    json body;
    if (datagen->parsed()) {
      name = "datagen";
      body = stage_datagen(ctx);
    } else if (train_rfc->parsed()) {
      name = "train-rfc";
      body = stage_train_rfc(ctx);
    } else if (train_cnn->parsed()) {
      name = "train-cnn";
      body = stage_train_cnn(ctx);
    } else if (tune->parsed()) {
      name = "tune";
      body = stage_tune(ctx);
    } else if (eval->parsed()) {
      name = "eval";
      body = stage_eval(ctx);
    } else if (correct->parsed()) {
      name = "correct";
      body = stage_correct(ctx, text, fallback, evaluate);
    } else if (synthesize->parsed()) {
      name = "synthesize";
      body = stage_synthesize(ctx, text);
    } else {
      name = "translate";
      body = stage_translate(ctx, fallback, reuse);
    }
    const fs::path report = write_report(ctx, name, std::move(body));
    out << "report: " << report.string() << "\n";
    return kExitOk;
  } catch (const UsageError& e) {
    err << "signbridge: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    err << "signbridge: remote corrector: " << e.what() << "\n";
    return kExitRemote;
  } catch (const ProtocolError& e) {
    err << "signbridge: remote corrector: " << e.what() << "\n";
    return kExitRemote;
  } catch (const std::exception& e) {
    err << "signbridge: error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace signbridge::pipeline
