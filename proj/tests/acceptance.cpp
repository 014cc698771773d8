// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "signbridge/binary_io.hpp"
#include "signbridge/cnn.hpp"
#include "signbridge/correction.hpp"
#include "signbridge/datagen.hpp"
#include "signbridge/ensemble.hpp"
#include "signbridge/forest.hpp"
#include "signbridge/landmarks.hpp"
#include "signbridge/pipeline/commands.hpp"
#include "signbridge/rng.hpp"
#include "signbridge/video.hpp"
#include "signbridge/vision.hpp"

using namespace signbridge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// thresholds
constexpr double kStructureSeconds = 1.0;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 30.0;
constexpr int kOtsuImages = 100;
constexpr double kOtsuSeconds = 5.0;
constexpr double kRfcMinAccuracy = 0.95;
constexpr double kRfcTrainSeconds = 60.0;
constexpr double kCnnMinAccuracy = 0.80;
constexpr int kCnnEpochs = 15;
constexpr double kCnnSeconds = 600.0;
constexpr int kCorruptions = 10000;
constexpr double kMixTolerance = 0.02;
constexpr double kMixSeconds = 5.0;
constexpr std::size_t kCorpusSize = 500;
constexpr std::size_t kMinLexiconWords = 200;
constexpr double kTop3Min = 0.90;
constexpr double kFramesSeconds = 10.0;
constexpr double kShiftRecovery = 0.90;
constexpr double kFlowSeconds = 10.0;
constexpr std::uint64_t kSeed = 20240601;
constexpr double kTestFraction = 0.2;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// Per-class seeded shuffle, first round(fraction * count) rows of each class held out.
void stratified_split(std::span<const int> labels, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (auto& [cls, rows] : by_class) {
    Rng rng = make_rng(seed, "acceptance-split", std::uint64_t(cls));
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_test = std::size_t(std::llround(kTestFraction * double(rows.size())));
    test.insert(test.end(), rows.begin(), rows.begin() + std::ptrdiff_t(n_test));
    train.insert(train.end(), rows.begin() + std::ptrdiff_t(n_test), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

// exact integer Otsu: maximize (S0 N - S n0)^2 / (n0 n1), lowest t on ties
int otsu_exhaustive(const GrayImage& img) {
  const auto px = img.pixels();
  const __int128 n = __int128(px.size());
  __int128 s = 0;
  for (auto p : px) s += p;
  int best = -1;
  __int128 bnum = 0, bden = 1;
  for (int t = 0; t < 256; ++t) {
    __int128 n0 = 0, s0 = 0;
    for (auto p : px) {
      if (p <= t) {
        ++n0;
        s0 += p;
      }
    }
    if (n0 == 0 || n0 == n) continue;
    const __int128 d = s0 * n - s * n0;
    const __int128 num = d * d, den = n0 * (n - n0);
    if (best < 0 || num * bden > bnum * den) {
      best = t;
      bnum = num;
      bden = den;
    }
  }
  return best < 0 ? px[0] : best;
}

GrayImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = std::uint8_t(u(rng));
  return img;
}

// ---- 1
void structure() {
  const auto t0 = Clock::now();
  const cnn::Network net = cnn::build_model(27, kSeed);
  const std::vector<cnn::Shape3> shapes = {{31, 31, 16}, {15, 15, 16}, {13, 13, 32}, {4, 4, 32},
                                           {4, 4, 64},   {1, 1, 64},   {1, 1, 128}};
  const std::vector<std::size_t> counts = {80, 0, 4640, 0, 51264, 0, 8320};
  bool ok = net.layers().size() == 9;
  for (std::size_t i = 0; ok && i < shapes.size(); ++i)
    ok = net.layers()[i].output == shapes[i] && net.layers()[i].param_count == counts[i];
  ok = ok && net.layers()[8].param_count == 3483 && net.param_count() == 67787;
  const double secs = seconds_since(t0);
  report(1, "cnn layer shapes and parameter counts", ok && secs < kStructureSeconds,
         fmt("total params %zu, %.3f s", net.param_count(), secs));
}

// ---- 2
void gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const cnn::Shape3 in{4, 4, 2};
  const std::vector<std::vector<cnn::LayerSpec>> nets = {
      {cnn::Conv2DSpec{3, 2, cnn::Padding::valid, cnn::Activation::relu}, cnn::MaxPoolSpec{2, 2, false},
       cnn::DenseSpec{3, cnn::Activation::none}},
      {cnn::Conv2DSpec{2, 3, cnn::Padding::same, cnn::Activation::relu}, cnn::MaxPoolSpec{3, 3, true},
       cnn::DenseSpec{5, cnn::Activation::relu}, cnn::DropoutSpec{0.2}, cnn::DenseSpec{3, cnn::Activation::none}},
  };
  double worst = 0.0;
  for (const auto& specs : nets) {
    cnn::Network net(in, specs);
    for (std::uint64_t s = 0; s < 5; ++s) {
      net.initialize(derive_seed(kSeed, "acceptance-grad", s));
      cnn::Tensor3 x(in);
      for (auto& v : x.values) v = u(rng);
      worst = std::max(worst, cnn::gradient_check(net, x, int(s % 3)));
    }
  }
  const double secs = seconds_since(t0);
  report(2, "backprop vs finite differences", worst < kGradTolerance && secs < kGradSeconds,
         fmt("max rel. error %.2e (limit %.0e) over conv valid/same, pool floor/ceil, dense, dropout; %.2f s", worst,
             kGradTolerance, secs));
}

// ---- 3
void otsu() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(kSeed);
  std::uniform_int_distribution<int> side(8, 64), v(0, 255), levels(1, 5);
  int matches = 0;
  for (int i = 0; i < kOtsuImages; ++i) {
    GrayImage img(side(rng), side(rng));
    if (i % 2) {
      std::vector<int> palette(std::size_t(levels(rng)));
      for (auto& p : palette) p = v(rng);
      std::uniform_int_distribution<std::size_t> pick(0, palette.size() - 1);
      for (auto& p : img.pixels()) p = std::uint8_t(palette[pick(rng)]);
    } else {
      for (auto& p : img.pixels()) p = std::uint8_t(v(rng));
    }
    matches += otsu_threshold(img) == otsu_exhaustive(img);
  }
  const double secs = seconds_since(t0);
  report(3, "otsu equals exhaustive search", matches == kOtsuImages && secs < kOtsuSeconds,
         fmt("%d/%d images, %.2f s", matches, kOtsuImages, secs));
}

struct RecognitionData {
  std::vector<std::string> rfc_classes;
  TrainingSet rfc_train, rfc_test;
  ForestModel rfc;
  std::vector<std::string> cnn_classes;
  std::vector<cnn::Sample> cnn_train, cnn_test;
  cnn::Network cnn;
};

// ---- 4
void rfc_accuracy(RecognitionData& d) {
  LandmarkDatasetSpec spec;
  spec.seed = derive_seed(kSeed, "acceptance-landmarks");
  const auto frames = synth_landmarks(spec);
  d.rfc_classes = labels::landmark_classes(std::size_t(spec.num_classes));
  std::vector<FeatureVector> features;
  std::vector<int> y;
  for (const auto& f : frames) {
    features.push_back(flatten(f));
    y.push_back(int(std::find(d.rfc_classes.begin(), d.rfc_classes.end(), *f.label) - d.rfc_classes.begin()));
  }
  std::vector<std::size_t> train, test;
  stratified_split(y, kSeed, train, test);
  std::vector<FeatureVector> train_x;
  for (auto i : train) train_x.push_back(features[i]);
  const ScalerParams scaler = fit_scaler(train_x);
  for (auto* part : {&d.rfc_train, &d.rfc_test}) {
    part->n_features = kFeatureCount;
    part->classes = d.rfc_classes;
  }
  for (auto i : train) d.rfc_train.add(apply_scaler(scaler, features[i]).values(), y[i]);
  for (auto i : test) d.rfc_test.add(apply_scaler(scaler, features[i]).values(), y[i]);

  const auto t0 = Clock::now();
  d.rfc = train_forest(d.rfc_train, table_best_hyperparams(), derive_seed(kSeed, "forest"), worker_count());
  const double secs = seconds_since(t0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.rfc_test.size(); ++i) correct += d.rfc.predict_class(d.rfc_test.row(i)) == d.rfc_test.y[i];
  const double acc = double(correct) / double(d.rfc_test.size());
  report(4, "forest accuracy on 28 x 100 landmark clusters", acc >= kRfcMinAccuracy && secs < kRfcTrainSeconds,
         fmt("test accuracy %.4f (min %.2f) on %zu samples, %s, train %.2f s on %u threads", acc, kRfcMinAccuracy,
             d.rfc_test.size(), table_best_hyperparams().describe().c_str(), secs, worker_count()));
}

// ---- 5
void cnn_accuracy(RecognitionData& d) {
  SilhouetteDatasetSpec spec;
  spec.seed = derive_seed(kSeed, "acceptance-silhouettes");
  const auto images = synth_silhouettes(spec);
  d.cnn_classes = labels::silhouette_classes(std::size_t(spec.num_classes));
  std::vector<int> y;
  for (const auto& im : images)
    y.push_back(int(std::find(d.cnn_classes.begin(), d.cnn_classes.end(), im.label) - d.cnn_classes.begin()));
  std::vector<std::size_t> train, test;
  stratified_split(y, kSeed + 1, train, test);
  for (auto i : train) d.cnn_train.push_back({cnn::to_tensor(images[i].image), y[i]});
  for (auto i : test) d.cnn_test.push_back({cnn::to_tensor(images[i].image), y[i]});

  cnn::TrainConfig cfg;
  cfg.max_epochs = kCnnEpochs;
  cfg.seed = derive_seed(kSeed, "cnn");
  const auto t0 = Clock::now();
  const auto result = cnn::train(cnn::build_model(spec.num_classes, derive_seed(kSeed, "cnn-init")), d.cnn_train,
                                 d.cnn_test, cfg);
  const double secs = seconds_since(t0);
  d.cnn = result.model;
  const double acc = cnn::evaluate(d.cnn, d.cnn_test).accuracy;
  report(5, "cnn accuracy on 27 x 100 silhouettes", acc >= kCnnMinAccuracy && secs < kCnnSeconds,
         fmt("validation accuracy %.4f (min %.2f), %zu epochs run, best epoch %d, %.1f s", acc, kCnnMinAccuracy,
             result.history.size(), result.best_epoch, secs));
}

// ---- 6
void ensemble_dominance(const RecognitionData& d) {
  // Pair held-out samples of the same class; SPACE/DELETE landmarks go with
  // held-out BLANK silhouettes.
  std::map<std::size_t, std::vector<std::size_t>> rfc_rows, cnn_rows;
  for (std::size_t i = 0; i < d.rfc_test.size(); ++i)
    rfc_rows[*labels::shared_index(d.rfc_classes[std::size_t(d.rfc_test.y[i])])].push_back(i);
  for (std::size_t i = 0; i < d.cnn_test.size(); ++i)
    cnn_rows[*labels::shared_index(d.cnn_classes[std::size_t(d.cnn_test[i].label)])].push_back(i);

  std::vector<ValidationPair> pairs;
  auto add = [&](std::size_t truth, std::size_t r, std::size_t c) {
    const auto pr = d.rfc.predict_proba(d.rfc_test.row(r));
    const auto pc = d.cnn.forward(d.cnn_test[c].input);
    pairs.push_back({ClassProbabilities::from_model(d.rfc_classes, pr),
                     ClassProbabilities::from_model(d.cnn_classes, pc), truth});
  };
  for (auto& [cls, rows] : rfc_rows) {
    const bool control = cls == labels::kSpaceIndex || cls == labels::kDeleteIndex;
    const auto& partner = cnn_rows[control ? labels::kBlankIndex : cls];
    for (std::size_t k = 0; k < std::min(rows.size(), partner.size()); ++k) add(cls, rows[k], partner[k]);
  }
  const auto search = optimize_weights(pairs);
  const double rfc_only = ensemble_accuracy(pairs, EnsembleWeights::from_rfc(1.0));
  const double cnn_only = ensemble_accuracy(pairs, EnsembleWeights::from_rfc(0.0));
  const bool ok = search.accuracy >= rfc_only && search.accuracy >= cnn_only &&
                  search.accuracy == ensemble_accuracy(pairs, search.weights);
  report(6, "ensemble at least as good as either model", ok,
         fmt("w_rfc %.2f accuracy %.4f vs rfc-only %.4f, cnn-only %.4f on %zu pairs", search.weights.w_rfc,
             search.accuracy, rfc_only, cnn_only, pairs.size()));
}

// ---- 7
void corruption_mix() {
  const auto t0 = Clock::now();
  const ErrorMix mix;
  const auto corpus = make_correction_corpus(builtin_phrases(), kCorruptions, mix, derive_seed(kSeed, "corruption"));
  std::array<double, 4> freq{};
  for (const auto& e : corpus) freq[std::size_t(e.kind)] += 1.0 / double(corpus.size());
  const std::array<double, 4> target = {mix.p_substitution, mix.p_missing, mix.p_extra, mix.p_word_order};
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(freq[k] - target[k]));
  const double secs = seconds_since(t0);
  report(7, "corruption category frequencies", worst <= kMixTolerance && secs < kMixSeconds,
         fmt("substitution %.4f, missing %.4f, extra %.4f, word order %.4f; max deviation %.4f (limit %.2f), %.2f s",
             freq[0], freq[1], freq[2], freq[3], worst, kMixTolerance, secs));
}

// ---- 8
void offline_corrector() {
  const Lexicon lex = Lexicon::builtin();
  const auto corpus = make_correction_corpus(builtin_phrases(), kCorpusSize, ErrorMix{}, derive_seed(kSeed, "corpus"));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& e : corpus) pairs.emplace_back(e.corrupted, e.clean);
  const auto m = evaluate_corrector([&](const std::string& s) { return correct_offline(s, lex); }, pairs);

  auto includes = [&](const std::string& in, const std::string& want) {
    const auto r = correct_offline(in, lex);
    return std::find(r.candidates.begin(), r.candidates.end(), want) != r.candidates.end();
  };
  const bool toy = includes("TOY BOK", "TOY BOOK");
  const bool thank = includes("you thank", "THANK YOU");
  const bool ok = m.top3_accuracy >= kTop3Min && lex.size() >= kMinLexiconWords && toy && thank;
  report(8, "offline corrector", ok,
         fmt("top-3 %.4f (min %.2f), top-1 %.4f on %zu samples, lexicon %zu words; TOY BOK -> TOY BOOK %s; "
             "you thank -> THANK YOU %s",
             m.top3_accuracy, kTop3Min, m.top1_accuracy, m.samples, lex.size(), toy ? "yes" : "no",
             thank ? "yes" : "no"));
}

// ---- 9
void frame_counts() {
  const auto t0 = Clock::now();
  const GestureAtlas atlas = GestureAtlas::synthetic();
  const std::string letters = "SIGN LANGUAGE";
  bool ok = true;
  std::string bad;
  for (std::size_t n = 1; n <= 10; ++n) {
    const std::string text = letters.substr(0, n);
    const auto k = text_to_keyframes(text, atlas);
    const auto d24 = duplicate_frames(k);
    bool step = k.frames.size() == n && d24.frames.size() == 24 * n;
    for (std::size_t i = 0; step && i < d24.frames.size(); ++i) step = d24.frames[i] == k.frames[i / 24];
    if (n == 2) step = step && d24.frames[30] == k.frames[1];
    for (auto method : {InterpolationMethod::crossfade, InterpolationMethod::flow}) {
      const auto d60 = interpolate_sequence(d24, method, worker_count());
      step = step && d60.frames.size() == 60 * n;
      for (std::size_t j = 0; step && j < d60.frames.size(); ++j)
        if ((24 * j) % 60 == 0) step = d60.frames[j] == d24.frames[24 * j / 60];
    }
    if (!step) bad += " n=" + std::to_string(n);
    ok = ok && step;
  }
  const double secs = seconds_since(t0);
  report(9, "1 / 24 / 60 fps frame counts", ok && secs < kFramesSeconds,
         fmt("n = 1..10, both interpolation methods%s, %.2f s", ok ? "" : (", failed at" + bad).c_str(), secs));
}

// ---- 10
void flow_sanity() {
  const auto t0 = Clock::now();
  const GrayImage i0 = noise_image(kAtlasSide, kAtlasSide, kSeed);
  GrayImage i1 = noise_image(kAtlasSide, kAtlasSide, kSeed + 1);
  for (int y = 0; y < i1.height(); ++y)
    for (int x = 2; x < i1.width(); ++x) i1.at(x, y) = i0.at(x - 2, y);
  const FlowMap f = block_match(i0, i1);
  int interior = 0, hit = 0;
  const int blocks = kAtlasSide / kFlowBlock;
  for (int by = 1; by < blocks - 1; ++by) {
    for (int bx = 1; bx < blocks - 1; ++bx) {
      const std::size_t idx = std::size_t(by * kFlowBlock) * std::size_t(kAtlasSide) + std::size_t(bx * kFlowBlock);
      ++interior;
      hit += f.dx[idx] == 2.0 && f.dy[idx] == 0.0;
    }
  }
  const double recovered = double(hit) / double(interior);
  const FlowField same = estimate_flow(i0, i0, 0.4);
  const bool zero = same.to0.is_zero() && same.to1.is_zero();
  const bool identity = synthesize_frame(i0, i0, same, extract_context(i0, i0), 0.4) == i0;
  const double secs = seconds_since(t0);
  report(10, "block-matching flow", recovered >= kShiftRecovery && zero && identity && secs < kFlowSeconds,
         fmt("2 px shift recovered on %.1f%% of interior blocks (min %.0f%%); identical frames: zero flow %s, "
             "identity synthesis %s; %.2f s",
             100.0 * recovered, 100.0 * kShiftRecovery, zero ? "yes" : "no", identity ? "yes" : "no", secs));
}

// ---- 11
std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = binio::read_file(e.path());
  return files;
}

void determinism() {
  const fs::path dir = fs::temp_directory_path() / ("sb_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  const std::vector<std::string> common = {"--seed", std::to_string(kSeed), "--set", "data_dir=" + (dir / "data").string(),
                                           "--set", "out_dir=" + (dir / "out").string(), "--set",
                                           "threads=" + std::to_string(worker_count())};
  auto run = [&](const std::string& cmd) {
    std::vector<std::string> args = {cmd};
    args.insert(args.end(), common.begin(), common.end());
    std::ostringstream out, err;
    const int code = pipeline::run_subcommand(args, out, err);
    if (code != 0) std::fprintf(stderr, "%s failed (%d): %s\n", cmd.c_str(), code, err.str().c_str());
    return code;
  };
  const auto t0 = Clock::now();
  bool ok = run("datagen") == 0 && run("translate") == 0;
  const auto first = ok ? snapshot(dir / "out") : decltype(snapshot(dir))();
  ok = ok && run("translate") == 0;
  const auto second = ok ? snapshot(dir / "out") : decltype(snapshot(dir))();
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    differing += it == second.end() || it->second != bytes;
  }
  differing += second.size() > first.size() ? second.size() - first.size() : 0;
  const bool has_all = first.count("models/rfc.bin") && first.count("models/cnn.bin") &&
                       first.count("reports/translate.json") && first.count("frames/manifest.json");
  ok = ok && has_all && differing == 0;
  const double secs = seconds_since(t0);
  fs::remove_all(dir);
  report(11, "translate is reproducible", ok,
         fmt("%zu output files compared (models, reports, frames, manifest), %zu differ; %.1f s", first.size(),
             differing, secs));
}

void guarded(int id, const char* name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  RecognitionData data;
  guarded(1, "cnn layer shapes and parameter counts", structure);
  guarded(2, "backprop vs finite differences", gradients);
  guarded(3, "otsu equals exhaustive search", otsu);
  guarded(4, "forest accuracy on 28 x 100 landmark clusters", [&] { rfc_accuracy(data); });
  guarded(5, "cnn accuracy on 27 x 100 silhouettes", [&] { cnn_accuracy(data); });
  guarded(6, "ensemble at least as good as either model", [&] { ensemble_dominance(data); });
  guarded(7, "corruption category frequencies", corruption_mix);
  guarded(8, "offline corrector", offline_corrector);
  guarded(9, "1 / 24 / 60 fps frame counts", frame_counts);
  guarded(10, "block-matching flow", flow_sanity);
  guarded(11, "translate is reproducible", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
