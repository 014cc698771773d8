#include "signbridge/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "signbridge/ensemble.hpp"
#include "signbridge/error.hpp"

namespace signbridge::pipeline {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty())
      throw UsageError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    kv.values[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValues::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || trim(assignment.substr(0, eq)).empty())
    throw UsageError("expected key=value, got '" + std::string(assignment) + "'");
  values[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw UsageError("config key " + key + ": '" + v + "' is not a valid number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key " + key + ": '" + v + "' is not true/false");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::vector<Field> fields(PipelineConfig& c) {
  auto path = [](fs::path& p) {
    return std::pair{std::function<void(const std::string&)>([&p](const std::string& v) { p = v; }),
                     std::function<std::string()>([&p] { return p.string(); })};
  };
  auto integer = [](std::string key, int& x) {
    return Field{key, [&x, key](const std::string& v) { x = parse_number<int>(key, v); },
                 [&x] { return std::to_string(x); }};
  };
  auto real = [](std::string key, double& x) {
    return Field{key, [&x, key](const std::string& v) { x = parse_number<double>(key, v); },
                 [&x] { return fmt(x); }};
  };
  auto flag = [](std::string key, bool& x) {
    return Field{key, [&x, key](const std::string& v) { x = parse_bool(key, v); }, [&x] { return fmt(x); }};
  };
  auto text = [](std::string key, std::string& x) {
    return Field{key, [&x](const std::string& v) { x = v; }, [&x] { return x; }};
  };
  std::vector<Field> f;
  f.push_back({"seed", [&c](const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
               [&c] { return std::to_string(c.seed); }});
  f.push_back({"threads", [&c](const std::string& v) { c.threads = parse_number<unsigned>("threads", v); },
               [&c] { return std::to_string(c.threads); }});
  for (auto [key, p] : std::initializer_list<std::pair<const char*, fs::path*>>{
           {"data_dir", &c.data_dir}, {"out_dir", &c.out_dir}, {"landmarks", &c.landmarks},
           {"silhouettes", &c.silhouettes}, {"atlas", &c.atlas}, {"corpus", &c.corpus},
           {"lexicon", &c.lexicon}, {"stream", &c.stream}, {"stream_frames", &c.stream_frames},
           {"rfc_model", &c.rfc_model}, {"cnn_model", &c.cnn_model}, {"ensemble_file", &c.ensemble_file},
           {"frames_dir", &c.frames_dir}}) {
    auto [set, get] = path(*p);
    f.push_back({key, set, get});
  }
  f.push_back(integer("datagen.landmark_classes", c.landmark_classes));
  f.push_back(integer("datagen.landmark_per_class", c.landmark_per_class));
  f.push_back(real("datagen.spread", c.landmark_spread));
  f.push_back(integer("datagen.silhouette_classes", c.silhouette_classes));
  f.push_back(integer("datagen.silhouette_per_class", c.silhouette_per_class));
  f.push_back({"datagen.corpus_size",
               [&c](const std::string& v) { c.corpus_size = parse_number<std::size_t>("datagen.corpus_size", v); },
               [&c] { return std::to_string(c.corpus_size); }});
  f.push_back(text("datagen.stream_text", c.stream_text));
  f.push_back(integer("datagen.stream_hold", c.stream_hold));
  f.push_back(integer("datagen.stream_rest", c.stream_rest));

  f.push_back(flag("rfc.grid", c.rfc_grid));
  f.push_back(integer("rfc.folds", c.rfc_folds));
  f.push_back(integer("rfc.n_estimators", c.rfc.n_estimators));
  f.push_back({"rfc.max_depth",
               [&c](const std::string& v) {
                 if (v == "none") c.rfc.max_depth.reset();
                 else c.rfc.max_depth = parse_number<int>("rfc.max_depth", v);
               },
               [&c] { return c.rfc.max_depth ? std::to_string(*c.rfc.max_depth) : std::string("none"); }});
  f.push_back(integer("rfc.min_samples_split", c.rfc.min_samples_split));
  f.push_back(integer("rfc.min_samples_leaf", c.rfc.min_samples_leaf));
  f.push_back(flag("rfc.bootstrap", c.rfc.bootstrap));
  f.push_back({"rfc.max_features",
               [&c](const std::string& v) {
                 if (v == "sqrt") c.rfc.max_features.reset();
                 else c.rfc.max_features = parse_number<int>("rfc.max_features", v);
               },
               [&c] { return c.rfc.max_features ? std::to_string(*c.rfc.max_features) : std::string("sqrt"); }});
  f.push_back(real("split.test_fraction", c.test_fraction));

  f.push_back(real("cnn.learning_rate", c.cnn.learning_rate));
  f.push_back(integer("cnn.batch_size", c.cnn.batch_size));
  f.push_back(integer("cnn.epochs", c.cnn.max_epochs));
  f.push_back(integer("cnn.patience", c.cnn.patience));

  f.push_back(flag("ensemble.optimize", c.ensemble_optimize));
  f.push_back(real("ensemble.w_rfc", c.w_rfc));
  f.push_back(integer("decode.debounce", c.debounce));

  f.push_back({"corrector",
               [&c](const std::string& v) {
                 if (v == "offline") c.corrector = CorrectorKind::offline;
                 else if (v == "remote") c.corrector = CorrectorKind::remote;
                 else throw UsageError("config key corrector: expected offline or remote, got '" + v + "'");
               },
               [&c] { return std::string(c.corrector == CorrectorKind::remote ? "remote" : "offline"); }});
  f.push_back(text("remote.endpoint", c.remote.endpoint));
  f.push_back(text("remote.token_env", c.remote.token_env));
  f.push_back(integer("remote.timeout_ms", c.remote.timeout_ms));
  f.push_back(integer("remote.retries", c.remote.max_retries));
  f.push_back(text("remote.prompt", c.remote.prompt_template));
  f.push_back({"remote.max_in_flight",
               [&c](const std::string& v) { c.remote.max_in_flight = parse_number<std::size_t>("remote.max_in_flight", v); },
               [&c] { return std::to_string(c.remote.max_in_flight); }});

  f.push_back({"video.method",
               [&c](const std::string& v) {
                 try {
                   c.method = parse_method(v);
                 } catch (const std::invalid_argument& e) {
                   throw UsageError(std::string("config key video.method: ") + e.what());
                 }
               },
               [&c] { return std::string(method_name(c.method)); }});
  f.push_back(integer("video.fps", c.fps));
  f.push_back(flag("report.timings", c.report_timings));
  return f;
}

}  // namespace

PipelineConfig PipelineConfig::from(const KeyValues& kv) {
  PipelineConfig c;
  if (!kv.values.count("seed")) throw UsageError("a seed is required (config key seed or --seed)");
  auto table = fields(c);
  for (const auto& [key, value] : kv.values) {
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw UsageError("unknown config key: " + key);
    it->set(value);
  }
  if (c.threads == 0) throw UsageError("threads must be >= 1");
  if (c.fps != 1 && c.fps != 24 && c.fps != 60) throw UsageError("video.fps must be 1, 24 or 60");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw UsageError("split.test_fraction must lie in (0, 1)");
  if (c.rfc_folds < 2) throw UsageError("rfc.folds must be >= 2");
  if (c.debounce < 1) throw UsageError("decode.debounce must be >= 1");
  if (c.stream_hold < 1 || c.stream_rest < 0) throw UsageError("datagen.stream_hold must be >= 1 and stream_rest >= 0");
  try {
    c.rfc.validate();
    c.cnn.validate();
    EnsembleWeights::from_rfc(c.w_rfc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

KeyValues PipelineConfig::to_values() const {
  PipelineConfig copy = *this;
  KeyValues kv;
  for (const auto& f : fields(copy)) kv.values[f.key] = f.get();
  return kv;
}

namespace {

fs::path or_default(const fs::path& p, const fs::path& fallback) { return p.empty() ? fallback : p; }

}  // namespace

fs::path PipelineConfig::landmarks_path() const { return or_default(landmarks, data_dir / "landmarks.csv"); }
fs::path PipelineConfig::silhouettes_path() const { return or_default(silhouettes, data_dir / "silhouettes"); }
fs::path PipelineConfig::atlas_path() const { return or_default(atlas, data_dir / "atlas"); }
fs::path PipelineConfig::corpus_path() const { return or_default(corpus, data_dir / "corpus.tsv"); }
fs::path PipelineConfig::lexicon_path() const { return or_default(lexicon, data_dir / "lexicon.txt"); }
fs::path PipelineConfig::stream_path() const { return or_default(stream, data_dir / "stream.csv"); }
fs::path PipelineConfig::stream_frames_path() const {
  return or_default(stream_frames, data_dir / "stream_silhouettes");
}
fs::path PipelineConfig::rfc_model_path() const { return or_default(rfc_model, out_dir / "models" / "rfc.bin"); }
fs::path PipelineConfig::scaler_path() const {
  fs::path p = rfc_model_path();
  p += ".scaler";
  return p;
}
fs::path PipelineConfig::cnn_model_path() const { return or_default(cnn_model, out_dir / "models" / "cnn.bin"); }
fs::path PipelineConfig::ensemble_path() const {
  return or_default(ensemble_file, out_dir / "models" / "ensemble.json");
}
fs::path PipelineConfig::frames_path() const { return or_default(frames_dir, out_dir / "frames"); }
fs::path PipelineConfig::reports_dir() const { return out_dir / "reports"; }

}  // namespace signbridge::pipeline
