#include "signbridge/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <stdexcept>

#include "signbridge/binary_io.hpp"
#include "signbridge/kernels/kernels.hpp"

namespace signbridge::cnn {

std::string to_string(const Shape3& s) {
  return "(" + std::to_string(s.height) + "," + std::to_string(s.width) + "," + std::to_string(s.channels) + ")";
}

Tensor3 to_tensor(const GrayImage& img) {
  Tensor3 t(Shape3{img.height(), img.width(), 1});
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) t.values[i] = px[i] / 255.0;
  return t;
}

namespace {

int conv_pad(const Conv2DSpec& c) { return c.padding == Padding::same ? (c.kernel - 1) / 2 : 0; }

int pool_extent(int in, const MaxPoolSpec& p) {
  if (p.ceil_mode) {
    if (in <= p.pool) return 1;
    return (in - p.pool + p.stride - 1) / p.stride + 1;
  }
  if (in < p.pool) throw std::invalid_argument("max pool window larger than its input");
  return (in - p.pool) / p.stride + 1;
}

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overload(Fs...) -> Overload<Fs...>;

void gather_patch(const double* in, const Shape3& s, int top, int left, int k, double* patch) {
  const std::size_t c = static_cast<std::size_t>(s.channels);
  for (int ky = 0; ky < k; ++ky) {
    const int iy = top + ky;
    for (int kx = 0; kx < k; ++kx) {
      const int ix = left + kx;
      double* dst = patch + (static_cast<std::size_t>(ky) * k + kx) * c;
      if (iy < 0 || iy >= s.height || ix < 0 || ix >= s.width) {
        std::fill(dst, dst + c, 0.0);
      } else {
        std::memcpy(dst, in + (static_cast<std::size_t>(iy) * s.width + ix) * c, c * sizeof(double));
      }
    }
  }
}

void scatter_patch(const double* patch, const Shape3& s, int top, int left, int k, double* din) {
  const std::size_t c = static_cast<std::size_t>(s.channels);
  for (int ky = 0; ky < k; ++ky) {
    const int iy = top + ky;
    if (iy < 0 || iy >= s.height) continue;
    for (int kx = 0; kx < k; ++kx) {
      const int ix = left + kx;
      if (ix < 0 || ix >= s.width) continue;
      const double* src = patch + (static_cast<std::size_t>(ky) * k + kx) * c;
      double* dst = din + (static_cast<std::size_t>(iy) * s.width + ix) * c;
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

Network::Network(Shape3 input, std::vector<LayerSpec> layers) : input_(input), specs_(std::move(layers)) {
  if (input.height < 1 || input.width < 1 || input.channels < 1) throw std::invalid_argument("input extents must be >= 1");
  if (specs_.empty()) throw std::invalid_argument("network needs at least one layer");
  const auto* last = std::get_if<DenseSpec>(&specs_.back());
  if (!last || last->activation != Activation::none) {
    throw std::invalid_argument("network must end in a linear Dense layer");
  }
  Shape3 shape = input;
  std::size_t offset = 0;
  for (const LayerSpec& spec : specs_) {
    LayerInfo info;
    info.param_offset = offset;
    std::visit(Overload{
                   [&](const Conv2DSpec& c) {
                     if (c.filters < 1 || c.kernel < 1) throw std::invalid_argument("bad conv spec");
                     info.kind = "Conv2D";
                     const int oh = c.padding == Padding::same ? shape.height : shape.height - c.kernel + 1;
                     const int ow = c.padding == Padding::same ? shape.width : shape.width - c.kernel + 1;
                     if (oh < 1 || ow < 1) throw std::invalid_argument("conv kernel larger than its input");
                     info.param_count = static_cast<std::size_t>(c.filters) *
                                        (static_cast<std::size_t>(c.kernel) * c.kernel * shape.channels + 1);
                     shape = {oh, ow, c.filters};
                   },
                   [&](const MaxPoolSpec& p) {
                     if (p.pool < 1 || p.stride < 1) throw std::invalid_argument("bad pool spec");
                     info.kind = "MaxPool2D";
                     shape = {pool_extent(shape.height, p), pool_extent(shape.width, p), shape.channels};
                   },
                   [&](const DenseSpec& d) {
                     if (d.units < 1) throw std::invalid_argument("bad dense spec");
                     info.kind = "Dense";
                     info.param_count = static_cast<std::size_t>(d.units) * (shape.size() + 1);
                     shape = {1, 1, d.units};
                   },
                   [&](const DropoutSpec& d) {
                     if (!(d.rate >= 0.0 && d.rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
                     info.kind = "Dropout";
                   },
               },
               spec);
    info.output = shape;
    offset += info.param_count;
    info_.push_back(info);
  }
  params_.assign(offset, 0.0);
}

std::size_t Network::num_classes() const { return static_cast<std::size_t>(info_.back().output.channels); }

void Network::initialize(std::uint64_t seed) {
  Shape3 in = input_;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const LayerInfo& info = info_[i];
    double fan_in = 0.0, fan_out = 0.0;
    std::size_t weights = 0;
    if (const auto* c = std::get_if<Conv2DSpec>(&specs_[i])) {
      fan_in = double(c->kernel) * c->kernel * in.channels;
      fan_out = double(c->kernel) * c->kernel * c->filters;
      weights = static_cast<std::size_t>(c->filters) * c->kernel * c->kernel * in.channels;
    } else if (const auto* d = std::get_if<DenseSpec>(&specs_[i])) {
      fan_in = double(in.size());
      fan_out = double(d->units);
      weights = static_cast<std::size_t>(d->units) * in.size();
    }
    if (weights > 0) {
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      Rng rng = make_rng(seed, "cnn-init", i);
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (std::size_t j = 0; j < weights; ++j) params_[info.param_offset + j] = dist(rng);
      std::fill(params_.begin() + static_cast<std::ptrdiff_t>(info.param_offset + weights),
                params_.begin() + static_cast<std::ptrdiff_t>(info.param_offset + info.param_count), 0.0);
    }
    in = info.output;
  }
}

ClassProbabilities Network::forward(const Tensor3& input, Workspace* ws, Rng* dropout_rng) const {
  if (input.shape != input_) {
    throw std::invalid_argument("network input must be " + to_string(input_) + ", got " + to_string(input.shape));
  }
  Workspace local;
  Workspace& w = ws ? *ws : local;
  const std::size_t n = specs_.size();
  w.activations.resize(n + 1);
  w.argmax.resize(n);
  w.dropout_scale.resize(n);
  w.activations[0] = input.values;
  std::vector<double> patch;
  const auto& k = kernels::active();

  Shape3 in_shape = input_;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& in = w.activations[i];
    std::vector<double>& out = w.activations[i + 1];
    const LayerInfo& info = info_[i];
    out.assign(info.output.size(), 0.0);
    const double* p = params_.data() + info.param_offset;
    std::visit(Overload{
                   [&](const Conv2DSpec& c) {
                     const std::size_t kk = static_cast<std::size_t>(c.kernel) * c.kernel * in_shape.channels;
                     const double* bias = p + kk * c.filters;
                     patch.resize(kk);
                     const int pad = conv_pad(c);
                     const Shape3& os = info.output;
                     for (int oy = 0; oy < os.height; ++oy) {
                       for (int ox = 0; ox < os.width; ++ox) {
                         gather_patch(in.data(), in_shape, oy - pad, ox - pad, c.kernel, patch.data());
                         double* o = out.data() + (static_cast<std::size_t>(oy) * os.width + ox) * c.filters;
                         for (int f = 0; f < c.filters; ++f) {
                           const double v = bias[f] + k.dot(p + f * kk, patch.data(), kk);
                           o[f] = (c.activation == Activation::relu && v < 0.0) ? 0.0 : v;
                         }
                       }
                     }
                   },
                   [&](const MaxPoolSpec& pool) {
                     const Shape3& os = info.output;
                     auto& arg = w.argmax[i];
                     arg.assign(os.size(), 0);
                     for (int oy = 0; oy < os.height; ++oy) {
                       const int y0 = oy * pool.stride, y1 = std::min(y0 + pool.pool, in_shape.height);
                       for (int ox = 0; ox < os.width; ++ox) {
                         const int x0 = ox * pool.stride, x1 = std::min(x0 + pool.pool, in_shape.width);
                         for (int c = 0; c < os.channels; ++c) {
                           std::size_t best = (static_cast<std::size_t>(y0) * in_shape.width + x0) * in_shape.channels + c;
                           for (int y = y0; y < y1; ++y) {
                             for (int x = x0; x < x1; ++x) {
                               const std::size_t idx = (static_cast<std::size_t>(y) * in_shape.width + x) * in_shape.channels + c;
                               if (in[idx] > in[best]) best = idx;
                             }
                           }
                           const std::size_t o = (static_cast<std::size_t>(oy) * os.width + ox) * os.channels + c;
                           out[o] = in[best];
                           arg[o] = static_cast<std::uint32_t>(best);
                         }
                       }
                     }
                   },
                   [&](const DenseSpec& d) {
                     const std::size_t nin = in.size();
                     const double* bias = p + nin * d.units;
                     for (int o = 0; o < d.units; ++o) {
                       const double v = bias[o] + k.dot(p + o * nin, in.data(), nin);
                       out[o] = (d.activation == Activation::relu && v < 0.0) ? 0.0 : v;
                     }
                   },
                   [&](const DropoutSpec& d) {
                     auto& scale = w.dropout_scale[i];
                     if (!dropout_rng || d.rate == 0.0) {
                       scale.clear();
                       out = in;
                       return;
                     }
                     std::uniform_real_distribution<double> u(0.0, 1.0);
                     scale.resize(in.size());
                     const double keep = 1.0 / (1.0 - d.rate);
                     for (std::size_t j = 0; j < in.size(); ++j) {
                       scale[j] = u(*dropout_rng) >= d.rate ? keep : 0.0;
                       out[j] = in[j] * scale[j];
                     }
                   },
               },
               specs_[i]);
    in_shape = info.output;
  }
  w.probabilities = softmax(w.activations[n]);
  return w.probabilities;
}

void Network::backward(const Workspace& ws, int label, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
  const std::size_t n = specs_.size();
  std::vector<double> dout = ws.probabilities;
  dout[static_cast<std::size_t>(label)] -= 1.0;
  std::vector<double> din, patch, dpatch;
  const auto& k = kernels::active();

  for (std::size_t li = n; li-- > 0;) {
    const LayerInfo& info = info_[li];
    const Shape3 in_shape = li == 0 ? input_ : info_[li - 1].output;
    const std::vector<double>& in = ws.activations[li];
    const std::vector<double>& out = ws.activations[li + 1];
    const bool need_din = li > 0;
    din.assign(need_din ? in.size() : 0, 0.0);
    const double* p = params_.data() + info.param_offset;
    double* g = grad.data() + info.param_offset;
    std::visit(Overload{
                   [&](const Conv2DSpec& c) {
                     const std::size_t kk = static_cast<std::size_t>(c.kernel) * c.kernel * in_shape.channels;
                     double* gbias = g + kk * c.filters;
                     patch.resize(kk);
                     dpatch.resize(kk);
                     const int pad = conv_pad(c);
                     const Shape3& os = info.output;
                     for (int oy = 0; oy < os.height; ++oy) {
                       for (int ox = 0; ox < os.width; ++ox) {
                         const std::size_t base = (static_cast<std::size_t>(oy) * os.width + ox) * c.filters;
                         bool gathered = false, touched = false;
                         for (int f = 0; f < c.filters; ++f) {
                           double d = dout[base + f];
                           if (c.activation == Activation::relu && out[base + f] <= 0.0) d = 0.0;
                           if (d == 0.0) continue;
                           if (!gathered) {
                             gather_patch(in.data(), in_shape, oy - pad, ox - pad, c.kernel, patch.data());
                             std::fill(dpatch.begin(), dpatch.end(), 0.0);
                             gathered = true;
                           }
                           k.axpy(d, patch.data(), g + f * kk, kk);
                           gbias[f] += d;
                           if (need_din) {
                             k.axpy(d, p + f * kk, dpatch.data(), kk);
                             touched = true;
                           }
                         }
                         if (touched) scatter_patch(dpatch.data(), in_shape, oy - pad, ox - pad, c.kernel, din.data());
                       }
                     }
                   },
                   [&](const MaxPoolSpec&) {
                     if (!need_din) return;
                     const auto& arg = ws.argmax[li];
                     for (std::size_t o = 0; o < arg.size(); ++o) din[arg[o]] += dout[o];
                   },
                   [&](const DenseSpec& d) {
                     const std::size_t nin = in.size();
                     double* gbias = g + nin * d.units;
                     for (int o = 0; o < d.units; ++o) {
                       double gd = dout[o];
                       if (d.activation == Activation::relu && out[o] <= 0.0) gd = 0.0;
                       if (gd == 0.0) continue;
                       k.axpy(gd, in.data(), g + o * nin, nin);
                       gbias[o] += gd;
                       if (need_din) k.axpy(gd, p + o * nin, din.data(), nin);
                     }
                   },
                   [&](const DropoutSpec&) {
                     if (!need_din) return;
                     const auto& scale = ws.dropout_scale[li];
                     if (scale.empty()) {
                       din = dout;
                     } else {
                       for (std::size_t j = 0; j < din.size(); ++j) din[j] = dout[j] * scale[j];
                     }
                   },
               },
               specs_[li]);
    dout.swap(din);
  }
}

Network build_model(int num_classes, std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("build_model: need at least 2 classes");
  Network net(Shape3{32, 32, 1},
              {
                  Conv2DSpec{16, 2, Padding::valid, Activation::relu},
                  MaxPoolSpec{2, 2, false},
                  Conv2DSpec{32, 3, Padding::valid, Activation::relu},
                  MaxPoolSpec{3, 3, false},
                  Conv2DSpec{64, 5, Padding::same, Activation::relu},
                  MaxPoolSpec{5, 5, true},
                  DenseSpec{128, Activation::relu},
                  DropoutSpec{0.2},
                  DenseSpec{num_classes, Activation::none},
              });
  net.initialize(seed);
  return net;
}

double cross_entropy(std::span<const double> pred, const OneHotLabel& label) {
  if (label.index < 0 || static_cast<std::size_t>(label.index) >= pred.size()) {
    throw std::invalid_argument("cross_entropy: label outside prediction range");
  }
  const double p = std::clamp(pred[static_cast<std::size_t>(label.index)], kProbabilityFloor, 1.0);
  return -std::log(p);
}

int argmax(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

Evaluation evaluate(const Network& model, std::span<const Sample> data) {
  Evaluation e;
  if (data.empty()) return e;
  std::size_t correct = 0;
  for (const Sample& s : data) {
    const auto p = model.forward(s.input);
    e.loss += cross_entropy(p, {s.label, static_cast<int>(p.size())});
    correct += argmax(p) == s.label;
  }
  e.loss /= double(data.size());
  e.accuracy = double(correct) / double(data.size());
  return e;
}

TrainResult train(const Network& initial, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (val_set.empty()) throw std::invalid_argument("train: empty validation set");
  for (const auto* set : {&train_set, &val_set}) {
    for (const Sample& s : *set) {
      if (s.label < 0 || static_cast<std::size_t>(s.label) >= initial.num_classes()) {
        throw std::invalid_argument("train: label outside the model's classes");
      }
    }
  }

  TrainResult result;
  Network model = initial;
  result.model = model;
  const std::size_t np = model.param_count();
  std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng dropout_rng = make_rng(config.seed, "cnn-dropout");
  Network::Workspace ws;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng shuffle_rng = make_rng(config.seed, "cnn-shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const Sample& s = train_set[order[b]];
        const auto p = model.forward(s.input, &ws, &dropout_rng);
        loss_sum += cross_entropy(p, {s.label, static_cast<int>(p.size())});
        correct += argmax(p) == s.label;
        model.backward(ws, s.label, grad);
      }
      const double inv = 1.0 / double(end - start);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, double(step));
      const double bc2 = 1.0 - std::pow(config.beta2, double(step));
      auto params = model.params();
      for (std::size_t j = 0; j < np; ++j) {
        const double gj = grad[j] * inv;
        m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * gj;
        v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * gj * gj;
        params[j] -= config.learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + config.epsilon);
      }
    }
    const Evaluation val = evaluate(model, val_set);
    result.history.push_back({epoch, loss_sum / double(order.size()), double(correct) / double(order.size()),
                              val.loss, val.accuracy});
    if (val.loss < best_val) {
      best_val = val.loss;
      result.model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

double gradient_check(const Network& model, const Tensor3& input, int label, double step,
                      std::optional<std::size_t> max_params) {
  Network probe = model;
  Network::Workspace ws;
  probe.forward(input, &ws);
  std::vector<double> analytic(probe.param_count(), 0.0);
  probe.backward(ws, label, analytic);
  const OneHotLabel y{label, static_cast<int>(probe.num_classes())};

  const std::size_t np = probe.param_count();
  const std::size_t count = max_params ? std::min(*max_params, np) : np;
  double worst = 0.0;
  auto params = probe.params();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = count == np ? k : (k * np) / count;
    const double saved = params[j];
    params[j] = saved + step;
    const double up = cross_entropy(probe.forward(input), y);
    params[j] = saved - step;
    const double down = cross_entropy(probe.forward(input), y);
    params[j] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[j]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[j]) / denom);
  }
  return worst;
}

namespace {
constexpr std::string_view kCnnMagic = "SBCNNMOD";
constexpr std::uint32_t kCnnVersion = 1;
}  // namespace

std::vector<std::uint8_t> Network::serialize() const {
  binio::Writer w;
  w.magic(kCnnMagic);
  w.u32(kCnnVersion);
  w.u32(static_cast<std::uint32_t>(input_.height));
  w.u32(static_cast<std::uint32_t>(input_.width));
  w.u32(static_cast<std::uint32_t>(input_.channels));
  w.u32(static_cast<std::uint32_t>(specs_.size()));
  for (const LayerSpec& spec : specs_) {
    std::visit(Overload{
                   [&](const Conv2DSpec& c) {
                     w.u8(0);
                     w.u32(static_cast<std::uint32_t>(c.filters));
                     w.u32(static_cast<std::uint32_t>(c.kernel));
                     w.u8(c.padding == Padding::same);
                     w.u8(c.activation == Activation::relu);
                   },
                   [&](const MaxPoolSpec& p) {
                     w.u8(1);
                     w.u32(static_cast<std::uint32_t>(p.pool));
                     w.u32(static_cast<std::uint32_t>(p.stride));
                     w.u8(p.ceil_mode);
                   },
                   [&](const DenseSpec& d) {
                     w.u8(2);
                     w.u32(static_cast<std::uint32_t>(d.units));
                     w.u8(d.activation == Activation::relu);
                   },
                   [&](const DropoutSpec& d) {
                     w.u8(3);
                     w.f64(d.rate);
                   },
               },
               spec);
  }
  w.u64(params_.size());
  for (double p : params_) w.f64(p);
  return w.take();
}

Network Network::deserialize(std::span<const std::uint8_t> bytes, const std::string& origin) {
  binio::Reader r(bytes, origin);
  r.expect_magic(kCnnMagic);
  if (const auto v = r.u32(); v != kCnnVersion) r.fail("unsupported network format version " + std::to_string(v));
  Shape3 input;
  input.height = static_cast<int>(r.u32());
  input.width = static_cast<int>(r.u32());
  input.channels = static_cast<int>(r.u32());
  std::vector<LayerSpec> specs(r.u32());
  for (LayerSpec& spec : specs) {
    switch (r.u8()) {
      case 0: {
        Conv2DSpec c;
        c.filters = static_cast<int>(r.u32());
        c.kernel = static_cast<int>(r.u32());
        c.padding = r.u8() ? Padding::same : Padding::valid;
        c.activation = r.u8() ? Activation::relu : Activation::none;
        spec = c;
        break;
      }
      case 1: {
        MaxPoolSpec p;
        p.pool = static_cast<int>(r.u32());
        p.stride = static_cast<int>(r.u32());
        p.ceil_mode = r.u8() != 0;
        spec = p;
        break;
      }
      case 2: {
        DenseSpec d;
        d.units = static_cast<int>(r.u32());
        d.activation = r.u8() ? Activation::relu : Activation::none;
        spec = d;
        break;
      }
      case 3: spec = DropoutSpec{r.f64()}; break;
      default: r.fail("unknown layer tag");
    }
  }
  Network net;
  try {
    net = Network(input, std::move(specs));
  } catch (const std::invalid_argument& e) {
    r.fail(std::string("invalid architecture: ") + e.what());
  }
  if (r.u64() != net.param_count()) r.fail("parameter count does not match architecture");
  for (double& p : net.params_) p = r.f64();
  r.expect_end();
  return net;
}

void Network::save(const std::filesystem::path& path) const { binio::write_file(path, serialize()); }

Network Network::load(const std::filesystem::path& path) { return deserialize(binio::read_file(path), path.string()); }

}  // namespace signbridge::cnn
