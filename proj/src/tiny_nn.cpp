#include "gwl/tiny_nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gwl/errors.hpp"

namespace gwl {

namespace {

constexpr std::string_view kWeightFormat = "tinynn-v1";

bool is_conv(LayerKind k) { return k == LayerKind::embed_conv3x3 || k == LayerKind::conv3x3; }

std::string layer_name(std::size_t k, const Layer& layer) {
  return "layer " + std::to_string(k) + " (" + std::string(to_string(layer.kind)) + ")";
}

void conv3x3_forward(const Layer& layer, const DualTensor& in, DualTensor& out) {
  const std::size_t H = in.shape.height, W = in.shape.width;
  const auto ci = static_cast<std::size_t>(layer.in), co = static_cast<std::size_t>(layer.out);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      double* dst = &out.value[(y * W + x) * co];
      for (std::size_t o = 0; o < co; ++o) dst[o] = layer.b[o];
      for (int ky = 0; ky < 3; ++ky) {
        const auto yy = static_cast<std::ptrdiff_t>(y) + ky - 1;
        if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(H)) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const auto xx = static_cast<std::ptrdiff_t>(x) + kx - 1;
          if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(W)) continue;
          const double* src = &in.value[(static_cast<std::size_t>(yy) * W + static_cast<std::size_t>(xx)) * ci];
          for (std::size_t o = 0; o < co; ++o) {
            const double* wk = &layer.w[((o * ci) * 3 + static_cast<std::size_t>(ky)) * 3 + static_cast<std::size_t>(kx)];
            double acc = 0;
            for (std::size_t i = 0; i < ci; ++i) acc += wk[i * 9] * src[i];
            dst[o] += acc;
          }
        }
      }
    }
  }
}

// Accumulates input adjoints and (optionally) parameter gradients.
void conv3x3_backward(const Layer& layer, DualTensor& in, const DualTensor& out, double scale,
                      std::vector<double>* dw, std::vector<double>* db) {
  const std::size_t H = in.shape.height, W = in.shape.width;
  const auto ci = static_cast<std::size_t>(layer.in), co = static_cast<std::size_t>(layer.out);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const double* g = &out.adjoint[(y * W + x) * co];
      if (db)
        for (std::size_t o = 0; o < co; ++o) (*db)[o] += scale * g[o];
      for (int ky = 0; ky < 3; ++ky) {
        const auto yy = static_cast<std::ptrdiff_t>(y) + ky - 1;
        if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(H)) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const auto xx = static_cast<std::ptrdiff_t>(x) + kx - 1;
          if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(W)) continue;
          const std::size_t src_off = (static_cast<std::size_t>(yy) * W + static_cast<std::size_t>(xx)) * ci;
          for (std::size_t o = 0; o < co; ++o) {
            if (g[o] == 0) continue;
            const std::size_t wbase = ((o * ci) * 3 + static_cast<std::size_t>(ky)) * 3 + static_cast<std::size_t>(kx);
            for (std::size_t i = 0; i < ci; ++i) {
              in.adjoint[src_off + i] += layer.w[wbase + i * 9] * g[o];
              if (dw) (*dw)[wbase + i * 9] += scale * in.value[src_off + i] * g[o];
            }
          }
        }
      }
    }
  }
}

void run_backward(const Network& net, Tape& tape, double scale, ParamGrads* grads) {
  if (!tape.ready) throw InvalidArgument("backward called without a forward pass");
  for (auto& node : tape.nodes) std::fill(node.adjoint.begin(), node.adjoint.end(), 0.0);
  tape.nodes.back().adjoint[0] = 1.0;
  const auto& layers = net.layers();
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Layer& layer = layers[k];
    DualTensor& in = tape.nodes[k];
    const DualTensor& out = tape.nodes[k + 1];
    std::vector<double>* dw = grads ? &grads->w[k] : nullptr;
    std::vector<double>* db = grads ? &grads->b[k] : nullptr;
    switch (layer.kind) {
      case LayerKind::embed_conv3x3:
      case LayerKind::conv3x3:
        conv3x3_backward(layer, in, out, scale, dw, db);
        break;
      case LayerKind::relu:
        for (std::size_t j = 0; j < in.value.size(); ++j)
          in.adjoint[j] += in.value[j] > 0 ? out.adjoint[j] : 0.0;
        break;
      case LayerKind::global_avg_pool: {
        const std::size_t hw = in.shape.height * in.shape.width;
        const std::size_t c = in.shape.channels;
        const double inv = 1.0 / static_cast<double>(hw);
        for (std::size_t p = 0; p < hw; ++p)
          for (std::size_t ch = 0; ch < c; ++ch) in.adjoint[p * c + ch] += out.adjoint[ch] * inv;
        break;
      }
      case LayerKind::dense: {
        const std::size_t ni = in.value.size();
        for (std::size_t o = 0; o < out.value.size(); ++o) {
          const double g = out.adjoint[o];
          if (db) (*db)[o] += scale * g;
          const double* row = &layer.w[o * ni];
          for (std::size_t i = 0; i < ni; ++i) {
            in.adjoint[i] += row[i] * g;
            if (dw) (*dw)[o * ni + i] += scale * in.value[i] * g;
          }
        }
        break;
      }
    }
  }
}

void append_real(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_reals(std::string& out, const std::vector<double>& xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    append_real(out, xs[i]);
  }
  out += ']';
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::embed_conv3x3: return "embed_conv3x3";
    case LayerKind::conv3x3: return "conv3x3";
    case LayerKind::relu: return "relu";
    case LayerKind::global_avg_pool: return "global_avg_pool";
    case LayerKind::dense: return "dense";
  }
  return "?";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (auto k : {LayerKind::embed_conv3x3, LayerKind::conv3x3, LayerKind::relu, LayerKind::global_avg_pool,
                 LayerKind::dense})
    if (to_string(k) == name) return k;
  throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

std::size_t Layer::weight_count() const {
  if (is_conv(kind)) return static_cast<std::size_t>(in) * static_cast<std::size_t>(out) * 9;
  if (kind == LayerKind::dense) return static_cast<std::size_t>(in) * static_cast<std::size_t>(out);
  return 0;
}

Network::Network(ConfigSpace space, std::vector<Layer> layers) : space_(std::move(space)), layers_(std::move(layers)) {
  validate();
}

void Network::validate() {
  if (!space_.has_grid()) throw InvalidArgument("network needs a 2D config space");
  if (layers_.empty()) throw InvalidArgument("network has no layers");
  shapes_.clear();
  TensorShape shape{*space_.height, *space_.width, static_cast<std::size_t>(space_.values)};
  shapes_.push_back(shape);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Layer& layer = layers_[k];
    const std::string name = layer_name(k, layer);
    switch (layer.kind) {
      case LayerKind::embed_conv3x3:
        if (k != 0) throw InvalidArgument(name + ": embedding must be the first layer");
        [[fallthrough]];
      case LayerKind::conv3x3:
        if (layer.in != static_cast<int>(shape.channels))
          throw InvalidArgument(name + ": expects " + std::to_string(layer.in) + " input channels, got " +
                                std::to_string(shape.channels));
        if (layer.out < 1) throw InvalidArgument(name + ": needs at least one output channel");
        if (shape.height * shape.width == 1 && k != 0 && layers_[k - 1].kind == LayerKind::global_avg_pool)
          throw InvalidArgument(name + ": convolution after pooling");
        shape.channels = static_cast<std::size_t>(layer.out);
        break;
      case LayerKind::relu:
        if (layer.in == 0) layer.in = static_cast<int>(shape.channels);
        if (layer.out == 0) layer.out = static_cast<int>(shape.channels);
        break;
      case LayerKind::global_avg_pool:
        if (layer.in == 0) layer.in = static_cast<int>(shape.channels);
        if (layer.out == 0) layer.out = static_cast<int>(shape.channels);
        shape.height = shape.width = 1;
        break;
      case LayerKind::dense:
        if (layer.in != static_cast<int>(shape.size()))
          throw InvalidArgument(name + ": expects " + std::to_string(layer.in) + " inputs, got " +
                                std::to_string(shape.size()));
        if (layer.out < 1) throw InvalidArgument(name + ": needs at least one output");
        shape = TensorShape{1, 1, static_cast<std::size_t>(layer.out)};
        break;
    }
    const std::size_t nw = layer.weight_count();
    const std::size_t nb = is_conv(layer.kind) || layer.kind == LayerKind::dense ? static_cast<std::size_t>(layer.out) : 0;
    if (layer.w.size() != nw)
      throw InvalidArgument(name + ": expected " + std::to_string(nw) + " weights, got " + std::to_string(layer.w.size()));
    if (layer.b.size() != nb)
      throw InvalidArgument(name + ": expected " + std::to_string(nb) + " biases, got " + std::to_string(layer.b.size()));
    shapes_.push_back(shape);
  }
  if (layers_.back().kind != LayerKind::dense || layers_.back().out != 1)
    throw InvalidArgument("final layer must be dense with a scalar output");
}

Network Network::tiny_cnn(const ConfigSpace& space, int c1, int c2) {
  const int v = space.values;
  std::vector<Layer> layers{
      {LayerKind::embed_conv3x3, v, c1, std::vector<double>(static_cast<std::size_t>(v * c1 * 9)), std::vector<double>(static_cast<std::size_t>(c1))},
      {LayerKind::relu, c1, c1, {}, {}},
      {LayerKind::conv3x3, c1, c2, std::vector<double>(static_cast<std::size_t>(c1 * c2 * 9)), std::vector<double>(static_cast<std::size_t>(c2))},
      {LayerKind::relu, c2, c2, {}, {}},
      {LayerKind::global_avg_pool, c2, c2, {}, {}},
      {LayerKind::dense, c2, 1, std::vector<double>(static_cast<std::size_t>(c2)), std::vector<double>(1)},
  };
  return Network(space, std::move(layers));
}

Network Network::dense_only(const ConfigSpace& space) {
  const auto n = static_cast<int>(space.sites) * space.values;
  std::vector<Layer> layers{{LayerKind::dense, n, 1, std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(1)}};
  return Network(space, std::move(layers));
}

void Network::init_glorot(Rng& rng) {
  for (auto& layer : layers_) {
    double fan_in = layer.in, fan_out = layer.out;
    if (is_conv(layer.kind)) {
      fan_in *= 9;
      fan_out *= 9;
    }
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : layer.w) w = (2 * rng.uniform() - 1) * a;
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
}

ParamGrads::ParamGrads(const Network& net) {
  for (const auto& layer : net.layers()) {
    w.emplace_back(layer.w.size(), 0.0);
    b.emplace_back(layer.b.size(), 0.0);
  }
}

double forward(const Network& net, const SiteMatrix& input, Tape& tape) {
  const auto& space = net.space();
  if (input.sites() != space.sites || input.values() != space.values)
    throw DimensionMismatch("network input must be " + std::to_string(space.sites) + "x" +
                            std::to_string(space.values) + ", got " + std::to_string(input.sites()) + "x" +
                            std::to_string(input.values()));
  const auto& shapes = net.shapes();
  const auto& layers = net.layers();
  tape.nodes.resize(shapes.size());
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    tape.nodes[k].shape = shapes[k];
    tape.nodes[k].value.assign(shapes[k].size(), 0.0);
    tape.nodes[k].adjoint.assign(shapes[k].size(), 0.0);
  }
  tape.nodes[0].value = input.data();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    const DualTensor& in = tape.nodes[k];
    DualTensor& out = tape.nodes[k + 1];
    switch (layer.kind) {
      case LayerKind::embed_conv3x3:
      case LayerKind::conv3x3:
        conv3x3_forward(layer, in, out);
        break;
      case LayerKind::relu:
        for (std::size_t j = 0; j < in.value.size(); ++j) out.value[j] = std::max(in.value[j], 0.0);
        break;
      case LayerKind::global_avg_pool: {
        const std::size_t hw = in.shape.height * in.shape.width;
        const std::size_t c = in.shape.channels;
        for (std::size_t p = 0; p < hw; ++p)
          for (std::size_t ch = 0; ch < c; ++ch) out.value[ch] += in.value[p * c + ch];
        for (auto& v : out.value) v /= static_cast<double>(hw);
        break;
      }
      case LayerKind::dense: {
        const std::size_t ni = in.value.size();
        for (std::size_t o = 0; o < out.value.size(); ++o) {
          const double* row = &layer.w[o * ni];
          double acc = layer.b[o];
          for (std::size_t i = 0; i < ni; ++i) acc += row[i] * in.value[i];
          out.value[o] = acc;
        }
        break;
      }
    }
  }
  tape.ready = true;
  return tape.nodes.back().value[0];
}

double forward(const Network& net, const Config& x, Tape& tape) {
  check_config(net.space(), x);
  return forward(net, SiteMatrix::one_hot(net.space(), x), tape);
}

double forward(const Network& net, const Config& x) {
  Tape tape;
  return forward(net, x, tape);
}

SiteMatrix backward_input(const Network& net, Tape& tape) {
  run_backward(net, tape, 1.0, nullptr);
  const auto& space = net.space();
  SiteMatrix grad(space.sites, space.values);
  grad.data() = tape.nodes[0].adjoint;
  return grad;
}

void backward_params(const Network& net, Tape& tape, double scale, ParamGrads& grads) {
  run_backward(net, tape, scale, &grads);
}

double sgd_train_step(Network& net, std::span<const LabelledConfig> batch, double lr) {
  if (batch.empty()) throw InvalidArgument("sgd step needs a non-empty batch");
  if (!(lr >= 0)) throw InvalidArgument("learning rate must be non-negative");
  ParamGrads grads(net);
  Tape tape;
  double loss = 0;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& sample : batch) {
    const double logit = forward(net, sample.x, tape);
    const double y = sample.label ? 1.0 : -1.0;
    const double m = -y * logit;
    // softplus(m), stable for large |m|
    loss += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    // d softplus(-y z)/dz = -y * sigmoid(-y z)
    const double sig = 1.0 / (1.0 + std::exp(-m));
    backward_params(net, tape, -y * sig * inv_n, grads);
  }
  if (lr > 0) {
    auto& layers = net.layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
      for (std::size_t j = 0; j < layers[k].w.size(); ++j) layers[k].w[j] -= lr * grads.w[k][j];
      for (std::size_t j = 0; j < layers[k].b.size(); ++j) layers[k].b[j] -= lr * grads.b[k][j];
    }
  }
  return loss * inv_n;
}

double mean_loss(const Network& net, std::span<const LabelledConfig> data) {
  if (data.empty()) return 0;
  Tape tape;
  double loss = 0;
  for (const auto& sample : data) {
    const double m = -(sample.label ? 1.0 : -1.0) * forward(net, sample.x, tape);
    loss += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  }
  return loss / static_cast<double>(data.size());
}

double accuracy(const Network& net, std::span<const LabelledConfig> data) {
  if (data.empty()) return 0;
  Tape tape;
  std::size_t hits = 0;
  for (const auto& sample : data) hits += (forward(net, sample.x, tape) > 0) == (sample.label != 0);
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double train(Network& net, std::span<const LabelledConfig> data, const TrainOptions& opts) {
  if (data.empty()) throw InvalidArgument("training set is empty");
  if (opts.batch_size == 0) throw InvalidArgument("batch size must be positive");
  Rng rng(opts.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabelledConfig> batch;
  double last = 0;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double total = 0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      batch.clear();
      for (std::size_t j = start; j < std::min(order.size(), start + opts.batch_size); ++j) batch.push_back(data[order[j]]);
      total += sgd_train_step(net, batch, opts.lr);
      ++steps;
    }
    last = total / static_cast<double>(steps);
  }
  return last;
}

Network seeded_tiny_cnn(const ConfigSpace& space, std::uint64_t seed, double output_scale, double bias_scale, int c1,
                        int c2) {
  Network net = Network::tiny_cnn(space, c1, c2);
  Rng rng(seed);
  net.init_glorot(rng);
  if (bias_scale > 0)
    for (auto& layer : net.layers())
      for (auto& b : layer.b) b = (2 * rng.uniform() - 1) * bias_scale;
  for (auto& w : net.layers().back().w) w *= output_scale;
  return net;
}

std::string serialize_weights(const Network& net) {
  const auto& space = net.space();
  std::string out = "{\"format\":\"";
  out += kWeightFormat;
  out += "\",\"space\":{\"h\":" + std::to_string(*space.height) + ",\"w\":" + std::to_string(*space.width) +
         ",\"v\":" + std::to_string(space.values) + "},\"layers\":[";
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& layer = layers[k];
    if (k) out += ',';
    out += "{\"kind\":\"";
    out += to_string(layer.kind);
    out += "\",\"in\":" + std::to_string(layer.in) + ",\"out\":" + std::to_string(layer.out) + ",\"w\":";
    append_reals(out, layer.w);
    out += ",\"b\":";
    append_reals(out, layer.b);
    out += '}';
  }
  out += "]}\n";
  return out;
}

Network parse_weights(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kWeightFormat)
      throw FormatError("weight file format must be '" + std::string(kWeightFormat) + "'");
    const auto& sp = doc.at("space");
    const auto h = sp.at("h").get<std::size_t>();
    const auto w = sp.at("w").get<std::size_t>();
    const auto v = sp.at("v").get<int>();
    if (h == 0 || w == 0 || v < 2) throw FormatError("weight file has an invalid config space");
    std::vector<Layer> layers;
    for (const auto& jl : doc.at("layers")) {
      Layer layer;
      layer.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
      layer.in = jl.value("in", 0);
      layer.out = jl.value("out", 0);
      layer.w = jl.value("w", std::vector<double>{});
      layer.b = jl.value("b", std::vector<double>{});
      layers.push_back(std::move(layer));
    }
    try {
      return Network(ConfigSpace::grid(h, w, v), std::move(layers));
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("weight file shape mismatch: ") + e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weight file is malformed: ") + e.what());
  }
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_weights(net);
  if (!out) throw IoError("failed writing " + path.string());
}

Network load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weight file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_weights(buf.str());
}

}  // namespace gwl
