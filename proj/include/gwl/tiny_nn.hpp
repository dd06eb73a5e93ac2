#ifndef GWL_TINY_NN_HPP
#define GWL_TINY_NN_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwl/config_space.hpp"
#include "gwl/random.hpp"

namespace gwl {

enum class LayerKind { embed_conv3x3, conv3x3, relu, global_avg_pool, dense };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

// Conv weights are [out][in][ky][kx], dense weights [out][in], both
// flattened row-major. Activations are stored height x width x channel, so a
// dense layer on the raw one-hot input indexes its weights as site * V + v.
struct Layer {
  LayerKind kind = LayerKind::relu;
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  std::size_t weight_count() const;
};

struct TensorShape {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;

  std::size_t size() const { return height * width * channels; }
};

class Network {
 public:
  Network() = default;
  // Validates the layer chain and every tensor length.
  Network(ConfigSpace space, std::vector<Layer> layers);

  // embed_conv3x3(V->c1) -> relu -> conv3x3(c1->c2) -> relu ->
  // global_avg_pool -> dense(c2->1), zero-initialised.
  static Network tiny_cnn(const ConfigSpace& space, int c1 = 3, int c2 = 8);

  // A single dense layer over the flattened one-hot input, zero-initialised.
  static Network dense_only(const ConfigSpace& space);

  // Glorot-uniform weights, zero biases.
  void init_glorot(Rng& rng);

  const ConfigSpace& space() const { return space_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  // Tensor shape entering layer k; shapes()[layers.size()] is the output.
  const std::vector<TensorShape>& shapes() const { return shapes_; }

  friend bool operator==(const Network& a, const Network& b) {
    return a.space_ == b.space_ && a.layers_ == b.layers_;
  }

 private:
  void validate();

  ConfigSpace space_;
  std::vector<Layer> layers_;
  std::vector<TensorShape> shapes_;
};

inline bool operator==(const Layer& a, const Layer& b) {
  return a.kind == b.kind && a.in == b.in && a.out == b.out && a.w == b.w && a.b == b.b;
}

// Activation value with its reverse-mode adjoint.
struct DualTensor {
  TensorShape shape;
  std::vector<double> value;
  std::vector<double> adjoint;
};

// Caller-owned activations from one forward pass.
struct Tape {
  std::vector<DualTensor> nodes;  // nodes[k] feeds layer k; back() is the logit
  bool ready = false;
};

struct ParamGrads {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  explicit ParamGrads(const Network& net);
  ParamGrads() = default;
};

// input is sites x V, any real values (the one-hot relaxation).
double forward(const Network& net, const SiteMatrix& input, Tape& tape);
double forward(const Network& net, const Config& x, Tape& tape);
double forward(const Network& net, const Config& x);

// d logit / d input for the input of the last forward pass. ReLU passes no
// gradient at exactly zero.
SiteMatrix backward_input(const Network& net, Tape& tape);

// Accumulates d(scale * logit)/d params into grads.
void backward_params(const Network& net, Tape& tape, double scale, ParamGrads& grads);

struct LabelledConfig {
  Config x;
  int label = 0;
};

// One vanilla SGD step on mean softplus(-(2 label - 1) * logit). Returns the
// mean loss before the update.
double sgd_train_step(Network& net, std::span<const LabelledConfig> batch, double lr);

double mean_loss(const Network& net, std::span<const LabelledConfig> data);
double accuracy(const Network& net, std::span<const LabelledConfig> data);

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

// Shuffled mini-batch SGD; returns the mean loss of the last epoch's steps.
double train(Network& net, std::span<const LabelledConfig> data, const TrainOptions& opts);

// Seeded TinyCNN used as a fixture: Glorot weights, biases drawn from
// uniform(-bias_scale, bias_scale), dense layer multiplied by output_scale.
Network seeded_tiny_cnn(const ConfigSpace& space, std::uint64_t seed, double output_scale = 1.0,
                        double bias_scale = 0.0, int c1 = 3, int c2 = 8);

// tinynn-v1 JSON; reals written with 17 significant digits.
std::string serialize_weights(const Network& net);
Network parse_weights(std::string_view text);
void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path);

}  // namespace gwl

#endif  // GWL_TINY_NN_HPP
