#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace perturbopt::nn {

enum class Activation { identity, relu, tanh };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::identity;
  bool bias = true;
  bool operator==(const DenseLayer&) const = default;
};

/// Valid padding, stride 1. Weights are stored [out_ch][in_ch][kh][kw].
struct Conv2dLayer {
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  Activation activation = Activation::identity;
  bool bias = true;
  bool operator==(const Conv2dLayer&) const = default;
};

struct FlattenLayer {
  bool operator==(const FlattenLayer&) const = default;
};

using LayerSpec = std::variant<DenseLayer, Conv2dLayer, FlattenLayer>;

enum class LossHead { softmax_cross_entropy, mean_squared_error };

/// Feed-forward architecture description.
///
/// `input_shape` is the per-example input shape: {features} for dense-only
/// models or {channels, height, width} when the first layer is a convolution.
/// It may be left empty for models whose first layer is dense; it is then
/// inferred as {first.in}.
///
/// The mean-squared-error head uses 0.5 * ||prediction - target||^2 per
/// example, so a linear model x -> w.x has Hessian (1/n) X^T X exactly.
struct ModelSpec {
  std::vector<std::size_t> input_shape;
  std::vector<LayerSpec> layers;
  LossHead loss_head = LossHead::softmax_cross_entropy;

  /// Throws ValidationError when layers do not compose.
  void validate() const;

  std::vector<std::size_t> resolved_input_shape() const;
  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t parameter_count() const;

  bool operator==(const ModelSpec&) const = default;
};

/// Per-layer tensor shapes after shape inference. Entry i is the input shape
/// of layer i; the last entry is the model output shape.
std::vector<std::vector<std::size_t>> infer_shapes(const ModelSpec& model);

std::size_t weight_count(const LayerSpec& layer);
std::size_t bias_count(const LayerSpec& layer);

std::string_view to_string(Activation a);
std::string_view to_string(LossHead h);
Activation activation_from_string(std::string_view s);
LossHead loss_head_from_string(std::string_view s);

/// Convenience builder for fully connected networks: sizes {in, h1, ..., out};
/// hidden layers use `hidden`, the output layer is linear.
ModelSpec make_mlp(const std::vector<std::size_t>& sizes, Activation hidden, LossHead head);

}  // namespace perturbopt::nn
