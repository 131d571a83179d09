#include "perturbopt/nn/model.hpp"

#include <string>

#include "perturbopt/errors.hpp"
#include "perturbopt/nn/tensor.hpp"

namespace perturbopt::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

}  // namespace

std::vector<std::size_t> ModelSpec::resolved_input_shape() const {
  if (!input_shape.empty()) return input_shape;
  if (layers.empty()) throw ValidationError("model has no layers");
  if (const auto* d = std::get_if<DenseLayer>(&layers.front())) return {d->in};
  throw ValidationError("input_shape is required when the first layer is not dense");
}

std::vector<std::vector<std::size_t>> infer_shapes(const ModelSpec& model) {
  if (model.layers.empty()) throw ValidationError("model must have at least one layer");
  std::vector<std::vector<std::size_t>> shapes;
  shapes.push_back(model.resolved_input_shape());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& cur = shapes.back();
    const std::string where = "layer " + std::to_string(i) + ": ";
    std::vector<std::size_t> next = std::visit(
        overloaded{
            [&](const DenseLayer& d) -> std::vector<std::size_t> {
              if (d.in == 0 || d.out == 0) throw ValidationError(where + "dense dimensions must be positive");
              if (cur.size() != 1) {
                throw ValidationError(where + "dense layer needs a flat input, got " + shape_str(cur) +
                                      " (insert a flatten layer)");
              }
              if (cur[0] != d.in) {
                throw ValidationError(where + "dense in=" + std::to_string(d.in) + " but incoming size is " +
                                      std::to_string(cur[0]));
              }
              return {d.out};
            },
            [&](const Conv2dLayer& c) -> std::vector<std::size_t> {
              if (c.in_ch == 0 || c.out_ch == 0 || c.kernel_h == 0 || c.kernel_w == 0) {
                throw ValidationError(where + "conv2d dimensions must be positive");
              }
              if (cur.size() != 3) throw ValidationError(where + "conv2d needs (C,H,W) input, got " + shape_str(cur));
              if (cur[0] != c.in_ch) {
                throw ValidationError(where + "conv2d in_ch=" + std::to_string(c.in_ch) + " but incoming channels " +
                                      std::to_string(cur[0]));
              }
              if (cur[1] < c.kernel_h || cur[2] < c.kernel_w) {
                throw ValidationError(where + "kernel larger than input " + shape_str(cur));
              }
              return {c.out_ch, cur[1] - c.kernel_h + 1, cur[2] - c.kernel_w + 1};
            },
            [&](const FlattenLayer&) -> std::vector<std::size_t> { return {shape_product(cur)}; },
        },
        model.layers[i]);
    shapes.push_back(std::move(next));
  }
  if (shapes.back().size() != 1) throw ValidationError("model output must be flat; add a flatten layer");
  return shapes;
}

void ModelSpec::validate() const {
  (void)infer_shapes(*this);
  if (parameter_count() == 0) throw ValidationError("model has no trainable parameters");
  if (loss_head == LossHead::softmax_cross_entropy && output_size() < 2) {
    throw ValidationError("softmax cross-entropy head needs at least 2 outputs");
  }
}

std::size_t ModelSpec::input_size() const { return shape_product(resolved_input_shape()); }

std::size_t ModelSpec::output_size() const { return infer_shapes(*this).back()[0]; }

std::size_t weight_count(const LayerSpec& layer) {
  return std::visit(overloaded{
                        [](const DenseLayer& d) { return d.in * d.out; },
                        [](const Conv2dLayer& c) { return c.out_ch * c.in_ch * c.kernel_h * c.kernel_w; },
                        [](const FlattenLayer&) { return std::size_t{0}; },
                    },
                    layer);
}

std::size_t bias_count(const LayerSpec& layer) {
  return std::visit(overloaded{
                        [](const DenseLayer& d) { return d.bias ? d.out : 0; },
                        [](const Conv2dLayer& c) { return c.bias ? c.out_ch : 0; },
                        [](const FlattenLayer&) { return std::size_t{0}; },
                    },
                    layer);
}

std::size_t ModelSpec::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += weight_count(l) + bias_count(l);
  return n;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

std::string_view to_string(LossHead h) {
  switch (h) {
    case LossHead::softmax_cross_entropy: return "softmax_cross_entropy";
    case LossHead::mean_squared_error: return "mean_squared_error";
  }
  return "softmax_cross_entropy";
}

Activation activation_from_string(std::string_view s) {
  if (s == "identity" || s == "linear" || s == "none") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ValidationError("unknown activation '" + std::string(s) + "'");
}

LossHead loss_head_from_string(std::string_view s) {
  if (s == "softmax_cross_entropy" || s == "softmax-cross-entropy" || s == "cross_entropy") {
    return LossHead::softmax_cross_entropy;
  }
  if (s == "mean_squared_error" || s == "mean-squared-error" || s == "mse") return LossHead::mean_squared_error;
  throw ValidationError("unknown loss head '" + std::string(s) + "'");
}

ModelSpec make_mlp(const std::vector<std::size_t>& sizes, Activation hidden, LossHead head) {
  if (sizes.size() < 2) throw ValidationError("make_mlp needs at least input and output sizes");
  ModelSpec m;
  m.loss_head = head;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    m.layers.emplace_back(DenseLayer{sizes[i], sizes[i + 1], last ? Activation::identity : hidden, true});
  }
  return m;
}

}  // namespace perturbopt::nn
