#include "perturbopt/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "perturbopt/errors.hpp"

namespace perturbopt::nn {

namespace {

struct LayerPlan {
  const LayerSpec* spec = nullptr;
  std::vector<std::size_t> in_shape;
  std::vector<std::size_t> out_shape;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  bool has_bias = false;
  Activation activation = Activation::identity;
};

std::vector<LayerPlan> make_plan(const ModelSpec& model) {
  const auto shapes = infer_shapes(model);
  std::vector<LayerPlan> plan;
  plan.reserve(model.layers.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    LayerPlan p;
    p.spec = &model.layers[i];
    p.in_shape = shapes[i];
    p.out_shape = shapes[i + 1];
    p.weight_offset = offset;
    offset += weight_count(model.layers[i]);
    p.bias_offset = offset;
    p.has_bias = bias_count(model.layers[i]) > 0;
    offset += bias_count(model.layers[i]);
    if (const auto* d = std::get_if<DenseLayer>(p.spec)) p.activation = d->activation;
    if (const auto* c = std::get_if<Conv2dLayer>(p.spec)) p.activation = c->activation;
    plan.push_back(std::move(p));
  }
  return plan;
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the pre-activation z and output y.
double activation_slope(Activation a, double z, double y) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
  }
  return 1.0;
}

void dense_forward(const DenseLayer& d, const LayerPlan& p, std::span<const double> w, std::size_t n,
                   std::span<const double> x, std::span<double> z) {
  const double* W = w.data() + p.weight_offset;
  const double* b = w.data() + p.bias_offset;
  for (std::size_t e = 0; e < n; ++e) {
    const double* xe = x.data() + e * d.in;
    double* ze = z.data() + e * d.out;
    for (std::size_t o = 0; o < d.out; ++o) {
      double s = p.has_bias ? b[o] : 0.0;
      const double* row = W + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) s += row[i] * xe[i];
      ze[o] = s;
    }
  }
}

void dense_backward(const DenseLayer& d, const LayerPlan& p, std::span<const double> w, std::size_t n,
                    std::span<const double> x, std::span<const double> dz, std::span<double> grad,
                    std::span<double> dx) {
  const double* W = w.data() + p.weight_offset;
  double* gW = grad.data() + p.weight_offset;
  double* gb = grad.data() + p.bias_offset;
  for (std::size_t e = 0; e < n; ++e) {
    const double* xe = x.data() + e * d.in;
    const double* dze = dz.data() + e * d.out;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double g = dze[o];
      double* grow = gW + o * d.in;
      for (std::size_t i = 0; i < d.in; ++i) grow[i] += g * xe[i];
      if (p.has_bias) gb[o] += g;
    }
    if (!dx.empty()) {
      double* dxe = dx.data() + e * d.in;
      for (std::size_t i = 0; i < d.in; ++i) dxe[i] = 0.0;
      for (std::size_t o = 0; o < d.out; ++o) {
        const double g = dze[o];
        const double* row = W + o * d.in;
        for (std::size_t i = 0; i < d.in; ++i) dxe[i] += row[i] * g;
      }
    }
  }
}

void conv_forward(const Conv2dLayer& c, const LayerPlan& p, std::span<const double> w, std::size_t n,
                  std::span<const double> x, std::span<double> z) {
  const std::size_t H = p.in_shape[1], Wd = p.in_shape[2];
  const std::size_t OH = p.out_shape[1], OW = p.out_shape[2];
  const std::size_t in_size = c.in_ch * H * Wd;
  const std::size_t out_size = c.out_ch * OH * OW;
  const double* K = w.data() + p.weight_offset;
  const double* b = w.data() + p.bias_offset;
  for (std::size_t e = 0; e < n; ++e) {
    const double* xe = x.data() + e * in_size;
    double* ze = z.data() + e * out_size;
    for (std::size_t o = 0; o < c.out_ch; ++o) {
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          double s = p.has_bias ? b[o] : 0.0;
          for (std::size_t ch = 0; ch < c.in_ch; ++ch) {
            const double* kk = K + ((o * c.in_ch + ch) * c.kernel_h) * c.kernel_w;
            const double* xc = xe + ch * H * Wd;
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const double* xr = xc + (oy + ky) * Wd + ox;
              const double* kr = kk + ky * c.kernel_w;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) s += kr[kx] * xr[kx];
            }
          }
          ze[(o * OH + oy) * OW + ox] = s;
        }
      }
    }
  }
}

void conv_backward(const Conv2dLayer& c, const LayerPlan& p, std::span<const double> w, std::size_t n,
                   std::span<const double> x, std::span<const double> dz, std::span<double> grad,
                   std::span<double> dx) {
  const std::size_t H = p.in_shape[1], Wd = p.in_shape[2];
  const std::size_t OH = p.out_shape[1], OW = p.out_shape[2];
  const std::size_t in_size = c.in_ch * H * Wd;
  const std::size_t out_size = c.out_ch * OH * OW;
  const double* K = w.data() + p.weight_offset;
  double* gK = grad.data() + p.weight_offset;
  double* gb = grad.data() + p.bias_offset;
  for (std::size_t e = 0; e < n; ++e) {
    const double* xe = x.data() + e * in_size;
    const double* dze = dz.data() + e * out_size;
    double* dxe = dx.empty() ? nullptr : dx.data() + e * in_size;
    if (dxe) std::fill(dxe, dxe + in_size, 0.0);
    for (std::size_t o = 0; o < c.out_ch; ++o) {
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          const double g = dze[(o * OH + oy) * OW + ox];
          if (p.has_bias) gb[o] += g;
          for (std::size_t ch = 0; ch < c.in_ch; ++ch) {
            const std::size_t kbase = ((o * c.in_ch + ch) * c.kernel_h) * c.kernel_w;
            const double* xc = xe + ch * H * Wd;
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const std::size_t row = (oy + ky) * Wd + ox;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                gK[kbase + ky * c.kernel_w + kx] += g * xc[row + kx];
                if (dxe) dxe[ch * H * Wd + row + kx] += K[kbase + ky * c.kernel_w + kx] * g;
              }
            }
          }
        }
      }
    }
  }
}

// Forward pass keeping every intermediate needed by the backward pass.
struct Trace {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> post;  // post[0] = input, post[i + 1] = output of layer i
};

void check_batch(const ModelSpec& model, std::span<const double> w, const Batch& batch) {
  const std::size_t d = model.parameter_count();
  if (w.size() != d) {
    throw ValidationError("parameter vector has length " + std::to_string(w.size()) + ", model expects " +
                          std::to_string(d));
  }
  const std::size_t n = batch.size();
  if (n == 0) throw ValidationError("batch is empty");
  if (batch.inputs.row_size() != model.input_size()) {
    throw ValidationError("batch example size " + std::to_string(batch.inputs.row_size()) +
                          " does not match model input size " + std::to_string(model.input_size()));
  }
}

Trace run_forward(const ModelSpec& model, const std::vector<LayerPlan>& plan, std::span<const double> w,
                  const Batch& batch) {
  const std::size_t n = batch.size();
  Trace t;
  t.post.push_back(batch.inputs.data);
  for (const auto& p : plan) {
    const std::size_t out_size = shape_product(p.out_shape);
    std::vector<double> z(n * out_size);
    const auto& x = t.post.back();
    if (const auto* d = std::get_if<DenseLayer>(p.spec)) {
      dense_forward(*d, p, w, n, x, z);
    } else if (const auto* c = std::get_if<Conv2dLayer>(p.spec)) {
      conv_forward(*c, p, w, n, x, z);
    } else {
      z = x;
    }
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = activate(p.activation, z[i]);
    t.pre.push_back(std::move(z));
    t.post.push_back(std::move(y));
  }
  (void)model;
  return t;
}

// Mean head loss; when `dout` is non-empty fills d(loss)/d(output).
double head_loss(const ModelSpec& model, const Batch& batch, std::span<const double> out, std::size_t classes,
                 std::span<double> dout) {
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  if (model.loss_head == LossHead::softmax_cross_entropy) {
    if (batch.labels.size() != n) {
      throw ValidationError("classification head needs " + std::to_string(n) + " labels, got " +
                            std::to_string(batch.labels.size()));
    }
    for (std::size_t e = 0; e < n; ++e) {
      const auto label = batch.labels[e];
      if (label < 0 || static_cast<std::size_t>(label) >= classes) {
        throw ValidationError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
      }
      const double* l = out.data() + e * classes;
      const double m = *std::max_element(l, l + classes);
      double z = 0.0;
      for (std::size_t c = 0; c < classes; ++c) z += std::exp(l[c] - m);
      const double lse = m + std::log(z);
      total += lse - l[label];
      if (!dout.empty()) {
        double* g = dout.data() + e * classes;
        for (std::size_t c = 0; c < classes; ++c) g[c] = std::exp(l[c] - lse) * inv_n;
        g[label] -= inv_n;
      }
    }
  } else {
    if (batch.targets.numel() != n * classes) {
      throw ValidationError("regression head needs targets of shape (" + std::to_string(n) + "," +
                            std::to_string(classes) + ")");
    }
    for (std::size_t i = 0; i < n * classes; ++i) {
      const double r = out[i] - batch.targets.data[i];
      total += 0.5 * r * r;
      if (!dout.empty()) dout[i] = r * inv_n;
    }
  }
  return total * inv_n;
}

}  // namespace

Tensor forward(const ModelSpec& model, std::span<const double> w, const Batch& batch) {
  check_batch(model, w, batch);
  const auto plan = make_plan(model);
  auto t = run_forward(model, plan, w, batch);
  const std::size_t outs = plan.back().out_shape[0];
  return Tensor({batch.size(), outs}, std::move(t.post.back()));
}

double loss(const ModelSpec& model, std::span<const double> w, const Batch& batch) {
  check_batch(model, w, batch);
  const auto plan = make_plan(model);
  const auto t = run_forward(model, plan, w, batch);
  return head_loss(model, batch, t.post.back(), plan.back().out_shape[0], {});
}

double loss(const ModelSpec& model, const ParamVector& w, const Batch& batch) { return loss(model, w.span(), batch); }

double loss_and_grad(const ModelSpec& model, std::span<const double> w, const Batch& batch,
                     std::span<double> grad) {
  check_batch(model, w, batch);
  if (grad.size() != w.size()) throw ValidationError("gradient buffer length mismatch");
  const auto plan = make_plan(model);
  const auto t = run_forward(model, plan, w, batch);
  const std::size_t n = batch.size();

  std::vector<double> delta(t.post.back().size());
  const double value = head_loss(model, batch, t.post.back(), plan.back().out_shape[0], delta);

  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t li = plan.size(); li-- > 0;) {
    const auto& p = plan[li];
    const auto& z = t.pre[li];
    const auto& y = t.post[li + 1];
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= activation_slope(p.activation, z[i], y[i]);

    std::vector<double> dx;
    if (li > 0) dx.resize(t.post[li].size());
    if (const auto* d = std::get_if<DenseLayer>(p.spec)) {
      dense_backward(*d, p, w, n, t.post[li], delta, grad, dx);
    } else if (const auto* c = std::get_if<Conv2dLayer>(p.spec)) {
      conv_backward(*c, p, w, n, t.post[li], delta, grad, dx);
    } else {
      dx = delta;
    }
    delta = std::move(dx);
  }
  return value;
}

std::pair<double, ParamVector> loss_and_grad(const ModelSpec& model, const ParamVector& w, const Batch& batch) {
  ParamVector g = ParamVector::zeros(w.layout);
  const double l = loss_and_grad(model, w.span(), batch, g.span());
  return {l, std::move(g)};
}

std::size_t argmax(std::span<const double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

double accuracy(const ModelSpec& model, std::span<const double> w, const Batch& batch) {
  if (model.loss_head != LossHead::softmax_cross_entropy) {
    throw ValidationError("accuracy requires a classification head");
  }
  const Tensor out = forward(model, w, batch);
  if (batch.labels.size() != batch.size()) throw ValidationError("accuracy requires one label per example");
  std::size_t correct = 0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    if (argmax(out.row(e)) == static_cast<std::size_t>(batch.labels[e])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

double accuracy(const ModelSpec& model, const ParamVector& w, const Batch& batch) {
  return accuracy(model, w.span(), batch);
}

}  // namespace perturbopt::nn
