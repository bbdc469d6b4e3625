#include "occur/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace occur {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> z) {
  double hi = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void activate(Activation act, std::span<double> z) {
  switch (act) {
    case Activation::relu:
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::sigmoid:
      for (double& v : z) v = sigmoid(v);
      break;
    case Activation::softmax:
      softmax_inplace(z);
      break;
  }
}

// out = W x + b for one layer.
void affine(const LayerSpec& layer, const double* w, std::span<const double> in, std::span<double> out) {
  const double* bias = w + layer.fan_in * layer.fan_out;
  for (std::size_t o = 0; o < layer.fan_out; ++o) {
    const double* row = w + o * layer.fan_in;
    double s = bias[o];
    for (std::size_t i = 0; i < layer.fan_in; ++i) s += row[i] * in[i];
    out[o] = s;
  }
}

// Per-layer activations for one input: acts[0] = x, acts[l+1] = output of layer l.
struct Trace {
  std::vector<std::vector<double>> acts;
};

Trace run(const ModelState& model, std::span<const double> x) {
  if (x.size() != model.input_size()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " values, model expects " +
                                std::to_string(model.input_size()));
  }
  Trace t;
  t.acts.reserve(model.layers.size() + 1);
  t.acts.emplace_back(x.begin(), x.end());
  std::size_t offset = 0;
  for (const LayerSpec& layer : model.layers) {
    std::vector<double> out(layer.fan_out);
    affine(layer, model.params.data() + offset, t.acts.back(), out);
    activate(layer.activation, out);
    t.acts.push_back(std::move(out));
    offset += layer.fan_in * layer.fan_out + layer.fan_out;
  }
  return t;
}

double clip(double p) { return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip); }

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softmax") return Activation::softmax;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

std::size_t ModelState::classes() const {
  return layers.back().activation == Activation::sigmoid ? 2 : layers.back().fan_out;
}

std::size_t ModelState::layer_offset(std::size_t l) const {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < l; ++i) offset += layers[i].fan_in * layers[i].fan_out + layers[i].fan_out;
  return offset;
}

std::size_t parameter_count(std::span<const LayerSpec> layers) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.fan_in * l.fan_out + l.fan_out;
  return n;
}

void validate_layers(std::span<const LayerSpec> layers) {
  if (layers.empty()) throw std::invalid_argument("layer spec is empty");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& layer = layers[l];
    if (layer.fan_in == 0 || layer.fan_out == 0) throw std::invalid_argument("layer sizes must be positive");
    if (l > 0 && layers[l - 1].fan_out != layer.fan_in) {
      throw std::invalid_argument("layer " + std::to_string(l) + " fan_in does not match previous fan_out");
    }
    bool head = l + 1 == layers.size();
    if (!head && layer.activation == Activation::softmax) {
      throw std::invalid_argument("softmax is only allowed on the head layer");
    }
  }
  const LayerSpec& head = layers.back();
  if (head.activation == Activation::relu) throw std::invalid_argument("head activation must be sigmoid or softmax");
  if (head.activation == Activation::sigmoid && head.fan_out != 1) {
    throw std::invalid_argument("sigmoid head must have a single output");
  }
  if (head.activation == Activation::softmax && head.fan_out < 2) {
    throw std::invalid_argument("softmax head needs at least two outputs");
  }
}

std::vector<LayerSpec> classifier_layers(std::size_t inputs, std::span<const std::size_t> hidden,
                                         std::size_t classes, bool sigmoid_binary_head) {
  std::vector<LayerSpec> layers;
  std::size_t fan_in = inputs;
  for (std::size_t width : hidden) {
    layers.push_back({fan_in, width, Activation::relu});
    fan_in = width;
  }
  if (classes == 2 && sigmoid_binary_head) {
    layers.push_back({fan_in, 1, Activation::sigmoid});
  } else {
    layers.push_back({fan_in, classes, Activation::softmax});
  }
  validate_layers(layers);
  return layers;
}

ModelState init_model(std::vector<LayerSpec> layers, std::uint64_t seed) {
  validate_layers(layers);
  ModelState model;
  model.params.assign(parameter_count(layers), 0.0);
  Rng rng(seed);
  std::size_t offset = 0;
  for (const LayerSpec& layer : layers) {
    double bound = std::sqrt(6.0 / static_cast<double>(layer.fan_in));
    for (std::size_t i = 0; i < layer.fan_in * layer.fan_out; ++i) {
      model.params[offset + i] = rng.uniform(-bound, bound);
    }
    offset += layer.fan_in * layer.fan_out + layer.fan_out;
  }
  model.layers = std::move(layers);
  return model;
}

std::vector<double> forward(const ModelState& model, std::span<const double> x) {
  return std::move(run(model, x).acts.back());
}

std::vector<double> forward(const ModelState& model, const DenseArray& x) { return forward(model, x.values()); }

std::vector<double> class_probabilities(const ModelState& model, const DenseArray& x) {
  std::vector<double> out = forward(model, x);
  if (model.layers.back().activation == Activation::sigmoid) return {1.0 - out[0], out[0]};
  return out;
}

std::size_t predict_class(const ModelState& model, const DenseArray& x) {
  std::vector<double> p = class_probabilities(model, x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<double> penultimate_features(const ModelState& model, std::span<const double> x) {
  Trace t = run(model, x);
  return std::move(t.acts[t.acts.size() - 2]);
}

std::vector<double> head_logits(const ModelState& model, std::span<const double> features,
                                std::span<const double> head_params) {
  const LayerSpec& head = model.layers.back();
  if (features.size() != head.fan_in || head_params.size() != head.fan_in * head.fan_out + head.fan_out) {
    throw std::invalid_argument("head_logits: size mismatch");
  }
  std::vector<double> out(head.fan_out);
  affine(head, head_params.data(), features, out);
  return out;
}

double cross_entropy(std::span<const double> target, std::span<const double> predicted) {
  if (target.size() != predicted.size()) throw std::invalid_argument("cross_entropy: size mismatch");
  if (predicted.size() == 1) {
    double p = clip(predicted[0]);
    return -(target[0] * std::log(p) + (1.0 - target[0]) * std::log(1.0 - p));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != 0.0) loss -= target[i] * std::log(clip(predicted[i]));
  }
  return loss;
}

double cross_entropy(std::size_t label, std::span<const double> predicted) {
  if (predicted.size() == 1) {
    if (label > 1) throw std::invalid_argument("cross_entropy: binary label must be 0 or 1");
    double y = static_cast<double>(label);
    return cross_entropy(std::span<const double>(&y, 1), predicted);
  }
  if (label >= predicted.size()) throw std::invalid_argument("cross_entropy: label out of range");
  return -std::log(clip(predicted[label]));
}

double mean_loss(const ModelState& model, std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("mean_loss: empty batch");
  double total = 0.0;
  for (const Sample& s : batch) total += cross_entropy(s.label, forward(model, s.image));
  return total / static_cast<double>(batch.size());
}

double loss_and_gradient(const ModelState& model, std::span<const Sample> batch, std::vector<double>& grad) {
  if (batch.empty()) throw std::invalid_argument("gradient: empty batch");
  grad.assign(model.params.size(), 0.0);
  const std::size_t depth = model.layers.size();
  std::vector<std::size_t> offsets(depth);
  for (std::size_t l = 0; l < depth; ++l) offsets[l] = model.layer_offset(l);

  double total = 0.0;
  std::vector<double> delta, prev_delta;
  for (const Sample& s : batch) {
    Trace t = run(model, s.image.values());
    const std::vector<double>& out = t.acts.back();
    total += cross_entropy(s.label, out);

    // Softmax + CE and sigmoid + BCE share dL/dz = ŷ - y.
    delta = out;
    if (out.size() == 1) {
      delta[0] -= static_cast<double>(s.label);
    } else {
      delta[s.label] -= 1.0;
    }

    for (std::size_t l = depth; l-- > 0;) {
      const LayerSpec& layer = model.layers[l];
      const std::vector<double>& in = t.acts[l];
      double* gw = grad.data() + offsets[l];
      double* gb = gw + layer.fan_in * layer.fan_out;
      for (std::size_t o = 0; o < layer.fan_out; ++o) {
        double d = delta[o];
        if (d == 0.0) continue;
        double* row = gw + o * layer.fan_in;
        for (std::size_t i = 0; i < layer.fan_in; ++i) row[i] += d * in[i];
        gb[o] += d;
      }
      if (l == 0) break;

      const double* w = model.params.data() + offsets[l];
      prev_delta.assign(layer.fan_in, 0.0);
      for (std::size_t o = 0; o < layer.fan_out; ++o) {
        double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + o * layer.fan_in;
        for (std::size_t i = 0; i < layer.fan_in; ++i) prev_delta[i] += row[i] * d;
      }
      Activation act = model.layers[l - 1].activation;
      for (std::size_t i = 0; i < layer.fan_in; ++i) {
        double a = in[i];
        prev_delta[i] *= act == Activation::relu ? (a > 0.0 ? 1.0 : 0.0) : a * (1.0 - a);
      }
      std::swap(delta, prev_delta);
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= scale;
  return total * scale;
}

std::vector<double> gradient(const ModelState& model, std::span<const Sample> batch) {
  std::vector<double> grad;
  loss_and_gradient(model, batch, grad);
  return grad;
}

}  // namespace occur
