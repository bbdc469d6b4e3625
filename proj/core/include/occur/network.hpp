#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "occur/curriculum.hpp"
#include "occur/tensor.hpp"

namespace occur {

enum class Activation { relu, sigmoid, softmax };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation activation);

struct LayerSpec {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  Activation activation = Activation::relu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Feedforward classifier: dense layers with a sigmoid (one output, binary)
/// or softmax (k >= 2 outputs) head. Each layer stores its fan_out x fan_in
/// weights row-major followed by fan_out biases, all in `params`.
struct ModelState {
  std::vector<LayerSpec> layers;
  std::vector<double> params;
  std::uint64_t step_count = 0;

  std::size_t input_size() const { return layers.front().fan_in; }
  std::size_t output_size() const { return layers.back().fan_out; }
  /// Class count: 2 for a sigmoid head, fan_out for softmax.
  std::size_t classes() const;

  /// Offset of layer `l`'s weights inside params.
  std::size_t layer_offset(std::size_t l) const;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

std::size_t parameter_count(std::span<const LayerSpec> layers);

/// Checks fan-in chaining and head rules; throws std::invalid_argument.
void validate_layers(std::span<const LayerSpec> layers);

/// flatten -> hidden relu layers -> sigmoid (classes == 2) or softmax head.
std::vector<LayerSpec> classifier_layers(std::size_t inputs, std::span<const std::size_t> hidden,
                                         std::size_t classes, bool sigmoid_binary_head = false);

/// He-style uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
ModelState init_model(std::vector<LayerSpec> layers, std::uint64_t seed);

/// Head output ŷ: k probabilities (softmax) or a single P(class 1) (sigmoid).
std::vector<double> forward(const ModelState& model, const DenseArray& x);
std::vector<double> forward(const ModelState& model, std::span<const double> x);

/// Per-class probabilities; a sigmoid head expands to [1 - p, p].
std::vector<double> class_probabilities(const ModelState& model, const DenseArray& x);
std::size_t predict_class(const ModelState& model, const DenseArray& x);

/// Activations entering the head layer.
std::vector<double> penultimate_features(const ModelState& model, std::span<const double> x);
/// Head pre-activations given penultimate features and explicit head parameters.
std::vector<double> head_logits(const ModelState& model, std::span<const double> features,
                                std::span<const double> head_params);

inline constexpr double kProbabilityClip = 1e-12;

/// -Σ y_i log ŷ_i against a one-hot / binary target, ŷ clipped to
/// [1e-12, 1 - 1e-12]. For a single-output head, y = [label].
double cross_entropy(std::span<const double> target, std::span<const double> predicted);
/// Same loss for a class index, matching the model head layout.
double cross_entropy(std::size_t label, std::span<const double> predicted);

double mean_loss(const ModelState& model, std::span<const Sample> batch);

/// Exact gradient of the mean cross-entropy over `batch` w.r.t. params.
std::vector<double> gradient(const ModelState& model, std::span<const Sample> batch);

/// Loss and gradient in a single pass.
double loss_and_gradient(const ModelState& model, std::span<const Sample> batch, std::vector<double>& grad);

}  // namespace occur
