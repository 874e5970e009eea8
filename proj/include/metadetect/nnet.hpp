#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "metadetect/image.hpp"
#include "metadetect/synthdata.hpp"

namespace metadetect {

/// flatten -> dense(hidden, ReLU) -> dense(classes) -> softmax.
/// w1 is hidden x input_size and w2 is classes x hidden, both row-major; the
/// flattened input is the image's pixel buffer in storage order.
struct ModelParams {
  int height = 0;
  int width = 0;
  int channels = 0;
  int hidden = 0;
  int classes = 0;
  std::vector<double> w1, b1, w2, b2;

  std::size_t input_size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  /// Throws std::invalid_argument on inconsistent sizes or non-finite entries.
  void validate() const;
  bool accepts(const Image& img) const {
    return img.height() == height && img.width() == width && img.channels() == channels;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// All-zero parameters of the given shape.
ModelParams zero_params(int height, int width, int channels, int hidden, int classes);

/// Uniform(+-sqrt(6/(fan_in+fan_out))) weights and zero biases.
ModelParams init_params(int height, int width, int channels, int hidden, int classes, std::uint64_t seed);

/// Rounds every entry to the nearest float32 so checkpoints round-trip exactly.
void round_to_float32(ModelParams& params);

struct Prediction {
  std::vector<double> probs;
  int label = 0;
  double confidence = 0.0;
};

inline constexpr double kProbFloor = 1e-12;

std::vector<double> softmax(std::span<const double> logits);
/// Argmax with lowest-index tie-break.
int argmax(std::span<const double> values);

std::vector<double> logits(const ModelParams& params, const Image& img);
Prediction forward(const ModelParams& params, const Image& img);

/// -log(max(probs[y], 1e-12)).
double loss(const ModelParams& params, const Image& img, int y);

/// d loss / d pixel, laid out like the image buffer.
std::vector<double> grad_input(const ModelParams& params, const Image& img, int y);

/// Mean cross-entropy gradient over the batch, packed in a ModelParams of the
/// same shape.
ModelParams grad_params(const ModelParams& params, std::span<const LabelledImage> batch);

/// Per-sample random affine draw used when TrainConfig::augment is set.
/// Ranges are symmetric about the identity.
struct AugmentRanges {
  double rotation_deg = 5.0;
  double shear_deg = 3.0;
  double scale_delta = 0.1;      // factor in [1-d, 1+d]
  double translate_frac = 0.03;  // per axis
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 32;
  int epochs = 25;
  bool augment = true;
  std::uint64_t seed = 1;
  int hidden = 128;
  AugmentRanges ranges{};

  void validate() const;
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean per-sample loss seen during each epoch
};

/// Minibatch SGD from init_params(seed). Single-threaded and bit-reproducible
/// for a fixed (data, cfg). The result is rounded to float32 precision.
ModelParams train(std::span<const LabelledImage> data, const TrainConfig& cfg, TrainLog* log = nullptr);

using Classifier = std::function<int(const Image&)>;

double evaluate_accuracy(const Classifier& classify, std::span<const LabelledImage> data);
double evaluate_accuracy(const ModelParams& params, std::span<const LabelledImage> data, int jobs = 1);

}  // namespace metadetect
