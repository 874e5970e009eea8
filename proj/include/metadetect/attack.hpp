#pragma once

#include <span>
#include <vector>

#include "metadetect/nnet.hpp"

namespace metadetect {

/// Perturbation eps * sign(d loss / d x) with sign(0) = 0, before clamping.
std::vector<double> fgsm_perturbation(const ModelParams& params, const Image& img, int y, double eps);

/// Untargeted FGSM: clamp(img + eps * sign(grad_input(params, img, y)), 0, 1).
/// Rejects eps outside (0, 1].
Image fgsm(const ModelParams& params, const Image& img, int y, double eps);

struct SweepRow {
  double epsilon = 0.0;
  double accuracy = 0.0;
};

/// Accuracy on FGSM-perturbed copies of `data` for each epsilon, preceded by
/// an epsilon-0 row holding the clean accuracy. eps_list must be strictly
/// increasing within (0, 1].
std::vector<SweepRow> epsilon_sweep(const ModelParams& params, std::span<const LabelledImage> data,
                                    std::span<const double> eps_list, int jobs = 1);

struct ExamplePair {
  LabelledImage clean;
  Image adversarial;
  double epsilon = 0.0;
};

inline constexpr double kDefaultPairEpsilon = 0.01;

/// FGSM counterparts of the first n images of `data`, using the ground-truth
/// label for the gradient. Rejects n > data.size().
std::vector<ExamplePair> build_pairs(const ModelParams& params, std::span<const LabelledImage> data, double eps,
                                     std::size_t n, int jobs = 1);

/// Whether the model's argmax differs between the clean and adversarial image.
bool flips(const ModelParams& params, const ExamplePair& pair);

}  // namespace metadetect
