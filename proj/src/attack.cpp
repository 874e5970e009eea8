#include "metadetect/attack.hpp"

#include <cmath>
#include <stdexcept>

#include "metadetect/parallel.hpp"

namespace metadetect {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
}

}  // namespace

std::vector<double> fgsm_perturbation(const ModelParams& params, const Image& img, int y, double eps) {
  check_eps(eps);
  auto eta = grad_input(params, img, y);
  for (double& g : eta) g = g > 0.0 ? eps : (g < 0.0 ? -eps : 0.0);
  return eta;
}

Image fgsm(const ModelParams& params, const Image& img, int y, double eps) {
  const auto eta = fgsm_perturbation(params, img, y, eps);
  std::vector<double> px(img.pixels().begin(), img.pixels().end());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] += eta[i];
  clamp_unit(px);
  return Image(img.height(), img.width(), img.channels(), std::move(px));
}

std::vector<SweepRow> epsilon_sweep(const ModelParams& params, std::span<const LabelledImage> data,
                                    std::span<const double> eps_list, int jobs) {
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    check_eps(eps_list[i]);
    if (i > 0 && !(eps_list[i] > eps_list[i - 1]))
      throw std::invalid_argument("epsilon list must be strictly increasing");
  }
  std::vector<SweepRow> rows;
  rows.push_back({0.0, evaluate_accuracy(params, data, jobs)});
  for (double eps : eps_list) {
    Dataset attacked(data.size());
    parallel_for(data.size(), jobs, [&](std::size_t i) {
      attacked[i] = {fgsm(params, data[i].image, data[i].label, eps), data[i].label};
    });
    rows.push_back({eps, evaluate_accuracy(params, attacked, jobs)});
  }
  return rows;
}

std::vector<ExamplePair> build_pairs(const ModelParams& params, std::span<const LabelledImage> data, double eps,
                                     std::size_t n, int jobs) {
  check_eps(eps);
  if (n > data.size()) throw std::invalid_argument("requested more pairs than images available");
  std::vector<ExamplePair> pairs(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    pairs[i] = {data[i], fgsm(params, data[i].image, data[i].label, eps), eps};
  });
  return pairs;
}

bool flips(const ModelParams& params, const ExamplePair& pair) {
  return forward(params, pair.clean.image).label != forward(params, pair.adversarial).label;
}

}  // namespace metadetect
