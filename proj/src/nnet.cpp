#include "metadetect/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "metadetect/affine.hpp"
#include "metadetect/parallel.hpp"
#include "metadetect/rng.hpp"

namespace metadetect {

namespace {

struct Activations {
  std::vector<double> z1;  // hidden pre-activation
  std::vector<double> a1;  // ReLU output
  std::vector<double> logits;
  std::vector<double> probs;
};

void check_input(const ModelParams& p, const Image& img) {
  if (!p.accepts(img)) throw std::invalid_argument("image dimensions do not match the model input");
}

void check_label(const ModelParams& p, int y) {
  if (y < 0 || y >= p.classes) throw std::invalid_argument("label out of range");
}

Activations run(const ModelParams& p, std::span<const double> x) {
  const std::size_t n_in = p.input_size();
  Activations act;
  act.z1.resize(p.hidden);
  act.a1.resize(p.hidden);
  for (int j = 0; j < p.hidden; ++j) {
    const double* row = &p.w1[static_cast<std::size_t>(j) * n_in];
    double s = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) s += row[i] * x[i];
    act.z1[j] = s + p.b1[j];
    act.a1[j] = act.z1[j] > 0.0 ? act.z1[j] : 0.0;
  }
  act.logits.resize(p.classes);
  for (int k = 0; k < p.classes; ++k) {
    const double* row = &p.w2[static_cast<std::size_t>(k) * p.hidden];
    double s = 0.0;
    for (int j = 0; j < p.hidden; ++j) s += row[j] * act.a1[j];
    act.logits[k] = s + p.b2[k];
  }
  act.probs = softmax(act.logits);
  return act;
}

// d loss / d logits; zero when the floored loss is flat.
std::vector<double> logit_error(const Activations& act, int y) {
  std::vector<double> d(act.probs.size(), 0.0);
  if (act.probs[y] < kProbFloor) return d;
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = act.probs[k];
  d[y] -= 1.0;
  return d;
}

// Backpropagates to the hidden pre-activation.
std::vector<double> hidden_error(const ModelParams& p, const Activations& act, std::span<const double> dlogits) {
  std::vector<double> dz1(p.hidden, 0.0);
  for (int k = 0; k < p.classes; ++k) {
    if (dlogits[k] == 0.0) continue;
    const double* row = &p.w2[static_cast<std::size_t>(k) * p.hidden];
    for (int j = 0; j < p.hidden; ++j) dz1[j] += dlogits[k] * row[j];
  }
  for (int j = 0; j < p.hidden; ++j)
    if (!(act.z1[j] > 0.0)) dz1[j] = 0.0;
  return dz1;
}

// Adds one sample's parameter gradient into g; returns the sample loss.
double accumulate(const ModelParams& p, std::span<const double> x, int y, ModelParams& g) {
  const Activations act = run(p, x);
  const auto dlogits = logit_error(act, y);
  for (int k = 0; k < p.classes; ++k) {
    if (dlogits[k] == 0.0) continue;
    double* row = &g.w2[static_cast<std::size_t>(k) * p.hidden];
    for (int j = 0; j < p.hidden; ++j) row[j] += dlogits[k] * act.a1[j];
    g.b2[k] += dlogits[k];
  }
  const auto dz1 = hidden_error(p, act, dlogits);
  const std::size_t n_in = p.input_size();
  for (int j = 0; j < p.hidden; ++j) {
    if (dz1[j] == 0.0) continue;
    double* row = &g.w1[static_cast<std::size_t>(j) * n_in];
    for (std::size_t i = 0; i < n_in; ++i) row[i] += dz1[j] * x[i];
    g.b1[j] += dz1[j];
  }
  return -std::log(std::max(act.probs[y], kProbFloor));
}

void fill(ModelParams& g, double v) {
  std::fill(g.w1.begin(), g.w1.end(), v);
  std::fill(g.b1.begin(), g.b1.end(), v);
  std::fill(g.w2.begin(), g.w2.end(), v);
  std::fill(g.b2.begin(), g.b2.end(), v);
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

AffineTransform draw_augmentation(SplitMix64& rng, const AugmentRanges& r, int w, int h) {
  const double rot = rng.uniform(-r.rotation_deg, r.rotation_deg);
  const double shear = rng.uniform(-r.shear_deg, r.shear_deg);
  const double scale = rng.uniform(1.0 - r.scale_delta, 1.0 + r.scale_delta);
  const double tx = rng.uniform(-r.translate_frac, r.translate_frac);
  const double ty = rng.uniform(-r.translate_frac, r.translate_frac);
  AffineTransform t = rotation_about_center(rot, w, h);
  t = compose(t, shear_about_center(shear, w, h));
  t = compose(t, scale_about_center(scale, w, h));
  return compose(t, translation(tx, ty, w, h));
}

}  // namespace

void ModelParams::validate() const {
  if (height <= 0 || width <= 0 || (channels != 1 && channels != 3))
    throw std::invalid_argument("model input shape is invalid");
  if (hidden <= 0 || classes < 2) throw std::invalid_argument("model layer sizes are invalid");
  if (w1.size() != static_cast<std::size_t>(hidden) * input_size() || b1.size() != static_cast<std::size_t>(hidden) ||
      w2.size() != static_cast<std::size_t>(classes) * hidden || b2.size() != static_cast<std::size_t>(classes))
    throw std::invalid_argument("model parameter buffers have the wrong length");
  for (const auto* v : {&w1, &b1, &w2, &b2})
    for (double x : *v)
      if (!std::isfinite(x)) throw std::invalid_argument("model parameters must be finite");
}

ModelParams zero_params(int height, int width, int channels, int hidden, int classes) {
  ModelParams p{height, width, channels, hidden, classes, {}, {}, {}, {}};
  p.w1.assign(static_cast<std::size_t>(hidden) * p.input_size(), 0.0);
  p.b1.assign(hidden, 0.0);
  p.w2.assign(static_cast<std::size_t>(classes) * hidden, 0.0);
  p.b2.assign(classes, 0.0);
  p.validate();
  return p;
}

ModelParams init_params(int height, int width, int channels, int hidden, int classes, std::uint64_t seed) {
  ModelParams p = zero_params(height, width, channels, hidden, classes);
  SplitMix64 rng(derive_seed(seed, 0x1417));
  const double lim1 = std::sqrt(6.0 / static_cast<double>(p.input_size() + hidden));
  for (double& w : p.w1) w = rng.uniform(-lim1, lim1);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + classes));
  for (double& w : p.w2) w = rng.uniform(-lim2, lim2);
  return p;
}

void round_to_float32(ModelParams& params) {
  for (auto* v : {&params.w1, &params.b1, &params.w2, &params.b2})
    for (double& x : *v) x = static_cast<float>(x);
}

std::vector<double> softmax(std::span<const double> z) {
  if (z.empty()) return {};
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = static_cast<int>(i);
  return best;
}

std::vector<double> logits(const ModelParams& params, const Image& img) {
  check_input(params, img);
  return run(params, img.pixels()).logits;
}

Prediction forward(const ModelParams& params, const Image& img) {
  check_input(params, img);
  Prediction pred;
  pred.probs = run(params, img.pixels()).probs;
  pred.label = argmax(pred.probs);
  pred.confidence = pred.probs[pred.label];
  return pred;
}

double loss(const ModelParams& params, const Image& img, int y) {
  check_input(params, img);
  check_label(params, y);
  const auto probs = run(params, img.pixels()).probs;
  return -std::log(std::max(probs[y], kProbFloor));
}

std::vector<double> grad_input(const ModelParams& params, const Image& img, int y) {
  check_input(params, img);
  check_label(params, y);
  const Activations act = run(params, img.pixels());
  const auto dz1 = hidden_error(params, act, logit_error(act, y));
  const std::size_t n_in = params.input_size();
  std::vector<double> dx(n_in, 0.0);
  for (int j = 0; j < params.hidden; ++j) {
    if (dz1[j] == 0.0) continue;
    const double* row = &params.w1[static_cast<std::size_t>(j) * n_in];
    for (std::size_t i = 0; i < n_in; ++i) dx[i] += dz1[j] * row[i];
  }
  return dx;
}

ModelParams grad_params(const ModelParams& params, std::span<const LabelledImage> batch) {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  ModelParams g = zero_params(params.height, params.width, params.channels, params.hidden, params.classes);
  for (const auto& s : batch) {
    check_input(params, s.image);
    check_label(params, s.label);
    accumulate(params, s.image.pixels(), s.label, g);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto* v : {&g.w1, &g.b1, &g.w2, &g.b2})
    for (double& x : *v) x *= inv;
  return g;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
}

ModelParams train(std::span<const LabelledImage> data, const TrainConfig& cfg, TrainLog* log) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("cannot train on an empty dataset");
  const Image& first = data.front().image;
  int classes = 0;
  for (const auto& s : data) {
    if (!s.image.same_shape(first)) throw std::invalid_argument("training images differ in shape");
    classes = std::max(classes, s.label + 1);
  }
  classes = std::max(classes, 2);

  ModelParams p = init_params(first.height(), first.width(), first.channels(), cfg.hidden, classes, cfg.seed);
  ModelParams g = zero_params(first.height(), first.width(), first.channels(), cfg.hidden, classes);
  SplitMix64 order_rng(derive_seed(cfg.seed, 0x0bde));
  SplitMix64 aug_rng(derive_seed(cfg.seed, 0xa06));

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[order_rng.below(static_cast<std::uint32_t>(i))]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      fill(g, 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto& s = data[order[b]];
        if (cfg.augment) {
          const Image aug = warp(s.image, draw_augmentation(aug_rng, cfg.ranges, s.image.width(), s.image.height()));
          epoch_loss += accumulate(p, aug.pixels(), s.label, g);
        } else {
          epoch_loss += accumulate(p, s.image.pixels(), s.label, g);
        }
      }
      const double step = -cfg.learning_rate / static_cast<double>(end - start);
      axpy(step, g.w1, p.w1);
      axpy(step, g.b1, p.b1);
      axpy(step, g.w2, p.w2);
      axpy(step, g.b2, p.b2);
    }
    if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  round_to_float32(p);
  return p;
}

double evaluate_accuracy(const Classifier& classify, std::span<const LabelledImage> data) {
  if (data.empty()) throw std::invalid_argument("accuracy of an empty dataset");
  std::size_t correct = 0;
  for (const auto& s : data)
    if (classify(s.image) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double evaluate_accuracy(const ModelParams& params, std::span<const LabelledImage> data, int jobs) {
  if (data.empty()) throw std::invalid_argument("accuracy of an empty dataset");
  std::vector<char> hit(data.size(), 0);
  parallel_for(data.size(), jobs, [&](std::size_t i) {
    hit[i] = forward(params, data[i].image).label == data[i].label;
  });
  std::size_t correct = 0;
  for (char h : hit) correct += h ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace metadetect
