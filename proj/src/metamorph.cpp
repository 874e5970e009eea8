#include "metadetect/metamorph.hpp"

#include <cmath>
#include <stdexcept>

#include "metadetect/checkpoint.hpp"
#include "metadetect/parallel.hpp"

namespace metadetect {

namespace {

// Welford accumulation in a fixed order.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double stddev() const { return count < 2 ? 0.0 : std::sqrt(m2 / static_cast<double>(count - 1)); }
};

}  // namespace

VariationMeasurement measure_variation(const ModelParams& params, const Image& img, const AffineTransform& t) {
  const Prediction before = forward(params, img);
  const Prediction after = forward(params, warp(img, t));
  VariationMeasurement m;
  m.l1 = before.label;
  m.v1 = 100.0 * before.confidence;
  m.v2 = 100.0 * after.probs[m.l1];
  m.delta = std::abs(m.v1 - m.v2);
  return m;
}

double ResponseTrace::delta(std::size_t step) const { return std::abs(v1 - v2.at(step)); }

std::vector<double> ResponseTrace::deltas() const {
  std::vector<double> out(v2.size());
  for (std::size_t k = 0; k < v2.size(); ++k) out[k] = std::abs(v1 - v2[k]);
  return out;
}

ResponseTrace trace_response(const ModelParams& params, const TransformSchedule& sched, const Image& img,
                             std::size_t max_steps) {
  const Prediction before = forward(params, img);
  ResponseTrace tr;
  tr.l1 = before.label;
  tr.v1 = 100.0 * before.confidence;
  const std::size_t n = std::min(max_steps, sched.size());
  tr.v2.reserve(n);
  tr.labels.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Prediction after =
        forward(params, warp(img, transform_for(sched.kind, sched.params[k], img.width(), img.height())));
    tr.v2.push_back(100.0 * after.probs[tr.l1]);
    tr.labels.push_back(after.label);
  }
  return tr;
}

std::vector<ResponseTrace> trace_responses(const ModelParams& params, const TransformSchedule& sched,
                                           std::span<const Image> images, int jobs) {
  std::vector<ResponseTrace> out(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) { out[i] = trace_response(params, sched, images[i]); });
  return out;
}

StepStatistics step_statistics(std::span<const ResponseTrace> traces) {
  if (traces.size() < 2) throw std::invalid_argument("step statistics need at least two samples");
  const std::size_t steps = traces.front().v2.size();
  std::vector<RunningStats> acc(steps);
  for (const auto& tr : traces) {
    if (tr.v2.size() != steps) throw std::invalid_argument("response traces differ in length");
    for (std::size_t k = 0; k < steps; ++k) acc[k].update(tr.delta(k));
  }
  StepStatistics s;
  s.mean.reserve(steps);
  s.stddev.reserve(steps);
  for (const auto& a : acc) {
    s.mean.push_back(a.mean);
    s.stddev.push_back(a.stddev());
  }
  return s;
}

void CalibrationProfile::validate() const {
  if (schedule.kind != kind) throw std::invalid_argument("profile schedule kind does not match its kind");
  if (schedule.size() == 0) throw std::invalid_argument("profile schedule is empty");
  if (mean.size() != schedule.size() || stddev.size() != schedule.size())
    throw std::invalid_argument("profile statistics do not match the schedule length");
  for (std::size_t k = 0; k < stddev.size(); ++k)
    if (!(stddev[k] >= 0.0) || !std::isfinite(mean[k])) throw std::invalid_argument("profile statistics are invalid");
  if (sample_count < 2) throw std::invalid_argument("profile sample_count must be >= 2");
  if (!(multiplier >= 0.0) || !std::isfinite(multiplier)) throw std::invalid_argument("profile multiplier is invalid");
}

CalibrationProfile calibrate_from_traces(const TransformSchedule& sched, std::span<const ResponseTrace> traces,
                                         double multiplier, std::string checksum) {
  if (traces.size() < 2) throw std::invalid_argument("calibration needs at least two clean images");
  for (const auto& tr : traces)
    if (tr.v2.size() != sched.size()) throw std::invalid_argument("trace length does not match the schedule");
  StepStatistics stats = step_statistics(traces);
  CalibrationProfile p;
  p.kind = sched.kind;
  p.schedule = sched;
  p.mean = std::move(stats.mean);
  p.stddev = std::move(stats.stddev);
  p.multiplier = multiplier;
  p.sample_count = traces.size();
  p.model_checksum = std::move(checksum);
  p.validate();
  return p;
}

CalibrationProfile calibrate(const ModelParams& params, std::span<const Image> clean, TransformKind kind,
                             std::size_t steps, double multiplier, int jobs) {
  if (clean.size() < 2) throw std::invalid_argument("calibration needs at least two clean images");
  const TransformSchedule sched = schedule(kind, steps);
  const auto traces = trace_responses(params, sched, clean, jobs);
  CalibrationProfile p = calibrate_from_traces(sched, traces, multiplier, model_checksum(params));
  p.created_with.calibration_digests.reserve(clean.size());
  for (const auto& img : clean) p.created_with.calibration_digests.push_back(to_hex(image_digest(img)));
  return p;
}

CalibrationProfile mr_rotation(const ModelParams& params, std::span<const Image> clean, int jobs) {
  return calibrate(params, clean, TransformKind::Rotation, kDefaultSteps, kDefaultMultiplier, jobs);
}
CalibrationProfile mr_shear(const ModelParams& params, std::span<const Image> clean, int jobs) {
  return calibrate(params, clean, TransformKind::Shear, kDefaultSteps, kDefaultMultiplier, jobs);
}
CalibrationProfile mr_scale(const ModelParams& params, std::span<const Image> clean, int jobs) {
  return calibrate(params, clean, TransformKind::Scale, kDefaultSteps, kDefaultMultiplier, jobs);
}
CalibrationProfile mr_translate(const ModelParams& params, std::span<const Image> clean, int jobs) {
  return calibrate(params, clean, TransformKind::Translate, kDefaultSteps, kDefaultMultiplier, jobs);
}

std::optional<std::size_t> first_trigger(const CalibrationProfile& profile, std::span<const double> deltas,
                                         std::size_t max_steps) {
  const std::size_t n = std::min({max_steps, deltas.size(), profile.steps()});
  for (std::size_t k = 0; k < n; ++k)
    if (deltas[k] > profile.cutoff(k)) return k;
  return std::nullopt;
}

Verdict decide(const CalibrationProfile& profile, std::span<const double> deltas, std::size_t max_steps,
               bool short_circuit) {
  if (max_steps > profile.steps()) throw std::invalid_argument("max_steps exceeds the profile schedule");
  if (deltas.size() < max_steps) throw std::invalid_argument("fewer deltas than max_steps");
  Verdict v;
  v.triggering_step = first_trigger(profile, deltas, max_steps);
  v.decision = v.triggering_step ? Decision::Adversarial : Decision::Clean;
  const std::size_t keep = short_circuit && v.triggering_step ? *v.triggering_step + 1 : max_steps;
  v.per_step_deltas.assign(deltas.begin(), deltas.begin() + static_cast<std::ptrdiff_t>(keep));
  v.mr_accuracy = profile.accuracy;
  return v;
}

Verdict detect(const ModelParams& params, const CalibrationProfile& profile, const Image& img,
               std::optional<std::size_t> max_steps, bool short_circuit) {
  profile.validate();
  if (profile.model_checksum != model_checksum(params))
    throw std::invalid_argument("profile was calibrated for a different model (checksum mismatch)");
  const std::size_t n = max_steps.value_or(profile.steps());
  if (n > profile.steps()) throw std::invalid_argument("max_steps exceeds the profile schedule");

  if (!short_circuit) return decide(profile, trace_response(params, profile.schedule, img, n).deltas(), n);

  const Prediction before = forward(params, img);
  const double v1 = 100.0 * before.confidence;
  std::vector<double> deltas;
  for (std::size_t k = 0; k < n; ++k) {
    const auto t = transform_for(profile.kind, profile.schedule.params[k], img.width(), img.height());
    deltas.push_back(std::abs(v1 - 100.0 * forward(params, warp(img, t)).probs[before.label]));
    if (deltas.back() > profile.cutoff(k)) break;
  }
  return decide(profile, deltas, deltas.size(), true);
}

std::string to_string(Decision d) { return d == Decision::Adversarial ? "ADVERSARIAL" : "CLEAN"; }

}  // namespace metadetect
