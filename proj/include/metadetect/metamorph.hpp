#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metadetect/nnet.hpp"
#include "metadetect/schedule.hpp"

namespace metadetect {

/// Confidence change of the untransformed image's argmax label, in
/// percentage points.
struct VariationMeasurement {
  int l1 = 0;
  double v1 = 0.0;
  double v2 = 0.0;
  double delta = 0.0;  // |v1 - v2|
};

VariationMeasurement measure_variation(const ModelParams& params, const Image& img, const AffineTransform& t);

/// Model response to every step of a schedule for one image: the reference
/// label and confidence, plus the reference label's confidence and the argmax
/// on each transformed copy. Everything the detector and the reports need.
struct ResponseTrace {
  int l1 = 0;
  double v1 = 0.0;
  std::vector<double> v2;
  std::vector<int> labels;

  double delta(std::size_t step) const;
  std::vector<double> deltas() const;
};

ResponseTrace trace_response(const ModelParams& params, const TransformSchedule& sched, const Image& img,
                             std::size_t max_steps = static_cast<std::size_t>(-1));

std::vector<ResponseTrace> trace_responses(const ModelParams& params, const TransformSchedule& sched,
                                           std::span<const Image> images, int jobs = 1);

/// Per-step mean and sample standard deviation (divisor n-1) of the deltas.
struct StepStatistics {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Requires at least two traces of equal length. Reduces in trace order.
StepStatistics step_statistics(std::span<const ResponseTrace> traces);

inline constexpr double kDefaultMultiplier = 1.5;

/// Accuracy the relation achieved on a held-out evaluation, in percent. Kept
/// with the profile and echoed in verdicts; never recomputed per query.
struct RelationAccuracy {
  double clean = 0.0;
  double adversarial = 0.0;
};

struct CalibrationProvenance {
  std::optional<double> epsilon;
  std::string notes;
  std::vector<std::string> calibration_digests;  // image_digest() of each calibration image
};

struct CalibrationProfile {
  TransformKind kind = TransformKind::Rotation;
  TransformSchedule schedule;
  std::vector<double> mean;
  std::vector<double> stddev;
  double multiplier = kDefaultMultiplier;
  std::size_t sample_count = 0;
  std::string model_checksum;
  CalibrationProvenance created_with;
  std::optional<RelationAccuracy> accuracy;

  /// mean[k] + multiplier * stddev[k]
  double cutoff(std::size_t step) const { return mean[step] + multiplier * stddev[step]; }
  std::size_t steps() const { return schedule.size(); }
  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

/// Runs the schedule over the clean images and records per-step statistics.
/// Rejects fewer than two images.
CalibrationProfile calibrate(const ModelParams& params, std::span<const Image> clean, TransformKind kind,
                             std::size_t steps = kDefaultSteps, double multiplier = kDefaultMultiplier, int jobs = 1);

/// calibrate() for already traced images.
CalibrationProfile calibrate_from_traces(const TransformSchedule& sched, std::span<const ResponseTrace> traces,
                                         double multiplier, std::string model_checksum);

CalibrationProfile mr_rotation(const ModelParams& params, std::span<const Image> clean, int jobs = 1);
CalibrationProfile mr_shear(const ModelParams& params, std::span<const Image> clean, int jobs = 1);
CalibrationProfile mr_scale(const ModelParams& params, std::span<const Image> clean, int jobs = 1);
CalibrationProfile mr_translate(const ModelParams& params, std::span<const Image> clean, int jobs = 1);

enum class Decision { Clean, Adversarial };

struct Verdict {
  Decision decision = Decision::Clean;
  std::optional<std::size_t> triggering_step;
  std::vector<double> per_step_deltas;
  std::optional<RelationAccuracy> mr_accuracy;
};

/// First step k < max_steps with deltas[k] > cutoff(k), if any.
std::optional<std::size_t> first_trigger(const CalibrationProfile& profile, std::span<const double> deltas,
                                         std::size_t max_steps);

/// Applies the OR-of-cutoffs rule to precomputed deltas. With short_circuit
/// the delta trace is truncated after the triggering step.
Verdict decide(const CalibrationProfile& profile, std::span<const double> deltas, std::size_t max_steps,
               bool short_circuit = false);

/// Measures the image against the first max_steps schedule steps (all by
/// default) and flags it when any step exceeds its cutoff. Rejects a profile
/// calibrated for a different model and max_steps beyond the schedule.
Verdict detect(const ModelParams& params, const CalibrationProfile& profile, const Image& img,
               std::optional<std::size_t> max_steps = std::nullopt, bool short_circuit = false);

std::string to_string(Decision d);

}  // namespace metadetect
