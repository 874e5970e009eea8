#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metadetect/attack.hpp"
#include "metadetect/metamorph.hpp"
#include "metadetect/vendor_json.hpp"

namespace metadetect {

/// Descriptive statistics in the MEAN/STD/MIN/25%/50%/75%/MAX layout.
/// std is the sample standard deviation; quantiles interpolate linearly
/// between order statistics at position q*(n-1).
struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

/// Rejects fewer than two values.
SummaryStats summarize(std::span<const double> values);

/// Clean vs adversarial deltas at one schedule step.
struct SummaryTable {
  TransformKind kind = TransformKind::Rotation;
  double magnitude = 0.0;
  SummaryStats clean;
  SummaryStats adversarial;
};

SummaryTable summary_table(const TransformSchedule& sched, std::size_t step, std::span<const ResponseTrace> clean,
                           std::span<const ResponseTrace> adversarial);

/// Percentage of images whose argmax on the warped image still equals l1.
struct RetentionRow {
  double magnitude = 0.0;
  double clean = 0.0;
  double adversarial = 0.0;
};

struct RetentionCurve {
  TransformKind kind = TransformKind::Rotation;
  RetentionRow baseline{0.0, 100.0, 100.0};  // magnitude-0 row, emitted flagged as virtual
  std::vector<RetentionRow> rows;             // one per schedule step
};

RetentionCurve accuracy_vs_magnitude(const ModelParams& params, std::span<const Image> clean,
                                     std::span<const Image> adversarial, TransformKind kind,
                                     std::size_t steps = kDefaultSteps, int jobs = 1);
RetentionCurve retention_from_traces(const TransformSchedule& sched, std::span<const ResponseTrace> clean,
                                     std::span<const ResponseTrace> adversarial);

struct DetectionRow {
  std::size_t max_steps = 0;
  double clean_accuracy = 0.0;        // % clean judged Clean
  double adversarial_accuracy = 0.0;  // % adversarial judged Adversarial
  double overall = 0.0;
};

struct DetectionReport {
  TransformKind kind = TransformKind::Rotation;
  std::string profile_ref;  // model checksum the profile was calibrated against
  std::size_t clean_count = 0;
  std::size_t adversarial_count = 0;
  std::size_t calibration_count = 0;
  double multiplier = kDefaultMultiplier;
  std::vector<DetectionRow> rows;  // max_steps = 1..K

  const DetectionRow& final_row() const { return rows.back(); }
};

/// Unweighted mean for equal-sized sets, otherwise the example-weighted rate.
double overall_accuracy(double clean_pct, double adversarial_pct, std::size_t n_clean, std::size_t n_adversarial);

/// Builds the per-iteration table from each image's first triggering step.
DetectionReport report_from_triggers(TransformKind kind, std::size_t steps,
                                     std::span<const std::optional<std::size_t>> clean,
                                     std::span<const std::optional<std::size_t>> adversarial);

DetectionReport evaluate_from_traces(const CalibrationProfile& profile, std::span<const ResponseTrace> clean,
                                     std::span<const ResponseTrace> adversarial);

/// Runs the detector for every max_steps in 1..K. Rejects empty sets, a
/// profile from another model, and any image that was part of the profile's
/// calibration set.
DetectionReport evaluate_detector(const ModelParams& params, const CalibrationProfile& profile,
                                  std::span<const Image> clean, std::span<const Image> adversarial, int jobs = 1);

/// Per-step clean/adversarial delta statistics, computed as calibrate() does.
struct StatTrends {
  TransformKind kind = TransformKind::Rotation;
  std::vector<double> magnitudes;
  std::vector<double> clean_mean, clean_std, adv_mean, adv_std;
};

StatTrends stat_trends(const ModelParams& params, std::span<const Image> clean, std::span<const Image> adversarial,
                       TransformKind kind, std::size_t steps = kDefaultSteps, int jobs = 1);
StatTrends trends_from_traces(const TransformSchedule& sched, std::span<const ResponseTrace> clean,
                              std::span<const ResponseTrace> adversarial);

/// Published per-relation accuracies, carried only as a labelled reference.
struct ReferenceRow {
  std::string transform;
  double clean = 0.0;
  double adversarial = 0.0;
  double average = 0.0;  // (clean + adversarial) / 2
};

inline constexpr const char* kReferenceLabel = "paper (not reproduced)";

std::vector<ReferenceRow> reference_accuracies();

enum class Format { Csv, Json };

Format parse_format(const std::string& name);

std::string render(const DetectionReport& report, Format format, bool with_reference = false);
std::string render(const SummaryTable& table, Format format);
std::string render(const RetentionCurve& curve, Format format);
std::string render(const StatTrends& trends, Format format);
std::string render(std::span<const SweepRow> sweep, Format format);

nlohmann::json to_json(const DetectionReport& report, bool with_reference = false);
DetectionReport report_from_json(const nlohmann::json& j);

/// Writes text to path, creating parent directories. Errors carry the path.
void export_text(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace metadetect
