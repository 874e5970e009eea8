#include "metadetect/evalrep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "metadetect/checkpoint.hpp"
#include "metadetect/image_io.hpp"

namespace metadetect {

namespace {

double linear_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double percent(std::size_t hits, std::size_t total) {
  return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> deltas_at(std::span<const ResponseTrace> traces, std::size_t step) {
  std::vector<double> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(t.delta(step));
  return out;
}

std::vector<double> retention(const TransformSchedule& sched, std::span<const ResponseTrace> traces) {
  std::vector<double> out(sched.size(), 0.0);
  for (std::size_t k = 0; k < sched.size(); ++k) {
    std::size_t kept = 0;
    for (const auto& t : traces) {
      if (t.labels.size() != sched.size()) throw std::invalid_argument("trace length does not match the schedule");
      if (t.labels[k] == t.l1) ++kept;
    }
    out[k] = percent(kept, traces.size());
  }
  return out;
}

nlohmann::json stats_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"p25", s.p25},
          {"p50", s.p50},   {"p75", s.p75}, {"max", s.max}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

SummaryStats summarize(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("summary statistics need at least two values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryStats s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.min = sorted.front();
  s.max = sorted.back();
  s.p25 = linear_quantile(sorted, 0.25);
  s.p50 = linear_quantile(sorted, 0.50);
  s.p75 = linear_quantile(sorted, 0.75);
  return s;
}

SummaryTable summary_table(const TransformSchedule& sched, std::size_t step, std::span<const ResponseTrace> clean,
                           std::span<const ResponseTrace> adversarial) {
  if (step >= sched.size()) throw std::invalid_argument("step outside the schedule");
  return {sched.kind, sched.params[step], summarize(deltas_at(clean, step)),
          summarize(deltas_at(adversarial, step))};
}

RetentionCurve retention_from_traces(const TransformSchedule& sched, std::span<const ResponseTrace> clean,
                                     std::span<const ResponseTrace> adversarial) {
  if (clean.empty() || adversarial.empty()) throw std::invalid_argument("retention curves need non-empty sets");
  const auto c = retention(sched, clean);
  const auto a = retention(sched, adversarial);
  RetentionCurve curve;
  curve.kind = sched.kind;
  for (std::size_t k = 0; k < sched.size(); ++k) curve.rows.push_back({sched.params[k], c[k], a[k]});
  return curve;
}

RetentionCurve accuracy_vs_magnitude(const ModelParams& params, std::span<const Image> clean,
                                     std::span<const Image> adversarial, TransformKind kind, std::size_t steps,
                                     int jobs) {
  if (clean.empty() || adversarial.empty()) throw std::invalid_argument("retention curves need non-empty sets");
  const auto sched = schedule(kind, steps);
  return retention_from_traces(sched, trace_responses(params, sched, clean, jobs),
                               trace_responses(params, sched, adversarial, jobs));
}

double overall_accuracy(double clean_pct, double adversarial_pct, std::size_t n_clean, std::size_t n_adversarial) {
  if (n_clean == n_adversarial) return (clean_pct + adversarial_pct) / 2.0;
  const double n = static_cast<double>(n_clean + n_adversarial);
  return (clean_pct * static_cast<double>(n_clean) + adversarial_pct * static_cast<double>(n_adversarial)) / n;
}

DetectionReport report_from_triggers(TransformKind kind, std::size_t steps,
                                     std::span<const std::optional<std::size_t>> clean,
                                     std::span<const std::optional<std::size_t>> adversarial) {
  if (clean.empty() || adversarial.empty()) throw std::invalid_argument("detection reports need non-empty sets");
  if (steps == 0) throw std::invalid_argument("detection reports need at least one step");
  // Histogram of first triggers: an image is flagged at max_steps m iff its
  // first trigger is < m.
  auto histogram = [steps](std::span<const std::optional<std::size_t>> triggers) {
    std::vector<std::size_t> h(steps, 0);
    for (const auto& t : triggers)
      if (t && *t < steps) ++h[*t];
    return h;
  };
  const auto hc = histogram(clean);
  const auto ha = histogram(adversarial);

  DetectionReport r;
  r.kind = kind;
  r.clean_count = clean.size();
  r.adversarial_count = adversarial.size();
  std::size_t flagged_clean = 0;
  std::size_t flagged_adv = 0;
  for (std::size_t m = 1; m <= steps; ++m) {
    flagged_clean += hc[m - 1];
    flagged_adv += ha[m - 1];
    DetectionRow row;
    row.max_steps = m;
    row.clean_accuracy = percent(clean.size() - flagged_clean, clean.size());
    row.adversarial_accuracy = percent(flagged_adv, adversarial.size());
    row.overall = overall_accuracy(row.clean_accuracy, row.adversarial_accuracy, clean.size(), adversarial.size());
    r.rows.push_back(row);
  }
  return r;
}

DetectionReport evaluate_from_traces(const CalibrationProfile& profile, std::span<const ResponseTrace> clean,
                                     std::span<const ResponseTrace> adversarial) {
  profile.validate();
  auto triggers = [&](std::span<const ResponseTrace> traces) {
    std::vector<std::optional<std::size_t>> out;
    out.reserve(traces.size());
    for (const auto& t : traces) {
      if (t.v2.size() != profile.steps()) throw std::invalid_argument("trace length does not match the profile");
      out.push_back(first_trigger(profile, t.deltas(), profile.steps()));
    }
    return out;
  };
  const auto tc = triggers(clean);
  const auto ta = triggers(adversarial);
  DetectionReport r = report_from_triggers(profile.kind, profile.steps(), tc, ta);
  r.profile_ref = profile.model_checksum;
  r.calibration_count = profile.sample_count;
  r.multiplier = profile.multiplier;
  return r;
}

DetectionReport evaluate_detector(const ModelParams& params, const CalibrationProfile& profile,
                                  std::span<const Image> clean, std::span<const Image> adversarial, int jobs) {
  if (clean.empty() || adversarial.empty()) throw std::invalid_argument("detection reports need non-empty sets");
  if (profile.model_checksum != model_checksum(params))
    throw std::invalid_argument("profile was calibrated for a different model (checksum mismatch)");
  const std::set<std::string> calibration(profile.created_with.calibration_digests.begin(),
                                          profile.created_with.calibration_digests.end());
  if (!calibration.empty()) {
    for (const auto set : {clean, adversarial})
      for (const auto& img : set)
        if (calibration.contains(to_hex(image_digest(img))))
          throw std::invalid_argument("evaluation image overlaps the calibration set");
  }
  return evaluate_from_traces(profile, trace_responses(params, profile.schedule, clean, jobs),
                              trace_responses(params, profile.schedule, adversarial, jobs));
}

StatTrends trends_from_traces(const TransformSchedule& sched, std::span<const ResponseTrace> clean,
                              std::span<const ResponseTrace> adversarial) {
  if (clean.empty() || adversarial.empty()) throw std::invalid_argument("trend statistics need non-empty sets");
  const StepStatistics c = step_statistics(clean);
  const StepStatistics a = step_statistics(adversarial);
  if (c.mean.size() != sched.size() || a.mean.size() != sched.size())
    throw std::invalid_argument("trace length does not match the schedule");
  return {sched.kind, sched.params, c.mean, c.stddev, a.mean, a.stddev};
}

StatTrends stat_trends(const ModelParams& params, std::span<const Image> clean, std::span<const Image> adversarial,
                       TransformKind kind, std::size_t steps, int jobs) {
  if (clean.empty() || adversarial.empty()) throw std::invalid_argument("trend statistics need non-empty sets");
  const auto sched = schedule(kind, steps);
  return trends_from_traces(sched, trace_responses(params, sched, clean, jobs),
                            trace_responses(params, sched, adversarial, jobs));
}

std::vector<ReferenceRow> reference_accuracies() {
  std::vector<ReferenceRow> rows{
      {"rotation", 97.0, 79.3, 0.0},
      {"shear", 100.0, 90.0, 0.0},
      {"scale", 100.0, 85.3, 0.0},
      {"translate", 100.0, 93.7, 0.0},
  };
  for (auto& r : rows) r.average = (r.clean + r.adversarial) / 2.0;
  return rows;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw std::invalid_argument("unknown export format '" + name + "'");
}

nlohmann::json to_json(const DetectionReport& r, bool with_reference) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"max_steps", row.max_steps},
                    {"clean_acc", row.clean_accuracy},
                    {"adv_acc", row.adversarial_accuracy},
                    {"overall", row.overall}});
  nlohmann::json j{{"kind", to_string(r.kind)},
                   {"profile_ref", r.profile_ref},
                   {"clean_count", r.clean_count},
                   {"adversarial_count", r.adversarial_count},
                   {"calibration_count", r.calibration_count},
                   {"N", r.multiplier},
                   {"rows", rows},
                   {"final", rows.empty() ? nlohmann::json() : rows.back()}};
  if (with_reference) {
    nlohmann::json ref = nlohmann::json::array();
    for (const auto& row : reference_accuracies())
      ref.push_back({{"transform", row.transform},
                     {"clean_acc", row.clean},
                     {"adv_acc", row.adversarial},
                     {"overall", row.average}});
    j["reference"] = {{"label", kReferenceLabel}, {"rows", ref}};
  }
  return j;
}

DetectionReport report_from_json(const nlohmann::json& j) {
  DetectionReport r;
  r.kind = parse_kind(j.at("kind").get<std::string>());
  r.profile_ref = j.at("profile_ref").get<std::string>();
  r.clean_count = j.at("clean_count").get<std::size_t>();
  r.adversarial_count = j.at("adversarial_count").get<std::size_t>();
  r.calibration_count = j.at("calibration_count").get<std::size_t>();
  r.multiplier = j.at("N").get<double>();
  for (const auto& row : j.at("rows"))
    r.rows.push_back({row.at("max_steps").get<std::size_t>(), row.at("clean_acc").get<double>(),
                      row.at("adv_acc").get<double>(), row.at("overall").get<double>()});
  return r;
}

std::string render(const DetectionReport& r, Format format, bool with_reference) {
  if (format == Format::Json) return dump(to_json(r, with_reference));
  std::ostringstream out;
  out << "max_steps,clean_acc,adv_acc,overall\n";
  for (const auto& row : r.rows)
    out << row.max_steps << ',' << format_number(row.clean_accuracy) << ','
        << format_number(row.adversarial_accuracy) << ',' << format_number(row.overall) << '\n';
  if (with_reference) {
    out << "# " << kReferenceLabel << "\n";
    out << "transform,clean_acc,adv_acc,overall\n";
    for (const auto& row : reference_accuracies())
      out << row.transform << ',' << format_number(row.clean) << ',' << format_number(row.adversarial) << ','
          << format_number(row.average) << '\n';
  }
  return out.str();
}

std::string render(const SummaryTable& t, Format format) {
  if (format == Format::Json)
    return dump({{"kind", to_string(t.kind)},
                 {"magnitude", t.magnitude},
                 {"clean", stats_json(t.clean)},
                 {"adversarial", stats_json(t.adversarial)}});
  std::ostringstream out;
  out << "stat,clean,adversarial\n";
  const std::pair<const char*, double SummaryStats::*> fields[] = {
      {"MEAN", &SummaryStats::mean}, {"STD", &SummaryStats::std}, {"MIN", &SummaryStats::min},
      {"25%", &SummaryStats::p25},   {"50%", &SummaryStats::p50}, {"75%", &SummaryStats::p75},
      {"MAX", &SummaryStats::max}};
  for (const auto& [name, member] : fields)
    out << name << ',' << format_number(t.clean.*member) << ',' << format_number(t.adversarial.*member) << '\n';
  return out.str();
}

std::string render(const RetentionCurve& c, Format format) {
  if (format == Format::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : c.rows)
      rows.push_back({{"magnitude", r.magnitude}, {"clean", r.clean}, {"adversarial", r.adversarial}});
    return dump({{"kind", to_string(c.kind)},
                 {"virtual_baseline",
                  {{"magnitude", c.baseline.magnitude},
                   {"clean", c.baseline.clean},
                   {"adversarial", c.baseline.adversarial}}},
                 {"rows", rows}});
  }
  std::ostringstream out;
  out << "magnitude,clean_retention,adv_retention,virtual\n";
  out << format_number(c.baseline.magnitude) << ',' << format_number(c.baseline.clean) << ','
      << format_number(c.baseline.adversarial) << ",1\n";
  for (const auto& r : c.rows)
    out << format_number(r.magnitude) << ',' << format_number(r.clean) << ',' << format_number(r.adversarial)
        << ",0\n";
  return out.str();
}

std::string render(const StatTrends& t, Format format) {
  if (format == Format::Json)
    return dump({{"kind", to_string(t.kind)},
                 {"magnitudes", t.magnitudes},
                 {"clean_mean", t.clean_mean},
                 {"clean_std", t.clean_std},
                 {"adv_mean", t.adv_mean},
                 {"adv_std", t.adv_std}});
  std::ostringstream out;
  out << "step,magnitude,clean_mean,clean_std,adv_mean,adv_std\n";
  for (std::size_t k = 0; k < t.magnitudes.size(); ++k)
    out << k << ',' << format_number(t.magnitudes[k]) << ',' << format_number(t.clean_mean[k]) << ','
        << format_number(t.clean_std[k]) << ',' << format_number(t.adv_mean[k]) << ','
        << format_number(t.adv_std[k]) << '\n';
  return out.str();
}

std::string render(std::span<const SweepRow> sweep, Format format) {
  if (format == Format::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sweep) rows.push_back({{"epsilon", r.epsilon}, {"accuracy", r.accuracy}});
    return dump({{"rows", rows}});
  }
  std::ostringstream out;
  out << "epsilon,accuracy\n";
  for (const auto& r : sweep) out << format_number(r.epsilon) << ',' << format_number(r.accuracy) << '\n';
  return out.str();
}

void export_text(const std::filesystem::path& path, const std::string& text) {
  try {
    write_text(path, text);
  } catch (const std::exception& e) {
    throw std::runtime_error("export to '" + path.string() + "' failed: " + e.what());
  }
}

}  // namespace metadetect
