// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metadetect/attack.hpp"
#include "metadetect/checkpoint.hpp"
#include "metadetect/config.hpp"
#include "metadetect/dataset_io.hpp"
#include "metadetect/evalrep.hpp"
#include "metadetect/image_io.hpp"
#include "metadetect/metamorph.hpp"
#include "metadetect/profile_io.hpp"
#include "metadetect/rng.hpp"

namespace fs = std::filesystem;
using namespace metadetect;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-10 ? 0.0 : std::abs(a - b) / scale;
}

std::string slurp(const fs::path& p) {
  const auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

// ---------------------------------------------------------------- criterion 1
void gradients(Outcome& o) {
  const auto start = Clock::now();
  SplitMix64 rng(101);
  double worst_input = 0.0, worst_params = 0.0;
  const double h = 1e-4;
  int inputs = 0, coords = 0;
  for (int trial = 0; trial < 5; ++trial, ++inputs) {
    ModelParams p = init_params(8, 8, 3, 24, 6, 200 + trial);
    for (double& b : p.b1) b = rng.uniform(-0.1, 0.1);
    Image img(8, 8, 3);
    for (double& v : img.pixels()) v = rng.uniform(0.05, 0.95);
    const int y = static_cast<int>(rng.below(6));
    const auto gi = grad_input(p, img, y);
    const LabelledImage ex{img, y};
    ModelParams gp = grad_params(p, std::span(&ex, 1));
    for (int k = 0; k < 20; ++k, ++coords) {
      const std::size_t i = rng.below(static_cast<std::uint32_t>(img.size()));
      Image up = img, down = img;
      up.pixels()[i] += h;
      down.pixels()[i] -= h;
      worst_input = std::max(worst_input, rel_err(gi[i], (loss(p, up, y) - loss(p, down, y)) / (2 * h)));

      std::vector<double>* bufs[] = {&p.w1, &p.b1, &p.w2, &p.b2};
      std::vector<double>* grads[] = {&gp.w1, &gp.b1, &gp.w2, &gp.b2};
      const std::size_t which = rng.below(4);
      auto& buf = *bufs[which];
      const std::size_t j = rng.below(static_cast<std::uint32_t>(buf.size()));
      const double orig = buf[j];
      buf[j] = orig + h;
      const double lu = loss(p, img, y);
      buf[j] = orig - h;
      const double ld = loss(p, img, y);
      buf[j] = orig;
      worst_params = std::max(worst_params, rel_err((*grads[which])[j], (lu - ld) / (2 * h)));
    }
  }
  const double t = seconds_since(start);
  o.detail << inputs << " inputs x " << coords / inputs << " coords, max rel err input " << worst_input
           << " params " << worst_params << ", " << fmt(t) << " s";
  o.require(worst_input < 1e-4 && worst_params < 1e-4, "relative error < 1e-4");
  o.require(t < 10.0, "runtime < 10 s");
}

// ---------------------------------------------------------------- criterion 2
void affine_checks(Outcome& o) {
  const auto start = Clock::now();
  SplitMix64 rng(202);
  Image img(32, 32, 3);
  for (double& v : img.pixels()) v = rng.uniform();

  o.require(warp(img, identity()) == img, "identity warp bit-exact");

  // Integer translation against a direct shift.
  bool shift_ok = true;
  for (int dx : {-3, 0, 2, 7})
    for (int dy : {-5, 1, 4}) {
      const Image w = warp(img, translation(dx / 32.0, dy / 32.0, 32, 32));
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
          for (int c = 0; c < 3; ++c) {
            const int sx = x - dx, sy = y - dy;
            const double want = (sx >= 0 && sx < 32 && sy >= 0 && sy < 32) ? img.at(sy, sx, c) : 0.0;
            shift_ok = shift_ok && w.at(y, x, c) == want;
          }
    }
  o.require(shift_ok, "integer translation equals shift oracle");

  // Collinearity and distance ratios for every scheduled transform.
  double worst = 0.0;
  for (TransformKind kind : kAllKinds) {
    const auto sched = schedule(kind);
    for (double param : sched.params) {
      const AffineTransform t = transform_for(kind, param, 32, 32);
      for (int trial = 0; trial < 4; ++trial) {
        const double ax = rng.uniform(-20, 50), ay = rng.uniform(-20, 50);
        const double bx = rng.uniform(-20, 50), by = rng.uniform(-20, 50);
        const double s = rng.uniform(0.1, 0.9);
        const double cx = ax + s * (bx - ax), cy = ay + s * (by - ay);
        const auto [pax, pay] = t.apply({ax, ay});
        const auto [pbx, pby] = t.apply({bx, by});
        const auto [pcx, pcy] = t.apply({cx, cy});
        const double len = std::hypot(pbx - pax, pby - pay);
        const double cross = ((pbx - pax) * (pcy - pay) - (pby - pay) * (pcx - pax)) / (len * len);
        const double ratio = std::hypot(pcx - pax, pcy - pay) / len;
        worst = std::max({worst, std::abs(cross), std::abs(ratio - s)});
      }
    }
  }
  o.require(worst < 1e-9, "collinearity and ratios within 1e-9");

  bool formulas = true;
  const auto rot = schedule(TransformKind::Rotation), sh = schedule(TransformKind::Shear);
  const auto sc = schedule(TransformKind::Scale), tr = schedule(TransformKind::Translate);
  for (std::size_t k = 0; k < kDefaultSteps; ++k) {
    const double kk = static_cast<double>(k);
    formulas = formulas && std::abs(rot.params[k] - 0.5 * (kk + 1)) < 1e-12;
    formulas = formulas && std::abs(sh.params[k] - (1 + 0.9 * kk)) < 1e-12;
    formulas = formulas && std::abs(sc.params[k] - (1 + 0.05 * (kk + 1))) < 1e-12;
    formulas = formulas && std::abs(tr.params[k] - (0.05 + 0.02 * kk)) < 1e-12;
  }
  o.require(formulas, "schedule formulas");
  const double t = seconds_since(start);
  o.detail << "identity, shift oracle, schedules checked; worst affine invariant error " << worst << ", " << fmt(t)
           << " s";
  o.require(t < 5.0, "runtime < 5 s");
}

// Shared trained-model state for criteria 3 to 5.
struct Trained {
  PipelineConfig cfg;
  ModelParams params;
  Dataset train_set, calib_set, eval_set, holdout;
  double train_seconds = 0.0;
};

Trained train_desk_model(const PipelineConfig& cfg) {
  const auto start = Clock::now();
  Trained t;
  t.cfg = cfg;
  const Dataset data = generate(cfg.dataset_spec());
  const auto subsets = assign_subsets(data, cfg.fractions, cfg.split_seed());
  for (std::size_t i = 0; i < data.size(); ++i) {
    // Mirror the 8-bit round trip the pipeline's dataset files go through.
    LabelledImage s = data[i];
    for (double& v : s.image.pixels()) v = std::round(v * 255.0) / 255.0;
    (subsets[i] == Subset::Train ? t.train_set : subsets[i] == Subset::Calib ? t.calib_set : t.eval_set).push_back(s);
    if (subsets[i] != Subset::Train) t.holdout.push_back(s);
  }
  t.params = train(t.train_set, cfg.train_config());
  t.train_seconds = seconds_since(start);
  return t;
}

// ---------------------------------------------------------------- criterion 3
void fgsm_contract(Outcome& o, const Trained& t) {
  const auto start = Clock::now();
  SplitMix64 rng(303);
  bool values_ok = true, range_ok = true;
  for (int i = 0; i < 20; ++i) {
    const auto& s = t.eval_set[rng.below(static_cast<std::uint32_t>(t.eval_set.size()))];
    for (double eps : {0.01, 0.05, 0.3}) {
      for (double d : fgsm_perturbation(t.params, s.image, s.label, eps)) values_ok = values_ok && (d == eps || d == -eps || d == 0.0);
      for (double v : fgsm(t.params, s.image, s.label, eps).pixels()) range_ok = range_ok && v >= 0.0 && v <= 1.0;
    }
  }
  o.require(values_ok, "perturbation entries in {-eps, 0, +eps}");
  o.require(range_ok, "outputs in [0,1]");

  const std::vector<double> eps{0.01, 0.02, 0.05, 0.1, 0.2, 0.3};
  const auto rows = epsilon_sweep(t.params, t.eval_set, eps, t.cfg.jobs);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].accuracy <= rows[i - 1].accuracy + 0.02;
  o.require(monotone, "sweep non-increasing within 2 points");
  const double drop = 100.0 * (rows.front().accuracy - rows.back().accuracy);
  o.require(drop >= 40.0, "eps 0.3 drops accuracy by >= 40 points");

  const auto pairs = build_pairs(t.params, t.eval_set, 0.05, t.eval_set.size(), t.cfg.jobs);
  std::size_t flipped = 0;
  for (const auto& p : pairs) flipped += flips(t.params, p) ? 1 : 0;
  const double flip_rate = 100.0 * static_cast<double>(flipped) / static_cast<double>(pairs.size());
  o.require(flip_rate >= 30.0, "eps 0.05 flips >= 30% of labels");

  const double total = t.train_seconds + seconds_since(start);
  o.detail << "clean acc " << fmt(100 * rows.front().accuracy, 1) << "%, eps 0.3 acc "
           << fmt(100 * rows.back().accuracy, 1) << "% (drop " << fmt(drop, 1) << " pts), eps 0.05 flips "
           << fmt(flip_rate, 1) << "%, " << fmt(total, 1) << " s incl. training";
  o.require(total < 120.0, "runtime < 2 min");
}

// ---------------------------------------------------------------- criterion 4
void premise(Outcome& o, const Trained& t) {
  const double acc = 100.0 * evaluate_accuracy(t.params, t.holdout, t.cfg.jobs);
  o.detail << "test acc " << fmt(acc, 1) << "%; step-0 clean mean delta";
  o.require(acc >= 90.0, "test accuracy >= 90%");
  const auto clean = images_of(t.eval_set);
  for (TransformKind kind : kAllKinds) {
    const auto sched = schedule(kind, 1);
    const auto traces = trace_responses(t.params, sched, clean, t.cfg.jobs);
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.delta(0);
    const double mean = sum / static_cast<double>(traces.size());
    o.detail << " " << to_string(kind) << " " << fmt(mean, 2);
    o.require(mean < 5.0, to_string(kind) + " mean < 5 pp");
  }
}

// ---------------------------------------------------------------- criterion 5
void separation(Outcome& o, const fs::path& run) {
  const ModelParams params = load_checkpoint(run / "model.ckpt").params;
  const auto pairs = load_pairs(run / "pairs");
  std::vector<Image> clean, adv;
  std::size_t flipped = 0;
  for (const auto& p : pairs) {
    clean.push_back(p.clean.image);
    adv.push_back(p.adversarial);
    flipped += flips(params, p) ? 1 : 0;
  }
  const double flip_rate = 100.0 * static_cast<double>(flipped) / static_cast<double>(pairs.size());
  o.require(pairs.size() >= 200, ">= 200 pairs");
  o.require(flip_rate >= 30.0, "attack flips >= 30%");
  o.detail << pairs.size() << " pairs at eps " << format_number(pairs.front().epsilon) << " (flips "
           << fmt(flip_rate, 1) << "%);";
  for (TransformKind kind : kAllKinds) {
    const auto profile = load_profile(run / "profiles" / (to_string(kind) + ".json"));
    const std::set<std::string> calib(profile.created_with.calibration_digests.begin(),
                                      profile.created_with.calibration_digests.end());
    bool disjoint = !calib.empty();
    for (const auto& img : clean) disjoint = disjoint && !calib.contains(to_hex(image_digest(img)));
    o.require(disjoint, to_string(kind) + " pairs disjoint from calibration");
    const auto sched = schedule(kind, 1);
    const auto tc = trace_responses(params, sched, clean);
    const auto ta = trace_responses(params, sched, adv);
    const auto table = summary_table(sched, 0, tc, ta);
    const double gap_needed = table.clean.mean + 2.0 * table.clean.std;
    o.detail << " " << to_string(kind) << " adv " << fmt(table.adversarial.mean, 2) << " vs clean "
             << fmt(table.clean.mean, 2) << "+2*" << fmt(table.clean.std, 2);
    o.require(table.adversarial.mean > gap_needed, to_string(kind) + " separation");
  }
}

// ---------------------------------------------------------------- criterion 6
void monotonicity(Outcome& o, const fs::path& run) {
  const ModelParams params = load_checkpoint(run / "model.ckpt").params;
  const auto pairs = load_pairs(run / "pairs");
  std::vector<Image> clean, adv;
  for (const auto& p : pairs) {
    clean.push_back(p.clean.image);
    adv.push_back(p.adversarial);
  }
  auto check_report = [&](const DetectionReport& r, const std::string& name) {
    bool ok = true;
    for (std::size_t m = 1; m < r.rows.size(); ++m)
      ok = ok && r.rows[m].adversarial_accuracy >= r.rows[m - 1].adversarial_accuracy &&
           r.rows[m].clean_accuracy <= r.rows[m - 1].clean_accuracy;
    o.require(ok, name + " monotone in max_steps");
  };
  std::size_t reports = 0;
  for (TransformKind kind : kAllKinds) {
    const std::string name = to_string(kind);
    check_report(report_from_json(json::parse(slurp(run / "reports" / (name + "_report.json")))), name);
    ++reports;
    CalibrationProfile profile = load_profile(run / "profiles" / (name + ".json"));
    const auto tc = trace_responses(params, profile.schedule, clean);
    const auto ta = trace_responses(params, profile.schedule, adv);
    std::vector<DetectionReport> grid;
    for (double n : {1.0, 1.5, 2.0}) {
      profile.multiplier = n;
      grid.push_back(evaluate_from_traces(profile, tc, ta));
      check_report(grid.back(), name + " N=" + format_number(n));
      ++reports;
    }
    bool n_ok = true;
    for (std::size_t g = 1; g < grid.size(); ++g)
      for (std::size_t m = 0; m < grid[g].rows.size(); ++m)
        n_ok = n_ok && grid[g].rows[m].clean_accuracy >= grid[g - 1].rows[m].clean_accuracy &&
               grid[g].rows[m].adversarial_accuracy <= grid[g - 1].rows[m].adversarial_accuracy;
    o.require(n_ok, name + " threshold monotone in N");
  }
  o.detail << reports << " reports monotone in max_steps; N grid {1, 1.5, 2} checked for 4 relations";
}

// ---------------------------------------------------------------- criterion 7
void detection_quality(Outcome& o, const fs::path& run, double pipeline_seconds, const PipelineConfig& cfg) {
  const json summary = json::parse(slurp(run / "reports" / "summary.json"));
  const std::size_t n = summary.at("counts").at("eval_pairs").get<std::size_t>();
  o.require(n >= 200, ">= 200 clean + 200 adversarial");
  o.require(cfg.detect.steps == 60 && cfg.detect.multiplier == 1.5, "60 steps, N = 1.5");
  bool any = false;
  std::string best;
  double best_overall = -1.0;
  for (const auto& [name, r] : summary.at("relations").items()) {
    const double c = r.at("clean_accuracy").get<double>(), ov = r.at("overall").get<double>();
    o.detail << name << " " << fmt(c, 1) << "/" << fmt(r.at("adversarial_accuracy").get<double>(), 1) << "/"
             << fmt(ov, 1) << "; ";
    if (ov >= 80.0 && c >= 90.0) any = true;
    if (ov > best_overall) best_overall = ov;
  }
  o.detail << "(clean/adv/overall % at m=60 on " << n << "+" << n << "), pipeline " << fmt(pipeline_seconds, 1)
           << " s";
  o.require(any, "one MR with overall >= 80% and clean >= 90%");
  o.require(pipeline_seconds < 600.0, "pipeline < 10 min");
}

// ---------------------------------------------------------------- criterion 8
void statistics_oracle(Outcome& o) {
  SplitMix64 rng(808);
  std::vector<ResponseTrace> traces(1000);
  std::vector<double> deltas;
  for (auto& t : traces) {
    t.v1 = rng.uniform(0.0, 100.0);
    t.v2 = {rng.uniform(0.0, 100.0)};
    t.labels = {0};
    deltas.push_back(std::abs(t.v1 - t.v2[0]));
  }
  const auto profile = calibrate_from_traces(schedule(TransformKind::Rotation, 1), traces, 1.5, "0");
  double sum = 0.0;
  for (double d : deltas) sum += d;
  const double mean = sum / 1000.0;
  double ss = 0.0;
  for (double d : deltas) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / 999.0);
  const double err_ms = std::max(std::abs(profile.mean[0] - mean), std::abs(profile.stddev[0] - sd));

  std::vector<double> values(1000);
  for (double& v : values) v = 10.0 * rng.normal();
  const auto s = summarize(values);
  // Rank selection by counting, then linear interpolation at q*(n-1).
  auto kth = [&](std::size_t k) {
    for (double x : values) {
      std::size_t below = 0, equal = 0;
      for (double y : values) {
        below += y < x;
        equal += y == x;
      }
      if (below <= k && k < below + equal) return x;
    }
    return std::nan("");
  };
  auto quantile = [&](double q) {
    const double pos = q * 999.0;
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min<std::size_t>(lo + 1, 999);
    return kth(lo) + (kth(hi) - kth(lo)) * (pos - static_cast<double>(lo));
  };
  const double err_q = std::max({std::abs(s.min - quantile(0.0)), std::abs(s.p25 - quantile(0.25)),
                                 std::abs(s.p50 - quantile(0.5)), std::abs(s.p75 - quantile(0.75)),
                                 std::abs(s.max - quantile(1.0))});
  o.detail << "M/S max abs err " << err_ms << ", quantile max abs err " << err_q;
  o.require(err_ms < 1e-9, "calibration M/S");
  o.require(err_q < 1e-9, "summary quantiles");
}

// ---------------------------------------------------------------- criterion 9
void determinism(Outcome& o, const fs::path& a, const fs::path& b) {
  std::size_t compared = 0;
  for (const fs::path sub : {"model.ckpt", "profiles", "reports", "pairs", "data"}) {
    std::vector<fs::path> files;
    if (fs::is_directory(a / sub)) {
      for (const auto& e : fs::recursive_directory_iterator(a / sub))
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
    } else {
      files.push_back(sub);
    }
    for (const auto& f : files) {
      ++compared;
      const bool same = fs::exists(b / f) && read_file(a / f) == read_file(b / f);
      o.require(same, f.string() + " identical");
    }
    if (fs::is_directory(b / sub)) {
      std::size_t count_b = 0;
      for (const auto& e : fs::recursive_directory_iterator(b / sub)) count_b += e.is_regular_file();
      o.require(count_b == files.size(), sub.string() + " file count");
    }
  }
  o.detail << compared << " files byte-identical across two runs (checkpoint, profiles, reports, pairs, data)";
}

// --------------------------------------------------------------- criterion 10
void overall_identity(Outcome& o, const fs::path& run) {
  double worst = 0.0;
  std::size_t rows = 0;
  for (TransformKind kind : kAllKinds) {
    const json j = json::parse(slurp(run / "reports" / (to_string(kind) + "_report.json")));
    o.require(j.at("clean_count") == j.at("adversarial_count"), "equal-sized sets");
    for (const auto& r : j.at("rows")) {
      ++rows;
      const double want = (r.at("clean_acc").get<double>() + r.at("adv_acc").get<double>()) / 2.0;
      worst = std::max(worst, std::abs(r.at("overall").get<double>() - want));
    }
    for (const auto& r : j.at("reference").at("rows")) {
      const double want = (r.at("clean_acc").get<double>() + r.at("adv_acc").get<double>()) / 2.0;
      worst = std::max(worst, std::abs(r.at("overall").get<double>() - want));
      if (r.at("transform") == "translate")
        o.require(std::abs(r.at("overall").get<double>() - 96.85) < 1e-9, "reference (100 + 93.7)/2 = 96.85");
    }
  }
  o.detail << rows << " report rows plus reference rows, max |overall - (clean+adv)/2| = " << worst;
  o.require(worst < 1e-9, "identity within 1e-9");
}

int run_pipeline(const std::string& cli, const fs::path& config, const fs::path& workdir) {
  fs::remove_all(workdir);
  fs::create_directories(workdir);
  const std::string cmd = "\"" + cli + "\" --config \"" + config.string() + "\" --workdir \"" + workdir.string() +
                          "\" pipeline > \"" + (workdir / "pipeline.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run over the toy pipeline", "acceptance"};
  std::string cli, config, workdir;
  app.add_option("--cli", cli, "Path to the metadetect binary")->required()->check(CLI::ExistingFile);
  app.add_option("--config", config, "Pipeline configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--workdir", workdir, "Scratch directory")->required();
  CLI11_PARSE(app, argc, argv);

  const PipelineConfig cfg = load_config(config);
  const fs::path run1 = fs::path(workdir) / "run1", run2 = fs::path(workdir) / "run2";

  const auto t0 = Clock::now();
  const int status1 = run_pipeline(cli, config, run1);
  const double pipeline_seconds = seconds_since(t0);
  const int status2 = run_pipeline(cli, config, run2);
  std::cout << "pipeline runs: exit " << status1 << " and " << status2 << ", first took " << fmt(pipeline_seconds, 1)
            << " s\n";
  const bool pipelines_ok = status1 == 0 && status2 == 0;
  if (!pipelines_ok) std::cout << slurp(run1 / "pipeline.log");

  std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria;
  Trained trained;
  bool trained_ready = false;
  auto ensure_trained = [&] {
    if (!trained_ready) {
      trained = train_desk_model(cfg);
      trained_ready = true;
    }
  };
  auto needs_run = [&](Outcome& o) {
    o.require(pipelines_ok, "pipeline runs succeeded");
    return pipelines_ok;
  };

  criteria.emplace_back("gradient correctness", gradients);
  criteria.emplace_back("affine correctness", affine_checks);
  criteria.emplace_back("FGSM contract", [&](Outcome& o) {
    ensure_trained();
    fgsm_contract(o, trained);
  });
  criteria.emplace_back("premise check", [&](Outcome& o) {
    ensure_trained();
    premise(o, trained);
  });
  criteria.emplace_back("separation", [&](Outcome& o) {
    if (needs_run(o)) separation(o, run1);
  });
  criteria.emplace_back("detector monotonicity", [&](Outcome& o) {
    if (needs_run(o)) monotonicity(o, run1);
  });
  criteria.emplace_back("desk-scale detection quality", [&](Outcome& o) {
    if (needs_run(o)) detection_quality(o, run1, pipeline_seconds, cfg);
  });
  criteria.emplace_back("statistics oracle equivalence", statistics_oracle);
  criteria.emplace_back("determinism", [&](Outcome& o) {
    if (needs_run(o)) determinism(o, run1, run2);
  });
  criteria.emplace_back("overall accuracy identity", [&](Outcome& o) {
    if (needs_run(o)) overall_identity(o, run1);
  });

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
