#include "metadetect/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
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

#ifndef METADETECT_VERSION
#define METADETECT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace metadetect {

std::string version_string() { return std::string("metadetect ") + METADETECT_VERSION; }

namespace {

// Options shared by every subcommand.
struct GlobalOptions {
  std::string config;
  std::string workdir;
  int jobs = 0;
  std::uint64_t seed = 0;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

PipelineConfig base_config(const GlobalOptions& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : load_config(g.config);
  if (!g.workdir.empty()) cfg.workdir = g.workdir;
  if (g.jobs_opt->count()) cfg.jobs = g.jobs;
  if (g.seed_opt->count()) cfg.seed = g.seed;
  return cfg;
}

template <class T>
void override_if(const CLI::Option* opt, T& target, const T& value) {
  if (opt && opt->count()) target = value;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

Format format_for(const fs::path& path) { return path.extension() == ".json" ? Format::Json : Format::Csv; }

std::optional<Subset> subset_option(const std::string& name) {
  if (name.empty() || name == "all") return std::nullopt;
  return parse_subset(name);
}

Dataset load_subsets(const fs::path& root, std::initializer_list<Subset> subsets) {
  const Dataset all = load_dataset(root);  // manifest order
  const DatasetManifest m = read_manifest(root);
  Dataset filtered;
  for (std::size_t i = 0; i < m.files.size(); ++i)
    if (std::find(subsets.begin(), subsets.end(), m.files[i].subset) != subsets.end()) filtered.push_back(all[i]);
  return filtered;
}

json checkpoint_meta(const TrainConfig& tc, const TrainLog& log, std::size_t samples, double holdout_accuracy) {
  return {{"train", to_json(tc)},
          {"train_samples", samples},
          {"epoch_loss", log.epoch_loss},
          {"holdout_accuracy", holdout_accuracy}};
}

std::string join_deltas(std::span<const double> deltas) {
  std::string s;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (i) s += ',';
    s += format_number(deltas[i]);
  }
  return s;
}

// Writes per-relation artefacts for one transform kind.
struct RelationOutputs {
  CalibrationProfile profile;
  DetectionReport report;
};

RelationOutputs run_relation(const PipelineConfig& cfg, const ModelParams& params, TransformKind kind,
                             std::span<const Image> calib, std::span<const Image> clean,
                             std::span<const Image> adversarial, std::ostream& err) {
  CalibrationProfile profile = calibrate(params, calib, kind, cfg.detect.steps, cfg.detect.multiplier, cfg.jobs);
  profile.created_with.epsilon = cfg.attack.epsilon;
  profile.created_with.notes = "calibrated on the calib subset of " + cfg.paths.data_dir.string();
  const auto tc = trace_responses(params, profile.schedule, clean, cfg.jobs);
  const auto ta = trace_responses(params, profile.schedule, adversarial, cfg.jobs);
  DetectionReport report = evaluate_from_traces(profile, tc, ta);
  profile.accuracy = RelationAccuracy{report.final_row().clean_accuracy, report.final_row().adversarial_accuracy};

  const std::string name = to_string(kind);
  const fs::path reports = cfg.resolve(cfg.paths.reports_dir);
  save_profile(cfg.resolve(cfg.paths.profiles_dir) / (name + ".json"), profile);
  export_text(reports / (name + "_report.csv"), render(report, Format::Csv));
  export_text(reports / (name + "_report.json"), render(report, Format::Json, true));
  export_text(reports / (name + "_summary.csv"), render(summary_table(profile.schedule, 0, tc, ta), Format::Csv));
  export_text(reports / (name + "_trends.csv"), render(trends_from_traces(profile.schedule, tc, ta), Format::Csv));
  export_text(reports / (name + "_retention.csv"),
              render(retention_from_traces(profile.schedule, tc, ta), Format::Csv));
  const auto& last = report.final_row();
  err << "  " << name << ": clean " << format_number(last.clean_accuracy) << "%, adversarial "
      << format_number(last.adversarial_accuracy) << "%, overall " << format_number(last.overall) << "% over "
      << last.max_steps << " steps\n";
  return {std::move(profile), std::move(report)};
}

int run_pipeline(const PipelineConfig& cfg, std::ostream& err) {
  const fs::path data_dir = cfg.resolve(cfg.paths.data_dir);
  const fs::path ckpt_path = cfg.resolve(cfg.paths.checkpoint);
  const fs::path pairs_dir = cfg.resolve(cfg.paths.pairs_dir);
  const fs::path reports = cfg.resolve(cfg.paths.reports_dir);

  const DatasetSpec spec = cfg.dataset_spec();
  err << "generating " << spec.num_classes * spec.per_class << " images\n";
  {
    const Dataset data = generate(spec);
    const auto subsets = assign_subsets(data, cfg.fractions, cfg.split_seed());
    write_dataset(data_dir, spec, data, subsets, cfg.fractions, cfg.split_seed());
  }
  const Dataset train_set = load_dataset(data_dir, Subset::Train);
  const Dataset calib_set = load_dataset(data_dir, Subset::Calib);
  const Dataset eval_set = load_dataset(data_dir, Subset::Eval);
  const Dataset holdout = load_subsets(data_dir, {Subset::Calib, Subset::Eval});

  err << "training on " << train_set.size() << " images\n";
  const TrainConfig tc = cfg.train_config();
  TrainLog log;
  const ModelParams trained = train(train_set, tc, &log);
  const double holdout_acc = evaluate_accuracy(trained, holdout, cfg.jobs);
  err << "  held-out accuracy " << format_number(holdout_acc) << "\n";
  save_checkpoint(ckpt_path, {trained, checkpoint_meta(tc, log, train_set.size(), holdout_acc)});
  const ModelParams params = load_checkpoint(ckpt_path).params;

  const auto sweep = epsilon_sweep(params, eval_set, cfg.attack.sweep, cfg.jobs);
  export_text(reports / "sweep.csv", render(std::span<const SweepRow>(sweep), Format::Csv));

  const std::size_t n_pairs = cfg.attack.pairs == 0 ? eval_set.size() : std::min(cfg.attack.pairs, eval_set.size());
  err << "attacking " << n_pairs << " images at eps " << format_number(cfg.attack.epsilon) << "\n";
  write_pairs(pairs_dir, build_pairs(params, eval_set, cfg.attack.epsilon, n_pairs, cfg.jobs), params);
  const auto pairs = load_pairs(pairs_dir);
  std::vector<Image> clean, adversarial;
  std::size_t flipped = 0;
  for (const auto& p : pairs) {
    clean.push_back(p.clean.image);
    adversarial.push_back(p.adversarial);
    flipped += flips(params, p) ? 1 : 0;
  }
  const double flip_rate = pairs.empty() ? 0.0 : static_cast<double>(flipped) / static_cast<double>(pairs.size());
  err << "  flip rate " << format_number(flip_rate) << "\n";

  const auto calib = images_of(calib_set);
  json relations = json::object();
  err << "calibrating on " << calib.size() << " images, evaluating on " << clean.size() << " pairs\n";
  for (TransformKind kind : cfg.detect.kinds) {
    const auto out = run_relation(cfg, params, kind, calib, clean, adversarial, err);
    const auto& last = out.report.final_row();
    relations[to_string(kind)] = {{"clean_accuracy", last.clean_accuracy},
                                  {"adversarial_accuracy", last.adversarial_accuracy},
                                  {"overall", last.overall},
                                  {"max_steps", last.max_steps}};
  }

  const json summary{{"model_checksum", model_checksum(params)},
                     {"holdout_accuracy", holdout_acc},
                     {"epsilon", cfg.attack.epsilon},
                     {"flip_rate", flip_rate},
                     {"counts",
                      {{"train", train_set.size()},
                       {"calib", calib.size()},
                       {"eval_pairs", pairs.size()}}},
                     {"multiplier", cfg.detect.multiplier},
                     {"relations", relations}};
  export_text(reports / "summary.json", summary.dump(2) + "\n");
  err << "reports written to " << reports.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adversarial image detection via metamorphic relations over affine transforms", "metadetect"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  GlobalOptions g;
  app.add_option("--config", g.config, "JSON pipeline configuration")->check(CLI::ExistingFile);
  app.add_option("--workdir", g.workdir, "Base directory for relative paths in the configuration");
  g.jobs_opt = app.add_option("--jobs", g.jobs, "Worker threads for per-image work (default: all cores)");
  g.seed_opt = app.add_option("--seed", g.seed, "Global seed");
  for (const auto* o : {"--config", "--workdir", "--jobs", "--seed"}) app.get_option(o)->configurable(false);

  std::function<int()> action;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Render the synthetic dataset with its manifest");
  std::string gen_out;
  int gen_per_class = 0, gen_classes = 0;
  gen->add_option("--out", gen_out, "Dataset root (default: paths.data_dir)");
  auto* gen_pc = gen->add_option("--per-class", gen_per_class, "Images per class");
  auto* gen_nc = gen->add_option("--num-classes", gen_classes, "Number of classes");
  gen->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      override_if(gen_pc, cfg.dataset.per_class, gen_per_class);
      override_if(gen_nc, cfg.dataset.num_classes, gen_classes);
      cfg.validate();
      const fs::path root = gen_out.empty() ? cfg.resolve(cfg.paths.data_dir) : fs::path(gen_out);
      const DatasetSpec spec = cfg.dataset_spec();
      const Dataset data = generate(spec);
      write_dataset(root, spec, data, assign_subsets(data, cfg.fractions, cfg.split_seed()), cfg.fractions,
                    cfg.split_seed());
      err << "wrote " << data.size() << " images to " << root.string() << "\n";
      return kExitOk;
    };
  });

  // train
  auto* tr = app.add_subcommand("train", "Train the classifier on the train subset");
  std::string tr_data, tr_out;
  double tr_lr = 0.0;
  int tr_epochs = 0, tr_batch = 0;
  bool tr_no_aug = false;
  tr->add_option("--data", tr_data, "Dataset root (default: paths.data_dir)");
  tr->add_option("--out", tr_out, "Checkpoint path (default: paths.checkpoint)");
  auto* tr_lr_opt = tr->add_option("--lr", tr_lr, "Learning rate");
  auto* tr_ep_opt = tr->add_option("--epochs", tr_epochs, "Epochs");
  auto* tr_b_opt = tr->add_option("--batch-size", tr_batch, "Minibatch size");
  tr->add_flag("--no-augment", tr_no_aug, "Disable affine augmentation");
  tr->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      override_if(tr_lr_opt, cfg.train.learning_rate, tr_lr);
      override_if(tr_ep_opt, cfg.train.epochs, tr_epochs);
      override_if(tr_b_opt, cfg.train.batch_size, tr_batch);
      if (tr_no_aug) cfg.train.augment = false;
      cfg.validate();
      const fs::path root = tr_data.empty() ? cfg.resolve(cfg.paths.data_dir) : fs::path(tr_data);
      const fs::path dest = tr_out.empty() ? cfg.resolve(cfg.paths.checkpoint) : fs::path(tr_out);
      const Dataset train_set = load_dataset(root, Subset::Train);
      const Dataset holdout = load_subsets(root, {Subset::Calib, Subset::Eval});
      const TrainConfig tc = cfg.train_config();
      TrainLog log;
      const ModelParams params = train(train_set, tc, &log);
      const double acc = holdout.empty() ? 0.0 : evaluate_accuracy(params, holdout, cfg.jobs);
      save_checkpoint(dest, {params, checkpoint_meta(tc, log, train_set.size(), acc)});
      err << "trained on " << train_set.size() << " images, held-out accuracy " << format_number(acc) << ", wrote "
          << dest.string() << "\n";
      return kExitOk;
    };
  });

  // attack
  auto* at = app.add_subcommand("attack", "Build FGSM clean/adversarial pairs");
  std::string at_model, at_data, at_out, at_subset = "eval";
  double at_eps = 0.0;
  std::size_t at_count = 0;
  at->add_option("--model", at_model, "Checkpoint (default: paths.checkpoint)");
  at->add_option("--data", at_data, "Dataset root (default: paths.data_dir)");
  at->add_option("--subset", at_subset, "train, calib, eval or all")->capture_default_str();
  auto* at_eps_opt = at->add_option("--eps", at_eps, "Perturbation magnitude");
  at->add_option("--count", at_count, "Number of pairs (default: whole subset)");
  at->add_option("--out", at_out, "Pairs directory (default: paths.pairs_dir)");
  at->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      override_if(at_eps_opt, cfg.attack.epsilon, at_eps);
      cfg.validate();
      const ModelParams params = load_checkpoint(or_default(at_model, cfg.resolve(cfg.paths.checkpoint))).params;
      const fs::path root = at_data.empty() ? cfg.resolve(cfg.paths.data_dir) : fs::path(at_data);
      const Dataset data = load_dataset(root, subset_option(at_subset));
      const std::size_t n = at_count == 0 ? data.size() : at_count;
      const auto pairs = build_pairs(params, data, cfg.attack.epsilon, n, cfg.jobs);
      const fs::path dest = at_out.empty() ? cfg.resolve(cfg.paths.pairs_dir) : fs::path(at_out);
      write_pairs(dest, pairs, params);
      std::size_t flipped = 0;
      for (const auto& p : pairs) flipped += flips(params, p) ? 1 : 0;
      err << "wrote " << pairs.size() << " pairs to " << dest.string() << " (" << flipped << " flipped)\n";
      return kExitOk;
    };
  });

  // sweep
  auto* sw = app.add_subcommand("sweep", "Accuracy under FGSM for a list of epsilons");
  std::string sw_model, sw_data, sw_out, sw_subset = "eval";
  std::vector<double> sw_eps;
  sw->add_option("--model", sw_model, "Checkpoint (default: paths.checkpoint)");
  sw->add_option("--data", sw_data, "Dataset root (default: paths.data_dir)");
  sw->add_option("--subset", sw_subset, "train, calib, eval or all")->capture_default_str();
  auto* sw_eps_opt = sw->add_option("--eps", sw_eps, "Comma-separated epsilons")->delimiter(',');
  sw->add_option("--out", sw_out, "Output .csv or .json (default: <reports_dir>/sweep.csv)");
  sw->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      override_if(sw_eps_opt, cfg.attack.sweep, sw_eps);
      cfg.validate();
      const ModelParams params = load_checkpoint(or_default(sw_model, cfg.resolve(cfg.paths.checkpoint))).params;
      const fs::path root = sw_data.empty() ? cfg.resolve(cfg.paths.data_dir) : fs::path(sw_data);
      const Dataset data = load_dataset(root, subset_option(sw_subset));
      const auto rows = epsilon_sweep(params, data, cfg.attack.sweep, cfg.jobs);
      const fs::path dest = sw_out.empty() ? cfg.resolve(cfg.paths.reports_dir) / "sweep.csv" : fs::path(sw_out);
      export_text(dest, render(std::span<const SweepRow>(rows), format_for(dest)));
      for (const auto& r : rows)
        err << "  eps " << format_number(r.epsilon) << ": accuracy " << format_number(r.accuracy) << "\n";
      err << "wrote " << rows.size() << " rows to " << dest.string() << "\n";
      return kExitOk;
    };
  });

  // calibrate
  auto* ca = app.add_subcommand("calibrate", "Calibrate per-step clean statistics for a metamorphic relation");
  std::string ca_model, ca_clean, ca_kind = "all", ca_out, ca_subset = "calib", ca_notes;
  std::size_t ca_steps = 0;
  double ca_n = 0.0, ca_eps = 0.0;
  ca->add_option("--model", ca_model, "Checkpoint (default: paths.checkpoint)");
  ca->add_option("--clean", ca_clean, "Clean images: dataset root, pairs directory, image directory or file");
  ca->add_option("--subset", ca_subset, "Subset when --clean is a dataset root")->capture_default_str();
  ca->add_option("--kind", ca_kind, "rotation, shear, scale, translate or all")->capture_default_str();
  auto* ca_steps_opt = ca->add_option("--steps", ca_steps, "Schedule length");
  auto* ca_n_opt = ca->add_option("--N", ca_n, "Cutoff multiplier");
  auto* ca_eps_opt = ca->add_option("--eps", ca_eps, "Attack epsilon recorded as provenance");
  ca->add_option("--notes", ca_notes, "Free-form provenance note");
  ca->add_option("--out", ca_out, "Profile path; a directory when --kind all (default: paths.profiles_dir)");
  ca->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      override_if(ca_steps_opt, cfg.detect.steps, ca_steps);
      override_if(ca_n_opt, cfg.detect.multiplier, ca_n);
      cfg.validate();
      const ModelParams params = load_checkpoint(or_default(ca_model, cfg.resolve(cfg.paths.checkpoint))).params;
      const fs::path src = ca_clean.empty() ? cfg.resolve(cfg.paths.data_dir) : fs::path(ca_clean);
      const auto images = load_images(src, PairSide::Clean, subset_option(ca_subset));
      std::vector<TransformKind> kinds;
      if (ca_kind == "all")
        kinds = cfg.detect.kinds;
      else
        kinds.push_back(parse_kind(ca_kind));
      for (TransformKind kind : kinds) {
        CalibrationProfile p = calibrate(params, images, kind, cfg.detect.steps, cfg.detect.multiplier, cfg.jobs);
        if (ca_eps_opt->count()) p.created_with.epsilon = ca_eps;
        p.created_with.notes = ca_notes;
        fs::path dest;
        if (ca_kind != "all" && !ca_out.empty())
          dest = ca_out;
        else
          dest = (ca_out.empty() ? cfg.resolve(cfg.paths.profiles_dir) : fs::path(ca_out)) / (to_string(kind) + ".json");
        save_profile(dest, p);
        err << "calibrated " << to_string(kind) << " on " << images.size() << " images, wrote " << dest.string()
            << "\n";
      }
      return kExitOk;
    };
  });

  // detect
  auto* de = app.add_subcommand("detect", "Judge one image as CLEAN or ADVERSARIAL");
  std::string de_model, de_profile, de_image;
  std::size_t de_max = 0;
  bool de_short = false;
  de->add_option("--model", de_model, "Checkpoint (default: paths.checkpoint)");
  de->add_option("--profile", de_profile, "Calibration profile")->required();
  de->add_option("--image", de_image, "Image file (.ppm, .pgm or .mten)")->required();
  auto* de_max_opt = de->add_option("--max-steps", de_max, "Only test the first N schedule steps");
  de->add_flag("--short-circuit", de_short, "Stop at the first triggering step");
  de->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      const ModelParams params = load_checkpoint(or_default(de_model, cfg.resolve(cfg.paths.checkpoint))).params;
      const CalibrationProfile profile = load_profile(de_profile);
      const Image img = read_image(de_image);
      std::optional<std::size_t> max_steps;
      if (de_max_opt->count()) max_steps = de_max;
      const Verdict v = detect(params, profile, img, max_steps, de_short);
      out << to_string(v.decision);
      if (v.triggering_step) out << " step=" << *v.triggering_step;
      out << "\n";
      out << "deltas=" << join_deltas(v.per_step_deltas) << "\n";
      if (v.mr_accuracy)
        out << "mr_accuracy clean=" << format_number(v.mr_accuracy->clean)
            << " adversarial=" << format_number(v.mr_accuracy->adversarial) << "\n";
      return v.decision == Decision::Adversarial ? kExitAdversarial : kExitOk;
    };
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Detection accuracy per iteration count on clean and adversarial sets");
  std::string ev_model, ev_profile, ev_clean, ev_adv, ev_out, ev_json, ev_subset = "eval";
  bool ev_ref = false, ev_annotate = false;
  ev->add_option("--model", ev_model, "Checkpoint (default: paths.checkpoint)");
  ev->add_option("--profile", ev_profile, "Calibration profile")->required();
  ev->add_option("--clean", ev_clean, "Clean images: pairs directory, dataset root or image directory")->required();
  ev->add_option("--adv", ev_adv, "Adversarial images: pairs directory or image directory")->required();
  ev->add_option("--subset", ev_subset, "Subset when --clean is a dataset root")->capture_default_str();
  ev->add_option("--out", ev_out, "CSV report (default: <reports_dir>/<kind>_report.csv)");
  ev->add_option("--json", ev_json, "Also write the report as JSON to this path");
  ev->add_flag("--paper-ref", ev_ref, "Append the published reference accuracies, labelled as not reproduced");
  ev->add_flag("--annotate-profile", ev_annotate, "Store the final-row accuracies in the profile");
  ev->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      const ModelParams params = load_checkpoint(or_default(ev_model, cfg.resolve(cfg.paths.checkpoint))).params;
      CalibrationProfile profile = load_profile(ev_profile);
      const auto clean = load_images(ev_clean, PairSide::Clean, subset_option(ev_subset));
      const auto adv = load_images(ev_adv, PairSide::Adversarial);
      const DetectionReport report = evaluate_detector(params, profile, clean, adv, cfg.jobs);
      const fs::path dest = ev_out.empty()
                                ? cfg.resolve(cfg.paths.reports_dir) / (to_string(profile.kind) + "_report.csv")
                                : fs::path(ev_out);
      export_text(dest, render(report, Format::Csv, ev_ref));
      if (!ev_json.empty()) export_text(ev_json, render(report, Format::Json, ev_ref));
      if (ev_annotate) {
        profile.accuracy = RelationAccuracy{report.final_row().clean_accuracy, report.final_row().adversarial_accuracy};
        save_profile(ev_profile, profile);
      }
      const auto& last = report.final_row();
      err << to_string(profile.kind) << ": clean " << format_number(last.clean_accuracy) << "%, adversarial "
          << format_number(last.adversarial_accuracy) << "%, overall " << format_number(last.overall) << "%\n";
      return kExitOk;
    };
  });

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Generate, train, attack, calibrate and evaluate end to end");
  pl->callback([&] {
    action = [&] {
      PipelineConfig cfg = base_config(g);
      cfg.validate();
      return run_pipeline(cfg, err);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }
  if (!action) return kExitError;
  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int run_subcommand(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_subcommand(args, std::cout, std::cerr);
}

}  // namespace metadetect
