// radpath: synthesize cohorts, extract imaging/histology features, run
// survival models, and rebuild reports from stored predictions.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "radpath/image.hpp"
#include "radpath/ml.hpp"
#include "radpath/phantom.hpp"
#include "radpath/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace radpath;

json load_config(const std::string& file) {
  if (file.empty()) return json::object();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("--config: cannot open " + file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("--config: " + file + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("--config: " + file + ": not an object");
  return j;
}

// JSON value for `key`: the subcommand's section wins over the top level
const json* config_value(const json& cfg, const std::string& section,
                         const std::string& key) {
  if (cfg.contains(section) && cfg[section].is_object() &&
      cfg[section].contains(key))
    return &cfg[section][key];
  if (cfg.contains(key) && !cfg[key].is_object()) return &cfg[key];
  return nullptr;
}

// apply a config value to `target` unless the flag was given explicitly
template <typename T>
void merge_option(const CLI::App& sub, const json& cfg, const char* flag,
                  const char* key, T& target) {
  if (sub.count(flag) > 0) return;
  const json* v = config_value(cfg, sub.get_name(), key);
  if (!v) return;
  try {
    target = v->get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("--config: key '") + key +
                     "' has the wrong type");
  }
}

struct SynthOpts {
  std::string out;
  std::string config;
  int subjects = 20;
  std::vector<int> size = {48, 48, 24};
  int slide = 512;
  uint64_t seed = 7;
  double noise = 0.1;
  double censor_rate = 0.15;
  int jobs = 1;
};

struct ExtractOpts {
  std::string cohort, out, config;
  std::string which = "both";
  std::string match_reference;
  uint64_t seed = 0;
  int jobs = 1;
  int patches = 100;
  int patch_size = 1024;
  int levels = 16;
  int bins = 5;
};

struct RunOpts {
  std::string cohort, features, out, config;
  std::string task = "classify";
  std::string source = "radpath";
  std::string protocol = "loocv";
  std::string cutoff = "mean";
  uint64_t seed = 0;
  int jobs = 1;
};

struct ReportOpts {
  std::string predictions, cohort, out, config;
  std::string task;
};

void run_synth(const CLI::App& sub, const SynthOpts& cli) {
  SynthOpts o = cli;
  const json cfg = load_config(o.config);
  merge_option(sub, cfg, "--subjects", "subjects", o.subjects);
  merge_option(sub, cfg, "--size", "size", o.size);
  merge_option(sub, cfg, "--slide", "slide", o.slide);
  merge_option(sub, cfg, "--seed", "seed", o.seed);
  merge_option(sub, cfg, "--noise", "noise", o.noise);
  merge_option(sub, cfg, "--censor-rate", "censor_rate", o.censor_rate);
  merge_option(sub, cfg, "--jobs", "jobs", o.jobs);
  if (o.size.size() != 3)
    throw UsageError("--size needs exactly three values: nx ny nz");

  phantom::PhantomSpec spec;
  spec.subjects = o.subjects;
  spec.dims = Dims{o.size[0], o.size[1], o.size[2]};
  spec.slide_size = o.slide;
  spec.seed = o.seed;
  spec.noise = o.noise;
  spec.censor_rate = o.censor_rate;
  const auto subjects = phantom::generate(spec, o.out, o.jobs);
  std::fprintf(stderr, "[synth] wrote %zu subjects to %s\n", subjects.size(),
               o.out.c_str());
}

void run_extract(const CLI::App& sub, const ExtractOpts& cli) {
  ExtractOpts o = cli;
  const json cfg = load_config(o.config);
  merge_option(sub, cfg, "--which", "which", o.which);
  merge_option(sub, cfg, "--match-reference", "match_reference",
               o.match_reference);
  merge_option(sub, cfg, "--seed", "seed", o.seed);
  merge_option(sub, cfg, "--jobs", "jobs", o.jobs);
  merge_option(sub, cfg, "--patches", "patches", o.patches);
  merge_option(sub, cfg, "--patch-size", "patch_size", o.patch_size);
  merge_option(sub, cfg, "--levels", "levels", o.levels);
  merge_option(sub, cfg, "--bins", "bins", o.bins);

  const pipeline::Cohort cohort = pipeline::load_cohort(o.cohort);
  pipeline::ExtractOptions eo;
  eo.rad.texture_levels = o.levels;
  eo.rad.bins = o.bins;
  eo.path.texture_levels = o.levels;
  eo.path.patches = o.patches;
  eo.path.patch_size = o.patch_size;
  eo.seed = o.seed;
  eo.jobs = o.jobs;
  eo.match_reference = o.match_reference;
  if (o.which == "rad" || o.which == "both")
    pipeline::extract_rad_cohort(cohort, eo, o.out);
  if (o.which == "path" || o.which == "both")
    pipeline::extract_path_cohort(cohort, eo, o.out);
}

void run_run(const CLI::App& sub, const RunOpts& cli) {
  RunOpts o = cli;
  const json cfg = load_config(o.config);
  merge_option(sub, cfg, "--task", "task", o.task);
  merge_option(sub, cfg, "--source", "source", o.source);
  merge_option(sub, cfg, "--protocol", "protocol", o.protocol);
  merge_option(sub, cfg, "--cutoff", "cutoff", o.cutoff);
  merge_option(sub, cfg, "--seed", "seed", o.seed);
  merge_option(sub, cfg, "--jobs", "jobs", o.jobs);

  const pipeline::Cohort cohort = pipeline::load_cohort(o.cohort);
  pipeline::RunOptions ro;
  ro.ml.task = ml::task_from_name(o.task);
  ro.ml.source = ml::source_from_name(o.source);
  if (o.cutoff == "mean")
    ro.ml.cutoff_stat = ml::CutoffStat::mean;
  else if (o.cutoff == "median")
    ro.ml.cutoff_stat = ml::CutoffStat::median;
  else
    throw UsageError("unknown cutoff '" + o.cutoff +
                     "' (expected mean or median)");
  ro.ml.seed = o.seed;
  ro.ml.jobs = o.jobs;
  ro.protocol = pipeline::protocol_from_name(o.protocol);
  const auto artifacts =
      pipeline::run_protocol(cohort, o.features, ro, o.out);
  std::fprintf(stderr, "[run] n=%ld predictions -> %s\n",
               artifacts.report.n, o.out.c_str());
}

void run_report(const CLI::App& sub, const ReportOpts& cli) {
  ReportOpts o = cli;
  const json cfg = load_config(o.config);
  merge_option(sub, cfg, "--task", "task", o.task);
  const bool regression = ml::task_from_name(o.task) == ml::Task::regress;
  const pipeline::Cohort cohort = pipeline::load_cohort(o.cohort);
  pipeline::report_from_predictions(o.predictions, cohort, regression,
                                    o.out);
  std::fprintf(stderr, "[report] wrote metrics to %s\n", o.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "radpath: quantitative imaging + histology survival pipeline"};
  app.require_subcommand(1);

  SynthOpts so;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic cohort with known ground truth");
  synth->add_option("--out", so.out, "cohort output directory")->required();
  synth->add_option("--config", so.config, "JSON defaults (flags win)");
  synth->add_option("--subjects", so.subjects, "number of subjects");
  synth->add_option("--size", so.size, "volume dims: nx ny nz")
      ->expected(3);
  synth->add_option("--slide", so.slide, "slide edge length, pixels");
  synth->add_option("--seed", so.seed, "master seed");
  synth->add_option("--noise", so.noise, "survival noise fraction");
  synth->add_option("--censor-rate", so.censor_rate,
                    "fraction of censored subjects");
  synth->add_option("--jobs", so.jobs, "worker threads");
  synth->callback([&] { run_synth(*synth, so); });

  ExtractOpts eo;
  CLI::App* extract = app.add_subcommand(
      "extract", "extract feature tables from a cohort");
  extract->add_option("--cohort", eo.cohort, "cohort directory")->required();
  extract->add_option("--out", eo.out, "feature output directory")
      ->required();
  extract->add_option("--config", eo.config, "JSON defaults (flags win)");
  extract->add_option("--which", eo.which, "rad, path, or both")
      ->check(CLI::IsMember({"rad", "path", "both"}));
  extract->add_option("--match-reference", eo.match_reference,
                      "subject id whose intensity histogram each sequence "
                      "is matched to (off by default)");
  extract->add_option("--seed", eo.seed, "patch sampling seed");
  extract->add_option("--jobs", eo.jobs, "worker threads");
  extract->add_option("--patches", eo.patches, "patches per slide");
  extract->add_option("--patch-size", eo.patch_size, "patch edge, pixels");
  extract->add_option("--levels", eo.levels, "texture gray levels");
  extract->add_option("--bins", eo.bins, "intensity histogram bins");
  extract->callback([&] { run_extract(*extract, eo); });

  RunOpts ro;
  CLI::App* run = app.add_subcommand(
      "run", "train/evaluate a survival model from feature tables");
  run->add_option("--cohort", ro.cohort, "cohort directory (metadata.csv)")
      ->required();
  run->add_option("--features", ro.features, "feature table directory")
      ->required();
  run->add_option("--out", ro.out, "artifact output directory")->required();
  run->add_option("--config", ro.config, "JSON defaults (flags win)");
  run->add_option("--task", ro.task, "classify or regress")
      ->check(CLI::IsMember({"classify", "regress"}));
  run->add_option("--source", ro.source, "rad, path, or radpath")
      ->check(CLI::IsMember({"rad", "path", "radpath"}));
  run->add_option("--protocol", ro.protocol, "loocv or split")
      ->check(CLI::IsMember({"loocv", "split"}));
  run->add_option("--cutoff", ro.cutoff,
                  "survival dichotomization statistic: mean or median")
      ->check(CLI::IsMember({"mean", "median"}));
  run->add_option("--seed", ro.seed, "fold shuffling seed");
  run->add_option("--jobs", ro.jobs, "worker threads");
  run->callback([&] { run_run(*run, ro); });

  ReportOpts po;
  CLI::App* report = app.add_subcommand(
      "report", "rebuild report artifacts from stored predictions");
  report->add_option("--predictions", po.predictions, "predictions.csv path")
      ->required();
  report->add_option("--cohort", po.cohort, "cohort directory")->required();
  report->add_option("--task", po.task, "classify or regress")
      ->required()
      ->check(CLI::IsMember({"classify", "regress"}));
  report->add_option("--out", po.out, "artifact output directory")
      ->required();
  report->add_option("--config", po.config, "JSON defaults (flags win)");
  report->callback([&] { run_report(*report, po); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
