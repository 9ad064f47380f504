#pragma once
// Cohort-level orchestration: metadata parsing, feature-table CSV round
// trips, batch extraction, protocol runs, and report emission. Everything
// written here is byte-deterministic for a fixed cohort + options; progress
// and warnings go to stderr only.

#include <filesystem>
#include <string>
#include <vector>

#include "radpath/image.hpp"
#include "radpath/ml.hpp"
#include "radpath/path_features.hpp"
#include "radpath/rad_features.hpp"
#include "radpath/stats.hpp"

namespace radpath::pipeline {

struct SubjectRecord {
  std::string subject_id;
  double survival_days = 0;
  int event = 1;
  double age = 0;
  double gender = 0;
  bool has_age = false;
  bool has_gender = false;
  std::string split;  // "train"/"val", empty when the column is absent
};

struct Cohort {
  std::filesystem::path dir;
  std::vector<SubjectRecord> subjects;  // metadata row order
};

// Parses <dir>/metadata.csv. Columns are located by header name;
// subject_id, survival_days and event are required, age/gender/split
// optional (their absence only fails the steps that need them).
Cohort load_cohort(const std::filesystem::path& dir);

std::filesystem::path subject_dir(const Cohort& cohort,
                                  const std::string& subject_id);

// ---- CSV helpers ----

// %.17g: shortest form that still round-trips IEEE doubles
std::string format_double(double v);

// Minimal CSV: comma-split, CRLF tolerant, no quoting (no field we emit
// ever contains a comma). Returns rows including the header row.
std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& file);

struct FeatureTable {
  std::vector<std::string> names;  // columns after the leading subject_id
  std::vector<std::string> ids;    // one per row
  std::vector<std::vector<double>> rows;
};

void write_feature_table(const std::filesystem::path& file,
                         const FeatureTable& table);
FeatureTable read_feature_table(const std::filesystem::path& file);

// one name per line; the canonical column order for a feature CSV
void write_dictionary(const std::filesystem::path& file,
                      const std::vector<std::string>& names);

// ---- batch extraction ----

struct ExtractOptions {
  rad::RadConfig rad;
  path::PathConfig path;
  uint64_t seed = 0;  // patch sampling; per-subject stream derived from id
  int jobs = 1;
  // subject id whose intensity distribution every sequence is matched to
  // before radiographic extraction; empty disables matching
  std::string match_reference;
};

// Reads each subject's four sequences + region mask and writes
// features_rad.csv (base + stored histogram columns) and
// features_rad.dict.txt into out_dir.
void extract_rad_cohort(const Cohort& cohort, const ExtractOptions& opt,
                        const std::filesystem::path& out_dir);

// Reads each subject's slide and writes features_path.csv,
// features_path.dict.txt and the per-patch audit trail
// features_path_patches.csv into out_dir.
void extract_path_cohort(const Cohort& cohort, const ExtractOptions& opt,
                         const std::filesystem::path& out_dir);

// ---- protocol runs ----

enum class Protocol { loocv, split };
Protocol protocol_from_name(const std::string& s);
const char* protocol_name(Protocol p);

struct RunOptions {
  ml::MlConfig ml;
  Protocol protocol = Protocol::loocv;
};

struct RunArtifacts {
  ml::RunResult result;
  stats::ReportBundle report;
};

// Loads the feature tables the source needs from features_dir, joins them
// with cohort metadata, runs the protocol, and writes predictions.csv,
// metrics.json, km_long.csv, km_short.csv, roc_curve.csv, scatter.csv
// (regression) and model.json (split protocol) into out_dir.
RunArtifacts run_protocol(const Cohort& cohort,
                          const std::filesystem::path& features_dir,
                          const RunOptions& opt,
                          const std::filesystem::path& out_dir);

// ---- predictions / report artifacts ----

void write_predictions_csv(const std::filesystem::path& file,
                           const std::vector<stats::Prediction>& preds);
std::vector<stats::Prediction> read_predictions_csv(
    const std::filesystem::path& file);

// Writes metrics.json + km_long.csv + km_short.csv + roc_curve.csv
// (+ scatter.csv when the bundle is a regression) into out_dir.
// task/source/protocol annotate metrics.json; empty strings are omitted.
void write_report_files(const stats::ReportBundle& report,
                        const std::filesystem::path& out_dir,
                        const std::string& task, const std::string& source,
                        const std::string& protocol);

// Rebuilds every report artifact from a predictions file plus cohort
// outcomes (the `report` subcommand).
stats::ReportBundle report_from_predictions(
    const std::filesystem::path& predictions_csv, const Cohort& cohort,
    bool regression, const std::filesystem::path& out_dir);

}  // namespace radpath::pipeline
