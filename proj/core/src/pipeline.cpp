#include "radpath/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "radpath/histogram_match.hpp"
#include "radpath/io.hpp"
#include "radpath/rng.hpp"

namespace radpath::pipeline {
namespace {

using nlohmann::json;

double parse_number(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw DataError(where + ": bad number '" + s + "'");
  return v;
}

long parse_integer(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw DataError(where + ": bad integer '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + file.string());
  return out;
}

// run `work(i)` for i in [0, n) on `jobs` threads; first error wins
void parallel_for(int n, int jobs, const std::function<void(int)>& work) {
  jobs = std::max(1, jobs);
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

// re-throw the current subject's failure with its id attached
[[noreturn]] void rethrow_for_subject(const std::string& id) {
  try {
    throw;
  } catch (const UsageError& e) {
    throw UsageError("subject " + id + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("subject " + id + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("subject " + id + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError("subject " + id + ": " + e.what());
  }
}

void print_warnings(const Cohort& cohort,
                    const std::vector<std::vector<std::string>>& warns) {
  for (std::size_t i = 0; i < warns.size(); ++i)
    for (const std::string& w : warns[i])
      std::fprintf(stderr, "warning: subject %s: %s\n",
                   cohort.subjects[i].subject_id.c_str(), w.c_str());
}

struct Progress {
  const char* tag;
  int total = 0;
  std::atomic<int> done{0};
  void tick(const std::string& id) {
    const int d = done.fetch_add(1) + 1;
    std::fprintf(stderr, "[%s] %s (%d/%d)\n", tag, id.c_str(), d, total);
  }
};

}  // namespace

Cohort load_cohort(const std::filesystem::path& dir) {
  const std::filesystem::path file = dir / "metadata.csv";
  const auto rows = read_csv(file);
  if (rows.empty()) throw DataError(file.string() + ": empty file");
  const std::vector<std::string>& header = rows.front();
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!col.emplace(header[i], i).second)
      throw DataError(file.string() + ": duplicate column '" + header[i] +
                      "'");
  }
  auto require = [&](const char* name) {
    auto it = col.find(name);
    if (it == col.end())
      throw DataError(file.string() + ": missing column '" + name + "'");
    return it->second;
  };
  const std::size_t c_id = require("subject_id");
  const std::size_t c_days = require("survival_days");
  const std::size_t c_event = require("event");
  const auto c_age = col.find("age");
  const auto c_gender = col.find("gender");
  const auto c_split = col.find("split");

  Cohort cohort;
  cohort.dir = dir;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = file.string() + ":" + std::to_string(r + 1);
    if (row.size() != header.size())
      throw DataError(where + ": has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(header.size()));
    SubjectRecord s;
    s.subject_id = row[c_id];
    if (s.subject_id.empty()) throw DataError(where + ": empty subject_id");
    if (!seen.insert(s.subject_id).second)
      throw DataError(where + ": duplicate subject_id '" + s.subject_id +
                      "'");
    s.survival_days = parse_number(row[c_days], where);
    if (s.survival_days < 0)
      throw DataError(where + ": negative survival_days");
    const long ev = parse_integer(row[c_event], where);
    if (ev != 0 && ev != 1)
      throw DataError(where + ": event must be 0 or 1, got '" + row[c_event] +
                      "'");
    s.event = int(ev);
    if (c_age != col.end() && !row[c_age->second].empty()) {
      s.age = parse_number(row[c_age->second], where);
      s.has_age = true;
    }
    if (c_gender != col.end() && !row[c_gender->second].empty()) {
      const std::string& g = row[c_gender->second];
      if (g == "F" || g == "f")
        s.gender = 0;
      else if (g == "M" || g == "m")
        s.gender = 1;
      else {
        s.gender = parse_number(g, where);
        if (s.gender != 0 && s.gender != 1)
          throw DataError(where + ": gender must be F/M or 0/1, got '" + g +
                          "'");
      }
      s.has_gender = true;
    }
    if (c_split != col.end()) {
      s.split = row[c_split->second];
      if (!s.split.empty() && s.split != "train" && s.split != "val")
        throw DataError(where + ": split must be 'train' or 'val', got '" +
                        s.split + "'");
    }
    cohort.subjects.push_back(std::move(s));
  }
  if (cohort.subjects.empty())
    throw DataError(file.string() + ": no subject rows");
  return cohort;
}

std::filesystem::path subject_dir(const Cohort& cohort,
                                  const std::string& subject_id) {
  return cohort.dir / "subjects" / subject_id;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open: " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      // tolerate a UTF-8 byte-order mark
      if (line.size() >= 3 && line[0] == '\xef' && line[1] == '\xbb' &&
          line[2] == '\xbf')
        line.erase(0, 3);
      first = false;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

void write_feature_table(const std::filesystem::path& file,
                         const FeatureTable& table) {
  std::ofstream out = open_out(file);
  out << "subject_id";
  for (const std::string& n : table.names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < table.ids.size(); ++r) {
    if (table.rows[r].size() != table.names.size())
      throw UsageError("write_feature_table: row width mismatch");
    out << table.ids[r];
    for (double v : table.rows[r]) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + file.string());
}

FeatureTable read_feature_table(const std::filesystem::path& file) {
  const auto rows = read_csv(file);
  if (rows.empty()) throw DataError(file.string() + ": empty file");
  const auto& header = rows.front();
  if (header.empty() || header[0] != "subject_id")
    throw DataError(file.string() + ": first column must be subject_id");
  FeatureTable t;
  t.names.assign(header.begin() + 1, header.end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string where = file.string() + ":" + std::to_string(r + 1);
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw DataError(where + ": has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(header.size()));
    t.ids.push_back(row[0]);
    std::vector<double> vals;
    vals.reserve(row.size() - 1);
    for (std::size_t c = 1; c < row.size(); ++c)
      vals.push_back(parse_number(row[c], where));
    t.rows.push_back(std::move(vals));
  }
  return t;
}

void write_dictionary(const std::filesystem::path& file,
                      const std::vector<std::string>& names) {
  std::ofstream out = open_out(file);
  for (const std::string& n : names) out << n << '\n';
  if (!out) throw DataError("write failed: " + file.string());
}

// ---- batch extraction ----

void extract_rad_cohort(const Cohort& cohort, const ExtractOptions& opt,
                        const std::filesystem::path& out_dir) {
  for (const SubjectRecord& s : cohort.subjects)
    if (!s.has_age || !s.has_gender)
      throw DataError(
          "metadata.csv: age and gender are required for radiographic "
          "extraction (missing for subject '" +
          s.subject_id + "')");

  const bool matching = !opt.match_reference.empty();
  std::array<Volume, 4> reference{};
  if (matching) {
    const bool known =
        std::any_of(cohort.subjects.begin(), cohort.subjects.end(),
                    [&](const SubjectRecord& s) {
                      return s.subject_id == opt.match_reference;
                    });
    if (!known)
      throw DataError("match reference subject '" + opt.match_reference +
                      "' is not in metadata.csv");
    const auto ref_dir = subject_dir(cohort, opt.match_reference);
    for (std::size_t k = 0; k < all_modalities.size(); ++k)
      reference[k] = read_volume(
          ref_dir / (std::string(modality_name(all_modalities[k])) + ".hdr"));
  }

  const int n = int(cohort.subjects.size());
  std::vector<rad::RadRaw> raws(static_cast<std::size_t>(n));
  std::vector<std::vector<std::string>> warns(static_cast<std::size_t>(n));
  Progress progress{"extract rad", n};

  parallel_for(n, opt.jobs, [&](int i) {
    const SubjectRecord& s = cohort.subjects[std::size_t(i)];
    try {
      const auto dir = subject_dir(cohort, s.subject_id);
      std::array<Volume, 4> seqs;
      for (std::size_t k = 0; k < all_modalities.size(); ++k)
        seqs[k] = read_volume(
            dir / (std::string(modality_name(all_modalities[k])) + ".hdr"));
      const LabelMask mask = read_mask(dir / "mask.hdr");
      if (matching)
        for (std::size_t k = 0; k < seqs.size(); ++k)
          seqs[k] = histogram_match(seqs[k], reference[k]);
      const rad::Demographics demo{s.age, s.gender};
      raws[std::size_t(i)] = rad::extract_rad_raw(
          seqs, mask, seqs[0].spacing, demo, opt.rad, &warns[std::size_t(i)]);
    } catch (...) {
      rethrow_for_subject(s.subject_id);
    }
    progress.tick(s.subject_id);
  });
  print_warnings(cohort, warns);

  FeatureTable t;
  t.names = rad::rad_base_dictionary(opt.rad);
  const auto aux = rad::rad_aux_dictionary(opt.rad);
  t.names.insert(t.names.end(), aux.begin(), aux.end());
  for (int i = 0; i < n; ++i) {
    rad::RadRaw& raw = raws[std::size_t(i)];
    t.ids.push_back(cohort.subjects[std::size_t(i)].subject_id);
    std::vector<double> row = std::move(raw.base);
    row.insert(row.end(), raw.cdf32.begin(), raw.cdf32.end());
    t.rows.push_back(std::move(row));
  }
  std::filesystem::create_directories(out_dir);
  write_feature_table(out_dir / "features_rad.csv", t);
  write_dictionary(out_dir / "features_rad.dict.txt", t.names);
}

void extract_path_cohort(const Cohort& cohort, const ExtractOptions& opt,
                         const std::filesystem::path& out_dir) {
  const int n = int(cohort.subjects.size());
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  std::vector<std::vector<path::PatchFeatureRow>> audits(static_cast<std::size_t>(n));
  std::vector<std::vector<std::string>> warns(static_cast<std::size_t>(n));
  Progress progress{"extract path", n};

  parallel_for(n, opt.jobs, [&](int i) {
    const SubjectRecord& s = cohort.subjects[std::size_t(i)];
    try {
      const Patch slide = read_pgm(subject_dir(cohort, s.subject_id) /
                                   "slide.pgm");
      const uint64_t seed = mix_seed(opt.seed, fnv1a(s.subject_id));
      rows[std::size_t(i)] =
          path::extract_path(slide, opt.path, seed, &audits[std::size_t(i)],
                             &warns[std::size_t(i)]);
    } catch (...) {
      rethrow_for_subject(s.subject_id);
    }
    progress.tick(s.subject_id);
  });
  print_warnings(cohort, warns);

  FeatureTable t;
  t.names = path::path_dictionary();
  for (int i = 0; i < n; ++i) {
    t.ids.push_back(cohort.subjects[std::size_t(i)].subject_id);
    t.rows.push_back(std::move(rows[std::size_t(i)]));
  }
  std::filesystem::create_directories(out_dir);
  write_feature_table(out_dir / "features_path.csv", t);
  write_dictionary(out_dir / "features_path.dict.txt", t.names);

  std::ofstream audit = open_out(out_dir / "features_path_patches.csv");
  audit << "subject_id,patch,x,y,tissue_fraction,nuclei_count";
  for (const std::string& name : t.names) audit << ',' << name;
  audit << '\n';
  for (int i = 0; i < n; ++i) {
    const std::string& id = cohort.subjects[std::size_t(i)].subject_id;
    for (const path::PatchFeatureRow& row : audits[std::size_t(i)]) {
      audit << id << ',' << row.patch_id << ',' << row.x << ',' << row.y
            << ',' << format_double(row.tissue_fraction) << ','
            << format_double(row.nuclei_count);
      for (double v : row.features) audit << ',' << format_double(v);
      audit << '\n';
    }
  }
  if (!audit)
    throw DataError("write failed: " +
                    (out_dir / "features_path_patches.csv").string());
}

// ---- protocol runs ----

Protocol protocol_from_name(const std::string& s) {
  if (s == "loocv") return Protocol::loocv;
  if (s == "split") return Protocol::split;
  throw UsageError("unknown protocol '" + s + "' (expected loocv or split)");
}

const char* protocol_name(Protocol p) {
  return p == Protocol::loocv ? "loocv" : "split";
}

namespace {

void check_columns(const FeatureTable& t,
                   const std::vector<std::string>& expected,
                   const std::string& label) {
  if (t.names != expected)
    throw DataError(label +
                    ": column set does not match the current configuration "
                    "(re-run extract)");
}

std::unordered_map<std::string, std::size_t> index_ids(
    const FeatureTable& t, const std::string& label) {
  std::unordered_map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < t.ids.size(); ++i)
    if (!m.emplace(t.ids[i], i).second)
      throw DataError(label + ": duplicate subject_id '" + t.ids[i] + "'");
  return m;
}

json basis_json(const rad::PcaBasis& b) {
  json j;
  j["mean"] = b.mean;
  j["axes"] = b.axes;
  j["explained_variance"] = b.explained_variance;
  return j;
}

void write_model_json(const std::filesystem::path& file,
                      const ml::FoldDiagnostics& d, const ml::MlConfig& cfg,
                      Protocol protocol) {
  json m;
  m["task"] = ml::task_name(cfg.task);
  m["source"] = ml::source_name(cfg.source);
  m["protocol"] = protocol_name(protocol);
  m["c"] = d.chosen_c;
  if (cfg.task == ml::Task::regress) {
    m["epsilon"] = d.chosen_epsilon;
    m["target_mean"] = d.target_mean;
    m["target_std"] = d.target_std;
  }
  m["cutoff_days"] = d.cutoff;
  m["standardizer_mean"] = d.standardizer_mean;
  m["standardizer_std"] = d.standardizer_std;
  m["w"] = d.w;
  m["b"] = d.b;
  if (!d.pca.empty()) {
    json blocks = json::array();
    for (const rad::PcaBasis& b : d.pca) blocks.push_back(basis_json(b));
    m["pca"] = std::move(blocks);
  }
  std::vector<std::string> dict;
  if (cfg.source != ml::Source::path) dict = rad::rad_dictionary(cfg.rad_cfg);
  if (cfg.source != ml::Source::rad) {
    const auto& p = path::path_dictionary();
    dict.insert(dict.end(), p.begin(), p.end());
  }
  std::string joined;
  for (const std::string& name : dict) {
    joined += name;
    joined += '\n';
  }
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                (unsigned long long)fnv1a(joined));
  m["dictionary"] = dict;
  m["dictionary_fnv1a"] = hash;
  std::ofstream out = open_out(file);
  out << m.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + file.string());
}

}  // namespace

RunArtifacts run_protocol(const Cohort& cohort,
                          const std::filesystem::path& features_dir,
                          const RunOptions& opt,
                          const std::filesystem::path& out_dir) {
  const ml::MlConfig& cfg = opt.ml;
  const bool need_rad = cfg.source != ml::Source::path;
  const bool need_path = cfg.source != ml::Source::rad;

  FeatureTable rad_table, path_table;
  std::unordered_map<std::string, std::size_t> rad_ids, path_ids;
  std::vector<std::string> rad_names;
  std::size_t base_width = 0;
  if (need_rad) {
    rad_table = read_feature_table(features_dir / "features_rad.csv");
    rad_names = rad::rad_base_dictionary(cfg.rad_cfg);
    base_width = rad_names.size();
    const auto aux = rad::rad_aux_dictionary(cfg.rad_cfg);
    rad_names.insert(rad_names.end(), aux.begin(), aux.end());
    check_columns(rad_table, rad_names, "features_rad.csv");
    rad_ids = index_ids(rad_table, "features_rad.csv");
  }
  if (need_path) {
    path_table = read_feature_table(features_dir / "features_path.csv");
    check_columns(path_table, path::path_dictionary(), "features_path.csv");
    path_ids = index_ids(path_table, "features_path.csv");
  }

  std::vector<ml::SubjectFeatures> feats;
  feats.reserve(cohort.subjects.size());
  for (const SubjectRecord& s : cohort.subjects) {
    ml::SubjectFeatures f;
    f.subject_id = s.subject_id;
    f.survival_days = s.survival_days;
    f.event = s.event;
    f.split = s.split;
    if (need_rad) {
      auto it = rad_ids.find(s.subject_id);
      if (it == rad_ids.end())
        throw DataError("features_rad.csv: no row for subject '" +
                        s.subject_id + "'");
      const std::vector<double>& row = rad_table.rows[it->second];
      f.rad.base.assign(row.begin(), row.begin() + long(base_width));
      f.rad.cdf32.assign(row.begin() + long(base_width), row.end());
    }
    if (need_path) {
      auto it = path_ids.find(s.subject_id);
      if (it == path_ids.end())
        throw DataError("features_path.csv: no row for subject '" +
                        s.subject_id + "'");
      f.path = path_table.rows[it->second];
    }
    feats.push_back(std::move(f));
  }

  RunArtifacts artifacts;
  artifacts.result = opt.protocol == Protocol::loocv
                         ? ml::run_loocv(feats, cfg)
                         : ml::run_split(feats, cfg);

  std::vector<stats::SubjectOutcome> outcomes;
  outcomes.reserve(cohort.subjects.size());
  for (const SubjectRecord& s : cohort.subjects)
    outcomes.push_back({s.subject_id, s.survival_days, s.event});
  const bool regression = cfg.task == ml::Task::regress;
  artifacts.report =
      stats::build_report(artifacts.result.predictions, outcomes, regression);

  std::filesystem::create_directories(out_dir);
  write_predictions_csv(out_dir / "predictions.csv",
                        artifacts.result.predictions);
  write_report_files(artifacts.report, out_dir, ml::task_name(cfg.task),
                     ml::source_name(cfg.source),
                     protocol_name(opt.protocol));
  if (opt.protocol == Protocol::split)
    write_model_json(out_dir / "model.json", artifacts.result.folds.at(0),
                     cfg, opt.protocol);
  return artifacts;
}

// ---- predictions / report artifacts ----

void write_predictions_csv(const std::filesystem::path& file,
                           const std::vector<stats::Prediction>& preds) {
  std::ofstream out = open_out(file);
  out << "subject_id,fold,score,predicted,truth\n";
  for (const stats::Prediction& p : preds)
    out << p.subject_id << ',' << p.fold << ',' << format_double(p.score)
        << ',' << p.predicted << ',' << p.truth << '\n';
  if (!out) throw DataError("write failed: " + file.string());
}

std::vector<stats::Prediction> read_predictions_csv(
    const std::filesystem::path& file) {
  const auto rows = read_csv(file);
  if (rows.empty()) throw DataError(file.string() + ": empty file");
  const std::vector<std::string> expect{"subject_id", "fold", "score",
                                        "predicted", "truth"};
  if (rows.front() != expect)
    throw DataError(file.string() +
                    ": expected header subject_id,fold,score,predicted,truth");
  std::vector<stats::Prediction> preds;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = file.string() + ":" + std::to_string(r + 1);
    if (row.size() != expect.size())
      throw DataError(where + ": has " + std::to_string(row.size()) +
                      " fields, expected 5");
    stats::Prediction p;
    p.subject_id = row[0];
    p.fold = int(parse_integer(row[1], where));
    p.score = parse_number(row[2], where);
    p.predicted = int(parse_integer(row[3], where));
    p.truth = int(parse_integer(row[4], where));
    if ((p.predicted != 1 && p.predicted != -1) ||
        (p.truth != 1 && p.truth != -1))
      throw DataError(where + ": predicted/truth must be +1 or -1");
    preds.push_back(std::move(p));
  }
  return preds;
}

namespace {

void write_km_csv(const std::filesystem::path& file,
                  const stats::KmCurve& curve) {
  std::ofstream out = open_out(file);
  out << "time,survival,at_risk\n";
  for (const stats::KmPoint& p : curve)
    out << format_double(p.time) << ',' << format_double(p.survival) << ','
        << p.at_risk << '\n';
  if (!out) throw DataError("write failed: " + file.string());
}

}  // namespace

void write_report_files(const stats::ReportBundle& report,
                        const std::filesystem::path& out_dir,
                        const std::string& task, const std::string& source,
                        const std::string& protocol) {
  std::filesystem::create_directories(out_dir);
  json j;
  j["n"] = report.n;
  j["accuracy"] = report.confusion.accuracy;
  j["sensitivity"] = report.confusion.sensitivity;
  j["specificity"] = report.confusion.specificity;
  j["auc"] = report.roc.auc;
  j["auc_se"] = report.roc.se;
  j["auc_ci"] = {report.roc.ci_lo, report.roc.ci_hi};
  if (report.rho) j["rho"] = *report.rho;
  j["hr"] = report.cox.hr;
  j["hr_ci"] = {report.cox.ci_lo, report.cox.ci_hi};
  j["cox_p"] = report.cox.p;
  j["p"] = report.logrank_pvalue;
  j["logrank_chi2"] = report.logrank_statistic;
  if (!task.empty()) j["task"] = task;
  if (!source.empty()) j["source"] = source;
  if (!protocol.empty()) j["protocol"] = protocol;
  {
    std::ofstream out = open_out(out_dir / "metrics.json");
    out << j.dump(2) << '\n';
    if (!out)
      throw DataError("write failed: " + (out_dir / "metrics.json").string());
  }

  write_km_csv(out_dir / "km_long.csv", report.km_long);
  write_km_csv(out_dir / "km_short.csv", report.km_short);

  {
    std::ofstream out = open_out(out_dir / "roc_curve.csv");
    out << "fpr,tpr,threshold\n";
    for (const stats::RocPoint& p : report.roc.curve)
      out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
          << format_double(p.threshold) << '\n';
    if (!out)
      throw DataError("write failed: " +
                      (out_dir / "roc_curve.csv").string());
  }

  if (report.regression) {
    std::ofstream out = open_out(out_dir / "scatter.csv");
    out << "subject_id,predicted_days,survival_days\n";
    for (std::size_t i = 0; i < report.scatter.size(); ++i)
      out << report.scatter_ids[i] << ','
          << format_double(report.scatter[i][0]) << ','
          << format_double(report.scatter[i][1]) << '\n';
    if (!out)
      throw DataError("write failed: " + (out_dir / "scatter.csv").string());
  }
}

stats::ReportBundle report_from_predictions(
    const std::filesystem::path& predictions_csv, const Cohort& cohort,
    bool regression, const std::filesystem::path& out_dir) {
  const auto preds = read_predictions_csv(predictions_csv);
  std::vector<stats::SubjectOutcome> outcomes;
  outcomes.reserve(cohort.subjects.size());
  for (const SubjectRecord& s : cohort.subjects)
    outcomes.push_back({s.subject_id, s.survival_days, s.event});
  stats::ReportBundle report =
      stats::build_report(preds, outcomes, regression);
  write_report_files(report, out_dir,
                     regression ? "regress" : "classify", "", "");
  return report;
}

}  // namespace radpath::pipeline
