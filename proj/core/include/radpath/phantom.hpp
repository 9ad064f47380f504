#pragma once
// Synthetic cohort generator with plantable, known signal. Each subject
// carries two independent latent risks: risk_rad drives the crossing
// density of a two-valued stripe pattern in the enhancing-tumor region
// (co-occurrence contrast grows with it), and risk_path drives the count
// of dark nuclei on the histology slide. Survival decreases in the mean of
// the two risks, so the combined feature set provably outpredicts either
// source alone.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radpath/image.hpp"

namespace radpath::phantom {

struct PhantomSpec {
  int subjects = 20;
  Dims dims{48, 48, 24};
  Spacing spacing{1.0, 1.0, 1.0};
  int slide_size = 512;
  uint64_t seed = 7;
  double noise = 0.1;         // survival noise: uniform, full width noise*s0
  double censor_rate = 0.15;  // fraction with event = 0 (flips flag only)
  double s0 = 1500.0;         // survival scale in days
  int nuclei_min = 150;       // slide nuclei count at risk_path = 0
  int nuclei_span = 450;      // added count at risk_path = 1
  double stripe_base = 0.15;  // stripe crossing density at risk_rad = 0
  double stripe_span = 0.35;  // added density at risk_rad = 1
};

struct PhantomSubject {
  std::string id;
  double risk_rad = 0, risk_path = 0;
  long survival_days = 1;
  int event = 1;
  int age = 0;
  char gender = 'F';
  std::string split;  // alternating train/val
};

// region label mask used by every phantom subject (concentric boxes plus a
// ventricle box near the origin corner); throws DataError when dims cannot
// fit all four labels
LabelMask phantom_mask(const Dims& dims, const Spacing& spacing);

// one subject's four sequences, deterministic in (spec, subject index)
std::array<Volume, 4> phantom_volumes(const PhantomSpec& spec, int index,
                                      const PhantomSubject& subj);

// one subject's slide
Patch phantom_slide(const PhantomSpec& spec, int index,
                    const PhantomSubject& subj);

// subject records (risks, survival, demographics) without touching disk
std::vector<PhantomSubject> phantom_subjects(const PhantomSpec& spec);

// writes subjects/<id>/{t1,t1gd,t2,flair,mask}.hdr+.raw + slide.pgm,
// metadata.csv, and truth.csv under out_dir; returns the subject records.
// jobs > 1 parallelizes across subjects with identical output.
std::vector<PhantomSubject> generate(const PhantomSpec& spec,
                                     const std::filesystem::path& out_dir,
                                     int jobs = 1);

}  // namespace radpath::phantom
