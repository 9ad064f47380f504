#include "radpath/phantom.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "radpath/io.hpp"
#include "radpath/rng.hpp"

namespace radpath::phantom {
namespace {

struct BoxRadii {
  int r1, r2, r3;  // etumor < non-etumor < edema half-widths
};

BoxRadii radii_for(int n) { return {n / 6, n / 4, n / 3}; }

bool in_box(int x, int c, int r) { return x >= c - r && x < c + r; }

// per-subject stream ids, spaced so adding draws to one stage never shifts
// another stage's stream
enum Stream : uint64_t {
  kRisk = 0,
  kDemo = 1,
  kSurvival = 2,
  kStripePhase = 3,
  kNuclei = 4,
};

uint64_t subject_seed(const PhantomSpec& spec, int index, Stream stream) {
  return mix_seed(spec.seed, uint64_t(index) * 16 + uint64_t(stream));
}

}  // namespace

LabelMask phantom_mask(const Dims& dims, const Spacing& spacing) {
  const BoxRadii rx = radii_for(dims.nx), ry = radii_for(dims.ny),
                 rz = radii_for(dims.nz);
  const int cx = dims.nx / 2, cy = dims.ny / 2, cz = dims.nz / 2;
  auto vent_len = [](int n) { return std::max(2, n / 12); };

  auto ok_axis = [&](const BoxRadii& r, int n, int c) {
    return r.r1 >= 1 && r.r1 < r.r2 && r.r2 < r.r3 && c + r.r3 <= n &&
           1 + vent_len(n) <= c - r.r3;
  };
  if (!ok_axis(rx, dims.nx, cx) || !ok_axis(ry, dims.ny, cy) ||
      !ok_axis(rz, dims.nz, cz))
    throw DataError("volume dims too small to place all regions");

  LabelMask m;
  m.dims = dims;
  m.spacing = spacing;
  m.labels.assign(dims.count(), uint8_t(Region::kBackground));
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        uint8_t label = Region::kBackground;
        if (in_box(x, cx, rx.r1) && in_box(y, cy, ry.r1) &&
            in_box(z, cz, rz.r1))
          label = Region::kETumor;
        else if (in_box(x, cx, rx.r2) && in_box(y, cy, ry.r2) &&
                 in_box(z, cz, rz.r2))
          label = Region::kNonETumor;
        else if (in_box(x, cx, rx.r3) && in_box(y, cy, ry.r3) &&
                 in_box(z, cz, rz.r3))
          label = Region::kEdema;
        else if (x >= 1 && x < 1 + vent_len(dims.nx) && y >= 1 &&
                 y < 1 + vent_len(dims.ny) && z >= 1 &&
                 z < 1 + vent_len(dims.nz))
          label = Region::kVent;
        m.at(x, y, z) = label;
      }
  return m;
}

std::vector<PhantomSubject> phantom_subjects(const PhantomSpec& spec) {
  if (spec.subjects < 1) throw UsageError("phantom: subjects must be >= 1");
  if (spec.noise < 0 || spec.censor_rate < 0 || spec.censor_rate >= 1)
    throw UsageError("phantom: bad noise or censor rate");

  const int width = spec.subjects > 999 ? 4 : 3;
  std::vector<PhantomSubject> out;
  out.reserve(std::size_t(spec.subjects));
  for (int i = 0; i < spec.subjects; ++i) {
    PhantomSubject s;
    std::string num = std::to_string(i + 1);
    s.id = "s" + std::string(std::size_t(width) - num.size(), '0') + num;

    Rng risk(subject_seed(spec, i, kRisk));
    s.risk_rad = risk.uniform();
    s.risk_path = risk.uniform();

    Rng demo(subject_seed(spec, i, kDemo));
    s.age = 40 + int(demo.below(36));  // 40..75
    s.gender = demo.uniform() < 0.5 ? 'F' : 'M';

    Rng surv(subject_seed(spec, i, kSurvival));
    const double mean_risk = 0.5 * (s.risk_rad + s.risk_path);
    const double noise_days =
        spec.noise > 0
            ? surv.uniform(-spec.noise * spec.s0 / 2, spec.noise * spec.s0 / 2)
            : 0.0;
    s.survival_days = std::max(
        1L, std::lround(spec.s0 * (1.0 - mean_risk) + noise_days));
    s.event = surv.uniform() < spec.censor_rate ? 0 : 1;
    s.split = i % 2 == 0 ? "train" : "val";
    out.push_back(std::move(s));
  }
  return out;
}

std::array<Volume, 4> phantom_volumes(const PhantomSpec& spec, int index,
                                      const PhantomSubject& subj) {
  const LabelMask mask = phantom_mask(spec.dims, spec.spacing);
  const double density = spec.stripe_base + spec.stripe_span * subj.risk_rad;

  Rng phase_rng(subject_seed(spec, index, kStripePhase));
  std::array<double, 4> phase0;
  for (double& p : phase0) p = phase_rng.uniform();

  std::array<Volume, 4> seqs;
  for (std::size_t mi = 0; mi < seqs.size(); ++mi) {
    Volume& v = seqs[mi];
    v.dims = spec.dims;
    v.spacing = spec.spacing;
    v.data.assign(spec.dims.count(), 0.f);
    for (int z = 0; z < spec.dims.nz; ++z)
      for (int y = 0; y < spec.dims.ny; ++y)
        for (int x = 0; x < spec.dims.nx; ++x) {
          float value = 30.f + 5.f * float(mi);  // quiet background
          switch (mask.at(x, y, z)) {
            case Region::kETumor: {
              // stripes along x; the per-row golden-ratio phase spreads the
              // crossing thresholds so the total crossing count grows with
              // the planted density
              double row_phase =
                  phase0[mi] +
                  0.6180339887498949 * double(y + spec.dims.ny * z);
              row_phase -= std::floor(row_phase);
              long bit =
                  long(std::floor((double(x) + row_phase) * density));
              value = (bit & 1) ? 200.f : 120.f;
              break;
            }
            case Region::kNonETumor:
              value = ((x + y + z) & 1) ? 110.f : 80.f;
              break;
            case Region::kEdema:
              value = ((x + y + z) & 1) ? 70.f : 50.f;
              break;
            case Region::kVent:
              value = 10.f;
              break;
            default:
              break;
          }
          v.at(x, y, z) = value;
        }
  }
  return seqs;
}

Patch phantom_slide(const PhantomSpec& spec, int index,
                    const PhantomSubject& subj) {
  const int n = spec.slide_size;
  if (n < 64) throw UsageError("phantom: slide size too small");
  Patch slide;
  slide.width = slide.height = n;
  slide.pixels.resize(std::size_t(n) * n);

  // smooth illumination ramp, everywhere below the tissue threshold
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double t = double(x + y) / double(2 * n - 2);
      slide.at(x, y) = uint8_t(std::lround(175.0 + 40.0 * t));
    }

  const int target =
      spec.nuclei_min + int(std::lround(spec.nuclei_span * subj.risk_path));
  Rng rng(subject_seed(spec, index, kNuclei));

  struct Disk {
    int x, y, r;
  };
  std::vector<Disk> disks;
  disks.reserve(std::size_t(target));
  const long budget = 200L * target;
  for (long attempt = 0; attempt < budget && int(disks.size()) < target;
       ++attempt) {
    Disk d;
    d.r = 4 + int(rng.below(4));  // radius 4..7
    d.x = d.r + 2 + int(rng.below(uint64_t(n - 2 * (d.r + 2))));
    d.y = d.r + 2 + int(rng.below(uint64_t(n - 2 * (d.r + 2))));
    int dark = 60 + int(rng.below(31));  // draw now to keep stream aligned
    bool clear = true;
    for (const Disk& o : disks) {
      long dx = d.x - o.x, dy = d.y - o.y;
      long min_sep = d.r + o.r + 3;
      if (dx * dx + dy * dy < min_sep * min_sep) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    disks.push_back(d);
    for (int yy = d.y - d.r; yy <= d.y + d.r; ++yy)
      for (int xx = d.x - d.r; xx <= d.x + d.r; ++xx) {
        int ddx = xx - d.x, ddy = yy - d.y;
        if (ddx * ddx + ddy * ddy <= d.r * d.r)
          slide.at(xx, yy) = uint8_t(dark);
      }
  }
  return slide;
}

std::vector<PhantomSubject> generate(const PhantomSpec& spec,
                                     const std::filesystem::path& out_dir,
                                     int jobs) {
  namespace fs = std::filesystem;
  const std::vector<PhantomSubject> subjects = phantom_subjects(spec);
  // fail fast on impossible dims before writing anything
  phantom_mask(spec.dims, spec.spacing);

  fs::create_directories(out_dir / "subjects");

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= int(subjects.size())) return;
      try {
        const PhantomSubject& s = subjects[std::size_t(i)];
        const fs::path dir = out_dir / "subjects" / s.id;
        fs::create_directories(dir);
        std::array<Volume, 4> seqs = phantom_volumes(spec, i, s);
        for (std::size_t mi = 0; mi < seqs.size(); ++mi) {
          const char* name = modality_name(all_modalities[mi]);
          write_volume(dir / (std::string(name) + ".hdr"), seqs[mi]);
        }
        write_mask(dir / "mask.hdr", phantom_mask(spec.dims, spec.spacing));
        write_pgm(dir / "slide.pgm", phantom_slide(spec, i, s));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int n_jobs = std::max(1, jobs);
  if (n_jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  {
    std::ofstream meta(out_dir / "metadata.csv", std::ios::binary);
    meta << "subject_id,survival_days,event,age,gender,split\n";
    for (const PhantomSubject& s : subjects)
      meta << s.id << ',' << s.survival_days << ',' << s.event << ','
           << s.age << ',' << s.gender << ',' << s.split << '\n';
    if (!meta) throw DataError("cannot write metadata.csv");
  }
  {
    std::ofstream truth(out_dir / "truth.csv", std::ios::binary);
    truth << "subject_id,risk_rad,risk_path\n";
    char buf[64];
    for (const PhantomSubject& s : subjects) {
      std::snprintf(buf, sizeof buf, "%.17g", s.risk_rad);
      truth << s.id << ',' << buf;
      std::snprintf(buf, sizeof buf, "%.17g", s.risk_path);
      truth << ',' << buf << '\n';
    }
    if (!truth) throw DataError("cannot write truth.csv");
  }
  return subjects;
}

}  // namespace radpath::phantom
