#include "radpath/rad_features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "radpath/quantize.hpp"
#include "radpath/texture.hpp"

namespace radpath::rad {
namespace {

std::vector<float> region_values(const Volume& vol, const LabelMask& mask,
                                 Region r) {
  std::vector<float> v;
  for (std::size_t i = 0; i < mask.labels.size(); ++i)
    if (mask.labels[i] == uint8_t(r)) v.push_back(vol.data[i]);
  return v;
}

}  // namespace

std::array<double, 4> first_order(const std::vector<float>& values) {
  if (values.empty()) return {0, 0, 0, 0};
  const double n = double(values.size());
  double mean = 0;
  for (float v : values) mean += v;
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (float v : values) {
    double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  double sd = std::sqrt(m2);
  double skew = m2 > 0 ? m3 / (m2 * sd) : 0.0;
  double kurt = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return {mean, sd, skew, kurt};
}

std::vector<double> bin_frequencies(const std::vector<float>& values,
                                    int bins) {
  std::vector<double> freq(std::size_t(bins), 0.0);
  if (values.empty()) return freq;
  std::vector<int16_t> codes = quantize_codes(values, bins);
  for (int16_t c : codes) freq[std::size_t(c)] += 1.0;
  for (double& f : freq) f /= double(values.size());
  return freq;
}

std::vector<double> cdf_histogram(const std::vector<float>& values,
                                  int bins) {
  if (values.empty()) return std::vector<double>(std::size_t(bins), 0.0);
  std::vector<double> cdf = bin_frequencies(values, bins);
  for (std::size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
  cdf.back() = 1.0;  // kill accumulated rounding
  return cdf;
}

std::vector<std::string> rad_base_dictionary(const RadConfig& cfg) {
  std::vector<std::string> d;
  for (Region r : tumor_regions()) {
    d.push_back(std::string("shape_") + region_name(r) + "_volume_mm3");
    d.push_back(std::string("shape_") + region_name(r) + "_volume_fraction");
  }
  for (const char* axis : {"x", "y", "z"})
    d.push_back(std::string("location_tumor_centroid_") + axis + "_mm");
  d.push_back("location_etumor_ventricle_distance_mm");
  d.push_back("location_edema_ventricle_distance_mm");
  for (Modality m : all_modalities) {
    for (Region r : tumor_regions()) {
      std::string p =
          std::string(modality_name(m)) + "_" + region_name(r) + "_";
      d.push_back(p + "firstorder_mean");
      d.push_back(p + "firstorder_std");
      d.push_back(p + "firstorder_skewness");
      d.push_back(p + "firstorder_kurtosis");
      for (int b = 0; b < cfg.bins; ++b)
        d.push_back(p + "hist_bin" + std::to_string(b));
      for (const auto& n : texture::HaralickFeatures::names())
        d.push_back(p + "glcm_" + n);
      for (const auto& n : texture::RunLengthFeatures::names())
        d.push_back(p + "glrlm_" + n);
      for (const auto& n : texture::SizeZoneFeatures::names())
        d.push_back(p + "glszm_" + n);
      for (const auto& n : texture::NgtdmFeatures::names())
        d.push_back(p + "ngtdm_" + n);
      for (const auto& n : texture::lbp_names()) d.push_back(p + "lbp_" + n);
    }
  }
  d.push_back("clinical_age");
  d.push_back("clinical_gender");
  return d;
}

std::vector<std::string> rad_dictionary(const RadConfig& cfg) {
  std::vector<std::string> d = rad_base_dictionary(cfg);
  // projection components live after the base block so the stored feature
  // matrix can be extended without disturbing base columns
  for (Modality m : all_modalities)
    for (Region r : tumor_regions())
      for (int k = 0; k < cfg.pca_components; ++k)
        d.push_back(std::string(modality_name(m)) + "_" + region_name(r) +
                    "_pca_c" + std::to_string(k));
  return d;
}

std::vector<std::string> rad_aux_dictionary(const RadConfig& cfg) {
  std::vector<std::string> d;
  for (Modality m : all_modalities)
    for (Region r : tumor_regions())
      for (int b = 0; b < cfg.pca_hist; ++b) {
        std::string n = std::string("aux_") + modality_name(m) + "_" +
                        region_name(r) + "_cdf32_";
        if (b < 10) n += "0";
        d.push_back(n + std::to_string(b));
      }
  return d;
}

RadRaw extract_rad_raw(const std::array<Volume, 4>& sequences,
                       const LabelMask& mask, const Spacing& spacing,
                       const Demographics& demo, const RadConfig& cfg,
                       std::vector<std::string>* warnings) {
  for (const Volume& v : sequences)
    if (!(v.dims == mask.dims))
      throw DataError("sequence and mask dimensions differ");

  RadRaw raw;
  raw.base.reserve(rad_base_dictionary(cfg).size());

  // --- shape: per-region volume and fraction of total tumor ---
  std::array<std::size_t, 3> region_count{};
  std::size_t tumor_total = 0;
  for (std::size_t ri = 0; ri < tumor_regions().size(); ++ri) {
    region_count[ri] = mask.count_label(uint8_t(tumor_regions()[ri]));
    tumor_total += region_count[ri];
  }
  if (tumor_total == 0) throw DataError("mask contains no tumor voxels");
  for (std::size_t ri = 0; ri < tumor_regions().size(); ++ri) {
    raw.base.push_back(double(region_count[ri]) * spacing.voxel_volume());
    raw.base.push_back(double(region_count[ri]) / double(tumor_total));
  }

  // --- location: tumor centroid in physical units ---
  auto is_tumor = [](uint8_t l) {
    return l == uint8_t(Region::kETumor) ||
           l == uint8_t(Region::kNonETumor) || l == uint8_t(Region::kEdema);
  };
  double cx = 0, cy = 0, cz = 0;
  const auto& d = mask.dims;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (is_tumor(mask.at(x, y, z))) {
          cx += x;
          cy += y;
          cz += z;
        }
  raw.base.push_back(cx / double(tumor_total) * spacing.sx);
  raw.base.push_back(cy / double(tumor_total) * spacing.sy);
  raw.base.push_back(cz / double(tumor_total) * spacing.sz);

  // --- minimum distances to the ventricle label ---
  std::vector<std::array<double, 3>> vent;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (mask.at(x, y, z) == uint8_t(Region::kVent))
          vent.push_back({x * spacing.sx, y * spacing.sy, z * spacing.sz});
  auto min_dist = [&](auto&& include) -> double {
    if (vent.empty()) return -1.0;
    double best = std::numeric_limits<double>::max();
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          if (!include(mask.at(x, y, z))) continue;
          double px = x * spacing.sx, py = y * spacing.sy,
                 pz = z * spacing.sz;
          for (const auto& q : vent) {
            double dx = px - q[0], dy = py - q[1], dz = pz - q[2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
          }
        }
    return best == std::numeric_limits<double>::max() ? -1.0
                                                      : std::sqrt(best);
  };
  if (vent.empty() && warnings)
    warnings->push_back(
        "mask has no ventricle label; distance features set to -1");
  raw.base.push_back(
      min_dist([](uint8_t l) { return l == uint8_t(Region::kETumor); }));
  raw.base.push_back(
      min_dist([](uint8_t l) { return l == uint8_t(Region::kEdema); }));

  // --- per sequence/region intensity and texture blocks ---
  for (std::size_t si = 0; si < sequences.size(); ++si) {
    const Volume& vol = sequences[si];
    for (Region r : tumor_regions()) {
      std::vector<float> vals = region_values(vol, mask, r);
      std::string tag = std::string(modality_name(all_modalities[si])) +
                        "_" + region_name(r);
      if (vals.empty()) {
        if (warnings)
          warnings->push_back("region " + tag +
                              " is empty; its features default to 0");
        for (int k = 0; k < 4 + cfg.bins + 8 + 11 + 11 + 5 + 10; ++k)
          raw.base.push_back(0.0);
        for (int k = 0; k < cfg.pca_hist; ++k) raw.cdf32.push_back(0.0);
        continue;
      }
      for (double v : first_order(vals)) raw.base.push_back(v);
      for (double v : bin_frequencies(vals, cfg.bins)) raw.base.push_back(v);

      QuantizedImage q =
          quantize_region(vol, mask, uint8_t(r), cfg.texture_levels);
      for (double v : texture::glcm_features_3d(q).mean.values())
        raw.base.push_back(v);
      for (double v : texture::glrlm_features_3d(q).values())
        raw.base.push_back(v);
      for (double v : texture::glszm_features(q).values())
        raw.base.push_back(v);
      try {
        for (double v : texture::ngtdm_features(q).values())
          raw.base.push_back(v);
      } catch (const DataError&) {
        // every region voxel is isolated: the neighborhood table is empty
        if (warnings)
          warnings->push_back("region " + tag +
                              " has only isolated voxels; its "
                              "gray-tone-difference features default to 0");
        for (int k = 0; k < 5; ++k) raw.base.push_back(0.0);
      }
      for (double v : texture::lbp_histogram_3d(vol, mask, uint8_t(r)))
        raw.base.push_back(v);

      for (double v : cdf_histogram(vals, cfg.pca_hist))
        raw.cdf32.push_back(v);
    }
  }

  raw.base.push_back(demo.age);
  raw.base.push_back(demo.gender);

  if (raw.base.size() != rad_base_dictionary(cfg).size())
    throw NumericError("feature vector does not match base dictionary");
  if (raw.cdf32.size() != rad_aux_dictionary(cfg).size())
    throw NumericError("histogram block does not match aux dictionary");
  return raw;
}

PcaBasis fit_pca(const std::vector<std::vector<double>>& rows, int k) {
  if (rows.empty()) throw DataError("fit_pca: no rows");
  const int n = int(rows.size());
  const int dim = int(rows[0].size());
  if (k < 1 || k > dim) throw UsageError("fit_pca: bad component count");
  if (n < k) throw DataError("fit_pca: fewer rows than components");

  PcaBasis basis;
  basis.mean.assign(std::size_t(dim), 0.0);
  for (const auto& r : rows) {
    if (int(r.size()) != dim) throw DataError("fit_pca: ragged rows");
    for (int j = 0; j < dim; ++j)
      basis.mean[std::size_t(j)] += r[std::size_t(j)];
  }
  for (double& m : basis.mean) m /= double(n);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& r : rows) {
    Eigen::VectorXd c(dim);
    for (int j = 0; j < dim; ++j)
      c[j] = r[std::size_t(j)] - basis.mean[std::size_t(j)];
    cov.noalias() += c * c.transpose();
  }
  cov /= double(n > 1 ? n - 1 : 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw NumericError("fit_pca: eigendecomposition failed");

  // eigenvalues ascend; take the top k in descending order
  basis.axes.resize(std::size_t(k));
  basis.explained_variance.resize(std::size_t(k));
  for (int c = 0; c < k; ++c) {
    int col = dim - 1 - c;
    Eigen::VectorXd axis = es.eigenvectors().col(col);
    // deterministic sign: the largest-magnitude loading is positive
    int arg = 0;
    for (int j = 1; j < dim; ++j)
      if (std::abs(axis[j]) > std::abs(axis[arg])) arg = j;
    if (axis[arg] < 0) axis = -axis;
    basis.axes[std::size_t(c)].assign(axis.data(), axis.data() + dim);
    basis.explained_variance[std::size_t(c)] =
        std::max(0.0, es.eigenvalues()[col]);
  }
  return basis;
}

std::vector<double> project_pca(const PcaBasis& basis,
                                const std::vector<double>& row) {
  if (row.size() != basis.mean.size())
    throw DataError("project_pca: row length does not match basis");
  std::vector<double> out;
  out.reserve(basis.axes.size());
  for (const auto& axis : basis.axes) {
    double s = 0;
    for (std::size_t j = 0; j < row.size(); ++j)
      s += axis[j] * (row[j] - basis.mean[j]);
    out.push_back(s);
  }
  return out;
}

std::vector<double> assemble_rad(const RadRaw& raw,
                                 const std::vector<PcaBasis>& bases,
                                 const RadConfig& cfg) {
  if (int(bases.size()) != kRadBlocks)
    throw UsageError("assemble_rad: expected one basis per block");
  std::vector<double> full = raw.base;
  for (int b = 0; b < kRadBlocks; ++b) {
    std::vector<double> hist(
        raw.cdf32.begin() + std::size_t(b) * cfg.pca_hist,
        raw.cdf32.begin() + std::size_t(b + 1) * cfg.pca_hist);
    std::vector<double> proj = project_pca(bases[std::size_t(b)], hist);
    // tiny training folds fit fewer axes than the dictionary reserves;
    // absent components are zero-variance directions, emitted as 0
    proj.resize(std::size_t(cfg.pca_components), 0.0);
    for (double v : proj) full.push_back(v);
  }
  if (full.size() != rad_dictionary(cfg).size())
    throw NumericError("assembled vector does not match dictionary");
  return full;
}

}  // namespace radpath::rad
