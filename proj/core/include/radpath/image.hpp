#pragma once
// Core image containers shared by the whole pipeline: 3D float volumes,
// region label masks, and 8-bit histology patches. Voxel storage is always
// x-fastest (index = x + nx*(y + ny*z)).

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace radpath {

// Exit-code-bearing error categories. The CLI maps these to process exit
// codes; library code throws them directly.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Modality { t1, t1gd, t2, flair };

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::t1: return "t1";
    case Modality::t1gd: return "t1gd";
    case Modality::t2: return "t2";
    case Modality::flair: return "flair";
  }
  return "?";
}

inline Modality modality_from_name(const std::string& s) {
  if (s == "t1") return Modality::t1;
  if (s == "t1gd") return Modality::t1gd;
  if (s == "t2") return Modality::t2;
  if (s == "flair") return Modality::flair;
  throw DataError("unknown modality: " + s);
}

constexpr std::array<Modality, 4> all_modalities{Modality::t1, Modality::t1gd,
                                                 Modality::t2, Modality::flair};

// Region label codes used by LabelMask.
enum Region : uint8_t {
  kBackground = 0,
  kETumor = 1,
  kNonETumor = 2,
  kEdema = 3,
  kVent = 4,
};

inline const char* region_name(uint8_t r) {
  switch (r) {
    case kBackground: return "background";
    case kETumor: return "etumor";
    case kNonETumor: return "nonetumor";
    case kEdema: return "edema";
    case kVent: return "vent";
  }
  return "?";
}

constexpr uint8_t kMaxRegionLabel = kVent;

struct Dims {
  int nx = 0, ny = 0, nz = 0;
  bool operator==(const Dims&) const = default;
  std::size_t count() const {
    return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
  }
};

struct Spacing {
  double sx = 1.0, sy = 1.0, sz = 1.0;
  bool operator==(const Spacing&) const = default;
  double voxel_volume() const { return sx * sy * sz; }
};

struct Volume {
  Dims dims;
  Spacing spacing;
  std::vector<float> data;  // dims.count() values, x-fastest

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) +
           std::size_t(dims.nx) * (std::size_t(y) + std::size_t(dims.ny) * z);
  }
  float at(int x, int y, int z) const { return data[index(x, y, z)]; }
  float& at(int x, int y, int z) { return data[index(x, y, z)]; }
  bool inside(int x, int y, int z) const {
    return x >= 0 && x < dims.nx && y >= 0 && y < dims.ny && z >= 0 &&
           z < dims.nz;
  }
};

struct LabelMask {
  Dims dims;
  Spacing spacing;
  std::vector<uint8_t> labels;  // dims.count() values, x-fastest

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) +
           std::size_t(dims.nx) * (std::size_t(y) + std::size_t(dims.ny) * z);
  }
  uint8_t at(int x, int y, int z) const { return labels[index(x, y, z)]; }
  uint8_t& at(int x, int y, int z) { return labels[index(x, y, z)]; }
  std::size_t count_label(uint8_t label) const {
    std::size_t n = 0;
    for (uint8_t v : labels) n += (v == label);
    return n;
  }
};

// 2D 8-bit grayscale image (histology patch or whole slide).
struct Patch {
  int width = 0, height = 0;
  std::vector<uint8_t> pixels;  // row-major, width*height

  std::size_t index(int x, int y) const {
    return std::size_t(y) * width + x;
  }
  uint8_t at(int x, int y) const { return pixels[index(x, y)]; }
  uint8_t& at(int x, int y) { return pixels[index(x, y)]; }
  bool inside(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

// Gray-level-quantized image restricted to a region of interest. Voxels
// outside the ROI hold OUTSIDE. nz == 1 for 2D inputs.
struct QuantizedImage {
  static constexpr int16_t OUTSIDE = -1;

  Dims dims{0, 0, 1};
  int levels = 0;                // G: valid codes are 0..levels-1
  std::vector<int16_t> codes;    // dims.count(), x-fastest

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) +
           std::size_t(dims.nx) * (std::size_t(y) + std::size_t(dims.ny) * z);
  }
  int16_t at(int x, int y, int z) const { return codes[index(x, y, z)]; }
  int16_t& at(int x, int y, int z) { return codes[index(x, y, z)]; }
  bool inside(int x, int y, int z) const {
    return x >= 0 && x < dims.nx && y >= 0 && y < dims.ny && z >= 0 &&
           z < dims.nz;
  }
  bool in_roi(int x, int y, int z) const {
    return inside(x, y, z) && at(x, y, z) != OUTSIDE;
  }
  std::size_t roi_count() const {
    std::size_t n = 0;
    for (int16_t c : codes) n += (c != OUTSIDE);
    return n;
  }
};

}  // namespace radpath
