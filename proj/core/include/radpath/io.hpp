#pragma once
// File formats: volumes and masks as a text header (key=value) plus a raw
// little-endian payload; patches/slides as binary PGM (P5, maxval 255).

#include <filesystem>

#include "radpath/image.hpp"

namespace radpath {

// Header keys: dims=<nx> <ny> <nz>, spacing=<sx> <sy> <sz>, dtype=f32|u8,
// data=<relative raw filename>. Unknown keys are ignored.
Volume read_volume(const std::filesystem::path& header);
void write_volume(const std::filesystem::path& header, const Volume& v,
                  const std::string& raw_name = "");

LabelMask read_mask(const std::filesystem::path& header);
void write_mask(const std::filesystem::path& header, const LabelMask& m,
                const std::string& raw_name = "");

Patch read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Patch& p);

}  // namespace radpath
