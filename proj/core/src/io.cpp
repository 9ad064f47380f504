#include "radpath/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace radpath {
namespace {

struct Header {
  Dims dims;
  Spacing spacing;
  std::string dtype;
  std::string data;
};

Header parse_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open header: " + path.string());
  Header h;
  bool saw_dims = false, saw_dtype = false, saw_data = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + ": malformed header line: " + line);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    std::istringstream vs(value);
    if (key == "dims") {
      if (!(vs >> h.dims.nx >> h.dims.ny >> h.dims.nz))
        throw DataError(path.string() + ": bad dims: " + value);
      saw_dims = true;
    } else if (key == "spacing") {
      if (!(vs >> h.spacing.sx >> h.spacing.sy >> h.spacing.sz))
        throw DataError(path.string() + ": bad spacing: " + value);
    } else if (key == "dtype") {
      vs >> h.dtype;
      saw_dtype = true;
    } else if (key == "data") {
      vs >> h.data;
      saw_data = true;
    }
    // unknown keys ignored
  }
  if (!saw_dims || !saw_dtype || !saw_data)
    throw DataError(path.string() + ": header missing dims/dtype/data");
  if (h.dims.nx <= 0 || h.dims.ny <= 0 || h.dims.nz <= 0)
    throw DataError(path.string() + ": non-positive dims");
  if (h.spacing.sx <= 0 || h.spacing.sy <= 0 || h.spacing.sz <= 0)
    throw DataError(path.string() + ": non-positive spacing");
  return h;
}

std::vector<uint8_t> read_payload(const std::filesystem::path& raw,
                                  std::size_t expected_bytes) {
  std::ifstream in(raw, std::ios::binary);
  if (!in) throw DataError("cannot open raw payload: " + raw.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() != expected_bytes)
    throw DataError(raw.string() + ": payload size mismatch (got " +
                    std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected_bytes) + ")");
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_bytes(const std::filesystem::path& path,
                 const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string header_text(const Header& h) {
  std::ostringstream os;
  os << "dims=" << h.dims.nx << ' ' << h.dims.ny << ' ' << h.dims.nz << '\n';
  os.precision(17);
  os << "spacing=" << h.spacing.sx << ' ' << h.spacing.sy << ' '
     << h.spacing.sz << '\n';
  os << "dtype=" << h.dtype << '\n';
  os << "data=" << h.data << '\n';
  return os.str();
}

std::string default_raw_name(const std::filesystem::path& header) {
  auto p = header.filename();
  p.replace_extension(".raw");
  return p.string();
}

}  // namespace

Volume read_volume(const std::filesystem::path& header) {
  Header h = parse_header(header);
  if (h.dtype != "f32")
    throw DataError(header.string() + ": expected dtype f32, got " + h.dtype);
  auto bytes = read_payload(header.parent_path() / h.data, h.dims.count() * 4);
  Volume v;
  v.dims = h.dims;
  v.spacing = h.spacing;
  v.data.resize(h.dims.count());
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    uint32_t u = uint32_t(bytes[4 * i]) | (uint32_t(bytes[4 * i + 1]) << 8) |
                 (uint32_t(bytes[4 * i + 2]) << 16) |
                 (uint32_t(bytes[4 * i + 3]) << 24);
    float f = std::bit_cast<float>(u);
    if (!std::isfinite(f))
      throw DataError(header.string() + ": non-finite voxel at index " +
                      std::to_string(i));
    v.data[i] = f;
  }
  return v;
}

void write_volume(const std::filesystem::path& header, const Volume& v,
                  const std::string& raw_name) {
  if (v.data.size() != v.dims.count())
    throw DataError("volume data size does not match dims");
  for (float f : v.data)
    if (!std::isfinite(f)) throw DataError("volume contains non-finite voxel");
  Header h{v.dims, v.spacing, "f32",
           raw_name.empty() ? default_raw_name(header) : raw_name};
  std::vector<uint8_t> bytes(v.data.size() * 4);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    uint32_t u = std::bit_cast<uint32_t>(v.data[i]);
    bytes[4 * i] = uint8_t(u & 0xff);
    bytes[4 * i + 1] = uint8_t((u >> 8) & 0xff);
    bytes[4 * i + 2] = uint8_t((u >> 16) & 0xff);
    bytes[4 * i + 3] = uint8_t((u >> 24) & 0xff);
  }
  write_file(header, header_text(h));
  write_bytes(header.parent_path() / h.data, bytes);
}

LabelMask read_mask(const std::filesystem::path& header) {
  Header h = parse_header(header);
  if (h.dtype != "u8")
    throw DataError(header.string() + ": expected dtype u8, got " + h.dtype);
  auto bytes = read_payload(header.parent_path() / h.data, h.dims.count());
  LabelMask m;
  m.dims = h.dims;
  m.spacing = h.spacing;
  m.labels.assign(bytes.begin(), bytes.end());
  for (std::size_t i = 0; i < m.labels.size(); ++i)
    if (m.labels[i] > kMaxRegionLabel)
      throw DataError(header.string() + ": invalid label " +
                      std::to_string(int(m.labels[i])) + " at index " +
                      std::to_string(i));
  return m;
}

void write_mask(const std::filesystem::path& header, const LabelMask& m,
                const std::string& raw_name) {
  if (m.labels.size() != m.dims.count())
    throw DataError("mask data size does not match dims");
  for (uint8_t v : m.labels)
    if (v > kMaxRegionLabel)
      throw DataError("mask contains invalid label " + std::to_string(int(v)));
  Header h{m.dims, m.spacing, "u8",
           raw_name.empty() ? default_raw_name(header) : raw_name};
  write_file(header, header_text(h));
  write_bytes(header.parent_path() / h.data, m.labels);
}

namespace {

int pgm_token(std::istream& in) {
  // skips whitespace and '#' comments, then reads one non-negative integer
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace

Patch read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open pgm: " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5')
    throw DataError(path.string() + ": not a binary PGM (P5)");
  int w = pgm_token(in), h = pgm_token(in), maxval = pgm_token(in);
  if (w <= 0 || h <= 0) throw DataError(path.string() + ": bad PGM dims");
  if (maxval != 255)
    throw DataError(path.string() + ": unsupported PGM maxval " +
                    std::to_string(maxval));
  Patch p;
  p.width = w;
  p.height = h;
  p.pixels.resize(std::size_t(w) * h);
  in.read(reinterpret_cast<char*>(p.pixels.data()),
          std::streamsize(p.pixels.size()));
  if (std::size_t(in.gcount()) != p.pixels.size())
    throw DataError(path.string() + ": payload size mismatch (truncated PGM)");
  return p;
}

void write_pgm(const std::filesystem::path& path, const Patch& p) {
  if (p.pixels.size() != std::size_t(p.width) * p.height || p.width <= 0)
    throw DataError("patch data size does not match dims");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path.string());
  out << "P5\n" << p.width << ' ' << p.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(p.pixels.data()),
            std::streamsize(p.pixels.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace radpath
