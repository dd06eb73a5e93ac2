#include "gwl/dataset.hpp"

#include <fstream>
#include <iterator>

namespace gwl {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void check_payload(std::size_t have, std::size_t header, std::uint64_t need) {
  const std::uint64_t payload = have - header;
  if (payload < need)
    throw IdxError(IdxError::Kind::truncated, "IDX payload truncated: header declares " + std::to_string(need) +
                                                  " bytes, file has " + std::to_string(payload));
  if (payload > need)
    throw IdxError(IdxError::Kind::trailing_bytes,
                   "IDX file has " + std::to_string(payload - need) + " trailing bytes after the payload");
}

std::uint32_t magic_of(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw IdxError(IdxError::Kind::truncated, "IDX file shorter than its magic number");
  return read_be32(bytes, 0);
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = magic_of(bytes);
  if (magic != kIdxImagesMagic) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    throw IdxError(IdxError::Kind::bad_magic, std::string("bad IDX image magic ") + buf);
  }
  if (bytes.size() < 16) throw IdxError(IdxError::Kind::truncated, "IDX image header truncated");
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  check_payload(bytes.size(), 16, std::uint64_t{img.count} * img.rows * img.cols);
  img.pixels.assign(bytes.begin() + 16, bytes.end());
  return img;
}

IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = magic_of(bytes);
  if (magic != kIdxLabelsMagic) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    throw IdxError(IdxError::Kind::bad_magic, std::string("bad IDX label magic ") + buf);
  }
  if (bytes.size() < 8) throw IdxError(IdxError::Kind::truncated, "IDX label header truncated");
  IdxLabels lab;
  lab.count = read_be32(bytes, 4);
  check_payload(bytes.size(), 8, lab.count);
  lab.labels.assign(bytes.begin() + 8, bytes.end());
  return lab;
}

IdxFile parse_idx(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = magic_of(bytes);
  if (magic == kIdxImagesMagic) return parse_idx_images(bytes);
  if (magic == kIdxLabelsMagic) return parse_idx_labels(bytes);
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", magic);
  throw IdxError(IdxError::Kind::bad_magic, std::string("bad IDX magic ") + buf);
}

std::vector<std::uint8_t> serialize_idx(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, images.count);
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx(const IdxLabels& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, labels.count);
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_binary(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

Config toy_config(std::span<const std::uint8_t> image, std::size_t side) {
  constexpr std::size_t kSrc = 28, kCrop = 20, kOff = 4;
  if (image.size() != kSrc * kSrc) throw InvalidArgument("toy derivation needs 28x28 images");
  if (side != 4 && side != 5) throw InvalidArgument("toy side must be 4 or 5");
  const std::size_t cell = kCrop / side;
  std::vector<double> pooled(side * side, 0.0);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      double sum = 0;
      for (std::size_t y = r * cell; y < (r + 1) * cell; ++y)
        for (std::size_t x = c * cell; x < (c + 1) * cell; ++x) sum += image[(y + kOff) * kSrc + x + kOff];
      pooled[r * side + c] = sum / static_cast<double>(cell * cell);
    }
  double mean = 0;
  for (double p : pooled) mean += p;
  mean /= static_cast<double>(pooled.size());
  Config out(std::vector<int>(pooled.size(), 0));
  for (std::size_t i = 0; i < pooled.size(); ++i) out[i] = pooled[i] > mean ? 1 : 0;
  return out;
}

std::vector<LabelledConfig> derive_toy(const IdxImages& images, const IdxLabels& labels, std::size_t side) {
  if (images.rows != 28 || images.cols != 28) throw InvalidArgument("toy derivation needs 28x28 images");
  if (images.count != labels.count)
    throw InvalidArgument("image count " + std::to_string(images.count) + " does not match label count " +
                          std::to_string(labels.count));
  std::vector<LabelledConfig> out;
  for (std::size_t n = 0; n < images.count; ++n) {
    const int label = labels.labels[n];
    if (label != 0 && label != 1) continue;
    out.push_back({toy_config(images.image(n), side), label});
  }
  return out;
}

std::string toy_csv(std::span<const LabelledConfig> samples) {
  std::string out = "label";
  const std::size_t d = samples.empty() ? 0 : samples.front().x.size();
  for (std::size_t i = 0; i < d; ++i) out += ",v" + std::to_string(i);
  out += '\n';
  for (const auto& s : samples) {
    out += std::to_string(s.label);
    for (int v : s.x.values) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

}  // namespace gwl
