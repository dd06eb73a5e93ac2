#ifndef GWL_DATASET_HPP
#define GWL_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gwl/errors.hpp"
#include "gwl/tiny_nn.hpp"

namespace gwl {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // raw 0..255, count * rows * cols

  std::span<const std::uint8_t> image(std::size_t n) const {
    const std::size_t sz = std::size_t{rows} * cols;
    return std::span<const std::uint8_t>(pixels).subspan(n * sz, sz);
  }
};

struct IdxLabels {
  std::uint32_t count = 0;
  std::vector<std::uint8_t> labels;
};

using IdxFile = std::variant<IdxImages, IdxLabels>;

class IdxError : public FormatError {
 public:
  enum class Kind { bad_magic, truncated, trailing_bytes };

  IdxError(Kind kind, const std::string& what) : FormatError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Dispatches on the magic number; pixel values are kept as raw bytes.
IdxFile parse_idx(std::span<const std::uint8_t> bytes);
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_idx(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx(const IdxLabels& labels);

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// 28x28 image -> side x side binary config: centre crop to 20x20 (rows and
// columns 4..23), non-overlapping average pooling, then 1 where the pooled
// value is strictly above the mean of the pooled values.
Config toy_config(std::span<const std::uint8_t> image, std::size_t side);

// Keeps samples labelled 0 or 1, in file order, duplicates included.
std::vector<LabelledConfig> derive_toy(const IdxImages& images, const IdxLabels& labels, std::size_t side);

// "label,v0,...,v{D-1}" header then one row per sample.
std::string toy_csv(std::span<const LabelledConfig> samples);

}  // namespace gwl

#endif  // GWL_DATASET_HPP
