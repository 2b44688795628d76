#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "atagan/rng.hpp"
#include "atagan/tensor.hpp"

namespace atagan {

/// Texture styles named after HEp-2 staining patterns.
enum class CellClass : int { homogeneous = 0, speckled = 1, nucleolar = 2, centromere = 3 };
inline constexpr int kCellClassCount = 4;

std::string_view to_string(CellClass c);

struct DatasetSpec {
  std::size_t n_train = 2000;
  std::size_t n_val = 400;
  std::uint64_t seed = 7;
  double noise_level = 0.05;  // std of the additive Gaussian noise
};

inline constexpr double kMinMaskFraction = 0.08;
inline constexpr double kMaxMaskFraction = 0.40;

struct SyntheticSample {
  Tensor image;  // [1,64,64] in [0,1]
  Tensor mask;   // [1,64,64] in {0,1}
  int label = 0;

  std::size_t mask_area() const;
};

/// One cell: a random ellipse (centre in the central half of the frame,
/// semi-axes 8..20 px, uniform rotation; redrawn until the mask covers
/// 8%..40% of the frame) filled with the class texture, plus clipped
/// Gaussian noise over the whole frame.
SyntheticSample generate_sample(const DatasetSpec& spec, CellClass label, Rng& rng);

struct Dataset {
  std::vector<SyntheticSample> samples;
  std::size_t size() const { return samples.size(); }
};

struct SplitDataset {
  Dataset train;
  Dataset val;
};

/// Sample i of a split uses label i mod 4 and seed derive_seed(split_seed, i);
/// the train and val split seeds are derived from spec.seed with different
/// stream indices. Output does not depend on `workers`.
SplitDataset generate_dataset(const DatasetSpec& spec, unsigned workers = 1);
Dataset generate_split(const DatasetSpec& spec, bool validation, unsigned workers = 1);

struct Batch {
  Tensor images;  // [B,1,64,64]
  Tensor masks;   // [B,1,64,64]
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

Batch gather(const Dataset& data, std::span<const std::size_t> indices);

/// Epoch-wise shuffled batches. The order of epoch e is a pure function of
/// (dataset size, shuffle seed, e); the final partial batch is kept.
class BatchStream {
 public:
  BatchStream(const Dataset& data, std::size_t batch_size, std::uint64_t shuffle_seed);

  Batch next();
  /// Indices of every batch of one epoch, without advancing the stream.
  std::vector<std::vector<std::size_t>> epoch_indices(std::uint64_t epoch) const;
  std::size_t batches_per_epoch() const;

  struct Position {
    std::uint64_t epoch = 0;
    std::size_t batch = 0;
  };
  Position position() const { return pos_; }
  void seek(Position p);

 private:
  const Dataset* data_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  Position pos_;
  std::vector<std::vector<std::size_t>> current_;
  std::uint64_t current_epoch_ = ~std::uint64_t{0};
};

/// Writes `dir`/{train,val}/NNNNN_{image,mask}.pgm and the manifests
/// `dir`/{train,val}.manifest ("index label mask_area" per line).
void write_dataset(const std::filesystem::path& dir, const SplitDataset& data);
/// Reads a directory produced by write_dataset. Images come back quantized
/// to 1/255 steps.
SplitDataset read_dataset(const std::filesystem::path& dir);
Dataset read_split(const std::filesystem::path& dir, bool validation);

}  // namespace atagan
