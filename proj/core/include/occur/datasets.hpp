#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "occur/curriculum.hpp"
#include "occur/tensor.hpp"

namespace occur {

enum class Glyph { disc, square, triangle, cross, ring, diamond, hbar, vbar, saltire, frame };

inline constexpr std::size_t kGlyphCount = 10;
std::string_view to_string(Glyph glyph);

/// Synthetic classification task: class c renders glyph c on a noisy background.
struct TaskSpec {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 1;
  std::size_t classes = 4;
  double noise_sigma = 0.1;
  std::size_t samples = 400;
  double background = 0.15;
  double foreground = 0.9;
  /// Largest offset of a glyph centre from the image centre, as a fraction of
  /// min(height, width). 0 centres every glyph.
  double position_jitter = 0.0625;

  void validate() const;
};

enum class SplitTag { all, train, val, test };
std::string_view to_string(SplitTag tag);

struct LabeledDataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names;
  SplitTag split = SplitTag::all;

  std::size_t classes() const noexcept { return class_names.size(); }
  std::vector<std::size_t> class_counts() const;
};

/// Images are [h, w] for one channel and [h, w, c] otherwise, values in [0, 1].
LabeledDataset generate_synthetic(const TaskSpec& spec, Rng& rng);

/// 8- or 16-bit binary PGM (P5), scaled to [0, 1] by maxval.
DenseArray read_pgm(const std::filesystem::path& path);
/// 8-bit P5 from a [h, w] array clamped to [0, 1].
void write_pgm(const std::filesystem::path& path, const DenseArray& image);

/// root/<class>/*.pgm; classes are the sorted subdirectory names, files are
/// read in sorted order and resized to height x width by nearest neighbour.
LabeledDataset load_directory(const std::filesystem::path& root, std::size_t height, std::size_t width);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

/// Stratified per-class split; samples keep their origin_index.
DatasetSplit split(const LabeledDataset& ds, std::array<double, 3> fractions, Rng& rng);

struct NormalizationParams {
  double min = 0.0;
  double max = 1.0;
};

struct NormalizedDataset {
  LabeledDataset data;
  NormalizationParams params;
  /// Set when the fitted data was constant and mapped to zeros.
  bool degenerate = false;
};

/// Min-max scaling fitted on `ds` itself; identity when every value already
/// lies in [0, 1]. Constant data maps to zeros and sets `degenerate`.
NormalizedDataset normalize(const LabeledDataset& ds);
/// Applies previously fitted parameters (e.g. train-set parameters to the test set).
LabeledDataset apply_normalization(const LabeledDataset& ds, const NormalizationParams& params);

}  // namespace occur
