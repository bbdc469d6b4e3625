#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "occur/curriculum.hpp"
#include "occur/tensor.hpp"

namespace occur {

/// Shannon entropy in bits, with 0 log 0 = 0.
double entropy(std::span<const double> masses);

/// Contingency table of true class (rows) against predicted class (columns).
class JointCounts {
 public:
  JointCounts(std::size_t rows, std::size_t cols);
  JointCounts(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts);

  static JointCounts from_labels(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                 std::size_t classes);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t operator()(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }

  void add(std::size_t r, std::size_t c, std::uint64_t n = 1);

  std::vector<std::uint64_t> row_totals() const;
  std::vector<std::uint64_t> col_totals() const;

  JointCounts transposed() const;
  /// Folds column `from` into column `into` and drops `from`.
  JointCounts merge_columns(std::size_t into, std::size_t from) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Plug-in I(Y; Ŷ) in bits. Terms are summed in sorted order, so the value
/// is bit-identical under transposition.
double mutual_information(const JointCounts& joint);

/// H(Y | Ŷ) in bits: uncertainty about the row variable given the column.
double conditional_entropy(const JointCounts& joint);

/// H(Y) of the row marginal.
double row_entropy(const JointCounts& joint);

/// Constraint set for choosing an occlusion level by mutual information.
struct IalConfig {
  /// Upper bound on the occlusion fraction any sample may receive.
  double alpha = 0.4;
  std::vector<double> candidate_levels{0.0, 0.1, 0.2, 0.3, 0.4};
  std::size_t probe_size = 40;

  void validate() const;
};

struct LevelEvaluation {
  double level = 0.0;
  double mi = 0.0;
};

struct LevelSelection {
  double level = 0.0;
  double mi = 0.0;
  std::vector<LevelEvaluation> evaluations;
};

using Classifier = std::function<std::size_t(const DenseArray&)>;
using Occluder = std::function<DenseArray(const DenseArray& image, double level, Rng& rng)>;

/// MI between probe labels and the classifier's predictions on the probe
/// images occluded at `level`.
double probe_mutual_information(const Classifier& classify, std::span<const Sample> probe, double level,
                                const Occluder& occlude, Rng rng, std::size_t classes);

/// Exhaustive search over the candidate grid for the level whose occluded
/// probe set maximizes I(Y; Ŷ). Ties (within 1e-12) go to the larger level.
/// Every candidate sees the same mask draws.
LevelSelection select_occlusion_level(const Classifier& classify, std::span<const Sample> probe,
                                      const IalConfig& cfg, const Occluder& occlude, Rng& rng,
                                      std::size_t classes);

}  // namespace occur
