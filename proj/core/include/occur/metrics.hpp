#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "occur/curriculum.hpp"
#include "occur/network.hpp"

namespace occur {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  std::size_t classes() const noexcept { return classes_; }
  std::uint64_t operator()(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted);
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t trace() const;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t classes);

/// binary: scores of class 1 as the positive class. macro: unweighted mean over classes.
enum class Averaging { binary, macro };

std::string_view to_string(Averaging averaging);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Percentages in [0, 100]; 0/0 counts as 0.
struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassScores> per_class;
};

PrecisionRecallF1 prf1(const ConfusionMatrix& cm, Averaging averaging);

struct AucResult {
  /// Absent when no class has both positives and negatives.
  std::optional<double> value;
  std::vector<std::optional<double>> per_class;
  std::vector<std::size_t> undefined_classes;
};

/// Mann-Whitney AUC of `scores` for samples labelled `positive_class` against
/// the rest; ties earn half credit. Computed from integer pair counts, so any
/// strictly monotone transform of the scores gives the same value bit for bit.
std::optional<double> binary_auc(std::span<const double> scores, std::span<const std::size_t> labels,
                                 std::size_t positive_class);

/// `scores` holds n rows of k class scores. binary: AUC of column 1;
/// macro: mean one-vs-rest AUC over classes where it is defined.
AucResult roc_auc(std::span<const std::vector<double>> scores, std::span<const std::size_t> truth,
                  Averaging averaging);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> roc_auc;
  double accuracy = 0.0;
  Averaging averaging = Averaging::macro;
  std::vector<ClassScores> per_class;
  std::vector<std::optional<double>> per_class_auc;
  std::vector<std::size_t> undefined_auc_classes;
  std::size_t evaluated = 0;
};

/// Table-style metrics from predicted class scores. Two classes use binary
/// averaging, more use macro.
MetricsReport report(std::span<const std::vector<double>> scores, std::span<const std::size_t> truth,
                     std::size_t classes);
MetricsReport report(const ModelState& model, std::span<const Sample> samples);

inline constexpr std::string_view kMetricsCsvHeader = "Strategy,Dataset,Precision,Recall,F1-Score,ROC-AUC,Accuracy";

/// One CSV row, percentages with two decimals; undefined AUC prints "NA".
std::string metrics_csv_row(std::string_view strategy, std::string_view dataset, const MetricsReport& report);

}  // namespace occur
