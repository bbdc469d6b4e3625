#include "occur/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace occur {

namespace {

double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

void require_nonempty(const JointCounts& joint) {
  if (joint.total() == 0) throw std::invalid_argument("joint counts are empty");
}

}  // namespace

double entropy(std::span<const double> masses) {
  double total = 0.0;
  for (double m : masses) {
    if (m < 0.0 || !std::isfinite(m)) throw std::invalid_argument("entropy: masses must be finite and >= 0");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("entropy: masses must sum to 1");
  std::vector<double> terms;
  for (double m : masses) {
    if (m > 0.0) terms.push_back(-m * std::log2(m));
  }
  return sorted_sum(std::move(terms));
}

JointCounts::JointCounts(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), counts_(rows * cols, 0) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("JointCounts: dimensions must be positive");
}

JointCounts::JointCounts(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts)
    : rows_(rows), cols_(cols), counts_(std::move(counts)) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("JointCounts: dimensions must be positive");
  if (counts_.size() != rows * cols) throw std::invalid_argument("JointCounts: expected rows*cols counts");
  for (auto c : counts_) total_ += c;
}

JointCounts JointCounts::from_labels(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                     std::size_t classes) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("JointCounts: label vectors differ in length");
  JointCounts joint(classes, classes);
  for (std::size_t i = 0; i < truth.size(); ++i) joint.add(truth[i], predicted[i]);
  return joint;
}

void JointCounts::add(std::size_t r, std::size_t c, std::uint64_t n) {
  if (r >= rows_ || c >= cols_) throw std::out_of_range("JointCounts: class index out of range");
  counts_[r * cols_ + c] += n;
  total_ += n;
}

std::vector<std::uint64_t> JointCounts::row_totals() const {
  std::vector<std::uint64_t> out(rows_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out[r] += (*this)(r, c);
  return out;
}

std::vector<std::uint64_t> JointCounts::col_totals() const {
  std::vector<std::uint64_t> out(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out[c] += (*this)(r, c);
  return out;
}

JointCounts JointCounts::transposed() const {
  std::vector<std::uint64_t> t(counts_.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t[c * rows_ + r] = (*this)(r, c);
  return JointCounts(cols_, rows_, std::move(t));
}

JointCounts JointCounts::merge_columns(std::size_t into, std::size_t from) const {
  if (into >= cols_ || from >= cols_ || into == from) throw std::invalid_argument("merge_columns: bad column pair");
  JointCounts out(rows_, cols_ - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0, k = 0; c < cols_; ++c) {
      if (c == from) continue;
      std::uint64_t n = (*this)(r, c) + (c == into ? (*this)(r, from) : 0);
      out.add(r, k++, n);
    }
  }
  return out;
}

double mutual_information(const JointCounts& joint) {
  require_nonempty(joint);
  const double n = static_cast<double>(joint.total());
  auto rows = joint.row_totals();
  auto cols = joint.col_totals();
  std::vector<double> terms;
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    for (std::size_t c = 0; c < joint.cols(); ++c) {
      std::uint64_t nrc = joint(r, c);
      if (nrc == 0) continue;
      double ratio = (static_cast<double>(nrc) * n) / (static_cast<double>(rows[r]) * static_cast<double>(cols[c]));
      terms.push_back(static_cast<double>(nrc) / n * std::log2(ratio));
    }
  }
  return sorted_sum(std::move(terms));
}

double conditional_entropy(const JointCounts& joint) {
  require_nonempty(joint);
  const double n = static_cast<double>(joint.total());
  auto cols = joint.col_totals();
  std::vector<double> terms;
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    for (std::size_t c = 0; c < joint.cols(); ++c) {
      std::uint64_t nrc = joint(r, c);
      if (nrc == 0) continue;
      double p_rc = static_cast<double>(nrc) / n;
      terms.push_back(-p_rc * std::log2(static_cast<double>(nrc) / static_cast<double>(cols[c])));
    }
  }
  return sorted_sum(std::move(terms));
}

double row_entropy(const JointCounts& joint) {
  require_nonempty(joint);
  const double n = static_cast<double>(joint.total());
  std::vector<double> masses;
  for (auto r : joint.row_totals()) masses.push_back(static_cast<double>(r) / n);
  return entropy(masses);
}

void IalConfig::validate() const {
  if (candidate_levels.empty()) throw std::invalid_argument("IalConfig: candidate level grid is empty");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("IalConfig: alpha must lie in [0, 1]");
  for (double level : candidate_levels) {
    if (!(level >= 0.0 && level <= alpha)) {
      throw std::invalid_argument("IalConfig: candidate level " + std::to_string(level) + " exceeds alpha " +
                                  std::to_string(alpha));
    }
  }
  if (probe_size == 0) throw std::invalid_argument("IalConfig: probe_size must be positive");
}

double probe_mutual_information(const Classifier& classify, std::span<const Sample> probe, double level,
                                const Occluder& occlude, Rng rng, std::size_t classes) {
  JointCounts joint(classes, classes);
  for (const Sample& s : probe) {
    DenseArray image = level > 0.0 ? occlude(s.image, level, rng) : s.image;
    joint.add(s.label, classify(image));
  }
  return mutual_information(joint);
}

LevelSelection select_occlusion_level(const Classifier& classify, std::span<const Sample> probe,
                                      const IalConfig& cfg, const Occluder& occlude, Rng& rng,
                                      std::size_t classes) {
  cfg.validate();
  if (probe.empty()) throw std::invalid_argument("select_occlusion_level: probe set is empty");
  std::span<const Sample> used = probe.first(std::min(probe.size(), cfg.probe_size));
  Rng draws = rng.fork();

  LevelSelection best;
  best.mi = -std::numeric_limits<double>::infinity();
  for (double level : cfg.candidate_levels) {
    double mi = probe_mutual_information(classify, used, level, occlude, draws, classes);
    best.evaluations.push_back({level, mi});
    bool better = mi > best.mi + 1e-12;
    bool tie_to_larger = std::abs(mi - best.mi) <= 1e-12 && level > best.level;
    if (better || tie_to_larger) {
      best.level = level;
      best.mi = mi;
    }
  }
  return best;
}

}  // namespace occur
