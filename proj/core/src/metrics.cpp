#include "occur/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

namespace occur {

namespace {

double ratio_percent(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw std::invalid_argument("ConfusionMatrix: need at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes_ || predicted >= classes_) {
    throw std::out_of_range("confusion: label outside [0, " + std::to_string(classes_) + ")");
  }
  ++counts_[truth * classes_ + predicted];
  ++total_;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < classes_; ++c) t += (*this)(c, c);
  return t;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t classes) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("confusion: label vectors differ in length");
  if (truth.empty()) throw std::invalid_argument("confusion: no samples");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

std::string_view to_string(Averaging averaging) { return averaging == Averaging::binary ? "binary" : "macro"; }

PrecisionRecallF1 prf1(const ConfusionMatrix& cm, Averaging averaging) {
  const std::size_t k = cm.classes();
  if (averaging == Averaging::binary && k != 2) throw std::invalid_argument("prf1: binary averaging needs two classes");
  PrecisionRecallF1 out;
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = cm(c, c), predicted = 0, actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += cm(o, c);
      actual += cm(c, o);
    }
    ClassScores s;
    s.precision = ratio_percent(tp, predicted);
    s.recall = ratio_percent(tp, actual);
    s.f1 = harmonic(s.precision, s.recall);
    out.per_class.push_back(s);
  }
  if (averaging == Averaging::binary) {
    out.precision = out.per_class[1].precision;
    out.recall = out.per_class[1].recall;
    out.f1 = out.per_class[1].f1;
  } else {
    for (const ClassScores& s : out.per_class) {
      out.precision += s.precision;
      out.recall += s.recall;
      out.f1 += s.f1;
    }
    out.precision /= static_cast<double>(k);
    out.recall /= static_cast<double>(k);
    out.f1 /= static_cast<double>(k);
  }
  return out;
}

std::optional<double> binary_auc(std::span<const double> scores, std::span<const std::size_t> labels,
                                 std::size_t positive_class) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::uint64_t pos_total = 0, neg_total = 0, neg_below = 0, twice_u = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == positive_class ? pos : neg) += 1;
      ++j;
    }
    twice_u += 2 * pos * neg_below + pos * neg;
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    i = j;
  }
  if (pos_total == 0 || neg_total == 0) return std::nullopt;
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

AucResult roc_auc(std::span<const std::vector<double>> scores, std::span<const std::size_t> truth,
                  Averaging averaging) {
  if (scores.size() != truth.size()) throw std::invalid_argument("roc_auc: scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("roc_auc: no samples");
  const std::size_t k = scores.front().size();
  for (const auto& row : scores) {
    if (row.size() != k) throw std::invalid_argument("roc_auc: ragged score rows");
  }
  AucResult out;
  std::vector<double> column(scores.size());
  auto one_vs_rest = [&](std::size_t c) {
    for (std::size_t i = 0; i < scores.size(); ++i) column[i] = scores[i][c];
    return binary_auc(column, truth, c);
  };

  if (averaging == Averaging::binary) {
    if (k != 2) throw std::invalid_argument("roc_auc: binary averaging needs two score columns");
    out.value = one_vs_rest(1);
    out.per_class = {out.value, out.value};
    if (!out.value) out.undefined_classes = {0, 1};
    return out;
  }
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < k; ++c) {
    auto auc = one_vs_rest(c);
    out.per_class.push_back(auc);
    if (auc) {
      sum += *auc;
      ++defined;
    } else {
      out.undefined_classes.push_back(c);
    }
  }
  if (defined > 0) out.value = sum / static_cast<double>(defined);
  return out;
}

MetricsReport report(std::span<const std::vector<double>> scores, std::span<const std::size_t> truth,
                     std::size_t classes) {
  if (truth.empty()) throw std::invalid_argument("report: no samples");
  std::vector<std::size_t> predicted;
  predicted.reserve(scores.size());
  for (const auto& row : scores) {
    predicted.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  ConfusionMatrix cm = confusion(truth, predicted, classes);
  MetricsReport out;
  out.averaging = classes == 2 ? Averaging::binary : Averaging::macro;
  PrecisionRecallF1 scores_prf = prf1(cm, out.averaging);
  out.precision = scores_prf.precision;
  out.recall = scores_prf.recall;
  out.f1 = scores_prf.f1;
  out.per_class = std::move(scores_prf.per_class);
  AucResult auc = roc_auc(scores, truth, out.averaging);
  if (auc.value) out.roc_auc = 100.0 * *auc.value;
  for (const auto& a : auc.per_class) out.per_class_auc.push_back(a ? std::optional<double>(100.0 * *a) : std::nullopt);
  out.undefined_auc_classes = std::move(auc.undefined_classes);
  out.accuracy = ratio_percent(cm.trace(), cm.total());
  out.evaluated = truth.size();
  return out;
}

MetricsReport report(const ModelState& model, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("report: empty dataset");
  std::vector<std::vector<double>> scores;
  std::vector<std::size_t> truth;
  scores.reserve(samples.size());
  for (const Sample& s : samples) {
    scores.push_back(class_probabilities(model, s.image));
    truth.push_back(s.label);
  }
  return report(scores, truth, model.classes());
}

std::string metrics_csv_row(std::string_view strategy, std::string_view dataset, const MetricsReport& r) {
  std::string row;
  row += strategy;
  row += ',';
  row += dataset;
  for (double v : {r.precision, r.recall, r.f1}) row += ',' + fixed2(v);
  row += ',' + (r.roc_auc ? fixed2(*r.roc_auc) : std::string("NA"));
  row += ',' + fixed2(r.accuracy);
  return row;
}

}  // namespace occur
