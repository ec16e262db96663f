#include "geolink/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "geolink/error.hpp"

namespace geolink {

std::optional<double> auc_rank(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    // Ranks start+1 .. end share their mean.
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t i = start; i < end; ++i)
      if (labels[order[i]] == 1) {
        positive_rank_sum += rank;
        ++positives;
      }
    start = end;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.empty() || scores.size() != labels.size())
    throw ShapeError("evaluate: scores and labels must have equal non-zero length");
  EvalReport r;
  r.n = scores.size();
  r.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++r.counts.tp;
    else if (predicted) ++r.counts.fp;
    else if (actual) ++r.counts.fn;
    else ++r.counts.tn;
  }
  const auto& c = r.counts;
  r.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  r.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(r.n);
  r.auc = auc_rank(scores, labels);
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["threshold"] = r.threshold;
  j["f1"] = r.f1;
  j["accuracy"] = r.accuracy;
  j["auc"] = r.auc ? nlohmann::ordered_json(*r.auc) : nlohmann::ordered_json(nullptr);
  j["auc_defined"] = r.auc.has_value();
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["tn"] = r.counts.tn;
  j["fn"] = r.counts.fn;
  return j;
}

}  // namespace geolink
