#pragma once

// Confusion matrices and micro-averaged classification metrics. Two F1-style
// numbers are reported side by side: f1_paper = (sensitivity+specificity)/2,
// the balanced-accuracy style score used by the study this reproduces, and
// f1_standard = the usual harmonic mean of precision and recall. Keeping both
// makes the difference impossible to miss.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seatrack/pipeline.hpp"

namespace seatrack {

class ConfusionMatrix {
public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes)
      : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::int64_t& at(std::size_t truth, std::size_t pred);
  std::int64_t at(std::size_t truth, std::size_t pred) const;
  std::int64_t total() const;
  std::int64_t trace() const;

private:
  std::size_t classes_ = 0;
  std::vector<std::int64_t> counts_;
};

// counts[truth][pred]; labels outside [0, classes) are an argument error.
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          std::size_t classes);

struct ClassMetrics {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  // nullopt when the denominator is zero ("undefined", never silently 0 or 1).
  std::optional<double> precision, recall, specificity, f1;
  std::optional<double> accuracy;  // per-class one-vs-rest accuracy
};

struct MetricsReport {
  // Micro-averaged over one-vs-rest class counts.
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;       // sensitivity
  double specificity = 0.0;
  double f1_paper = 0.0;     // (recall + specificity) / 2
  double f1_standard = 0.0;  // 2PR / (P + R)
  std::vector<ClassMetrics> per_class;
};

MetricsReport metrics(const ConfusionMatrix& cm);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& model, const MetricsReport& m);
std::string per_class_csv(const MetricsReport& m, const LabelMap& labels);
std::string confusion_csv(const ConfusionMatrix& cm, const LabelMap& labels);

struct ModelScore {
  std::string model;
  MetricsReport report;
};

// One comparison table over a shared test set; rows in the order given.
std::string compare_csv(const std::vector<ModelScore>& scores);

}  // namespace seatrack
