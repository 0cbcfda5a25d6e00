#include "seatrack/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "seatrack/error.hpp"

namespace seatrack {

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt6(*v) : std::string("undefined");
}

}  // namespace

std::int64_t& ConfusionMatrix::at(std::size_t truth, std::size_t pred) {
  if (truth >= classes_ || pred >= classes_) {
    throw ArgumentError("confusion: index outside " + std::to_string(classes_) + " classes");
  }
  return counts_[truth * classes_ + pred];
}

std::int64_t ConfusionMatrix::at(std::size_t truth, std::size_t pred) const {
  if (truth >= classes_ || pred >= classes_) {
    throw ArgumentError("confusion: index outside " + std::to_string(classes_) + " classes");
  }
  return counts_[truth * classes_ + pred];
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < classes_; ++i) t += counts_[i * classes_ + i];
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& predicted,
                          std::size_t classes) {
  if (truth.size() != predicted.size()) {
    throw ArgumentError("confusion: " + std::to_string(truth.size()) + " truth labels vs " +
                        std::to_string(predicted.size()) + " predictions");
  }
  if (classes == 0) throw ArgumentError("confusion: need at least one class");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= classes ||
        predicted[i] < 0 || static_cast<std::size_t>(predicted[i]) >= classes) {
      throw ArgumentError("confusion: label pair (" + std::to_string(truth[i]) + "," +
                          std::to_string(predicted[i]) + ") at row " + std::to_string(i) +
                          " outside [0," + std::to_string(classes) + ")");
    }
    cm.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i])) += 1;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::size_t C = cm.classes();
  if (C == 0) throw ArgumentError("metrics: empty confusion matrix");
  const std::int64_t total = cm.total();
  MetricsReport rep;
  rep.per_class.resize(C);
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t k = 0; k < C; ++k) {
    ClassMetrics& c = rep.per_class[k];
    c.tp = cm.at(k, k);
    for (std::size_t j = 0; j < C; ++j) {
      if (j == k) continue;
      c.fn += cm.at(k, j);
      c.fp += cm.at(j, k);
    }
    c.tn = total - c.tp - c.fp - c.fn;
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    tn += c.tn;
    if (c.tp + c.fp > 0) c.precision = double(c.tp) / double(c.tp + c.fp);
    if (c.tp + c.fn > 0) c.recall = double(c.tp) / double(c.tp + c.fn);
    if (c.tn + c.fp > 0) c.specificity = double(c.tn) / double(c.tn + c.fp);
    if (c.precision && c.recall && *c.precision + *c.recall > 0) {
      c.f1 = 2.0 * *c.precision * *c.recall / (*c.precision + *c.recall);
    }
    if (total > 0) c.accuracy = double(c.tp + c.tn) / double(total);
  }
  if (total == 0) {
    // An empty evaluation has no defined micro metrics; keep zeros but make
    // the per-class entries all "undefined".
    return rep;
  }
  // Micro averages. For single-label problems tp+fp == tp+fn == total, so
  // micro precision == micro recall == trace/total, and the headline accuracy
  // is that same ratio (the one-vs-rest aggregate (tp+tn)/(tp+tn+fp+fn) would
  // inflate with the class count; per-class rows keep the one-vs-rest view).
  rep.accuracy = double(cm.trace()) / double(total);
  rep.precision = double(tp) / double(tp + fp);
  rep.recall = double(tp) / double(tp + fn);
  rep.specificity = double(tn) / double(tn + fp);
  rep.f1_paper = 0.5 * (rep.recall + rep.specificity);
  rep.f1_standard = (rep.precision + rep.recall) > 0
                        ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
                        : 0.0;
  return rep;
}

std::string metrics_csv_header() {
  return "model,accuracy,precision,recall,f1_paper,f1_standard";
}

std::string metrics_csv_row(const std::string& model, const MetricsReport& m) {
  std::ostringstream os;
  os << model << ',' << fmt6(m.accuracy) << ',' << fmt6(m.precision) << ',' << fmt6(m.recall)
     << ',' << fmt6(m.f1_paper) << ',' << fmt6(m.f1_standard);
  return os.str();
}

std::string per_class_csv(const MetricsReport& m, const LabelMap& labels) {
  if (labels.size() != m.per_class.size()) {
    throw ArgumentError("per_class_csv: " + std::to_string(labels.size()) + " labels vs " +
                        std::to_string(m.per_class.size()) + " metric rows");
  }
  std::ostringstream os;
  os << "class,tp,fp,fn,tn,precision,recall,specificity,f1,accuracy\n";
  for (std::size_t k = 0; k < m.per_class.size(); ++k) {
    const ClassMetrics& c = m.per_class[k];
    os << labels.name(k) << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
       << fmt_opt(c.precision) << ',' << fmt_opt(c.recall) << ',' << fmt_opt(c.specificity)
       << ',' << fmt_opt(c.f1) << ',' << fmt_opt(c.accuracy) << '\n';
  }
  return os.str();
}

std::string confusion_csv(const ConfusionMatrix& cm, const LabelMap& labels) {
  if (labels.size() != cm.classes()) {
    throw ArgumentError("confusion_csv: " + std::to_string(labels.size()) + " labels vs " +
                        std::to_string(cm.classes()) + " classes");
  }
  std::ostringstream os;
  os << "truth\\pred";
  for (std::size_t j = 0; j < cm.classes(); ++j) os << ',' << labels.name(j);
  os << '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    os << labels.name(i);
    for (std::size_t j = 0; j < cm.classes(); ++j) os << ',' << cm.at(i, j);
    os << '\n';
  }
  return os.str();
}

std::string compare_csv(const std::vector<ModelScore>& scores) {
  std::ostringstream os;
  os << metrics_csv_header() << '\n';
  for (const ModelScore& s : scores) os << metrics_csv_row(s.model, s.report) << '\n';
  return os.str();
}

}  // namespace seatrack
