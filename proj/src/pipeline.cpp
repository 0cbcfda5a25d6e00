#include "seatrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "seatrack/error.hpp"
#include "seatrack/rng.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

LabelMap LabelMap::from_vessel_ids(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ids.erase(std::remove(ids.begin(), ids.end(), std::string()), ids.end());
  LabelMap m;
  m.names_ = std::move(ids);
  for (std::size_t i = 0; i < m.names_.size(); ++i) {
    m.index_[m.names_[i]] = static_cast<int>(i);
  }
  return m;
}

std::optional<int> LabelMap::try_index(const std::string& vessel_id) const {
  const auto it = index_.find(vessel_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int LabelMap::index_of(const std::string& vessel_id) const {
  const auto idx = try_index(vessel_id);
  if (!idx) throw ArgumentError("label map: unknown vessel id '" + vessel_id + "'");
  return *idx;
}

const std::string& LabelMap::name(std::size_t index) const {
  if (index >= names_.size()) {
    throw ArgumentError("label map: class index " + std::to_string(index) + " out of range");
  }
  return names_[index];
}

std::vector<AisRecord> clean_and_threshold(const std::vector<AisRecord>& records,
                                           std::size_t min_obs, CleanReport* report) {
  CleanReport local;
  local.rows_in = records.size();
  std::map<std::string, std::size_t> counts;  // ordered so reports are stable
  std::vector<AisRecord> kept;
  kept.reserve(records.size());
  for (const AisRecord& r : records) {
    if (!r.complete()) {
      ++local.rows_missing;
      continue;
    }
    kept.push_back(r);
    ++counts[r.vessel_id];
  }
  std::vector<AisRecord> out;
  out.reserve(kept.size());
  for (AisRecord& r : kept) {
    if (counts[r.vessel_id] >= min_obs) out.push_back(std::move(r));
  }
  for (const auto& [vid, n] : counts) {
    if (n < min_obs) local.dropped_vessels.emplace_back(vid, n);
  }
  if (out.empty()) {
    throw PipelineError("cleaning removed every row (" + std::to_string(local.rows_missing) +
                        " incomplete, " + std::to_string(local.dropped_vessels.size()) +
                        " vessels under " + std::to_string(min_obs) + " observations)");
  }
  if (report != nullptr) *report = std::move(local);
  return out;
}

std::vector<AisRecord> select_vessels(const std::vector<AisRecord>& records,
                                      std::size_t max_vessels,
                                      const std::vector<std::string>& allowlist) {
  if (!allowlist.empty()) {
    std::vector<AisRecord> out;
    for (const AisRecord& r : records) {
      if (std::find(allowlist.begin(), allowlist.end(), r.vessel_id) != allowlist.end()) {
        out.push_back(r);
      }
    }
    return out;
  }
  if (max_vessels == 0) return records;
  std::map<std::string, std::size_t> counts;
  for (const AisRecord& r : records) {
    if (r.complete()) ++counts[r.vessel_id];
  }
  if (counts.size() <= max_vessels) return records;
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  ranked.resize(max_vessels);
  std::vector<AisRecord> out;
  for (const AisRecord& r : records) {
    for (const auto& [vid, n] : ranked) {
      if (r.vessel_id == vid) {
        out.push_back(r);
        break;
      }
    }
  }
  return out;
}

Dataset make_dataset(const std::vector<AisRecord>& records, const LabelMap& labels) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].timestamp != records[b].timestamp) {
      return records[a].timestamp < records[b].timestamp;
    }
    return records[a].object_id < records[b].object_id;
  });
  Dataset ds;
  ds.features = Tensor({records.size(), kFeatureCount});
  ds.labels.reserve(records.size());
  ds.timestamps.reserve(records.size());
  std::size_t row = 0;
  for (std::size_t idx : order) {
    const AisRecord& r = records[idx];
    if (!r.complete()) {
      throw PipelineError("dataset: incomplete record for object " +
                          std::to_string(r.object_id) + " (clean the data first)");
    }
    ds.features.at(row, 0) = static_cast<float>(r.lat);
    ds.features.at(row, 1) = static_cast<float>(r.lon);
    ds.features.at(row, 2) = static_cast<float>(r.speed);
    ds.features.at(row, 3) = static_cast<float>(r.course);
    ds.labels.push_back(labels.index_of(r.vessel_id));
    ds.timestamps.push_back(r.timestamp);
    ++row;
  }
  return ds;
}

ScalerParams fit_scaler(const Tensor& features) {
  if (features.rank() != 2 || features.dim(1) != kFeatureCount) {
    throw DimensionError("scaler: expected [N,4] features, got " + shape_str(features.shape()));
  }
  const std::size_t n = features.dim(0);
  if (n == 0) throw PipelineError("scaler: cannot fit on an empty feature matrix");
  ScalerParams p;
  p.mean.assign(kFeatureCount, 0.0);
  p.stdev.assign(kFeatureCount, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) p.mean[j] += features.at(i, j);
  }
  for (std::size_t j = 0; j < kFeatureCount; ++j) p.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const double d = features.at(i, j) - p.mean[j];
      p.stdev[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    p.stdev[j] = std::sqrt(p.stdev[j] / static_cast<double>(n));
    if (p.stdev[j] == 0.0) {
      throw PipelineError(std::string("scaler: feature '") + kFeatureNames[j] +
                          "' has zero spread; standardization would divide by zero");
    }
  }
  return p;
}

Tensor apply_scaler(const ScalerParams& scaler, const Tensor& features) {
  if (features.rank() != 2 || features.dim(1) != kFeatureCount) {
    throw DimensionError("scaler: expected [N,4] features, got " + shape_str(features.shape()));
  }
  if (scaler.mean.size() != kFeatureCount || scaler.stdev.size() != kFeatureCount) {
    throw ArgumentError("scaler: parameters do not cover 4 features");
  }
  Tensor out(features.shape());
  for (std::size_t i = 0; i < features.dim(0); ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      out.at(i, j) =
          static_cast<float>((features.at(i, j) - scaler.mean[j]) / scaler.stdev[j]);
    }
  }
  return out;
}

namespace {

Dataset gather(const Dataset& src, std::vector<std::size_t> idx, const char* tag) {
  std::sort(idx.begin(), idx.end());  // keep time order inside the split
  Dataset out;
  out.split = tag;
  out.features = Tensor({idx.size(), kFeatureCount});
  out.labels.reserve(idx.size());
  out.timestamps.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      out.features.at(r, j) = src.features.at(idx[r], j);
    }
    out.labels.push_back(src.labels[idx[r]]);
    out.timestamps.push_back(src.timestamps[idx[r]]);
  }
  return out;
}

}  // namespace

Splits stratified_split(const Dataset& data, SplitRatios ratios, std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.val < 0 || ratios.test < 0 ||
      ratios.train + ratios.val + ratios.test != 100) {
    throw ArgumentError("split: ratios must be non-negative and sum to 100");
  }
  if (data.size() == 0) throw PipelineError("split: empty dataset");
  if (data.features.dim(0) != data.size() || data.timestamps.size() != data.size()) {
    throw ArgumentError("split: dataset rows are inconsistent");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);

  Rng rng(derive_seed(seed, 0x53504c49));  // split stream
  std::vector<std::size_t> tr, va, te;
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < 3) {
      throw PipelineError("split: class " + std::to_string(cls) + " has only " +
                          std::to_string(idx.size()) + " rows; cannot stratify");
    }
    // Fisher-Yates with the shared stream; class order is deterministic.
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
    }
    const double n = static_cast<double>(idx.size());
    const double exact[3] = {n * ratios.train / 100.0, n * ratios.val / 100.0,
                             n * ratios.test / 100.0};
    std::size_t take[3];
    double frac[3];
    std::size_t used = 0;
    for (int k = 0; k < 3; ++k) {
      take[k] = static_cast<std::size_t>(exact[k]);
      frac[k] = exact[k] - static_cast<double>(take[k]);
      used += take[k];
    }
    // Largest remainder, ties resolved train > val > test.
    while (used < idx.size()) {
      int best = 0;
      for (int k = 1; k < 3; ++k) {
        if (frac[k] > frac[best]) best = k;
      }
      take[best] += 1;
      frac[best] = -1.0;
      ++used;
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < take[0]; ++k) tr.push_back(idx[pos++]);
    for (std::size_t k = 0; k < take[1]; ++k) va.push_back(idx[pos++]);
    for (std::size_t k = 0; k < take[2]; ++k) te.push_back(idx[pos++]);
  }
  Splits out;
  out.train = gather(data, std::move(tr), "train");
  out.val = gather(data, std::move(va), "val");
  out.test = gather(data, std::move(te), "test");
  return out;
}

Tensor to_model_input(const Tensor& features) {
  if (features.rank() != 2 || features.dim(1) != kFeatureCount) {
    throw DimensionError("to_model_input: expected [N,4] features, got " +
                         shape_str(features.shape()));
  }
  return features.reshaped({features.dim(0), kFeatureCount, 1});
}

}  // namespace seatrack
