#pragma once

// Turns parsed AIS records into training-ready tensors: missing-value
// cleaning, minimum-observation thresholding, vessel selection, label
// encoding, standardization and the stratified 70:10:20 split.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "seatrack/ais.hpp"
#include "seatrack/tensor.hpp"

namespace seatrack {

inline constexpr std::size_t kFeatureCount = 4;
inline const char* const kFeatureNames[kFeatureCount] = {"lat", "lon", "speed", "course"};

// Per-feature standardization parameters, z = (x - mean) / std with the
// population (1/N) standard deviation. Fit on the training split only.
struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> stdev;
};

// Stable vessel-id <-> class-index mapping, lexicographic by id.
class LabelMap {
public:
  LabelMap() = default;
  static LabelMap from_vessel_ids(std::vector<std::string> ids);

  std::optional<int> try_index(const std::string& vessel_id) const;
  int index_of(const std::string& vessel_id) const;  // ArgumentError if unknown
  const std::string& name(std::size_t index) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct Dataset {
  Tensor features;  // [N, 4] = (lat, lon, speed, course)
  std::vector<int> labels;
  std::vector<std::int64_t> timestamps;
  std::string split;  // "", "train", "val" or "test"
  std::size_t size() const { return labels.size(); }
};

struct CleanReport {
  std::size_t rows_in = 0;
  std::size_t rows_missing = 0;  // dropped for incomplete fields
  std::vector<std::pair<std::string, std::size_t>> dropped_vessels;  // below min_obs
};

// Drops rows with missing fields, then drops vessels with fewer than min_obs
// surviving rows (a vessel with exactly min_obs rows stays). Throws
// PipelineError if nothing survives.
std::vector<AisRecord> clean_and_threshold(const std::vector<AisRecord>& records,
                                           std::size_t min_obs, CleanReport* report = nullptr);

// Restricts the record set to an explicit vessel allowlist, or, if the list
// is empty, to the max_vessels ids with the most complete rows (ties broken
// lexicographically). max_vessels = 0 means no cap.
std::vector<AisRecord> select_vessels(const std::vector<AisRecord>& records,
                                      std::size_t max_vessels,
                                      const std::vector<std::string>& allowlist = {});

// Records -> dataset rows ordered by (timestamp, object_id); every record
// must be complete and every vessel id known to the map.
Dataset make_dataset(const std::vector<AisRecord>& records, const LabelMap& labels);

ScalerParams fit_scaler(const Tensor& features);  // [N,4]; PipelineError on zero spread
Tensor apply_scaler(const ScalerParams& scaler, const Tensor& features);

struct SplitRatios {
  int train = 70;
  int val = 10;
  int test = 20;
};

struct Splits {
  Dataset train, val, test;
};

// Per-class shuffle and largest-remainder allocation, so each class lands
// within one row of its exact share in every split and always reaches train.
// Classes with fewer than 3 rows cannot be stratified -> PipelineError.
Splits stratified_split(const Dataset& data, SplitRatios ratios, std::uint64_t seed);

// [N,4] feature matrix -> [N,4,1] model input (each observation is a length-4
// sequence with one channel).
Tensor to_model_input(const Tensor& features);

}  // namespace seatrack
