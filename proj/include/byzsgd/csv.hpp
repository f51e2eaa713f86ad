#pragma once

#include <string>
#include <vector>

#include "byzsgd/simulator.hpp"

namespace byzsgd {

/// Shortest round-trip decimal representation (std::to_chars), so equal
/// doubles always serialize to equal bytes.
std::string format_double(double x);

inline constexpr const char* kMetricsCsvHeader =
    "round,train_loss,eval_metric,grad_norm,agg_wall_time";
inline constexpr const char* kAveragedCsvHeader =
    "round,train_loss,eval_metric,grad_norm,agg_wall_time,"
    "train_loss_stddev,eval_metric_stddev,grad_norm_stddev,agg_wall_time_stddev";

std::string metrics_to_csv(const std::vector<MetricsRecord>& records, bool include_timing);

/// Per-round mean and sample stddev across replicates. All replicates must
/// share the same round schedule.
std::string averaged_metrics_to_csv(const std::vector<std::vector<MetricsRecord>>& replicates,
                                    bool include_timing);

/// Writes to a temp file in the same directory and renames over the target.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace byzsgd
