#pragma once

#include <optional>
#include <string>
#include <vector>

#include "causalflow/data.hpp"
#include "causalflow/flow.hpp"
#include "causalflow/training.hpp"

namespace causalflow {

struct DatasetPair {
    std::string id;
    std::vector<double> x1, x2;
    std::optional<PairDirection> truth;
    std::optional<double> weight;
    std::string source_path;
    std::size_t rows_dropped = 0;  // non-finite rows removed on load
};

struct PairsLoadResult {
    std::vector<DatasetPair> pairs;      // sorted by id
    std::size_t skipped_multivariate = 0;
    std::size_t skipped_short = 0;       // fewer than 8 usable rows
};

// Loads the cause-effect pairs layout: one whitespace-separated numeric file
// per pair plus a meta file whose lines read
//   <id> <cause first col> <cause last col> <effect first col> <effect last col> [weight]
// with 1-based column indices. Only pairs whose cause and effect are single
// columns of a two-column file are kept.
PairsLoadResult load_pairs(const std::string& dir, const std::string& meta_path);

DataMatrix load_csv(const std::string& path, bool has_header);
void write_csv(const DataMatrix& m, const std::string& path);

// Flow archive, JSON document version "causal-flow/1": configuration,
// ordering, base tag, scaler statistics and all parameters as flat arrays
// with shape metadata.
void save_flow(const AffineFlow& flow, const ScalerStats& stats, const std::string& path);

struct LoadedFlow {
    AffineFlow flow;
    ScalerStats stats;
};
LoadedFlow load_flow(const std::string& path);

// In-memory variants of the flow archive (same format).
std::string flow_to_json(const AffineFlow& flow, const ScalerStats& stats);
LoadedFlow flow_from_json(const std::string& text);

}  // namespace causalflow
