#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalflow/data.hpp"
#include "causalflow/flow.hpp"

namespace causalflow {

struct TrainConfig {
    int flow_layers = 2;
    std::vector<int> hidden = {10, 10};     // conditioner hidden sizes
    Activation activation = Activation::leaky_relu;
    int epochs = 500;
    int batch_size = 0;                     // 0 -> min(128, n_train)
    double lr = 1e-2;
    double lr_final = 1e-4;                 // cosine decay target
    uint64_t seed = 0;
    bool standardize = true;
    BaseDistribution base = BaseDistribution::laplace;

    void validate() const;
    int resolve_batch(std::size_t n_train) const;
    std::string to_json_string() const;
    static TrainConfig from_json_string(const std::string& text);
};

struct TrainReport {
    std::vector<double> epoch_loglik;  // mean train log-likelihood per epoch
    double final_train_loglik = 0.0;
    std::optional<double> heldout_loglik;
    double wall_seconds = 0.0;
    uint64_t seed = 0;
};

// Disjoint row partition by seeded shuffle; both parts keep >= 2 rows.
struct SplitIndices {
    std::vector<std::size_t> train, test;
};
SplitIndices split_indices(std::size_t n, double test_fraction, uint64_t seed);
std::pair<DataMatrix, DataMatrix> split(const DataMatrix& data, double test_fraction,
                                        uint64_t seed);

// Per-column location/scale computed on the training partition only.
// Default-constructed stats act as the identity transform.
struct ScalerStats {
    std::vector<double> mean, stdev;

    bool empty() const { return mean.empty(); }
    double to_standard(double v, std::size_t col) const;
    double to_original(double v, std::size_t col) const;
    void apply(DataMatrix& m) const;
    void invert(DataMatrix& m) const;
};

// Population (n-divisor) statistics from train; throws DegenerateDataError
// on a zero-variance column. Scales train and every matrix in others in
// place with the train statistics.
ScalerStats standardize(DataMatrix& train, const std::vector<DataMatrix*>& others);

// Maximum-likelihood fit by minibatch Adam on log_prob_grad, fixed epoch
// budget, cosine learning-rate decay. Bit-reproducible given (data, cfg).
std::pair<AffineFlow, TrainReport> fit(const DataMatrix& data, const Ordering& ordering,
                                       const TrainConfig& cfg);

// Mean log_prob over rows.
double evaluate(const AffineFlow& flow, const DataMatrix& data);

}  // namespace causalflow
