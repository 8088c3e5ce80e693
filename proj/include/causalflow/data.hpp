#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "causalflow/diffnet.hpp"

namespace causalflow {

// Row-major observation matrix: n samples by d variables.
struct DataMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> values;              // n * d
    std::vector<std::string> column_names;   // empty or size d

    DataMatrix() = default;
    DataMatrix(std::size_t n_, std::size_t d_) : n(n_), d(d_), values(n_ * d_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return values[i * d + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }

    std::vector<double> column(std::size_t j) const;
    void check_finite() const;  // throws DegenerateDataError on NaN/Inf

    // transpose into the unit-major layout the flow code computes on
    BatchMatrix to_batch() const;
    static DataMatrix from_batch(const BatchMatrix& b);
    static DataMatrix from_columns(const std::vector<std::vector<double>>& cols);
};

enum class PairDirection { x1_to_x2, x2_to_x1 };

const char* pair_direction_name(PairDirection d);

}  // namespace causalflow
