#pragma once

#include <stdexcept>
#include <string>

namespace causalflow {

// A computation produced a non-finite value where a finite one is required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data is unusable for density estimation (e.g. a zero-variance column).
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// Intervention or counterfactual requested on a variable that is not a
// declared root of the causal ordering.
class UnsupportedInterventionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedVersionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace causalflow
