#pragma once

#include <functional>
#include <span>
#include <vector>

#include "causalflow/data.hpp"
#include "causalflow/rng.hpp"

namespace causalflow {

// Executable structural equation set over a topological ordering; the
// ground-truth oracle for the synthetic experiments.
struct SemSpec {
    struct Equation {
        std::vector<int> parents;
        // (parent values in declared order, noise) -> value
        std::function<double(std::span<const double>, double)> mechanism;
        // (parent values, observed value) -> noise; empty when the mechanism
        // is not invertible in the noise
        std::function<double(std::span<const double>, double)> recover;
    };

    int d = 0;
    std::vector<int> ordering;       // variable indices, topological
    std::vector<Equation> equations; // indexed by variable
};

std::vector<double> sample_laplace(std::size_t n, Rng& rng);

enum class MechanismKind { linear, cubic_nonlinear, neural_net };

const char* mechanism_name(MechanismKind k);
MechanismKind mechanism_from_name(const std::string& name);

struct BivariateKind {
    MechanismKind kind = MechanismKind::linear;
    double alpha = 1.0;
};

// Coefficient for one repetition: magnitude uniform in [0.5, 1.5], random sign.
double draw_alpha(Rng& rng);

struct BivariateSample {
    DataMatrix data;         // two columns
    PairDirection truth;
    double alpha;
};

// Cause is pure standard-Laplace noise; the effect follows the selected
// mechanism. For x2 -> x1 the column roles are swapped.
BivariateSample generate_bivariate(const BivariateKind& kind, std::size_t n,
                                   PairDirection direction, Rng& rng);

// Four-variable toy SEM:
//   x1 = n1              x3 = x1 + x2^3 / 2 + n3
//   x2 = n2              x4 = x1^2 / 2 - x2 + n4
// with standard Laplace noises.
SemSpec toy4_spec();
DataMatrix generate_toy4(std::size_t n, Rng& rng);

DataMatrix simulate(const SemSpec& spec, std::size_t n, Rng& rng);

// Mutilated model: variable `var` pinned to alpha, all other noises resampled.
DataMatrix simulate_do(const SemSpec& spec, int var, double alpha, std::size_t n, Rng& rng);

// Propagate a fixed noise vector through the equations.
std::vector<double> propagate(const SemSpec& spec, std::span<const double> noise);

// Invert each equation for its noise given an observed row.
std::vector<double> recover_noise(const SemSpec& spec, std::span<const double> row);

// Closed-form E[target | do(x1 = alpha)] for the toy SEM: alpha for x3,
// alpha^2 / 2 for x4.
double analytic_do_mean(const SemSpec& spec, int target, double alpha);

// Exact abduction-action-prediction on the true equations.
std::vector<double> analytic_counterfactual(const SemSpec& spec,
                                            std::span<const double> x_obs, int var,
                                            double alpha);

}  // namespace causalflow
