#include "causalflow/sem_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace causalflow {

std::vector<double> sample_laplace(std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_laplace: n must be >= 1");
    std::vector<double> out(n);
    for (double& v : out) v = rng.laplace();
    return out;
}

const char* mechanism_name(MechanismKind k) {
    switch (k) {
        case MechanismKind::linear: return "linear";
        case MechanismKind::cubic_nonlinear: return "cubic";
        case MechanismKind::neural_net: return "neural_net";
    }
    return "?";
}

MechanismKind mechanism_from_name(const std::string& name) {
    if (name == "linear") return MechanismKind::linear;
    if (name == "cubic" || name == "cubic_nonlinear" || name == "nonlinear") {
        return MechanismKind::cubic_nonlinear;
    }
    if (name == "neural_net" || name == "nn" || name == "neural") {
        return MechanismKind::neural_net;
    }
    throw std::invalid_argument("unknown mechanism kind: " + name);
}

double draw_alpha(Rng& rng) {
    const double mag = rng.uniform(0.5, 1.5);
    return rng.uniform() < 0.5 ? -mag : mag;
}

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double effect_of(MechanismKind kind, double alpha, double cause, double noise) {
    switch (kind) {
        case MechanismKind::linear:
            return alpha * cause + noise;
        case MechanismKind::cubic_nonlinear:
            return cause + alpha * cause * cause * cause + noise;
        case MechanismKind::neural_net:
            return sigmoid(sigmoid(alpha * cause) + noise);
    }
    return 0.0;
}

}  // namespace

BivariateSample generate_bivariate(const BivariateKind& kind, std::size_t n,
                                   PairDirection direction, Rng& rng) {
    if (n < 1) throw std::invalid_argument("generate_bivariate: n must be >= 1");
    if (!std::isfinite(kind.alpha)) {
        throw std::invalid_argument("generate_bivariate: alpha must be finite");
    }
    BivariateSample out;
    out.truth = direction;
    out.alpha = kind.alpha;
    out.data = DataMatrix(n, 2);
    const std::size_t cause_col = direction == PairDirection::x1_to_x2 ? 0 : 1;
    const std::size_t effect_col = 1 - cause_col;
    for (std::size_t i = 0; i < n; ++i) {
        const double cause = rng.laplace();
        const double noise = rng.laplace();
        out.data.at(i, cause_col) = cause;
        out.data.at(i, effect_col) = effect_of(kind.kind, kind.alpha, cause, noise);
    }
    return out;
}

SemSpec toy4_spec() {
    SemSpec spec;
    spec.d = 4;
    spec.ordering = {0, 1, 2, 3};
    spec.equations.resize(4);

    spec.equations[0].mechanism = [](std::span<const double>, double n) { return n; };
    spec.equations[0].recover = [](std::span<const double>, double v) { return v; };

    spec.equations[1].mechanism = [](std::span<const double>, double n) { return n; };
    spec.equations[1].recover = [](std::span<const double>, double v) { return v; };

    spec.equations[2].parents = {0, 1};
    spec.equations[2].mechanism = [](std::span<const double> p, double n) {
        return p[0] + 0.5 * p[1] * p[1] * p[1] + n;
    };
    spec.equations[2].recover = [](std::span<const double> p, double v) {
        return v - p[0] - 0.5 * p[1] * p[1] * p[1];
    };

    spec.equations[3].parents = {0, 1};
    spec.equations[3].mechanism = [](std::span<const double> p, double n) {
        return 0.5 * p[0] * p[0] - p[1] + n;
    };
    spec.equations[3].recover = [](std::span<const double> p, double v) {
        return v - 0.5 * p[0] * p[0] + p[1];
    };
    return spec;
}

DataMatrix generate_toy4(std::size_t n, Rng& rng) {
    return simulate(toy4_spec(), n, rng);
}

namespace {

std::vector<double> parent_values(const SemSpec::Equation& eq,
                                  const std::vector<double>& values) {
    std::vector<double> p(eq.parents.size());
    for (std::size_t i = 0; i < eq.parents.size(); ++i) p[i] = values[eq.parents[i]];
    return p;
}

}  // namespace

DataMatrix simulate(const SemSpec& spec, std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
    DataMatrix out(n, spec.d);
    std::vector<double> values(spec.d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int v : spec.ordering) {
            const SemSpec::Equation& eq = spec.equations[v];
            values[v] = eq.mechanism(parent_values(eq, values), rng.laplace());
        }
        for (int j = 0; j < spec.d; ++j) out.at(i, j) = values[j];
    }
    return out;
}

DataMatrix simulate_do(const SemSpec& spec, int var, double alpha, std::size_t n,
                       Rng& rng) {
    if (n < 1) throw std::invalid_argument("simulate_do: n must be >= 1");
    if (var < 0 || var >= spec.d) throw std::invalid_argument("simulate_do: bad variable");
    DataMatrix out(n, spec.d);
    std::vector<double> values(spec.d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int v : spec.ordering) {
            if (v == var) {
                values[v] = alpha;
                continue;
            }
            const SemSpec::Equation& eq = spec.equations[v];
            values[v] = eq.mechanism(parent_values(eq, values), rng.laplace());
        }
        for (int j = 0; j < spec.d; ++j) out.at(i, j) = values[j];
    }
    return out;
}

std::vector<double> propagate(const SemSpec& spec, std::span<const double> noise) {
    if (noise.size() != static_cast<std::size_t>(spec.d)) {
        throw std::invalid_argument("propagate: noise length mismatch");
    }
    std::vector<double> values(spec.d);
    for (int v : spec.ordering) {
        const SemSpec::Equation& eq = spec.equations[v];
        values[v] = eq.mechanism(parent_values(eq, values), noise[v]);
    }
    return values;
}

std::vector<double> recover_noise(const SemSpec& spec, std::span<const double> row) {
    if (row.size() != static_cast<std::size_t>(spec.d)) {
        throw std::invalid_argument("recover_noise: row length mismatch");
    }
    std::vector<double> values(row.begin(), row.end());
    std::vector<double> noise(spec.d);
    for (int v : spec.ordering) {
        const SemSpec::Equation& eq = spec.equations[v];
        if (!eq.recover) {
            throw std::invalid_argument("recover_noise: equation for variable " +
                                        std::to_string(v) + " is not invertible");
        }
        noise[v] = eq.recover(parent_values(eq, values), values[v]);
    }
    return noise;
}

double analytic_do_mean(const SemSpec& spec, int target, double alpha) {
    if (spec.d != 4) throw std::invalid_argument("analytic_do_mean: toy SEM only");
    // do(x1 = alpha): E[x3] = alpha + E[x2^3]/2 = alpha; E[x4] = alpha^2/2 - E[x2] = alpha^2/2
    if (target == 2) return alpha;
    if (target == 3) return 0.5 * alpha * alpha;
    throw std::invalid_argument("analytic_do_mean: target must be x3 or x4");
}

std::vector<double> analytic_counterfactual(const SemSpec& spec,
                                            std::span<const double> x_obs, int var,
                                            double alpha) {
    if (var < 0 || var >= spec.d) {
        throw std::invalid_argument("analytic_counterfactual: bad variable");
    }
    const std::vector<double> noise = recover_noise(spec, x_obs);
    std::vector<double> values(spec.d);
    for (int v : spec.ordering) {
        if (v == var) {
            values[v] = alpha;
            continue;
        }
        const SemSpec::Equation& eq = spec.equations[v];
        values[v] = eq.mechanism(parent_values(eq, values), noise[v]);
    }
    return values;
}

}  // namespace causalflow
