#include "causalflow/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "causalflow/errors.hpp"
#include "causalflow/kernels.hpp"

namespace causalflow {

std::vector<double> DataMatrix::column(std::size_t j) const {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = at(i, j);
    return col;
}

void DataMatrix::check_finite() const {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DegenerateDataError("data contains a non-finite value at row " +
                                      std::to_string(i / d) + ", column " +
                                      std::to_string(i % d));
        }
    }
}

BatchMatrix DataMatrix::to_batch() const {
    BatchMatrix b(d, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) b.at(j, i) = at(i, j);
    }
    return b;
}

DataMatrix DataMatrix::from_batch(const BatchMatrix& b) {
    DataMatrix m(b.batch, b.units);
    for (std::size_t i = 0; i < b.batch; ++i) {
        for (std::size_t j = 0; j < b.units; ++j) m.at(i, j) = b.at(j, i);
    }
    return m;
}

DataMatrix DataMatrix::from_columns(const std::vector<std::vector<double>>& cols) {
    if (cols.empty()) throw std::invalid_argument("from_columns: no columns");
    DataMatrix m(cols.front().size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != m.n) throw std::invalid_argument("from_columns: ragged columns");
        for (std::size_t i = 0; i < m.n; ++i) m.at(i, j) = cols[j][i];
    }
    return m;
}

const char* pair_direction_name(PairDirection d) {
    return d == PairDirection::x1_to_x2 ? "x1->x2" : "x2->x1";
}

void TrainConfig::validate() const {
    if (flow_layers < 1) throw std::invalid_argument("TrainConfig: flow_layers must be >= 1");
    for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("TrainConfig: hidden sizes must be >= 1");
    }
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 0");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be positive");
    if (!(lr_final > 0.0) || lr_final > lr) {
        throw std::invalid_argument("TrainConfig: need 0 < lr_final <= lr");
    }
}

int TrainConfig::resolve_batch(std::size_t n_train) const {
    const int n = static_cast<int>(n_train);
    if (batch_size > 0) return std::min(batch_size, n);
    return std::min(128, n);
}

std::string TrainConfig::to_json_string() const {
    nlohmann::json j;
    j["flow_layers"] = flow_layers;
    j["hidden"] = hidden;
    j["activation"] = activation_name(activation);
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["lr_final"] = lr_final;
    j["seed"] = seed;
    j["standardize"] = standardize;
    j["base"] = base_name(base);
    return j.dump();
}

TrainConfig TrainConfig::from_json_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("TrainConfig: ") + e.what());
    }
    TrainConfig cfg;
    cfg.flow_layers = j.value("flow_layers", cfg.flow_layers);
    cfg.hidden = j.value("hidden", cfg.hidden);
    if (j.contains("activation")) cfg.activation = activation_from_name(j["activation"]);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.lr_final = j.value("lr_final", cfg.lr_final);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.standardize = j.value("standardize", cfg.standardize);
    if (j.contains("base")) cfg.base = base_from_name(j["base"]);
    cfg.validate();
    return cfg;
}

SplitIndices split_indices(std::size_t n, double test_fraction, uint64_t seed) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        throw std::invalid_argument("split: test_fraction must be in (0, 1)");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(Rng::derive(seed, 3));
    rng.shuffle(idx);
    const std::size_t n_test = static_cast<std::size_t>(std::llround(
        static_cast<double>(n) * test_fraction));
    if (n_test < 2 || n - n_test < 2) {
        throw std::invalid_argument("split: each part needs at least 2 rows (n=" +
                                    std::to_string(n) + ")");
    }
    SplitIndices s;
    s.test.assign(idx.begin(), idx.begin() + n_test);
    s.train.assign(idx.begin() + n_test, idx.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

namespace {

DataMatrix take_rows(const DataMatrix& data, const std::vector<std::size_t>& rows) {
    DataMatrix out(rows.size(), data.d);
    out.column_names = data.column_names;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < data.d; ++j) out.at(i, j) = data.at(rows[i], j);
    }
    return out;
}

}  // namespace

std::pair<DataMatrix, DataMatrix> split(const DataMatrix& data, double test_fraction,
                                        uint64_t seed) {
    const SplitIndices s = split_indices(data.n, test_fraction, seed);
    return {take_rows(data, s.train), take_rows(data, s.test)};
}

double ScalerStats::to_standard(double v, std::size_t col) const {
    if (empty()) return v;
    return (v - mean[col]) / stdev[col];
}

double ScalerStats::to_original(double v, std::size_t col) const {
    if (empty()) return v;
    return v * stdev[col] + mean[col];
}

void ScalerStats::apply(DataMatrix& m) const {
    if (empty()) return;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.d; ++j) m.at(i, j) = to_standard(m.at(i, j), j);
    }
}

void ScalerStats::invert(DataMatrix& m) const {
    if (empty()) return;
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.d; ++j) m.at(i, j) = to_original(m.at(i, j), j);
    }
}

ScalerStats standardize(DataMatrix& train, const std::vector<DataMatrix*>& others) {
    ScalerStats stats;
    stats.mean.resize(train.d);
    stats.stdev.resize(train.d);
    for (std::size_t j = 0; j < train.d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < train.n; ++i) m += train.at(i, j);
        m /= static_cast<double>(train.n);
        double var = 0.0;
        for (std::size_t i = 0; i < train.n; ++i) {
            const double dev = train.at(i, j) - m;
            var += dev * dev;
        }
        var /= static_cast<double>(train.n);  // population convention
        const double sd = std::sqrt(var);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
            throw DegenerateDataError("standardize: column " + std::to_string(j) +
                                      " has zero variance");
        }
        stats.mean[j] = m;
        stats.stdev[j] = sd;
    }
    stats.apply(train);
    for (DataMatrix* other : others) {
        if (other != nullptr) stats.apply(*other);
    }
    return stats;
}

namespace {

// Adam moments for every flow parameter group.
struct FlowOptimizer {
    std::vector<AdamState> shift_states, logscale_states;  // (layer, pos) flattened
    std::vector<std::array<double, 4>> const_moments;       // m_s, v_s, m_t, v_t per layer
    long step = 0;

    explicit FlowOptimizer(const AffineFlow& flow) {
        for (const auto& layer : flow.layers) {
            const_moments.push_back({0.0, 0.0, 0.0, 0.0});
            for (const auto& c : layer.conds) {
                shift_states.push_back(AdamState::zeros(c.cfg, 0.0));
                logscale_states.push_back(AdamState::zeros(c.cfg, 0.0));
            }
        }
    }

    // Ascent on the mean log-likelihood: grads are negated into the update.
    void update(AffineFlow& flow, FlowGrads& grads, double lr) {
        grads.scale(-1.0);
        step += 1;
        std::size_t slot = 0;
        for (std::size_t l = 0; l < flow.layers.size(); ++l) {
            AffineLayer& layer = flow.layers[l];
            FlowGrads::LayerGrads& lg = grads.layers[l];
            auto& cm = const_moments[l];
            kernels::adam_update(1, &layer.const_shift, &cm[0], &cm[1], &lg.const_shift,
                                 lr, 0.9, 0.999, 1e-8, step);
            kernels::adam_update(1, &layer.const_logscale, &cm[2], &cm[3],
                                 &lg.const_logscale, lr, 0.9, 0.999, 1e-8, step);
            for (std::size_t c = 0; c < layer.conds.size(); ++c, ++slot) {
                AdamState& ss = shift_states[slot];
                AdamState& ts = logscale_states[slot];
                ss.lr = lr;
                ts.lr = lr;
                ss.step = step - 1;  // adam_step advances it
                ts.step = step - 1;
                adam_step(layer.conds[c].shift, lg.shift[c], ss);
                adam_step(layer.conds[c].logscale, lg.logscale[c], ts);
            }
        }
    }
};

double cosine_lr(const TrainConfig& cfg, int epoch) {
    if (cfg.epochs <= 1) return cfg.lr;
    const double t = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
    return cfg.lr_final + 0.5 * (cfg.lr - cfg.lr_final) * (1.0 + std::cos(M_PI * t));
}

}  // namespace

std::pair<AffineFlow, TrainReport> fit(const DataMatrix& data, const Ordering& ordering,
                                       const TrainConfig& cfg) {
    cfg.validate();
    ordering.validate();
    if (static_cast<std::size_t>(ordering.dim()) != data.d) {
        throw std::invalid_argument("fit: ordering dimension mismatch");
    }
    if (data.n < 2) throw std::invalid_argument("fit: need at least 2 rows");
    data.check_finite();

    const auto t0 = std::chrono::steady_clock::now();
    Rng init_rng(Rng::derive(cfg.seed, 1));
    AffineFlow flow = make_flow(static_cast<int>(data.d), cfg.flow_layers, ordering,
                                cfg.hidden, cfg.activation, cfg.base, init_rng);

    TrainReport report;
    report.seed = cfg.seed;
    if (cfg.epochs == 0) {
        report.final_train_loglik = evaluate(flow, data);
        return {std::move(flow), std::move(report)};
    }

    const std::size_t n = data.n;
    const std::size_t batch = static_cast<std::size_t>(cfg.resolve_batch(n));
    const BatchMatrix all = data.to_batch();

    FlowOptimizer opt(flow);
    FlowCache cache;
    FlowGrads grads = FlowGrads::zeros(flow);
    BatchMatrix xb(data.d, batch);
    std::vector<std::size_t> order_idx(n);
    std::iota(order_idx.begin(), order_idx.end(), 0);
    Rng batch_rng(Rng::derive(cfg.seed, 2));

    report.epoch_loglik.reserve(cfg.epochs);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_lr(cfg, epoch);
        batch_rng.shuffle(order_idx);
        double ll_weighted = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t b = std::min(batch, n - start);
            if (xb.batch != b) xb.resize(data.d, b);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t src = order_idx[start + i];
                for (std::size_t j = 0; j < data.d; ++j) xb.at(j, i) = all.at(j, src);
            }
            double ll = 0.0;
            try {
                ll = log_prob_grad(flow, xb, cache, grads);
            } catch (const NumericError& e) {
                throw TrainingDivergedError(std::string("fit: ") + e.what() +
                                            " (epoch " + std::to_string(epoch) + ")",
                                            epoch);
            }
            if (!grads.all_finite()) {
                throw TrainingDivergedError("fit: non-finite gradient (epoch " +
                                            std::to_string(epoch) + ")", epoch);
            }
            ll_weighted += ll * static_cast<double>(b);
            opt.update(flow, grads, lr);
        }
        report.epoch_loglik.push_back(ll_weighted / static_cast<double>(n));
    }
    report.final_train_loglik = report.epoch_loglik.back();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(flow), std::move(report)};
}

double evaluate(const AffineFlow& flow, const DataMatrix& data) {
    if (data.d != static_cast<std::size_t>(flow.dim())) {
        throw std::invalid_argument("evaluate: dimension mismatch");
    }
    if (data.n == 0) throw std::invalid_argument("evaluate: empty data");
    const std::vector<double> ll = log_prob_batch(flow, data.to_batch());
    return kernels::sum(ll.size(), ll.data()) / static_cast<double>(ll.size());
}

}  // namespace causalflow
