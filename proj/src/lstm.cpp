#include "aqcast/lstm.hpp"

#include "aqcast/error.hpp"
#include "aqcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace aqcast::lstm {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::MatrixXd tanh_of(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return std::tanh(v); });
}

/// Gathers sample `order[begin..begin+count)` into per-timestep
/// feature x batch matrices.
std::vector<Eigen::MatrixXd> gather_steps(const WindowSet& windows,
                                          std::span<const std::size_t> order) {
    const auto lookback = windows.inputs.front().rows();
    const auto features = windows.inputs.front().cols();
    const auto batch = static_cast<Eigen::Index>(order.size());
    std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(lookback),
                                       Eigen::MatrixXd(features, batch));
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& block = windows.inputs[order[static_cast<std::size_t>(b)]];
        for (Eigen::Index t = 0; t < lookback; ++t) {
            steps[static_cast<std::size_t>(t)].col(b) = block.row(t).transpose();
        }
    }
    return steps;
}

double inference_mse(const WindowSet& windows, const std::vector<Eigen::MatrixXd>& all_steps,
                     const LstmWeights& w) {
    const auto out = forward_batch(all_steps, w);
    double sse = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const double e = out.predictions(static_cast<Eigen::Index>(i)) - windows.targets[i];
        sse += e * e;
    }
    return sse / static_cast<double>(windows.size());
}

StationSeries restrict_features(const StationSeries& series, bool univariate) {
    if (!univariate || series.exogenous().empty()) {
        return series;
    }
    return {series.state(), series.pollutant(), series.target()};
}

} // namespace

void LstmConfig::validate() const {
    if (layers < 1 || layers > 2) {
        throw Error(ErrorCode::InvalidSpec, "LSTM supports 1 or 2 stacked layers");
    }
    if (cells < 1 || lookback < 1 || epochs < 1 || batch_size < 1) {
        throw Error(ErrorCode::InvalidSpec, "cells, lookback, epochs and batch_size must be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "dropout must lie in [0, 1)");
    }
    if (!(learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "learning rate must be positive");
    }
}

std::size_t LstmWeights::parameter_count() const {
    std::size_t n = 0;
    for_each_tensor([&](auto t) { n += t.size(); });
    return n;
}

bool LstmWeights::all_finite() const {
    bool ok = true;
    for_each_tensor([&](auto t) {
        ok = ok && std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); });
    });
    return ok;
}

std::vector<double> LstmWeights::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for_each_tensor(
        [&](auto t) { flat.insert(flat.end(), t.begin(), t.end()); });
    return flat;
}

void LstmWeights::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw Error(ErrorCode::InvalidInput, "flat parameter vector has the wrong length");
    }
    std::size_t at = 0;
    for_each_tensor([&](std::span<double> t) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), t.size(), t.begin());
        at += t.size();
    });
}

LstmWeights LstmWeights::zeros(std::size_t input_dim, std::size_t cells, std::size_t layers) {
    const auto h = static_cast<Eigen::Index>(cells);
    LstmWeights w;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto in = l == 0 ? static_cast<Eigen::Index>(input_dim) : h;
        w.layers.push_back({Eigen::MatrixXd::Zero(4 * h, in), Eigen::MatrixXd::Zero(4 * h, h),
                            Eigen::VectorXd::Zero(4 * h)});
    }
    w.head = Eigen::VectorXd::Zero(h);
    return w;
}

LstmWeights LstmWeights::initialize(std::size_t input_dim, std::size_t cells, std::size_t layers,
                                    Rng& rng) {
    LstmWeights w = zeros(input_dim, cells, layers);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cells));
    const auto draw = [&](Eigen::MatrixXd& m) {
        // column-major fill order, fixed for reproducibility
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = rng.uniform(-bound, bound);
        }
    };
    const auto h = static_cast<Eigen::Index>(cells);
    for (auto& l : w.layers) {
        draw(l.input);
        draw(l.recurrent);
        l.bias.segment(h, h).setOnes();
    }
    for (Eigen::Index i = 0; i < w.head.size(); ++i) {
        w.head(i) = rng.uniform(-bound, bound);
    }
    return w;
}

WindowSet make_windows(const TimeSeries& target, const std::map<std::string, TimeSeries>& exogenous,
                       std::size_t lookback) {
    const std::size_t n = target.size();
    if (lookback < 1 || n <= lookback) {
        throw Error(ErrorCode::InsufficientData,
                    "need more than " + std::to_string(lookback) + " points to build windows, got " +
                        std::to_string(n));
    }
    std::vector<std::vector<double>> channels{target.values()};
    for (const auto& [name, series] : exogenous) {
        if (series.size() != n) {
            throw Error(ErrorCode::InvalidInput, "exogenous series '" + name + "' length mismatch");
        }
        channels.push_back(series.values());
    }

    WindowSet out;
    out.feature_dim = channels.size();
    const auto features = static_cast<Eigen::Index>(channels.size());
    const auto rows = static_cast<Eigen::Index>(lookback);
    for (std::size_t i = 0; i + lookback < n; ++i) {
        Eigen::MatrixXd block(rows, features);
        for (Eigen::Index t = 0; t < rows; ++t) {
            for (Eigen::Index f = 0; f < features; ++f) {
                block(t, f) = channels[static_cast<std::size_t>(f)][i + static_cast<std::size_t>(t)];
            }
        }
        out.inputs.push_back(std::move(block));
        out.targets.push_back(channels.front()[i + lookback]);
    }
    return out;
}

CellOutput cell_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                        const Eigen::MatrixXd& c_prev, const LayerWeights& w) {
    if (!x.allFinite()) {
        throw Error(ErrorCode::Numeric, "non-finite input to LSTM cell");
    }
    const auto h = w.recurrent.cols();
    const Eigen::MatrixXd z =
        (w.input * x + w.recurrent * h_prev).colwise() + w.bias;

    CellOutput out;
    auto& cache = out.cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;
    cache.i = sigmoid(z.topRows(h));
    cache.f = sigmoid(z.middleRows(h, h));
    cache.o = sigmoid(z.middleRows(2 * h, h));
    cache.g = tanh_of(z.bottomRows(h));
    cache.c = cache.f.cwiseProduct(c_prev) + cache.i.cwiseProduct(cache.g);
    cache.tanh_c = tanh_of(cache.c);
    out.c = cache.c;
    out.h = cache.o.cwiseProduct(cache.tanh_c);
    return out;
}

DropoutMasks sample_dropout(std::size_t layers, std::size_t steps, std::size_t cells,
                            std::size_t batch, double rate, Rng& rng) {
    const double keep_scale = 1.0 / (1.0 - rate);
    DropoutMasks masks(layers);
    for (auto& layer : masks) {
        layer.reserve(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            Eigen::MatrixXd m(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(batch));
            for (Eigen::Index i = 0; i < m.size(); ++i) {
                m.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
            }
            layer.push_back(std::move(m));
        }
    }
    return masks;
}

BatchForward forward_batch(std::span<const Eigen::MatrixXd> steps, const LstmWeights& w,
                           const DropoutMasks* masks) {
    const auto hsize = static_cast<Eigen::Index>(w.cells());
    const auto batch = steps.front().cols();
    const std::size_t lookback = steps.size();

    BatchForward out;
    out.cache.steps.resize(w.layers.size());
    if (masks != nullptr) {
        out.cache.masks = *masks;
    }

    std::vector<Eigen::MatrixXd> inputs(steps.begin(), steps.end());
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hsize, batch);
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hsize, batch);
        auto& layer_cache = out.cache.steps[l];
        layer_cache.reserve(lookback);
        for (std::size_t t = 0; t < lookback; ++t) {
            auto cell = cell_forward(inputs[t], h, c, w.layers[l]);
            if (!cell.c.allFinite()) {
                throw Error(ErrorCode::Numeric, "LSTM cell state became non-finite");
            }
            h = std::move(cell.h);
            c = std::move(cell.c);
            layer_cache.push_back(std::move(cell.cache));
            inputs[t] = masks != nullptr ? Eigen::MatrixXd(h.cwiseProduct((*masks)[l][t])) : h;
        }
    }
    out.cache.top = inputs.back();
    out.predictions = (w.head.transpose() * out.cache.top).array() + w.head_bias;
    return out;
}

Forward forward(const Eigen::MatrixXd& window, const LstmWeights& w, const DropoutMasks* masks) {
    std::vector<Eigen::MatrixXd> steps;
    steps.reserve(static_cast<std::size_t>(window.rows()));
    for (Eigen::Index t = 0; t < window.rows(); ++t) {
        steps.emplace_back(window.row(t).transpose());
    }
    auto out = forward_batch(steps, w, masks);
    return {out.predictions(0), std::move(out.cache)};
}

LstmWeights backward(const ForwardCache& cache, const LstmWeights& w,
                     const Eigen::RowVectorXd& d_pred) {
    const std::size_t layers = w.layers.size();
    const std::size_t lookback = cache.steps.front().size();
    const auto hsize = static_cast<Eigen::Index>(w.cells());
    const auto batch = d_pred.cols();

    LstmWeights grads = LstmWeights::zeros(w.input_dim(), w.cells(), layers);
    grads.head = cache.top * d_pred.transpose();
    grads.head_bias = d_pred.sum();

    // Gradient w.r.t. each layer's post-dropout output sequence.
    std::vector<Eigen::MatrixXd> d_out(lookback, Eigen::MatrixXd::Zero(hsize, batch));
    d_out.back() = w.head * d_pred;

    for (std::size_t l = layers; l-- > 0;) {
        const auto& lw = w.layers[l];
        auto& lg = grads.layers[l];
        if (cache.masks) {
            for (std::size_t t = 0; t < lookback; ++t) {
                d_out[t] = d_out[t].cwiseProduct((*cache.masks)[l][t]);
            }
        }
        Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(hsize, batch);
        Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(hsize, batch);
        std::vector<Eigen::MatrixXd> d_in(lookback);
        Eigen::MatrixXd dz(4 * hsize, batch);
        for (std::size_t t = lookback; t-- > 0;) {
            const auto& cc = cache.steps[l][t];
            const Eigen::ArrayXXd dh = (d_out[t] + dh_next).array();
            const Eigen::ArrayXXd tc = cc.tanh_c.array();
            const Eigen::ArrayXXd dc = dc_next.array() + dh * cc.o.array() * (1.0 - tc.square());
            const Eigen::ArrayXXd i = cc.i.array();
            const Eigen::ArrayXXd f = cc.f.array();
            const Eigen::ArrayXXd o = cc.o.array();
            const Eigen::ArrayXXd g = cc.g.array();
            dz.topRows(hsize) = (dc * g * i * (1.0 - i)).matrix();
            dz.middleRows(hsize, hsize) = (dc * cc.c_prev.array() * f * (1.0 - f)).matrix();
            dz.middleRows(2 * hsize, hsize) = (dh * tc * o * (1.0 - o)).matrix();
            dz.bottomRows(hsize) = (dc * i * (1.0 - g.square())).matrix();

            lg.input.noalias() += dz * cc.x.transpose();
            lg.recurrent.noalias() += dz * cc.h_prev.transpose();
            lg.bias += dz.rowwise().sum();

            if (l > 0) {
                d_in[t] = lw.input.transpose() * dz;
            }
            dh_next = lw.recurrent.transpose() * dz;
            dc_next = (dc * f).matrix();
        }
        if (l > 0) {
            d_out = std::move(d_in);
        }
    }
    return grads;
}

LstmWeights backward(const ForwardCache& cache, const LstmWeights& w, double d_pred) {
    Eigen::RowVectorXd d(1);
    d(0) = d_pred;
    return backward(cache, w, d);
}

void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double lr, std::size_t step) {
    const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
    for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        w[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
}

AdamState AdamState::like(const LstmWeights& w) {
    const auto layers = w.layers.size();
    return {LstmWeights::zeros(w.input_dim(), w.cells(), layers),
            LstmWeights::zeros(w.input_dim(), w.cells(), layers)};
}

void adam_step(LstmWeights& w, const LstmWeights& grads, AdamState& state, double lr,
               std::size_t step) {
    std::vector<std::span<double>> ws;
    std::vector<std::span<const double>> gs;
    std::vector<std::span<double>> ms;
    std::vector<std::span<double>> vs;
    w.for_each_tensor([&](std::span<double> t) { ws.push_back(t); });
    grads.for_each_tensor([&](std::span<const double> t) { gs.push_back(t); });
    state.m.for_each_tensor([&](std::span<double> t) { ms.push_back(t); });
    state.v.for_each_tensor([&](std::span<double> t) { vs.push_back(t); });
    for (std::size_t i = 0; i < ws.size(); ++i) {
        adam_update(ws[i], gs[i], ms[i], vs[i], lr, step);
    }
}

LstmFit train(const WindowSet& windows, const LstmConfig& cfg) {
    cfg.validate();
    if (windows.size() == 0) {
        throw Error(ErrorCode::InsufficientData, "no training windows");
    }
    if (static_cast<std::size_t>(windows.inputs.front().rows()) != cfg.lookback) {
        throw Error(ErrorCode::InvalidInput, "window length does not match the configured lookback");
    }

    Rng rng(cfg.seed);
    LstmFit fit;
    fit.config = cfg;
    fit.weights = LstmWeights::initialize(windows.feature_dim, cfg.cells, cfg.layers, rng);
    AdamState adam = AdamState::like(fit.weights);

    const std::size_t n = windows.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto all_steps = gather_steps(windows, order);
    const std::size_t batch_size = std::min(cfg.batch_size, n);

    std::size_t step = 0;
    fit.loss_curve.reserve(cfg.epochs);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto diverged = [&] {
            return Error(ErrorCode::Divergence,
                         "LSTM training diverged at epoch " + std::to_string(epoch));
        };
        rng.shuffle(std::span<std::size_t>(order));
        try {
            for (std::size_t begin = 0; begin < n; begin += batch_size) {
                const std::size_t count = std::min(batch_size, n - begin);
                const std::span<const std::size_t> idx(order.data() + begin, count);
                const auto steps = gather_steps(windows, idx);
                std::optional<DropoutMasks> masks;
                if (cfg.dropout > 0.0) {
                    masks = sample_dropout(cfg.layers, cfg.lookback, cfg.cells, count, cfg.dropout,
                                           rng);
                }
                const auto out = forward_batch(steps, fit.weights, masks ? &*masks : nullptr);
                Eigen::RowVectorXd d_pred(static_cast<Eigen::Index>(count));
                for (std::size_t b = 0; b < count; ++b) {
                    d_pred(static_cast<Eigen::Index>(b)) =
                        2.0 * (out.predictions(static_cast<Eigen::Index>(b)) - windows.targets[idx[b]]) /
                        static_cast<double>(count);
                }
                const auto grads = backward(out.cache, fit.weights, d_pred);
                adam_step(fit.weights, grads, adam, cfg.learning_rate, ++step);
            }
            const double loss = inference_mse(windows, all_steps, fit.weights);
            if (!std::isfinite(loss) || !fit.weights.all_finite()) {
                throw diverged();
            }
            fit.loss_curve.push_back(loss);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Numeric) {
                throw diverged();
            }
            throw;
        }
    }
    return fit;
}

LstmFit train(const StationSeries& series, const LstmConfig& cfg, bool univariate) {
    const StationSeries used = restrict_features(series, univariate);
    const auto windows = make_windows(used.target(), used.exogenous(), cfg.lookback);
    auto fit = train(windows, cfg);
    fit.features.push_back("target");
    for (const auto& [name, _] : used.exogenous()) {
        fit.features.push_back(name);
    }
    return fit;
}

Eigen::MatrixXd context_block(const StationSeries& series, std::size_t lookback, bool univariate) {
    const StationSeries used = restrict_features(series, univariate);
    const std::size_t n = used.target().size();
    if (n < lookback) {
        throw Error(ErrorCode::InsufficientData, "context shorter than the lookback window");
    }
    std::vector<std::vector<double>> channels{used.target().values()};
    for (const auto& [_, s] : used.exogenous()) {
        channels.push_back(s.values());
    }
    Eigen::MatrixXd ctx(static_cast<Eigen::Index>(lookback),
                        static_cast<Eigen::Index>(channels.size()));
    for (std::size_t t = 0; t < lookback; ++t) {
        for (std::size_t f = 0; f < channels.size(); ++f) {
            ctx(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f)) =
                channels[f][n - lookback + t];
        }
    }
    return ctx;
}

std::vector<double> predict_recursive(const LstmFit& fit, const Eigen::MatrixXd& context,
                                      std::size_t horizon) {
    const auto lookback = static_cast<Eigen::Index>(fit.config.lookback);
    if (context.rows() != lookback ||
        static_cast<std::size_t>(context.cols()) != fit.weights.input_dim()) {
        throw Error(ErrorCode::InvalidInput, "context shape does not match the fitted network");
    }
    std::vector<double> out;
    out.reserve(horizon);
    Eigen::MatrixXd ctx = context;
    for (std::size_t h = 0; h < horizon; ++h) {
        const double pred = forward(ctx, fit.weights).prediction;
        out.push_back(pred);
        const Eigen::RowVectorXd last = ctx.row(lookback - 1);
        if (lookback > 1) {
            ctx.topRows(lookback - 1) = ctx.bottomRows(lookback - 1).eval();
        }
        ctx.row(lookback - 1) = last;
        ctx(lookback - 1, 0) = pred;
    }
    return out;
}

std::vector<LstmConfig> LstmGrid::expand(std::uint64_t seed) const {
    std::vector<LstmConfig> out;
    for (auto l : layers) {
        for (auto c : cells) {
            for (auto lr : learning_rates) {
                for (auto e : epochs) {
                    for (auto b : batch_sizes) {
                        out.push_back({l, c, dropout, lookback, lr, e, b, seed});
                    }
                }
            }
        }
    }
    return out;
}

GridResult grid_search(const StationSeries& train_series, std::span<const LstmConfig> grid,
                       std::uint64_t seed, bool univariate) {
    if (grid.empty()) {
        throw Error(ErrorCode::InvalidInput, "grid search needs at least one candidate");
    }
    const std::size_t n = train_series.target().size();
    const std::size_t k = preprocess::split_index(n, 0.8);
    const StationSeries fit_part = train_series.slice(0, k);
    const auto validation = train_series.target().slice(k, n - k).values();

    GridResult result;
    for (auto candidate : grid) {
        candidate.seed = seed;
        GridEntry entry{candidate, std::nullopt, {}};
        try {
            const auto fit = train(fit_part, candidate, univariate);
            const auto ctx = context_block(fit_part, candidate.lookback, univariate);
            const auto pred = predict_recursive(fit, ctx, validation.size());
            const double score = metrics::mse(validation, pred);
            if (std::isfinite(score)) {
                entry.validation_mse = score;
            } else {
                entry.note = "non-finite validation loss";
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Divergence && e.code() != ErrorCode::Numeric &&
                e.code() != ErrorCode::InsufficientData) {
                throw;
            }
            entry.note = e.what();
        }
        result.table.push_back(std::move(entry));
    }

    const GridEntry* best = nullptr;
    const auto key = [](const GridEntry& e) {
        return std::make_tuple(*e.validation_mse, e.config.layers, e.config.cells,
                               e.config.learning_rate);
    };
    for (const auto& e : result.table) {
        if (e.validation_mse && (best == nullptr || key(e) < key(*best))) {
            best = &e;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::NoViableModel, "every grid candidate failed to train");
    }
    result.best = best->config;
    return result;
}

} // namespace aqcast::lstm
