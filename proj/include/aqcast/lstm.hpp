#pragma once

#include "aqcast/preprocess.hpp"
#include "aqcast/rng.hpp"
#include "aqcast/series.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aqcast::lstm {

struct LstmConfig {
    std::size_t layers = 1;
    std::size_t cells = 64;
    double dropout = 0.2;
    std::size_t lookback = 12;
    double learning_rate = 1e-3;
    std::size_t epochs = 200;
    std::size_t batch_size = 8;
    std::uint64_t seed = 0;

    void validate() const;

    bool operator==(const LstmConfig&) const = default;
};

/// Gate blocks are stacked row-wise in the order input, forget, output,
/// candidate; each block has `cells` rows.
struct LayerWeights {
    Eigen::MatrixXd input;     // 4H x in
    Eigen::MatrixXd recurrent; // 4H x H
    Eigen::VectorXd bias;      // 4H

    bool operator==(const LayerWeights&) const = default;
};

struct LstmWeights {
    std::vector<LayerWeights> layers;
    Eigen::VectorXd head; // H
    double head_bias = 0.0;

    std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().input.cols()); }
    std::size_t cells() const { return static_cast<std::size_t>(head.size()); }
    std::size_t parameter_count() const;
    bool all_finite() const;

    static LstmWeights zeros(std::size_t input_dim, std::size_t cells, std::size_t layers);
    /// Uniform in +-1/sqrt(cells); biases 0 except the forget gate at 1.
    static LstmWeights initialize(std::size_t input_dim, std::size_t cells, std::size_t layers,
                                  Rng& rng);

    /// Visits every parameter tensor in a fixed order as a flat span.
    template <typename Fn>
    void for_each_tensor(Fn&& fn) {
        visit_tensors(*this, fn);
    }
    template <typename Fn>
    void for_each_tensor(Fn&& fn) const {
        visit_tensors(*this, fn);
    }

    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    bool operator==(const LstmWeights&) const = default;

private:
    template <typename Self, typename Fn>
    static void visit_tensors(Self& self, Fn& fn) {
        const auto span_of = [](auto& t) {
            return std::span(t.data(), static_cast<std::size_t>(t.size()));
        };
        for (auto& l : self.layers) {
            fn(span_of(l.input));
            fn(span_of(l.recurrent));
            fn(span_of(l.bias));
        }
        fn(span_of(self.head));
        fn(std::span(&self.head_bias, 1));
    }
};

/// Samples for next-step regression. Each input block is lookback x feature
/// rows-by-time; the target is the value right after the block.
struct WindowSet {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<double> targets;
    std::size_t feature_dim = 0;

    std::size_t size() const noexcept { return targets.size(); }
};

/// Feature order: target first, then exogenous channels in key order.
WindowSet make_windows(const TimeSeries& target, const std::map<std::string, TimeSeries>& exogenous,
                       std::size_t lookback);

/// Intermediates of one cell step; each column is one sample of a batch.
struct CellCache {
    Eigen::MatrixXd x, h_prev, c_prev;
    Eigen::MatrixXd i, f, o, g;
    Eigen::MatrixXd c, tanh_c;
};

struct CellOutput {
    Eigen::MatrixXd h;
    Eigen::MatrixXd c;
    CellCache cache;
};

CellOutput cell_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                        const Eigen::MatrixXd& c_prev, const LayerWeights& w);

/// Inverted-dropout multipliers: masks[layer][step] is cells x batch, each
/// entry 0 or 1/(1-rate).
using DropoutMasks = std::vector<std::vector<Eigen::MatrixXd>>;

DropoutMasks sample_dropout(std::size_t layers, std::size_t steps, std::size_t cells,
                            std::size_t batch, double rate, Rng& rng);

struct ForwardCache {
    std::vector<std::vector<CellCache>> steps; // [layer][time]
    std::optional<DropoutMasks> masks;
    Eigen::MatrixXd top; // last hidden state of the top layer after dropout
};

struct BatchForward {
    Eigen::RowVectorXd predictions;
    ForwardCache cache;
};

/// `steps[t]` is feature x batch for time t.
BatchForward forward_batch(std::span<const Eigen::MatrixXd> steps, const LstmWeights& w,
                           const DropoutMasks* masks = nullptr);

struct Forward {
    double prediction;
    ForwardCache cache;
};

/// Single window, lookback x feature.
Forward forward(const Eigen::MatrixXd& window, const LstmWeights& w,
                const DropoutMasks* masks = nullptr);

/// Backpropagation through time. `d_pred` holds dLoss/dPrediction per sample.
LstmWeights backward(const ForwardCache& cache, const LstmWeights& w,
                     const Eigen::RowVectorXd& d_pred);
LstmWeights backward(const ForwardCache& cache, const LstmWeights& w, double d_pred);

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One bias-corrected Adam update over flat buffers. `step` counts from 1.
void adam_update(std::span<double> w, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double lr, std::size_t step);

struct AdamState {
    LstmWeights m;
    LstmWeights v;

    static AdamState like(const LstmWeights& w);
};

void adam_step(LstmWeights& w, const LstmWeights& grads, AdamState& state, double lr,
               std::size_t step);

struct LstmFit {
    LstmWeights weights;
    LstmConfig config;
    std::optional<preprocess::ScalerParams> scaler;
    std::vector<double> loss_curve; // training-set MSE after each epoch, inference mode
    std::vector<std::string> features;

    bool operator==(const LstmFit&) const = default;
};

LstmFit train(const WindowSet& windows, const LstmConfig& cfg);

/// Builds windows from the target (and exogenous channels unless
/// `univariate`) and trains.
LstmFit train(const StationSeries& series, const LstmConfig& cfg, bool univariate = false);

/// Last `lookback` rows of [target, exogenous...] as a context block.
Eigen::MatrixXd context_block(const StationSeries& series, std::size_t lookback,
                              bool univariate = false);

/// Closed-loop forecast: each prediction is fed back as the next target
/// input; exogenous channels stay at their last observed value.
std::vector<double> predict_recursive(const LstmFit& fit, const Eigen::MatrixXd& context,
                                      std::size_t horizon);

/// Hyperparameter lattice expanded in declaration order
/// (layers, cells, learning rate, epochs, batch size).
struct LstmGrid {
    std::vector<std::size_t> layers{1, 2};
    std::vector<std::size_t> cells{64, 128};
    std::vector<double> learning_rates{1e-2, 1e-3};
    std::vector<std::size_t> epochs{200};
    std::vector<std::size_t> batch_sizes{8};
    double dropout = 0.2;
    std::size_t lookback = 12;

    std::vector<LstmConfig> expand(std::uint64_t seed) const;
};

struct GridEntry {
    LstmConfig config;
    std::optional<double> validation_mse; // empty if training diverged
    std::string note;
};

struct GridResult {
    LstmConfig best;
    std::vector<GridEntry> table;
};

/// Fits each candidate on the first 80% of `train` and scores a closed-loop
/// forecast over the remaining 20%. Ties go to fewer layers, then fewer
/// cells, then lower learning rate, then declaration order.
GridResult grid_search(const StationSeries& train, std::span<const LstmConfig> grid,
                       std::uint64_t seed, bool univariate = false);

} // namespace aqcast::lstm
