#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/dataset.hpp"
#include "mrt/rng.hpp"

namespace mrt {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Activation : std::uint8_t { relu = 0, softmax = 1 };

struct LayerSpec {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::relu;
    double dropout_after = 0.0;  // 0 = no dropout after this layer
};

// in*out weights plus out biases.
long long param_count(const LayerSpec& spec);
long long param_count(const std::vector<LayerSpec>& arch);

// The reference stack: 12000 -> 15000 -> 9000 -> 4500 -> 1500 -> 450 -> 100
// -> 6, ReLU throughout, softmax output, dropout 0.25 after the first four
// hidden layers.
std::vector<LayerSpec> default_architecture(double dropout = 0.25);

// Build a stack from a dim chain {in, h1, ..., out}: ReLU hidden layers,
// softmax output, dropout after the first max(0, n_hidden - 2) hidden layers.
std::vector<LayerSpec> make_architecture(const std::vector<int>& dims,
                                         double dropout = 0.25);

// Throws unless consecutive dims chain, softmax appears only on the final
// layer, and no dropout follows the final layer.
void validate_architecture(const std::vector<LayerSpec>& arch);

template <typename Scalar>
struct NetworkT {
    std::vector<LayerSpec> arch;
    std::vector<MatrixX<Scalar>> weights;  // out_dim x in_dim per layer
    std::vector<VectorX<Scalar>> biases;   // out_dim per layer

    int input_dim() const { return arch.empty() ? 0 : arch.front().in_dim; }
    int output_dim() const { return arch.empty() ? 0 : arch.back().out_dim; }
};

using Network = NetworkT<float>;

// Everything backward() needs from the matching forward() call.
template <typename Scalar>
struct ForwardCache {
    MatrixX<Scalar> input;
    std::vector<MatrixX<Scalar>> pre;    // affine outputs per layer
    std::vector<MatrixX<Scalar>> post;   // after activation and dropout
    std::vector<MatrixX<Scalar>> masks;  // dropout masks (scaled), empty if none
    bool training = false;
};

template <typename Scalar>
struct Gradients {
    std::vector<MatrixX<Scalar>> weights;
    std::vector<VectorX<Scalar>> biases;
};

template <typename Scalar>
struct AdamState {
    std::vector<MatrixX<Scalar>> m_weights, v_weights;
    std::vector<VectorX<Scalar>> m_biases, v_biases;
    long long t = 0;
};

struct TrainConfig {
    int epochs = 25;
    double learning_rate = 0.0002;
    int batch_size = 32;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int patience = 5;                   // epochs without val-accuracy improvement
    std::vector<double> class_weights;  // empty = unweighted loss
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss, train_acc, val_loss, val_acc;
    int best_epoch = 0;  // 0-based index of the epoch whose weights were kept

    std::string to_csv() const;  // epoch,train_loss,train_acc,val_loss,val_acc
};

// ---------------------------------------------------------------------------
// Initialization

template <typename Scalar>
NetworkT<Scalar> init_network(const std::vector<LayerSpec>& arch, std::uint64_t seed) {
    validate_architecture(arch);
    NetworkT<Scalar> net;
    net.arch = arch;
    rng::Engine engine(seed);
    for (const LayerSpec& layer : arch) {
        // He-normal suits the ReLU stack: std = sqrt(2 / fan_in).
        const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in_dim));
        MatrixX<Scalar> w(layer.out_dim, layer.in_dim);
        for (int r = 0; r < layer.out_dim; ++r) {
            for (int c = 0; c < layer.in_dim; ++c) {
                w(r, c) = static_cast<Scalar>(engine.normal() * stddev);
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(VectorX<Scalar>::Zero(layer.out_dim));
    }
    return net;
}

// ---------------------------------------------------------------------------
// Forward

template <typename Scalar>
MatrixX<Scalar> softmax_rows(const MatrixX<Scalar>& logits) {
    MatrixX<Scalar> p = logits;
    const VectorX<Scalar> row_max = p.rowwise().maxCoeff();
    p.colwise() -= row_max;
    p = p.array().exp();
    const VectorX<Scalar> row_sum = p.rowwise().sum();
    p.array().colwise() /= row_sum.array();
    return p;
}

// Returns class probabilities, one row per batch row. In training mode,
// inverted dropout draws a fresh mask from `engine` (entries 0 or 1/(1-p)),
// so evaluation needs no rescaling. Pass `cache` to enable backward().
template <typename Scalar>
MatrixX<Scalar> forward(const NetworkT<Scalar>& net, const MatrixX<Scalar>& batch,
                        bool training = false, rng::Engine* engine = nullptr,
                        ForwardCache<Scalar>* cache = nullptr) {
    if (batch.cols() != net.input_dim()) {
        throw std::runtime_error("forward: batch has " + std::to_string(batch.cols()) +
                                 " columns, network expects " +
                                 std::to_string(net.input_dim()));
    }
    if (!batch.allFinite()) {
        throw std::runtime_error("forward: non-finite input");
    }
    if (cache != nullptr) {
        cache->input = batch;
        cache->pre.clear();
        cache->post.clear();
        cache->masks.assign(net.arch.size(), MatrixX<Scalar>());
        cache->training = training;
    }

    MatrixX<Scalar> a = batch;
    for (std::size_t l = 0; l < net.arch.size(); ++l) {
        const LayerSpec& spec = net.arch[l];
        MatrixX<Scalar> z = a * net.weights[l].transpose();
        z.rowwise() += net.biases[l].transpose();

        MatrixX<Scalar> out;
        if (spec.activation == Activation::relu) {
            out = z.cwiseMax(Scalar(0));
        } else {
            out = softmax_rows(z);
        }

        if (training && spec.dropout_after > 0.0) {
            if (engine == nullptr) {
                throw std::runtime_error("forward: training with dropout needs an engine");
            }
            const double keep = 1.0 - spec.dropout_after;
            const auto scale = static_cast<Scalar>(1.0 / keep);
            MatrixX<Scalar> mask(out.rows(), out.cols());
            for (Eigen::Index r = 0; r < mask.rows(); ++r) {
                for (Eigen::Index c = 0; c < mask.cols(); ++c) {
                    mask(r, c) = engine->uniform() < keep ? scale : Scalar(0);
                }
            }
            out = out.cwiseProduct(mask);
            if (cache != nullptr) {
                cache->masks[l] = std::move(mask);
            }
        }

        if (cache != nullptr) {
            cache->pre.push_back(std::move(z));
            cache->post.push_back(out);
        }
        a = std::move(out);
    }
    return a;
}

template <typename Scalar>
MatrixX<Scalar> forward(const NetworkT<Scalar>& net, const MatrixX<Scalar>& batch,
                        bool training, std::uint64_t seed,
                        ForwardCache<Scalar>* cache = nullptr) {
    rng::Engine engine(seed);
    return forward(net, batch, training, &engine, cache);
}

// ---------------------------------------------------------------------------
// Loss

// Mean over the batch of w[target] * (-log p[target]), with probabilities
// clamped to >= 1e-12 before the log. Empty weights = all-ones.
template <typename Scalar>
double cross_entropy(const MatrixX<Scalar>& probs, const std::vector<int>& targets,
                     const std::vector<double>& class_weights = {}) {
    if (static_cast<std::size_t>(probs.rows()) != targets.size()) {
        throw std::runtime_error("cross_entropy: batch size mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const int y = targets[i];
        if (y < 0 || y >= probs.cols()) {
            throw std::runtime_error("cross_entropy: target index " + std::to_string(y) +
                                     " out of range");
        }
        const double p =
            std::max(static_cast<double>(probs(static_cast<Eigen::Index>(i), y)), 1e-12);
        const double w = class_weights.empty() ? 1.0 : class_weights.at(y);
        total += w * -std::log(p);
    }
    return total / static_cast<double>(targets.size());
}

template <typename Scalar>
double batch_accuracy(const MatrixX<Scalar>& probs, const std::vector<int>& targets) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c) {
            if (probs(static_cast<Eigen::Index>(i), c) >
                probs(static_cast<Eigen::Index>(i), best)) {
                best = c;  // strict > keeps the lowest index on ties
            }
        }
        if (best == targets[i]) {
            ++correct;
        }
    }
    return targets.empty() ? 0.0
                           : static_cast<double>(correct) / static_cast<double>(targets.size());
}

// ---------------------------------------------------------------------------
// Backward

// Exact gradients of the (optionally class-weighted) mean cross-entropy with
// respect to every weight and bias. The softmax and the loss are fused, so
// the output layer's local gradient is (p - onehot) * w[target] / batch_size.
template <typename Scalar>
Gradients<Scalar> backward(const NetworkT<Scalar>& net, const ForwardCache<Scalar>& cache,
                           const std::vector<int>& targets,
                           const std::vector<double>& class_weights = {}) {
    const auto n_layers = net.arch.size();
    if (cache.pre.size() != n_layers || cache.post.size() != n_layers ||
        cache.input.cols() != net.input_dim()) {
        throw std::runtime_error("backward: cache does not match network");
    }
    const auto batch = cache.input.rows();
    if (static_cast<std::size_t>(batch) != targets.size()) {
        throw std::runtime_error("backward: cache/target batch size mismatch");
    }
    if (net.arch.back().activation != Activation::softmax) {
        throw std::runtime_error("backward: final layer must be softmax");
    }

    Gradients<Scalar> grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);

    // d(loss)/d(z_last) for the fused softmax + cross-entropy.
    MatrixX<Scalar> dz = cache.post.back();
    for (Eigen::Index i = 0; i < batch; ++i) {
        const int y = targets[static_cast<std::size_t>(i)];
        if (y < 0 || y >= dz.cols()) {
            throw std::runtime_error("backward: target index out of range");
        }
        dz(i, y) -= Scalar(1);
        const double w = class_weights.empty() ? 1.0 : class_weights.at(y);
        dz.row(i) *= static_cast<Scalar>(w / static_cast<double>(batch));
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const MatrixX<Scalar>& below = l == 0 ? cache.input : cache.post[l - 1];
        grads.weights[l] = dz.transpose() * below;
        grads.biases[l] = dz.colwise().sum().transpose();
        if (l == 0) {
            break;
        }
        MatrixX<Scalar> da = dz * net.weights[l];
        if (cache.training && cache.masks[l - 1].size() != 0) {
            da = da.cwiseProduct(cache.masks[l - 1]);
        }
        // ReLU derivative: pass where the pre-activation was positive.
        dz = da.cwiseProduct(
            (cache.pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Adam

// One bias-corrected Adam update of a single parameter array. t counts from 1.
// Works on any Eigen dense matrix or vector type.
template <typename Mat>
void adam_update(Mat& param, const Mat& grad, Mat& m, Mat& v, double lr, double beta1,
                 double beta2, double epsilon, long long t) {
    using Scalar = typename Mat::Scalar;
    if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
        throw std::runtime_error("adam_update: shape mismatch");
    }
    if (t < 1) {
        throw std::runtime_error("adam_update: step index must be >= 1");
    }
    const auto b1 = static_cast<Scalar>(beta1);
    const auto b2 = static_cast<Scalar>(beta2);
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = (b2 * v.array() + (Scalar(1) - b2) * grad.array().square()).matrix();
    const auto corr1 = static_cast<Scalar>(1.0 - std::pow(beta1, static_cast<double>(t)));
    const auto corr2 = static_cast<Scalar>(1.0 - std::pow(beta2, static_cast<double>(t)));
    param.array() -= static_cast<Scalar>(lr) * (m.array() / corr1) /
                     ((v.array() / corr2).sqrt() + static_cast<Scalar>(epsilon));
}

template <typename Scalar>
AdamState<Scalar> make_adam_state(const NetworkT<Scalar>& net) {
    AdamState<Scalar> state;
    for (std::size_t l = 0; l < net.arch.size(); ++l) {
        state.m_weights.push_back(MatrixX<Scalar>::Zero(net.weights[l].rows(),
                                                        net.weights[l].cols()));
        state.v_weights.push_back(MatrixX<Scalar>::Zero(net.weights[l].rows(),
                                                        net.weights[l].cols()));
        state.m_biases.push_back(VectorX<Scalar>::Zero(net.biases[l].size()));
        state.v_biases.push_back(VectorX<Scalar>::Zero(net.biases[l].size()));
    }
    return state;
}

template <typename Scalar>
void adam_step(NetworkT<Scalar>& net, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, const TrainConfig& config) {
    ++state.t;
    for (std::size_t l = 0; l < net.arch.size(); ++l) {
        adam_update(net.weights[l], grads.weights[l], state.m_weights[l],
                    state.v_weights[l], config.learning_rate, config.beta1, config.beta2,
                    config.epsilon, state.t);
        adam_update(net.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l],
                    config.learning_rate, config.beta1, config.beta2, config.epsilon,
                    state.t);
    }
}

// ---------------------------------------------------------------------------
// Training loop

template <typename Scalar>
MatrixX<Scalar> to_matrix(const std::vector<FeatureVector>& features) {
    if (features.empty()) {
        return MatrixX<Scalar>();
    }
    MatrixX<Scalar> m(static_cast<Eigen::Index>(features.size()),
                      static_cast<Eigen::Index>(features[0].size()));
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != features[0].size()) {
            throw std::runtime_error("to_matrix: ragged feature lengths");
        }
        for (std::size_t j = 0; j < features[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<Scalar>(features[i][j]);
        }
    }
    return m;
}

template <typename Scalar>
std::pair<double, double> evaluate_loss_accuracy(const NetworkT<Scalar>& net,
                                                 const MatrixX<Scalar>& inputs,
                                                 const std::vector<int>& targets,
                                                 Eigen::Index chunk = 256) {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (Eigen::Index start = 0; start < inputs.rows(); start += chunk) {
        const Eigen::Index rows = std::min(chunk, inputs.rows() - start);
        const MatrixX<Scalar> block = inputs.middleRows(start, rows);
        const MatrixX<Scalar> probs = forward(net, block);
        std::vector<int> block_targets(
            targets.begin() + start, targets.begin() + start + rows);
        loss_sum += cross_entropy(probs, block_targets) * static_cast<double>(rows);
        correct += static_cast<std::size_t>(
            std::llround(batch_accuracy(probs, block_targets) * static_cast<double>(rows)));
    }
    const auto n = static_cast<double>(inputs.rows());
    return {loss_sum / n, static_cast<double>(correct) / n};
}

template <typename Scalar>
std::pair<NetworkT<Scalar>, TrainHistory> train(const LabeledDataset& train_set,
                                                const LabeledDataset& val_set,
                                                const std::vector<LayerSpec>& arch,
                                                const TrainConfig& config) {
    if (train_set.size() == 0 || val_set.size() == 0) {
        throw std::runtime_error("train: empty training or validation set");
    }
    if (config.batch_size <= 0 || config.epochs <= 0 || !(config.learning_rate > 0.0) ||
        config.patience < 1) {
        throw std::runtime_error("train: invalid configuration");
    }

    NetworkT<Scalar> net = init_network<Scalar>(arch, config.seed);
    if (static_cast<int>(train_set.features[0].size()) != net.input_dim()) {
        throw std::runtime_error("train: feature dim " +
                                 std::to_string(train_set.features[0].size()) +
                                 " does not match network input " +
                                 std::to_string(net.input_dim()));
    }

    const MatrixX<Scalar> x_train = to_matrix<Scalar>(train_set.features);
    const MatrixX<Scalar> x_val = to_matrix<Scalar>(val_set.features);
    std::vector<int> y_train(train_set.size()), y_val(val_set.size());
    for (std::size_t i = 0; i < train_set.size(); ++i) {
        y_train[i] = static_cast<int>(train_set.labels[i]);
    }
    for (std::size_t i = 0; i < val_set.size(); ++i) {
        y_val[i] = static_cast<int>(val_set.labels[i]);
    }

    rng::Engine shuffle_engine(rng::split(config.seed, 1));
    rng::Engine dropout_engine(rng::split(config.seed, 2));
    AdamState<Scalar> state = make_adam_state(net);

    TrainHistory history;
    double best_val_acc = -1.0;
    int epochs_since_improvement = 0;
    std::vector<MatrixX<Scalar>> best_weights = net.weights;
    std::vector<VectorX<Scalar>> best_biases = net.biases;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_engine.shuffle(order);
        double loss_sum = 0.0;
        double correct_sum = 0.0;
        ForwardCache<Scalar> cache;

        const auto n = static_cast<Eigen::Index>(order.size());
        const auto bs = static_cast<Eigen::Index>(config.batch_size);
        int batch_index = 0;
        for (Eigen::Index start = 0; start < n; start += bs, ++batch_index) {
            const Eigen::Index rows = std::min(bs, n - start);
            MatrixX<Scalar> batch(rows, net.input_dim());
            std::vector<int> targets(static_cast<std::size_t>(rows));
            for (Eigen::Index r = 0; r < rows; ++r) {
                batch.row(r) = x_train.row(static_cast<Eigen::Index>(order[start + r]));
                targets[static_cast<std::size_t>(r)] = y_train[order[start + r]];
            }

            const MatrixX<Scalar> probs =
                forward(net, batch, /*training=*/true, &dropout_engine, &cache);
            const double loss = cross_entropy(probs, targets, config.class_weights);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(batch_index + 1));
            }
            loss_sum += loss * static_cast<double>(rows);
            correct_sum += batch_accuracy(probs, targets) * static_cast<double>(rows);

            const Gradients<Scalar> grads =
                backward(net, cache, targets, config.class_weights);
            adam_step(net, grads, state, config);
        }

        const auto [val_loss, val_acc] = evaluate_loss_accuracy(net, x_val, y_val);
        history.train_loss.push_back(loss_sum / static_cast<double>(n));
        history.train_acc.push_back(correct_sum / static_cast<double>(n));
        history.val_loss.push_back(val_loss);
        history.val_acc.push_back(val_acc);

        if (val_acc > best_val_acc) {
            best_val_acc = val_acc;
            history.best_epoch = epoch;
            best_weights = net.weights;
            best_biases = net.biases;
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
            if (epochs_since_improvement >= config.patience) {
                break;
            }
        }
    }

    net.weights = std::move(best_weights);
    net.biases = std::move(best_biases);
    return {std::move(net), std::move(history)};
}

// ---------------------------------------------------------------------------
// Inference

template <typename Scalar>
std::pair<StrokeLabel, std::vector<double>> predict(const NetworkT<Scalar>& net,
                                                    const FeatureVector& feature) {
    if (static_cast<int>(feature.size()) != net.input_dim()) {
        throw std::runtime_error("predict: feature dim " + std::to_string(feature.size()) +
                                 " does not match network input " +
                                 std::to_string(net.input_dim()));
    }
    MatrixX<Scalar> row(1, net.input_dim());
    for (int j = 0; j < net.input_dim(); ++j) {
        row(0, j) = static_cast<Scalar>(feature[static_cast<std::size_t>(j)]);
    }
    const MatrixX<Scalar> probs = forward(net, row);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
        if (probs(0, c) > probs(0, best)) {
            best = c;
        }
    }
    std::vector<double> p(static_cast<std::size_t>(probs.cols()));
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        p[static_cast<std::size_t>(c)] = static_cast<double>(probs(0, c));
    }
    return {static_cast<StrokeLabel>(best), std::move(p)};
}

// ---------------------------------------------------------------------------
// Persistence (32-bit models)

void save_model(const std::string& path, const Network& net);
Network load_model(const std::string& path);
void save_history(const std::string& path, const TrainHistory& history);

}  // namespace mrt
