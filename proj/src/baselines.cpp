#include "mrt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mrt/rng.hpp"

namespace mrt {

double pearson(const std::vector<float>& x, const std::vector<float>& y) {
    if (x.size() != y.size()) {
        throw std::runtime_error("pearson: length mismatch");
    }
    if (x.size() < 2) {
        throw std::runtime_error("pearson: need at least 2 elements");
    }
    const auto n = static_cast<double>(x.size());
    double sum_x = 0.0, sum_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum_x += x[i];
        sum_y += y[i];
    }
    const double mean_x = sum_x / n;
    const double mean_y = sum_y / n;

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::runtime_error("pearson: constant input has no defined correlation");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

StrokeLabel template_classify(const TemplateSet& templates, const FeatureVector& feature) {
    if (templates.templates.size() != kNumClasses) {
        throw std::runtime_error("template_classify: incomplete template set");
    }
    std::size_t best = 0;
    double best_corr = -2.0;  // below any valid correlation
    for (std::size_t c = 0; c < templates.templates.size(); ++c) {
        double corr;
        try {
            corr = pearson(templates.templates[c], feature);
        } catch (const std::runtime_error&) {
            corr = 0.0;  // constant candidate or template: no linear relation
        }
        if (corr > best_corr) {
            best_corr = corr;
            best = c;
        }
    }
    return static_cast<StrokeLabel>(best);
}

namespace {

constexpr char kTemplateMagic[4] = {'M', 'R', 'T', 'P'};
constexpr char kSvmMagic[4] = {'M', 'R', 'S', 'V'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw std::runtime_error("truncated file: " + path);
    }
    return value;
}

void check_magic(std::ifstream& in, const char expected[4], const std::string& path) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, expected, 4) != 0) {
        throw std::runtime_error("wrong file type: " + path);
    }
    const auto version = read_raw<std::uint32_t>(in, path);
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported file version " + std::to_string(version) +
                                 ": " + path);
    }
}

}  // namespace

void save_templates(const std::string& path, const TemplateSet& templates) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write template file: " + path);
    }
    out.write(kTemplateMagic, 4);
    write_raw(out, kFormatVersion);
    write_raw(out, static_cast<std::uint32_t>(templates.templates.size()));
    const std::uint32_t dim =
        templates.templates.empty() ? 0
                                    : static_cast<std::uint32_t>(templates.templates[0].size());
    write_raw(out, dim);
    for (std::size_t c = 0; c < templates.templates.size(); ++c) {
        write_raw(out, static_cast<std::uint32_t>(templates.counts[c]));
        out.write(reinterpret_cast<const char*>(templates.templates[c].data()),
                  static_cast<std::streamsize>(sizeof(float) * dim));
    }
    if (!out) {
        throw std::runtime_error("failed writing template file: " + path);
    }
}

TemplateSet load_templates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open template file: " + path);
    }
    check_magic(in, kTemplateMagic, path);
    const auto n = read_raw<std::uint32_t>(in, path);
    const auto dim = read_raw<std::uint32_t>(in, path);
    TemplateSet set;
    for (std::uint32_t c = 0; c < n; ++c) {
        set.counts.push_back(read_raw<std::uint32_t>(in, path));
        FeatureVector t(dim);
        if (!in.read(reinterpret_cast<char*>(t.data()),
                     static_cast<std::streamsize>(sizeof(float) * dim))) {
            throw std::runtime_error("truncated file: " + path);
        }
        set.templates.push_back(std::move(t));
    }
    return set;
}

SvmModel svm_train(const LabeledDataset& train_set, const SvmConfig& config) {
    if (train_set.size() == 0) {
        throw std::runtime_error("svm_train: empty training set");
    }
    const std::vector<std::size_t> counts = train_set.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw std::runtime_error("svm_train: class " +
                                     std::string(to_string(static_cast<StrokeLabel>(c))) +
                                     " has zero examples");
        }
    }

    const auto dim = train_set.features[0].size();
    double lr = config.lr;
    if (lr <= 0.0) {
        double mean_sq_norm = 0.0;
        for (const FeatureVector& f : train_set.features) {
            double norm = 0.0;
            for (float v : f) {
                norm += static_cast<double>(v) * v;
            }
            mean_sq_norm += norm;
        }
        mean_sq_norm /= static_cast<double>(train_set.size());
        lr = 1.0 / (1.0 + mean_sq_norm);
    }

    SvmModel model;
    model.dim = static_cast<int>(dim);
    model.weights.assign(kNumClasses, std::vector<float>(dim, 0.0f));
    model.biases.assign(kNumClasses, 0.0f);

    std::vector<std::vector<double>> w(kNumClasses, std::vector<double>(dim, 0.0));
    std::vector<double> b(kNumClasses, 0.0);

    rng::Engine engine(config.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        engine.shuffle(order);
        for (std::size_t i : order) {
            const FeatureVector& x = train_set.features[i];
            const auto truth = static_cast<std::size_t>(train_set.labels[i]);
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const double y = c == truth ? 1.0 : -1.0;
                double score = b[c];
                for (std::size_t j = 0; j < dim; ++j) {
                    score += w[c][j] * x[j];
                }
                // Hinge subgradient: shrink toward 0 every step (L2), push
                // along y*x only when the margin is violated.
                const double decay = 1.0 - lr * config.reg;
                if (y * score < 1.0) {
                    for (std::size_t j = 0; j < dim; ++j) {
                        w[c][j] = w[c][j] * decay + lr * y * x[j];
                    }
                    b[c] += lr * y;
                } else {
                    for (std::size_t j = 0; j < dim; ++j) {
                        w[c][j] *= decay;
                    }
                }
            }
        }
    }

    for (std::size_t c = 0; c < kNumClasses; ++c) {
        for (std::size_t j = 0; j < dim; ++j) {
            model.weights[c][j] = static_cast<float>(w[c][j]);
        }
        model.biases[c] = static_cast<float>(b[c]);
    }
    return model;
}

std::vector<double> svm_scores(const SvmModel& model, const FeatureVector& feature) {
    if (static_cast<int>(feature.size()) != model.dim) {
        throw std::runtime_error("svm_scores: feature dim " + std::to_string(feature.size()) +
                                 " does not match model dim " + std::to_string(model.dim));
    }
    std::vector<double> scores(model.weights.size());
    for (std::size_t c = 0; c < model.weights.size(); ++c) {
        double s = model.biases[c];
        for (std::size_t j = 0; j < feature.size(); ++j) {
            s += static_cast<double>(model.weights[c][j]) * feature[j];
        }
        scores[c] = s;
    }
    return scores;
}

StrokeLabel svm_predict(const SvmModel& model, const FeatureVector& feature) {
    const std::vector<double> scores = svm_scores(model, feature);
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) {
            best = c;
        }
    }
    return static_cast<StrokeLabel>(best);
}

void save_svm(const std::string& path, const SvmModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write model file: " + path);
    }
    out.write(kSvmMagic, 4);
    write_raw(out, kFormatVersion);
    write_raw(out, static_cast<std::uint32_t>(model.weights.size()));
    write_raw(out, static_cast<std::uint32_t>(model.dim));
    for (std::size_t c = 0; c < model.weights.size(); ++c) {
        out.write(reinterpret_cast<const char*>(model.weights[c].data()),
                  static_cast<std::streamsize>(sizeof(float) * model.weights[c].size()));
        write_raw(out, model.biases[c]);
    }
    if (!out) {
        throw std::runtime_error("failed writing model file: " + path);
    }
}

SvmModel load_svm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    check_magic(in, kSvmMagic, path);
    const auto n = read_raw<std::uint32_t>(in, path);
    const auto dim = read_raw<std::uint32_t>(in, path);
    SvmModel model;
    model.dim = static_cast<int>(dim);
    for (std::uint32_t c = 0; c < n; ++c) {
        std::vector<float> w(dim);
        if (!in.read(reinterpret_cast<char*>(w.data()),
                     static_cast<std::streamsize>(sizeof(float) * dim))) {
            throw std::runtime_error("truncated file: " + path);
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(read_raw<float>(in, path));
    }
    return model;
}

}  // namespace mrt
