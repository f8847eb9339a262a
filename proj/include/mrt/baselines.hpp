#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/dataset.hpp"
#include "mrt/features.hpp"

namespace mrt {

// Centered Pearson correlation, clamped to [-1, 1] against rounding.
// Throws when either vector has zero variance; classifying callers treat
// that case as correlation 0.
double pearson(const std::vector<float>& x, const std::vector<float>& y);

// Label of the template with the highest correlation to the candidate; ties
// and degenerate candidates resolve to the lowest class index.
StrokeLabel template_classify(const TemplateSet& templates, const FeatureVector& feature);

void save_templates(const std::string& path, const TemplateSet& templates);
TemplateSet load_templates(const std::string& path);

// One-vs-rest linear scorers trained with hinge loss.
struct SvmModel {
    int dim = 0;
    std::vector<std::vector<float>> weights;  // one weight vector per class
    std::vector<float> biases;
};

struct SvmConfig {
    int epochs = 20;
    // lr <= 0 selects a step size of 1 / (1 + mean squared feature norm),
    // which keeps updates stable for raw spectra with large norms.
    double lr = 0.0;
    double reg = 1e-4;  // L2 coefficient
    std::uint64_t seed = 0;
};

// Per-class binary hinge-loss subgradient descent with L2 regularization and
// seeded per-epoch shuffling. Requires every class present.
SvmModel svm_train(const LabeledDataset& train_set, const SvmConfig& config = {});

std::vector<double> svm_scores(const SvmModel& model, const FeatureVector& feature);
StrokeLabel svm_predict(const SvmModel& model, const FeatureVector& feature);

void save_svm(const std::string& path, const SvmModel& model);
SvmModel load_svm(const std::string& path);

}  // namespace mrt
