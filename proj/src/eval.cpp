#include "mrt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mrt/features.hpp"

namespace mrt {

OnsetMatchReport match_onsets(const std::vector<double>& detected,
                              const std::vector<double>& truth, double tolerance) {
    if (!std::is_sorted(detected.begin(), detected.end()) ||
        !std::is_sorted(truth.begin(), truth.end())) {
        throw std::runtime_error("match_onsets: inputs must be sorted");
    }
    std::vector<bool> consumed(detected.size(), false);
    OnsetMatchReport report;
    double offset_sum = 0.0;
    for (double t : truth) {
        double best_diff = tolerance;
        std::size_t best = detected.size();
        for (std::size_t i = 0; i < detected.size(); ++i) {
            if (consumed[i]) {
                continue;
            }
            const double diff = std::abs(detected[i] - t);
            if (diff < best_diff) {
                best_diff = diff;
                best = i;
            }
        }
        if (best < detected.size()) {
            consumed[best] = true;
            ++report.matched;
            offset_sum += best_diff;
        } else {
            ++report.missed;
        }
    }
    report.false_positives = detected.size() - report.matched;
    report.accuracy = truth.empty()
                          ? 0.0
                          : static_cast<double>(report.matched) /
                                static_cast<double>(truth.size());
    report.mean_abs_offset =
        report.matched == 0 ? 0.0 : offset_sum / static_cast<double>(report.matched);
    return report;
}

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : cells) {
        for (std::size_t cell : row) {
            n += cell;
        }
    }
    return n;
}

ConfusionMatrix confusion(const std::vector<StrokeLabel>& preds,
                          const std::vector<StrokeLabel>& truths) {
    if (preds.size() != truths.size()) {
        throw std::runtime_error("confusion: prediction/truth length mismatch");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        ++cm.cells[static_cast<std::size_t>(truths[i])][static_cast<std::size_t>(preds[i])];
    }
    return cm;
}

ClassMetrics metrics(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) {
        throw std::runtime_error("metrics: empty confusion matrix");
    }
    ClassMetrics m;
    std::size_t trace = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        std::size_t row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < kNumClasses; ++j) {
            row_sum += cm.cells[c][j];
            col_sum += cm.cells[j][c];
        }
        const auto diag = static_cast<double>(cm.cells[c][c]);
        trace += cm.cells[c][c];
        m.precision[c] = col_sum == 0 ? 0.0 : diag / static_cast<double>(col_sum);
        m.recall[c] = row_sum == 0 ? 0.0 : diag / static_cast<double>(row_sum);
        m.degenerate[c] = row_sum == 0 || col_sum == 0;
        const double pr = m.precision[c] + m.recall[c];
        m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
    }
    m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    return m;
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "truth\\pred";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        out << ',' << to_string(static_cast<StrokeLabel>(c));
    }
    out << '\n';
    for (std::size_t t = 0; t < kNumClasses; ++t) {
        out << to_string(static_cast<StrokeLabel>(t));
        for (std::size_t p = 0; p < kNumClasses; ++p) {
            out << ',' << cm.cells[t][p];
        }
        out << '\n';
    }
    return out.str();
}

std::string metrics_to_text(const ClassMetrics& m) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s\n", "class", "precision",
                  "recall", "f1");
    out << line;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        std::snprintf(line, sizeof(line), "%-10s %9.4f %9.4f %9.4f%s\n",
                      to_string(static_cast<StrokeLabel>(c)), m.precision[c], m.recall[c],
                      m.f1[c], m.degenerate[c] ? "  (absent)" : "");
        out << line;
    }
    std::snprintf(line, sizeof(line), "accuracy   %9.4f\n", m.accuracy);
    out << line;
    return out.str();
}

// ---------------------------------------------------------------------------
// Invariance grid

std::vector<GridRow> default_grid() {
    return {
        {{}, {-1, 1}},
        {{}, {-2, 2}},
        {{-1, 1}, {-2, 2}},
        {{-1, 1}, {-3, 3}},
        {{-2, -1, 1, 2}, {-3, 3}},
    };
}

namespace {

// Reference accuracies attached to the default grid rows so reports can show
// a side-by-side comparison column.
std::optional<double> reference_for_row(const GridRow& row) {
    static const std::vector<std::pair<GridRow, double>> kReference = {
        {{{}, {-1, 1}}, 0.71},
        {{{}, {-2, 2}}, 0.58},
        {{{-1, 1}, {-2, 2}}, 0.68},
        {{{-1, 1}, {-3, 3}}, 0.52},
        {{{-2, -1, 1, 2}, {-3, 3}}, 0.72},
    };
    for (const auto& [ref_row, value] : kReference) {
        if (ref_row.train_shifts == row.train_shifts &&
            ref_row.test_shifts == row.test_shifts) {
            return value;
        }
    }
    return std::nullopt;
}

LabeledDataset decimate_features(LabeledDataset dataset, int factor) {
    if (factor <= 1) {
        return dataset;
    }
    for (FeatureVector& f : dataset.features) {
        f = decimate(f, factor);
    }
    return dataset;
}

double dataset_accuracy(const Network& net, const LabeledDataset& dataset) {
    if (dataset.size() == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto [label, probs] = predict(net, dataset.features[i]);
        if (label == dataset.labels[i]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace

std::vector<GridRowResult> run_invariance_grid(const std::vector<Recording>& recordings,
                                               const std::vector<GridRow>& grid,
                                               const GridConfig& config) {
    if (grid.empty()) {
        throw std::runtime_error("empty grid");
    }
    if (recordings.empty()) {
        throw std::runtime_error("run_invariance_grid: no recordings");
    }
    for (const GridRow& row : grid) {
        for (int s : row.train_shifts) {
            if (s < -3 || s > 3) {
                throw std::runtime_error("run_invariance_grid: shifts limited to +/-3");
            }
        }
        for (int s : row.test_shifts) {
            if (s < -3 || s > 3) {
                throw std::runtime_error("run_invariance_grid: shifts limited to +/-3");
            }
        }
    }

    const std::size_t n_heldout = std::min(config.heldout_recordings,
                                           recordings.size() - 1);
    const std::size_t n_seen = recordings.size() - n_heldout;
    const std::vector<Recording> seen(recordings.begin(),
                                      recordings.begin() + static_cast<std::ptrdiff_t>(n_seen));
    const std::vector<Recording> heldout(
        recordings.begin() + static_cast<std::ptrdiff_t>(n_seen), recordings.end());

    std::vector<GridRowResult> results;
    for (const GridRow& row : grid) {
        std::vector<int> train_shifts = row.train_shifts;
        if (std::find(train_shifts.begin(), train_shifts.end(), 0) == train_shifts.end()) {
            train_shifts.insert(train_shifts.begin(), 0);
        }
        std::sort(train_shifts.begin(), train_shifts.end());

        const LabeledDataset train_pool = decimate_features(
            build_augmented_dataset(seen, train_shifts), config.decimate_factor);
        const auto [train_set, val_set] =
            split_train_val(train_pool, config.train_fraction, config.train.seed);

        std::vector<LayerSpec> arch = make_architecture(config.layer_dims);
        auto [net, history] = train<float>(train_set, val_set, arch, config.train);

        const LabeledDataset seen_test = decimate_features(
            build_augmented_dataset(seen, row.test_shifts), config.decimate_factor);

        GridRowResult result;
        result.row = row;
        result.seen_accuracy = dataset_accuracy(net, seen_test);
        if (!heldout.empty()) {
            const LabeledDataset heldout_test = decimate_features(
                build_augmented_dataset(heldout, row.test_shifts), config.decimate_factor);
            result.heldout_accuracy = dataset_accuracy(net, heldout_test);
        } else {
            result.heldout_accuracy = std::numeric_limits<double>::quiet_NaN();
        }
        result.reference_accuracy = reference_for_row(row);
        results.push_back(std::move(result));
    }
    return results;
}

std::string format_shifts(const std::vector<int>& shifts) {
    if (shifts.empty()) {
        return "none";
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        if (i > 0) {
            out << ' ';
        }
        if (shifts[i] > 0) {
            out << '+';
        }
        out << shifts[i];
    }
    return out.str();
}

std::string grid_to_csv(const std::vector<GridRowResult>& results) {
    std::ostringstream out;
    out << "train_shifts,test_shifts,seen_accuracy,heldout_accuracy,reference_accuracy\n";
    char buf[64];
    for (const GridRowResult& r : results) {
        out << format_shifts(r.row.train_shifts) << ',' << format_shifts(r.row.test_shifts);
        std::snprintf(buf, sizeof(buf), ",%.4f", r.seen_accuracy);
        out << buf;
        if (std::isnan(r.heldout_accuracy)) {
            out << ",n/a";
        } else {
            std::snprintf(buf, sizeof(buf), ",%.4f", r.heldout_accuracy);
            out << buf;
        }
        if (r.reference_accuracy) {
            std::snprintf(buf, sizeof(buf), ",%.2f", *r.reference_accuracy);
            out << buf;
        } else {
            out << ",";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace mrt
