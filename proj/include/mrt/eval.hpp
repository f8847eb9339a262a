#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/augment.hpp"
#include "mrt/dataset.hpp"
#include "mrt/nn.hpp"

namespace mrt {

struct OnsetMatchReport {
    std::size_t matched = 0;
    std::size_t false_positives = 0;
    std::size_t missed = 0;
    double accuracy = 0.0;          // matched / truth count (0 when truth empty)
    double mean_abs_offset = 0.0;   // seconds, over matched pairs
};

// Greedy one-to-one matching in truth order: each truth onset takes the
// nearest unconsumed detection with |difference| strictly below tolerance.
OnsetMatchReport match_onsets(const std::vector<double>& detected,
                              const std::vector<double>& truth,
                              double tolerance = 0.015);

struct ConfusionMatrix {
    // cells[truth][predicted]
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> cells{};
    std::size_t total() const;
};

ConfusionMatrix confusion(const std::vector<StrokeLabel>& preds,
                          const std::vector<StrokeLabel>& truths);

struct ClassMetrics {
    std::array<double, kNumClasses> precision{};
    std::array<double, kNumClasses> recall{};
    std::array<double, kNumClasses> f1{};
    // A class that never occurs as truth or prediction gets 0 metrics and
    // this flag instead of a division by zero.
    std::array<bool, kNumClasses> degenerate{};
    double accuracy = 0.0;
};

ClassMetrics metrics(const ConfusionMatrix& cm);

std::string confusion_to_csv(const ConfusionMatrix& cm);
std::string metrics_to_text(const ClassMetrics& m);

// ---------------------------------------------------------------------------
// Pitch-shift invariance experiment grid

struct GridRow {
    std::vector<int> train_shifts;  // augmentation shifts added to the unshifted data
    std::vector<int> test_shifts;   // shifts the test set is rendered at
};

struct GridRowResult {
    GridRow row;
    double seen_accuracy = 0.0;      // test strokes from recordings seen in training
    double heldout_accuracy = 0.0;   // NaN when every recording was needed for training
    std::optional<double> reference_accuracy;  // attached to default grid rows
};

struct GridConfig {
    TrainConfig train;
    std::vector<int> layer_dims{1200, 256, 64, 6};
    int decimate_factor = 10;      // 12,000 spectrum bins -> layer_dims[0]
    double train_fraction = 0.8;   // train/val split inside the training pool
    // Number of recordings (from the end of the list) excluded from training
    // and scored separately; 0 disables the held-out column.
    std::size_t heldout_recordings = 1;
};

// Rows covering the standard augmentation-vs-shift sweep; reference
// accuracies for these exact rows are attached in run results.
std::vector<GridRow> default_grid();

// For each row: train on the seen recordings at shifts {0} + train_shifts,
// then score the test_shifts renditions of seen and held-out recordings.
std::vector<GridRowResult> run_invariance_grid(const std::vector<Recording>& recordings,
                                               const std::vector<GridRow>& grid,
                                               const GridConfig& config);

std::string grid_to_csv(const std::vector<GridRowResult>& results);

// "-1,+1" style list for reports; empty list renders as "none".
std::string format_shifts(const std::vector<int>& shifts);

}  // namespace mrt
