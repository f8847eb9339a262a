#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mrt/eval.hpp"
#include "mrt/rng.hpp"
#include "mrt/synth.hpp"

using namespace mrt;

namespace {

// One tiny synthetic recording per call: one stroke of every class.
Recording tiny_recording(std::uint64_t seed) {
    SynthCorpusSpec spec;
    spec.tonic_hz = 160.0;
    spec.strokes_per_class = 1;
    spec.min_gap = 0.20;
    spec.max_gap = 0.30;
    spec.seed = seed;
    auto [clip, annotations] = generate_corpus(spec, default_recipes());
    return Recording{std::move(clip), std::move(annotations), "tiny"};
}

}  // namespace

// ---------------------------------------------------------------------------
// Onset matching

TEST_CASE("identical onset lists match perfectly") {
    const std::vector<double> t = {0.5, 1.0, 1.5, 2.25};
    const OnsetMatchReport r = match_onsets(t, t);
    CHECK(r.matched == 4);
    CHECK(r.false_positives == 0);
    CHECK(r.missed == 0);
    CHECK(r.accuracy == 1.0);
    CHECK(r.mean_abs_offset == 0.0);
}

TEST_CASE("a 20 ms offset is outside the default tolerance") {
    const OnsetMatchReport r = match_onsets({1.020}, {1.0});
    CHECK(r.matched == 0);
    CHECK(r.missed == 1);
    CHECK(r.false_positives == 1);
}

TEST_CASE("the tolerance bound is strict") {
    // |0.015 - 0| equals the tolerance exactly: not a match.
    CHECK(match_onsets({0.015}, {0.0}).matched == 0);
    CHECK(match_onsets({0.014}, {0.0}).matched == 1);
}

TEST_CASE("each truth onset takes the nearest unconsumed detection") {
    SUBCASE("two detections near one truth: nearest wins, other is a false positive") {
        const OnsetMatchReport r = match_onsets({0.995, 1.010}, {1.0});
        CHECK(r.matched == 1);
        CHECK(r.false_positives == 1);
        CHECK(r.mean_abs_offset == doctest::Approx(0.005).epsilon(1e-9));
    }
    SUBCASE("closer-but-later detection preferred over earlier one") {
        const OnsetMatchReport r = match_onsets({0.990, 1.001}, {1.0});
        CHECK(r.matched == 1);
        CHECK(r.mean_abs_offset == doctest::Approx(0.001).epsilon(1e-9));
    }
    SUBCASE("matching is one-to-one in truth order") {
        // The single detection goes to the first truth onset; the second misses.
        const OnsetMatchReport r = match_onsets({1.005}, {1.0, 1.01});
        CHECK(r.matched == 1);
        CHECK(r.missed == 1);
        CHECK(r.false_positives == 0);
    }
}

TEST_CASE("matching counts are conserved on random inputs") {
    rng::Engine engine(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> detected, truth;
        double t = 0.0;
        for (int i = 0; i < 30; ++i) {
            t += engine.uniform(0.05, 0.3);
            truth.push_back(t);
            if (engine.uniform() < 0.8) {
                detected.push_back(t + engine.uniform(-0.02, 0.02));
            }
            if (engine.uniform() < 0.2) {
                detected.push_back(t + engine.uniform(0.03, 0.05));
            }
        }
        std::sort(detected.begin(), detected.end());
        const OnsetMatchReport r = match_onsets(detected, truth);
        CHECK(r.matched + r.missed == truth.size());
        CHECK(r.matched + r.false_positives == detected.size());
        CHECK(r.accuracy == doctest::Approx(static_cast<double>(r.matched) /
                                            static_cast<double>(truth.size())));
    }
}

TEST_CASE("a constant small shift matches everything and reports the shift") {
    std::vector<double> truth, detected;
    for (int i = 0; i < 10; ++i) {
        truth.push_back(0.3 * i);
        detected.push_back(0.3 * i + 0.005);
    }
    const OnsetMatchReport r = match_onsets(detected, truth);
    CHECK(r.matched == 10);
    CHECK(r.mean_abs_offset == doctest::Approx(0.005).epsilon(1e-9));
}

TEST_CASE("match_onsets rejects unsorted input and handles empty truth") {
    CHECK_THROWS_AS(match_onsets({2.0, 1.0}, {1.0}), std::runtime_error);
    CHECK_THROWS_AS(match_onsets({1.0}, {2.0, 1.0}), std::runtime_error);
    const OnsetMatchReport r = match_onsets({1.0, 2.0}, {});
    CHECK(r.accuracy == 0.0);
    CHECK(r.false_positives == 2);
}

// ---------------------------------------------------------------------------
// Confusion matrix and metrics

TEST_CASE("confusion cells are indexed [truth][predicted]") {
    using L = StrokeLabel;
    const std::vector<L> truths = {L::lo, L::lo, L::lo, L::hi, L::hi, L::hi};
    const std::vector<L> preds = {L::lo, L::lo, L::hi, L::hi, L::hi, L::hi};
    const ConfusionMatrix cm = confusion(preds, truths);
    CHECK(cm.cells[0][0] == 2);
    CHECK(cm.cells[0][1] == 1);
    CHECK(cm.cells[1][1] == 3);
    CHECK(cm.cells[1][0] == 0);
    CHECK(cm.total() == 6);
    CHECK_THROWS_AS(confusion({L::lo}, {L::lo, L::hi}), std::runtime_error);
}

TEST_CASE("hand-computed two-class metrics to full precision") {
    using L = StrokeLabel;
    const std::vector<L> truths = {L::lo, L::lo, L::lo, L::hi, L::hi, L::hi};
    const std::vector<L> preds = {L::lo, L::lo, L::hi, L::hi, L::hi, L::hi};
    const ClassMetrics m = metrics(confusion(preds, truths));
    CHECK(std::abs(m.precision[0] - 1.0) < 1e-12);
    CHECK(std::abs(m.precision[1] - 0.75) < 1e-12);
    CHECK(std::abs(m.recall[0] - 2.0 / 3.0) < 1e-12);
    CHECK(std::abs(m.recall[1] - 1.0) < 1e-12);
    CHECK(std::abs(m.f1[0] - 0.8) < 1e-12);
    CHECK(std::abs(m.f1[1] - 6.0 / 7.0) < 1e-12);
    CHECK(std::abs(m.accuracy - 5.0 / 6.0) < 1e-12);
    CHECK_FALSE(m.degenerate[0]);
    CHECK_FALSE(m.degenerate[1]);
    for (std::size_t c = 2; c < kNumClasses; ++c) {
        CHECK(m.degenerate[c]);
        CHECK(m.precision[c] == 0.0);
        CHECK(m.recall[c] == 0.0);
        CHECK(m.f1[c] == 0.0);
    }
}

TEST_CASE("a perfectly diagonal matrix scores one everywhere it counts") {
    ConfusionMatrix cm;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        cm.cells[c][c] = 5;
    }
    const ClassMetrics m = metrics(cm);
    CHECK(m.accuracy == 1.0);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        CHECK(m.precision[c] == 1.0);
        CHECK(m.recall[c] == 1.0);
        CHECK(m.f1[c] == 1.0);
        CHECK_FALSE(m.degenerate[c]);
    }
}

TEST_CASE("metrics accuracy equals the mean of elementwise equality, exactly") {
    rng::Engine engine(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<StrokeLabel> preds, truths;
        std::size_t agree = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto p = static_cast<StrokeLabel>(engine.index(kNumClasses));
            const auto t = static_cast<StrokeLabel>(engine.index(kNumClasses));
            preds.push_back(p);
            truths.push_back(t);
            agree += p == t ? 1 : 0;
        }
        const double direct = static_cast<double>(agree) / 1000.0;
        CHECK(metrics(confusion(preds, truths)).accuracy == direct);
    }
}

TEST_CASE("metrics on an empty matrix is an error") {
    CHECK_THROWS_AS(metrics(ConfusionMatrix{}), std::runtime_error);
}

TEST_CASE("confusion CSV layout") {
    using L = StrokeLabel;
    const ConfusionMatrix cm = confusion({L::hi}, {L::lo});
    const std::string csv = confusion_to_csv(cm);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "truth\\pred,lo,hi,mid1,mid2,mid3,composite");
    std::getline(in, line);
    CHECK(line == "lo,0,1,0,0,0,0");
    int rows = 1;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == 6);
}

TEST_CASE("metrics text report carries the accuracy line and absent markers") {
    using L = StrokeLabel;
    const ClassMetrics m = metrics(confusion({L::lo}, {L::lo}));
    const std::string text = metrics_to_text(m);
    CHECK(text.find("accuracy") != std::string::npos);
    CHECK(text.find("(absent)") != std::string::npos);  // five classes unused
    CHECK(text.find("lo") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Invariance grid

TEST_CASE("the standard grid has five rows with the expected shifts") {
    const auto grid = default_grid();
    REQUIRE(grid.size() == 5);
    CHECK(grid[0].train_shifts.empty());
    CHECK(grid[0].test_shifts == std::vector<int>{-1, 1});
    CHECK(grid[1].train_shifts.empty());
    CHECK(grid[1].test_shifts == std::vector<int>{-2, 2});
    CHECK(grid[2].train_shifts == std::vector<int>{-1, 1});
    CHECK(grid[2].test_shifts == std::vector<int>{-2, 2});
    CHECK(grid[3].train_shifts == std::vector<int>{-1, 1});
    CHECK(grid[3].test_shifts == std::vector<int>{-3, 3});
    CHECK(grid[4].train_shifts == std::vector<int>{-2, -1, 1, 2});
    CHECK(grid[4].test_shifts == std::vector<int>{-3, 3});
}

TEST_CASE("shift lists render compactly") {
    CHECK(format_shifts({}) == "none");
    CHECK(format_shifts({-1, 1}) == "-1 +1");
    CHECK(format_shifts({-2, -1, 1, 2}) == "-2 -1 +1 +2");
    CHECK(format_shifts({3}) == "+3");
}

TEST_CASE("grid CSV renders numbers, missing held-out data, and references") {
    std::vector<GridRowResult> results(2);
    results[0].row = {{}, {-1, 1}};
    results[0].seen_accuracy = 0.875;
    results[0].heldout_accuracy = 0.75;
    results[0].reference_accuracy = 0.71;
    results[1].row = {{2}, {3}};
    results[1].seen_accuracy = 0.5;
    results[1].heldout_accuracy = std::numeric_limits<double>::quiet_NaN();

    const std::string csv = grid_to_csv(results);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line ==
          "train_shifts,test_shifts,seen_accuracy,heldout_accuracy,reference_accuracy");
    std::getline(in, line);
    CHECK(line == "none,-1 +1,0.8750,0.7500,0.71");
    std::getline(in, line);
    CHECK(line == "+2,+3,0.5000,n/a,");
}

TEST_CASE("grid validation") {
    const std::vector<Recording> recs = {tiny_recording(1), tiny_recording(2)};
    GridConfig config;
    CHECK_THROWS_WITH_AS(run_invariance_grid(recs, {}, config), "empty grid",
                         std::runtime_error);
    CHECK_THROWS_AS(run_invariance_grid(recs, {{{4}, {1}}}, config), std::runtime_error);
    CHECK_THROWS_AS(run_invariance_grid(recs, {{{1}, {-4}}}, config), std::runtime_error);
    CHECK_THROWS_AS(run_invariance_grid({}, default_grid(), config), std::runtime_error);
}

TEST_CASE("a small grid run reports accuracies and attaches references") {
    const std::vector<Recording> recs = {tiny_recording(3), tiny_recording(4)};
    GridConfig config;
    config.train.epochs = 2;
    config.train.batch_size = 4;
    config.train.seed = 5;
    config.layer_dims = {1200, 16, 6};

    SUBCASE("default-grid row carries its reference accuracy") {
        const auto results = run_invariance_grid(recs, {{{}, {-1, 1}}}, config);
        REQUIRE(results.size() == 1);
        CHECK(results[0].seen_accuracy >= 0.0);
        CHECK(results[0].seen_accuracy <= 1.0);
        CHECK_FALSE(std::isnan(results[0].heldout_accuracy));  // one recording held out
        REQUIRE(results[0].reference_accuracy.has_value());
        CHECK(*results[0].reference_accuracy == doctest::Approx(0.71));
    }
    SUBCASE("non-standard row has no reference and zero held-out gives NaN") {
        GridConfig no_holdout = config;
        no_holdout.heldout_recordings = 0;
        const auto results = run_invariance_grid(recs, {{{1}, {1}}}, no_holdout);
        REQUIRE(results.size() == 1);
        CHECK_FALSE(results[0].reference_accuracy.has_value());
        CHECK(std::isnan(results[0].heldout_accuracy));
    }
}

TEST_CASE("every standard row resolves its reference value") {
    const std::vector<Recording> recs = {tiny_recording(6), tiny_recording(7)};
    GridConfig config;
    config.train.epochs = 1;
    config.train.batch_size = 4;
    config.layer_dims = {1200, 8, 6};
    const auto results = run_invariance_grid(recs, default_grid(), config);
    REQUIRE(results.size() == 5);
    const double expected[] = {0.71, 0.58, 0.68, 0.52, 0.72};
    for (std::size_t i = 0; i < 5; ++i) {
        REQUIRE(results[i].reference_accuracy.has_value());
        CHECK(*results[i].reference_accuracy == doctest::Approx(expected[i]));
    }
}
