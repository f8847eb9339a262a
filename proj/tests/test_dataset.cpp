#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>

#include "mrt/audio.hpp"
#include "mrt/dataset.hpp"
#include "mrt/synth.hpp"

using namespace mrt;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Small dataset with short feature vectors and a chosen per-class count.
LabeledDataset toy_dataset(const std::vector<std::size_t>& per_class) {
    LabeledDataset d;
    float tag = 0.0f;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (std::size_t i = 0; i < per_class[c]; ++i) {
            d.features.push_back({tag, static_cast<float>(c)});
            d.labels.push_back(static_cast<StrokeLabel>(c));
            tag += 1.0f;
        }
    }
    return d;
}

}  // namespace

TEST_CASE("split 10 items at 0.8 into sizes 8 and 2") {
    const LabeledDataset d = toy_dataset({10, 0, 0, 0, 0, 0});
    const auto [train, val] = split_train_val(d, 0.8, 1);
    CHECK(train.size() == 8);
    CHECK(val.size() == 2);
}

TEST_CASE("split at fraction 1.0 keeps everything in train") {
    const LabeledDataset d = toy_dataset({5, 0, 0, 0, 0, 0});
    const auto [train, val] = split_train_val(d, 1.0, 1);
    CHECK(train.size() == 5);
    CHECK(val.size() == 0);
}

TEST_CASE("same split seed reproduces the identical partition") {
    const LabeledDataset d = toy_dataset({20, 15, 5, 5, 5, 5});
    const auto [t1, v1] = split_train_val(d, 0.8, 42);
    const auto [t2, v2] = split_train_val(d, 0.8, 42);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1.features[i] == t2.features[i]);
        CHECK(t1.labels[i] == t2.labels[i]);
    }
}

TEST_CASE("split is a disjoint partition for any seed") {
    const LabeledDataset d = toy_dataset({13, 7, 3, 2, 4, 6});
    for (std::uint64_t seed : {0ULL, 7ULL, 99ULL}) {
        const auto [train, val] = split_train_val(d, 0.7, seed);
        CHECK(train.size() + val.size() == d.size());
        // The first feature entry is a unique per-item tag.
        std::set<float> seen;
        for (const auto& f : train.features) {
            seen.insert(f[0]);
        }
        for (const auto& f : val.features) {
            CHECK(seen.count(f[0]) == 0);
            seen.insert(f[0]);
        }
        CHECK(seen.size() == d.size());
    }
}

TEST_CASE("split rejects an empty dataset") {
    CHECK_THROWS_AS(split_train_val(LabeledDataset{}, 0.8, 1), std::runtime_error);
}

TEST_CASE("equal class counts give unit weights") {
    const std::vector<double> w = compute_class_weights({10, 10, 10, 10, 10, 10});
    for (double x : w) {
        CHECK(x == doctest::Approx(1.0));
    }
}

TEST_CASE("two-class weight example: counts 100/50 give 0.75 and 1.5") {
    const std::vector<double> w = compute_class_weights({100, 50});
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(0.75));
    CHECK(w[1] == doctest::Approx(1.5));
}

TEST_CASE("class weights preserve total sample mass") {
    const std::vector<std::size_t> counts = {37, 11, 290, 5, 64, 123};
    const std::vector<double> w = compute_class_weights(counts);
    double mass = 0.0;
    std::size_t total = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        mass += w[c] * static_cast<double>(counts[c]);
        total += counts[c];
    }
    CHECK(mass == doctest::Approx(static_cast<double>(total)).epsilon(1e-12));
}

TEST_CASE("a zero class count is rejected") {
    CHECK_THROWS_AS(compute_class_weights({5, 0, 5, 5, 5, 5}), std::runtime_error);
}

TEST_CASE("balance_dataset draws exactly per_class items of every label") {
    const LabeledDataset d = toy_dataset({9, 12, 5, 6, 10, 7});
    const LabeledDataset b = balance_dataset(d, 5, 3);
    CHECK(b.size() == 30);
    const auto counts = b.class_counts();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        CHECK(counts[c] == 5);
    }
    // Sampling must be without replacement: item tags unique.
    std::set<float> tags;
    for (const auto& f : b.features) {
        tags.insert(f[0]);
    }
    CHECK(tags.size() == b.size());
}

TEST_CASE("balance_dataset with per_class 0 is empty") {
    const LabeledDataset d = toy_dataset({2, 2, 2, 2, 2, 2});
    CHECK(balance_dataset(d, 0, 1).size() == 0);
}

TEST_CASE("per_class equal to the minimum count includes that class completely") {
    const LabeledDataset d = toy_dataset({4, 9, 8, 7, 6, 5});
    const LabeledDataset b = balance_dataset(d, 4, 11);
    // All four lo items must be present (tags 0..3).
    std::set<float> lo_tags;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b.labels[i] == StrokeLabel::lo) {
            lo_tags.insert(b.features[i][0]);
        }
    }
    CHECK(lo_tags == std::set<float>{0.0f, 1.0f, 2.0f, 3.0f});
}

TEST_CASE("balance_dataset names the class that is too small") {
    const LabeledDataset d = toy_dataset({9, 12, 3, 6, 10, 7});
    try {
        balance_dataset(d, 5, 1);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("mid1") != std::string::npos);
    }
}

TEST_CASE("same balance seed reproduces the same subset") {
    const LabeledDataset d = toy_dataset({20, 20, 20, 20, 20, 20});
    const LabeledDataset b1 = balance_dataset(d, 10, 5);
    const LabeledDataset b2 = balance_dataset(d, 10, 5);
    REQUIRE(b1.size() == b2.size());
    for (std::size_t i = 0; i < b1.size(); ++i) {
        CHECK(b1.features[i] == b2.features[i]);
    }
}

TEST_CASE("feature cache round-trips bit-exactly") {
    LabeledDataset d;
    d.features = {{1.5f, -2.25f, 0.0f}, {3.0f, 4.0f, 5.0f}};
    d.labels = {StrokeLabel::hi, StrokeLabel::composite};
    const std::string path = temp_path("cache.bin");
    save_feature_cache(path, d);
    const LabeledDataset loaded = load_feature_cache(path);
    std::remove(path.c_str());
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.features[0] == d.features[0]);
    CHECK(loaded.features[1] == d.features[1]);
    CHECK(loaded.labels[0] == StrokeLabel::hi);
    CHECK(loaded.labels[1] == StrokeLabel::composite);
}

TEST_CASE("manifest lines resolve relative paths against the manifest directory") {
    const auto entries =
        parse_manifest("a.wav,a.csv\n# comment\n\n/abs/b.wav,/abs/b.csv\n", "/data");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].wav_path == "/data/a.wav");
    CHECK(entries[0].annotation_path == "/data/a.csv");
    CHECK(entries[1].wav_path == "/abs/b.wav");
    CHECK_THROWS_AS(parse_manifest("only-one-field\n", ""), std::runtime_error);
}

TEST_CASE("load_recording reads audio, merges close events, and keeps the stem name") {
    const auto recipes = default_recipes();
    const AudioClip stroke = generate_stroke(recipes[0], 160.0, 1);

    const std::string wav = temp_path("rec1.wav");
    const std::string csv = temp_path("rec1.csv");
    save_wav(wav, stroke);
    save_annotations(csv, {{0.010, StrokeLabel::lo},
                           {0.025, StrokeLabel::hi},
                           {0.300, StrokeLabel::mid2}});

    const Recording rec = load_recording({wav, csv});
    std::remove(wav.c_str());
    std::remove(csv.c_str());

    CHECK(rec.name == "rec1");
    CHECK(rec.clip.samples.size() == stroke.samples.size());
    REQUIRE(rec.annotations.size() == 2);  // first two merged into composite
    CHECK(rec.annotations[0].label == StrokeLabel::composite);
    CHECK(rec.annotations[1].label == StrokeLabel::mid2);
}
