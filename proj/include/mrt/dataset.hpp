#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/audio.hpp"
#include "mrt/features.hpp"

namespace mrt {

// A pool of labeled feature vectors. `groups` optionally records which
// recording each item came from (same length as labels, or empty).
struct LabeledDataset {
    std::vector<FeatureVector> features;
    std::vector<StrokeLabel> labels;
    std::vector<int> groups;

    std::size_t size() const { return labels.size(); }
    std::vector<std::size_t> class_counts() const;
};

// One manifest line: a WAV and its annotation CSV.
struct ManifestEntry {
    std::string wav_path;
    std::string annotation_path;
};

// A loaded recording; annotations have already had sub-0.03 s runs merged
// into composite events.
struct Recording {
    AudioClip clip;
    std::vector<Annotation> annotations;
    std::string name;
};

// Manifest format: one `wav_path,annotation_path` line per recording.
// Relative paths are resolved against the manifest's directory.
std::vector<ManifestEntry> parse_manifest(const std::string& text,
                                          const std::string& base_dir);
std::vector<ManifestEntry> load_manifest(const std::string& path);
Recording load_recording(const ManifestEntry& entry);

// Uniform random partition; train size = round(N * train_fraction).
std::pair<LabeledDataset, LabeledDataset> split_train_val(const LabeledDataset& dataset,
                                                          double train_fraction,
                                                          std::uint64_t seed);

// w_c = N / (K * n_c) with K = counts.size(); errors on any zero count.
std::vector<double> compute_class_weights(const std::vector<std::size_t>& class_counts);

// Exactly per_class items of every label, sampled without replacement.
LabeledDataset balance_dataset(const LabeledDataset& dataset, std::size_t per_class,
                               std::uint64_t seed);

// Binary feature cache: u32 count, u32 dim, then per row dim little-endian
// 32-bit floats followed by one label byte.
void save_feature_cache(const std::string& path, const LabeledDataset& dataset);
LabeledDataset load_feature_cache(const std::string& path);

}  // namespace mrt
