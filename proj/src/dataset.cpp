#include "mrt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mrt/rng.hpp"

namespace mrt {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(base_dir) / p).string();
}

LabeledDataset take_subset(const LabeledDataset& dataset,
                           const std::vector<std::size_t>& indices) {
    LabeledDataset out;
    out.features.reserve(indices.size());
    out.labels.reserve(indices.size());
    const bool has_groups = !dataset.groups.empty();
    if (has_groups) {
        out.groups.reserve(indices.size());
    }
    for (std::size_t i : indices) {
        out.features.push_back(dataset.features[i]);
        out.labels.push_back(dataset.labels[i]);
        if (has_groups) {
            out.groups.push_back(dataset.groups[i]);
        }
    }
    return out;
}

}  // namespace

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(kNumClasses, 0);
    for (StrokeLabel label : labels) {
        ++counts[static_cast<std::size_t>(label)];
    }
    return counts;
}

std::vector<ManifestEntry> parse_manifest(const std::string& text,
                                          const std::string& base_dir) {
    std::vector<ManifestEntry> entries;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                     ": expected <wav_path>,<annotation_path>");
        }
        ManifestEntry entry;
        entry.wav_path = resolve(trim(line.substr(0, comma)), base_dir);
        entry.annotation_path = resolve(trim(line.substr(comma + 1)), base_dir);
        if (entry.wav_path.empty() || entry.annotation_path.empty()) {
            throw std::runtime_error("manifest line " + std::to_string(line_no) +
                                     ": empty path");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open manifest: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_manifest(text.str(),
                          std::filesystem::path(path).parent_path().string());
}

Recording load_recording(const ManifestEntry& entry) {
    Recording rec;
    rec.clip = load_wav(entry.wav_path);
    rec.annotations = merge_composites(load_annotations(entry.annotation_path));
    rec.name = std::filesystem::path(entry.wav_path).stem().string();
    return rec;
}

std::pair<LabeledDataset, LabeledDataset> split_train_val(const LabeledDataset& dataset,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
    if (dataset.size() == 0) {
        throw std::runtime_error("split_train_val: empty dataset");
    }
    if (!(train_fraction > 0.0) || train_fraction > 1.0) {
        throw std::runtime_error("split_train_val: train_fraction must be in (0, 1]");
    }
    std::vector<std::size_t> indices(dataset.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        indices[i] = i;
    }
    rng::Engine engine(seed);
    engine.shuffle(indices);

    const auto train_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(dataset.size()) * train_fraction));
    std::vector<std::size_t> train_idx(indices.begin(), indices.begin() + train_n);
    std::vector<std::size_t> val_idx(indices.begin() + train_n, indices.end());
    return {take_subset(dataset, train_idx), take_subset(dataset, val_idx)};
}

std::vector<double> compute_class_weights(const std::vector<std::size_t>& class_counts) {
    if (class_counts.empty()) {
        throw std::runtime_error("compute_class_weights: no classes");
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < class_counts.size(); ++i) {
        if (class_counts[i] == 0) {
            throw std::runtime_error("compute_class_weights: class " + std::to_string(i) +
                                     " has zero examples");
        }
        total += class_counts[i];
    }
    const auto k = static_cast<double>(class_counts.size());
    std::vector<double> weights(class_counts.size());
    for (std::size_t i = 0; i < class_counts.size(); ++i) {
        weights[i] = static_cast<double>(total) / (k * static_cast<double>(class_counts[i]));
    }
    return weights;
}

LabeledDataset balance_dataset(const LabeledDataset& dataset, std::size_t per_class,
                               std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(kNumClasses);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    }

    rng::Engine engine(seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(per_class * kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (by_class[c].size() < per_class) {
            throw std::runtime_error(
                "balance_dataset: class " +
                std::string(to_string(static_cast<StrokeLabel>(c))) + " has only " +
                std::to_string(by_class[c].size()) + " examples, need " +
                std::to_string(per_class));
        }
        engine.shuffle(by_class[c]);
        chosen.insert(chosen.end(), by_class[c].begin(),
                      by_class[c].begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    return take_subset(dataset, chosen);
}

void save_feature_cache(const std::string& path, const LabeledDataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write feature cache: " + path);
    }
    const auto count = static_cast<std::uint32_t>(dataset.size());
    const std::uint32_t dim =
        dataset.features.empty() ? 0 : static_cast<std::uint32_t>(dataset.features[0].size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.features[i].size() != dim) {
            throw std::runtime_error("save_feature_cache: inconsistent feature lengths");
        }
        out.write(reinterpret_cast<const char*>(dataset.features[i].data()),
                  static_cast<std::streamsize>(sizeof(float) * dim));
        const auto label = static_cast<std::uint8_t>(dataset.labels[i]);
        out.write(reinterpret_cast<const char*>(&label), 1);
    }
    if (!out) {
        throw std::runtime_error("failed writing feature cache: " + path);
    }
}

LabeledDataset load_feature_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open feature cache: " + path);
    }
    std::uint32_t count = 0;
    std::uint32_t dim = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    in.read(reinterpret_cast<char*>(&dim), 4);
    if (!in) {
        throw std::runtime_error("feature cache truncated: " + path);
    }
    LabeledDataset dataset;
    dataset.features.resize(count, FeatureVector(dim));
    dataset.labels.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(dataset.features[i].data()),
                static_cast<std::streamsize>(sizeof(float) * dim));
        std::uint8_t label = 0;
        in.read(reinterpret_cast<char*>(&label), 1);
        if (!in) {
            throw std::runtime_error("feature cache truncated: " + path);
        }
        if (label >= kNumClasses) {
            throw std::runtime_error("feature cache has invalid label " +
                                     std::to_string(label));
        }
        dataset.labels[i] = static_cast<StrokeLabel>(label);
    }
    return dataset;
}

}  // namespace mrt
