#include "mrt/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mrt/fft.hpp"

namespace mrt {

namespace {

// Fill `out` (kDftSize zeros) with the stroke's samples: the window runs from
// 0.03 s before the onset to 0.03 s before the next onset (or the configured
// fallback for the final stroke), clamped to the clip and truncated to
// kDftSize samples.
void fill_stroke_window(const AudioClip& clip, double onset,
                        std::optional<double> next_onset, std::vector<double>& out) {
    if (clip.sample_rate != kStandardRate) {
        throw std::runtime_error("stroke window: clip must be sampled at " +
                                 std::to_string(kStandardRate) + " Hz");
    }
    if (next_onset && *next_onset <= onset) {
        throw std::runtime_error("stroke window: next onset must come after the onset");
    }

    const double start_t = std::max(0.0, onset - kWindowLead);
    const double end_t = next_onset ? (*next_onset - kWindowLead)
                                    : (onset - kWindowLead + 1.0);

    const auto len = static_cast<long long>(clip.samples.size());
    long long start = std::llround(start_t * clip.sample_rate);
    long long end = std::llround(end_t * clip.sample_rate);
    start = std::clamp<long long>(start, 0, len);
    end = std::clamp<long long>(end, start, len);
    end = std::min(end, start + static_cast<long long>(kDftSize));

    std::fill(out.begin(), out.end(), 0.0);
    for (long long i = start; i < end; ++i) {
        out[static_cast<std::size_t>(i - start)] = clip.samples[static_cast<std::size_t>(i)];
    }
}

const RealDft& stroke_dft() {
    thread_local RealDft dft(kDftSize);
    return dft;
}

}  // namespace

FeatureVector extract_stroke_spectrum(const AudioClip& clip, double onset,
                                      std::optional<double> next_onset) {
    std::vector<double> window(kDftSize, 0.0);
    fill_stroke_window(clip, onset, next_onset, window);

    std::vector<double> mags(static_cast<std::size_t>(kDftSize / 2 + 1));
    stroke_dft().magnitude(window.data(), mags.data());

    FeatureVector features(kFeatureDim);
    for (int k = 0; k < kFeatureDim; ++k) {
        features[k] = static_cast<float>(mags[k]);
    }
    return features;
}

std::vector<FeatureVector> extract_all(const AudioClip& clip,
                                       const std::vector<double>& onsets) {
    if (!std::is_sorted(onsets.begin(), onsets.end())) {
        throw std::runtime_error("extract_all: onsets must be sorted ascending");
    }
    std::vector<FeatureVector> features;
    features.reserve(onsets.size());
    for (std::size_t i = 0; i < onsets.size(); ++i) {
        std::optional<double> next;
        if (i + 1 < onsets.size()) {
            next = onsets[i + 1];
        }
        features.push_back(extract_stroke_spectrum(clip, onsets[i], next));
    }
    return features;
}

TemplateSet compute_templates(const std::vector<FeatureVector>& features,
                              const std::vector<StrokeLabel>& labels) {
    if (features.size() != labels.size()) {
        throw std::runtime_error("compute_templates: feature/label count mismatch");
    }
    TemplateSet set;
    set.templates.assign(kNumClasses, FeatureVector(kFeatureDim, 0.0f));
    set.counts.assign(kNumClasses, 0);

    std::vector<std::vector<double>> sums(kNumClasses,
                                          std::vector<double>(kFeatureDim, 0.0));
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != kFeatureDim) {
            throw std::runtime_error("compute_templates: feature vector has wrong length");
        }
        const auto c = static_cast<std::size_t>(labels[i]);
        for (int k = 0; k < kFeatureDim; ++k) {
            sums[c][k] += features[i][k];
        }
        ++set.counts[c];
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (set.counts[c] == 0) {
            throw std::runtime_error("compute_templates: class " +
                                     std::string(to_string(static_cast<StrokeLabel>(c))) +
                                     " has zero examples");
        }
        for (int k = 0; k < kFeatureDim; ++k) {
            set.templates[c][k] =
                static_cast<float>(sums[c][k] / static_cast<double>(set.counts[c]));
        }
    }
    return set;
}

std::vector<double> extract_full_spectrum(const AudioClip& clip, double onset,
                                          std::optional<double> next_onset) {
    std::vector<double> window(kDftSize, 0.0);
    fill_stroke_window(clip, onset, next_onset, window);

    std::vector<double> half(static_cast<std::size_t>(kDftSize / 2 + 1));
    stroke_dft().magnitude(window.data(), half.data());

    std::vector<double> full(kDftSize);
    std::copy(half.begin(), half.end(), full.begin());
    for (int k = kDftSize / 2 + 1; k < kDftSize; ++k) {
        full[k] = half[static_cast<std::size_t>(kDftSize - k)];
    }
    return full;
}

FeatureVector normalize_unit_max(const FeatureVector& v) {
    FeatureVector out = v;
    const float max_value = out.empty() ? 0.0f : *std::max_element(out.begin(), out.end());
    if (max_value > 0.0f) {
        for (float& x : out) {
            x /= max_value;
        }
    }
    return out;
}

FeatureVector decimate(const FeatureVector& v, int factor) {
    if (factor <= 0) {
        throw std::runtime_error("decimate: factor must be positive");
    }
    if (v.size() % static_cast<std::size_t>(factor) != 0) {
        throw std::runtime_error("decimate: length not divisible by factor");
    }
    FeatureVector out(v.size() / static_cast<std::size_t>(factor));
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < factor; ++j) {
            acc += v[i * static_cast<std::size_t>(factor) + static_cast<std::size_t>(j)];
        }
        out[i] = static_cast<float>(acc / factor);
    }
    return out;
}

}  // namespace mrt
