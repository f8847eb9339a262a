#include "mrt/augment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mrt/features.hpp"
#include "mrt/onset.hpp"

namespace mrt {

double shift_rate_factor(int semitones) {
    return std::exp2(static_cast<double>(semitones) / 12.0);
}

AudioClip pitch_shift(const AudioClip& clip, int semitones) {
    if (semitones < -12 || semitones > 12) {
        throw std::runtime_error("pitch_shift: semitones must be within [-12, 12]");
    }
    if (semitones == 0) {
        return clip;
    }
    // Playing the samples back `factor` times faster raises every frequency
    // by the same factor and shortens the clip accordingly.
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.samples = sinc_resample(clip.samples, shift_rate_factor(semitones));
    return out;
}

std::vector<Annotation> scale_annotations(const std::vector<Annotation>& annotations,
                                          int semitones) {
    const double time_factor = std::exp2(-static_cast<double>(semitones) / 12.0);
    std::vector<Annotation> out = annotations;
    for (Annotation& a : out) {
        a.onset *= time_factor;
    }
    return out;
}

namespace {

// Pair each detected onset with the nearest annotation; drop detections with
// no annotation inside the tolerance.
std::vector<Annotation> label_detections(const std::vector<double>& detections,
                                         const std::vector<Annotation>& annotations,
                                         double tolerance) {
    std::vector<Annotation> out;
    for (double t : detections) {
        double best_diff = tolerance;
        const Annotation* best = nullptr;
        for (const Annotation& a : annotations) {
            const double diff = std::abs(a.onset - t);
            if (diff < best_diff) {
                best_diff = diff;
                best = &a;
            }
        }
        if (best != nullptr) {
            out.push_back({t, best->label});
        }
    }
    return out;
}

}  // namespace

LabeledDataset build_augmented_dataset(const std::vector<Recording>& recordings,
                                       const std::vector<int>& shifts,
                                       const AugmentConfig& config) {
    if (shifts.empty()) {
        throw std::runtime_error("build_augmented_dataset: shift list is empty");
    }
    std::set<int> unique(shifts.begin(), shifts.end());
    if (unique.size() != shifts.size()) {
        throw std::runtime_error("build_augmented_dataset: duplicate shifts");
    }

    LabeledDataset dataset;
    for (std::size_t r = 0; r < recordings.size(); ++r) {
        for (int s : shifts) {
            const AudioClip shifted = pitch_shift(recordings[r].clip, s);
            std::vector<Annotation> events =
                scale_annotations(recordings[r].annotations, s);
            if (config.redetect_onsets) {
                const std::vector<double> detections = detect_onsets(shifted);
                events = label_detections(detections, events, config.match_tolerance);
            }
            std::vector<double> onsets;
            onsets.reserve(events.size());
            for (const Annotation& a : events) {
                onsets.push_back(a.onset);
            }
            std::vector<FeatureVector> features = extract_all(shifted, onsets);
            for (std::size_t i = 0; i < events.size(); ++i) {
                dataset.features.push_back(std::move(features[i]));
                dataset.labels.push_back(events[i].label);
                dataset.groups.push_back(static_cast<int>(r));
            }
        }
    }
    return dataset;
}

}  // namespace mrt
