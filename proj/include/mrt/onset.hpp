#pragma once

#include <vector>

#include "mrt/audio.hpp"

namespace mrt {

// Time-major STFT magnitude grid.
struct Spectrogram {
    std::vector<std::vector<float>> frames;  // frames[t][k], k in [0, window/2]
    int frame_hop = 480;
    int window_size = 2048;
    int sample_rate = kStandardRate;
};

// Mean half-wave-rectified spectral flux per frame; values[0] == 0.
struct OnsetEnvelope {
    std::vector<float> values;
    int frame_hop = 480;
    int sample_rate = kStandardRate;
};

struct OnsetConfig {
    int window = 2048;
    int hop = 480;
    int pre = 3;    // frames before a candidate in the local-max neighborhood
    int post = 3;   // frames after
    int wait = 3;   // minimum frame spacing between accepted peaks
    double delta_fraction = 0.07;  // threshold margin, relative to max(envelope)
    // Pad the clip by window/2 on both ends so each frame's timestamp refers
    // to the centre of its analysis window rather than its left edge.
    bool center = true;
};

// Hann-windowed STFT magnitudes; frame count = floor((len - window)/hop) + 1.
Spectrogram stft_magnitude(const AudioClip& clip, int window = 2048, int hop = 480);

// value[t] = mean over bins of max(0, |X[t,k]| - |X[t-1,k]|); value[0] = 0.
OnsetEnvelope onset_envelope(const Spectrogram& spec);

// Indices t where value[t] is the strict maximum of [t-pre, t+post],
// value[t] >= neighborhood mean + delta, and t >= previous peak + wait.
std::vector<int> pick_peaks(const OnsetEnvelope& env, int pre = 3, int post = 3,
                            double delta = -1.0, int wait = 3);

// Full pipeline: STFT -> flux envelope -> peak picking -> seconds.
std::vector<double> detect_onsets(const AudioClip& clip, const OnsetConfig& config = {});

}  // namespace mrt
