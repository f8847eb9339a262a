#include "mrt/onset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mrt/fft.hpp"

namespace mrt {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Spectrogram stft_magnitude(const AudioClip& clip, int window, int hop) {
    if (hop <= 0 || window < hop) {
        throw std::runtime_error("stft_magnitude: require window >= hop > 0");
    }
    const auto len = static_cast<long long>(clip.samples.size());
    if (len < window) {
        throw std::runtime_error("stft_magnitude: clip shorter than one analysis window");
    }

    Spectrogram spec;
    spec.frame_hop = hop;
    spec.window_size = window;
    spec.sample_rate = clip.sample_rate;

    std::vector<double> hann(static_cast<std::size_t>(window));
    for (int n = 0; n < window; ++n) {
        hann[n] = 0.5 * (1.0 - std::cos(2.0 * kPi * n / window));
    }

    const auto n_frames = static_cast<std::size_t>((len - window) / hop + 1);
    const int n_bins = window / 2 + 1;
    RealDft dft(window);
    std::vector<double> buffer(static_cast<std::size_t>(window));
    std::vector<double> mags(static_cast<std::size_t>(n_bins));

    spec.frames.resize(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::size_t start = t * static_cast<std::size_t>(hop);
        for (int n = 0; n < window; ++n) {
            buffer[n] = clip.samples[start + n] * hann[n];
        }
        dft.magnitude(buffer.data(), mags.data());
        spec.frames[t].assign(mags.begin(), mags.end());
    }
    return spec;
}

OnsetEnvelope onset_envelope(const Spectrogram& spec) {
    if (spec.frames.empty()) {
        throw std::runtime_error("onset_envelope: spectrogram has no frames");
    }
    OnsetEnvelope env;
    env.frame_hop = spec.frame_hop;
    env.sample_rate = spec.sample_rate;
    env.values.assign(spec.frames.size(), 0.0f);

    for (std::size_t t = 1; t < spec.frames.size(); ++t) {
        const auto& cur = spec.frames[t];
        const auto& prev = spec.frames[t - 1];
        double acc = 0.0;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            const double diff = static_cast<double>(cur[k]) - prev[k];
            if (diff > 0.0) {
                acc += diff;
            }
        }
        env.values[t] = static_cast<float>(acc / static_cast<double>(cur.size()));
    }
    return env;
}

std::vector<int> pick_peaks(const OnsetEnvelope& env, int pre, int post, double delta,
                            int wait) {
    const auto n = static_cast<int>(env.values.size());
    if (n == 0) {
        throw std::runtime_error("pick_peaks: empty envelope");
    }
    if (delta < 0.0) {
        const float max_value = *std::max_element(env.values.begin(), env.values.end());
        delta = 0.07 * static_cast<double>(max_value);
    }

    std::vector<int> peaks;
    int last = std::numeric_limits<int>::min() / 2;
    for (int t = 0; t < n; ++t) {
        if (t < last + wait) {
            continue;
        }
        const int lo = std::max(0, t - pre);
        const int hi = std::min(n - 1, t + post);
        bool strict_max = true;
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) {
            sum += env.values[j];
            if (j != t && env.values[j] >= env.values[t]) {
                strict_max = false;
                break;
            }
        }
        if (!strict_max) {
            continue;
        }
        const double mean = sum / (hi - lo + 1);
        if (env.values[t] >= mean + delta) {
            peaks.push_back(t);
            last = t;
        }
    }
    return peaks;
}

std::vector<double> detect_onsets(const AudioClip& clip, const OnsetConfig& config) {
    if (static_cast<long long>(clip.samples.size()) < config.window) {
        throw std::runtime_error("detect_onsets: clip shorter than one analysis window");
    }

    AudioClip analysed = clip;
    if (config.center) {
        // Pad half a window of silence on each side so that the timestamp
        // frame*hop/rate refers to the centre of each analysis window; with
        // left-edge timestamps every detection lands early by a sizeable
        // fraction of the window.
        const std::size_t half = static_cast<std::size_t>(config.window) / 2;
        std::vector<float> padded(clip.samples.size() + 2 * half, 0.0f);
        std::copy(clip.samples.begin(), clip.samples.end(), padded.begin() + half);
        analysed.samples = std::move(padded);
    }

    const Spectrogram spec = stft_magnitude(analysed, config.window, config.hop);
    const OnsetEnvelope env = onset_envelope(spec);
    const float max_value = *std::max_element(env.values.begin(), env.values.end());
    const double delta = config.delta_fraction * static_cast<double>(max_value);
    const std::vector<int> peaks =
        pick_peaks(env, config.pre, config.post, delta, config.wait);

    std::vector<double> times;
    times.reserve(peaks.size());
    for (int t : peaks) {
        times.push_back(static_cast<double>(t) * config.hop / clip.sample_rate);
    }
    return times;
}

}  // namespace mrt
