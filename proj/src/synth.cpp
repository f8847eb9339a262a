#include "mrt/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrt/rng.hpp"

namespace mrt {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kPeakLevel = 0.9;
// Each stroke realization scales every partial's amplitude by a seeded factor
// in [1-kAmplitudeJitter, 1+kAmplitudeJitter], mimicking strike-to-strike
// variation in hit strength and position. Relative factors cancel under the
// final peak normalization for single-partial recipes.
constexpr double kAmplitudeJitter = 0.8;
}  // namespace

void validate_recipe(const StrokeRecipe& recipe) {
    if (recipe.partials.empty()) {
        throw std::runtime_error("recipe: needs at least one partial");
    }
    double amplitude_sum = 0.0;
    for (const Partial& p : recipe.partials) {
        if (!(p.ratio > 0.0)) {
            throw std::runtime_error("recipe: partial ratios must be positive");
        }
        if (p.amplitude < 0.0 || p.decay < 0.0) {
            throw std::runtime_error("recipe: negative amplitude or decay");
        }
        amplitude_sum += p.amplitude;
    }
    if (amplitude_sum > 1.0) {
        throw std::runtime_error("recipe: partial amplitudes sum above 1");
    }
    if (recipe.noise_level < 0.0) {
        throw std::runtime_error("recipe: negative noise level");
    }
    if (!(recipe.duration > 0.0)) {
        throw std::runtime_error("recipe: duration must be positive");
    }
}

std::vector<StrokeRecipe> default_recipes() {
    std::vector<StrokeRecipe> recipes(kNumClasses);

    recipes[0].label = StrokeLabel::lo;
    recipes[0].partials = {{0.5, 0.55, 7.0}, {1.0, 0.35, 9.0}};
    recipes[0].noise_level = 0.03;
    recipes[0].duration = 0.55;

    recipes[1].label = StrokeLabel::hi;
    recipes[1].partials = {{2.0, 0.40, 9.0}, {3.0, 0.30, 11.0}, {4.0, 0.20, 13.0}};
    recipes[1].noise_level = 0.03;
    recipes[1].duration = 0.45;

    // The three mid classes share the same core partials and differ mainly in
    // their amplitude profile plus one weak distinctive overtone, so they are
    // deliberately confusable under per-stroke amplitude variation.
    recipes[2].label = StrokeLabel::mid1;
    recipes[2].partials = {{1.375, 0.40, 10.0},
                           {2.1, 0.25, 12.0},
                           {2.6, 0.15, 11.0},
                           {3.3, 0.08, 14.0}};
    recipes[2].noise_level = 0.04;
    recipes[2].duration = 0.50;

    recipes[3].label = StrokeLabel::mid2;
    recipes[3].partials = {{1.375, 0.15, 11.0},
                           {2.1, 0.40, 12.0},
                           {2.6, 0.25, 10.0},
                           {3.9, 0.08, 13.0}};
    recipes[3].noise_level = 0.04;
    recipes[3].duration = 0.50;

    recipes[4].label = StrokeLabel::mid3;
    recipes[4].partials = {{1.375, 0.25, 11.0},
                           {2.1, 0.15, 12.0},
                           {2.6, 0.40, 11.0},
                           {4.6, 0.08, 14.0}};
    recipes[4].noise_level = 0.04;
    recipes[4].duration = 0.45;

    recipes[5].label = StrokeLabel::composite;
    recipes[5].partials = {{0.5, 0.30, 7.0},
                           {1.0, 0.20, 9.0},
                           {2.0, 0.20, 9.0},
                           {3.0, 0.15, 11.0},
                           {4.0, 0.10, 13.0}};
    recipes[5].noise_level = 0.03;
    recipes[5].duration = 0.55;

    return recipes;
}

AudioClip generate_stroke(const StrokeRecipe& recipe, double tonic_hz,
                          std::uint64_t seed) {
    validate_recipe(recipe);
    if (!(tonic_hz > 0.0)) {
        throw std::runtime_error("generate_stroke: tonic must be positive");
    }

    const auto n = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(recipe.duration * kStandardRate)));
    AudioClip clip;
    clip.sample_rate = kStandardRate;
    clip.samples.assign(n, 0.0f);

    rng::Engine engine(seed);
    std::vector<double> gains(recipe.partials.size());
    double nominal_sum = 0.0;
    double jittered_sum = 0.0;
    for (std::size_t k = 0; k < gains.size(); ++k) {
        gains[k] = engine.uniform(1.0 - kAmplitudeJitter, 1.0 + kAmplitudeJitter);
        nominal_sum += recipe.partials[k].amplitude;
        jittered_sum += gains[k] * recipe.partials[k].amplitude;
    }
    // Rescale so the summed partial amplitude matches the recipe: the jitter
    // redistributes energy across partials without changing the overall
    // signal-to-noise balance of the stroke.
    if (jittered_sum > 0.0) {
        const double rescale = nominal_sum / jittered_sum;
        for (double& g : gains) {
            g *= rescale;
        }
    }
    std::vector<double> buffer(n, 0.0);
    for (std::size_t k = 0; k < recipe.partials.size(); ++k) {
        const Partial& p = recipe.partials[k];
        const double omega = 2.0 * kPi * p.ratio * tonic_hz / kStandardRate;
        const double amplitude = gains[k] * p.amplitude;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / kStandardRate;
            buffer[i] += amplitude * std::exp(-p.decay * t) *
                         std::sin(omega * static_cast<double>(i));
        }
    }
    if (recipe.noise_level > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            buffer[i] += recipe.noise_level * engine.normal();
        }
    }

    double peak = 0.0;
    for (double v : buffer) {
        peak = std::max(peak, std::abs(v));
    }
    const double scale = peak > 0.0 ? kPeakLevel / peak : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        clip.samples[i] = static_cast<float>(buffer[i] * scale);
    }
    return clip;
}

std::pair<AudioClip, std::vector<Annotation>> generate_corpus(
    const SynthCorpusSpec& spec, const std::vector<StrokeRecipe>& recipes) {
    if (recipes.size() != kNumClasses) {
        throw std::runtime_error("generate_corpus: need exactly one recipe per class");
    }
    std::vector<bool> seen(kNumClasses, false);
    for (const StrokeRecipe& r : recipes) {
        validate_recipe(r);
        if (seen[static_cast<std::size_t>(r.label)]) {
            throw std::runtime_error("generate_corpus: duplicate recipe label");
        }
        seen[static_cast<std::size_t>(r.label)] = true;
    }
    if (!(spec.tonic_hz >= 80.0 && spec.tonic_hz <= 400.0)) {
        throw std::runtime_error("generate_corpus: tonic must lie in [80, 400] Hz");
    }
    if (spec.min_gap < 0.08 || spec.max_gap < spec.min_gap) {
        throw std::runtime_error("generate_corpus: need max_gap >= min_gap >= 0.08 s");
    }
    if (spec.strokes_per_class <= 0) {
        throw std::runtime_error("generate_corpus: strokes_per_class must be positive");
    }

    // Shuffled label sequence with exact per-class counts.
    std::vector<StrokeLabel> sequence;
    sequence.reserve(static_cast<std::size_t>(spec.strokes_per_class) * kNumClasses);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        for (int i = 0; i < spec.strokes_per_class; ++i) {
            sequence.push_back(static_cast<StrokeLabel>(c));
        }
    }
    rng::Engine engine(spec.seed);
    engine.shuffle(sequence);

    std::vector<double> onsets;
    onsets.reserve(sequence.size());
    double t = 0.2;  // lead-in
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        onsets.push_back(t);
        t += engine.uniform(spec.min_gap, spec.max_gap);
    }

    double max_duration = 0.0;
    for (const StrokeRecipe& r : recipes) {
        max_duration = std::max(max_duration, r.duration);
    }
    const auto total_samples = static_cast<std::size_t>(
        std::llround((onsets.back() + max_duration + 0.3) * kStandardRate));
    std::vector<double> buffer(total_samples, 0.0);

    std::vector<Annotation> annotations;
    annotations.reserve(sequence.size());
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const StrokeRecipe* recipe = nullptr;
        for (const StrokeRecipe& r : recipes) {
            if (r.label == sequence[i]) {
                recipe = &r;
                break;
            }
        }
        const AudioClip stroke =
            generate_stroke(*recipe, spec.tonic_hz, rng::split(spec.seed, i + 1));
        const auto offset =
            static_cast<std::size_t>(std::llround(onsets[i] * kStandardRate));
        for (std::size_t j = 0; j < stroke.samples.size(); ++j) {
            if (offset + j < buffer.size()) {
                buffer[offset + j] += stroke.samples[j];
            }
        }
        annotations.push_back({onsets[i], sequence[i]});
    }

    // Overlapping tails can push the mix above full scale; renormalize.
    double peak = 0.0;
    for (double v : buffer) {
        peak = std::max(peak, std::abs(v));
    }
    const double scale = peak > 0.0 ? kPeakLevel / peak : 0.0;

    AudioClip clip;
    clip.sample_rate = kStandardRate;
    clip.samples.resize(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        clip.samples[i] = static_cast<float>(buffer[i] * scale);
    }
    return {std::move(clip), std::move(annotations)};
}

std::string recipes_to_json(const std::vector<StrokeRecipe>& recipes) {
    nlohmann::json root = nlohmann::json::array();
    for (const StrokeRecipe& r : recipes) {
        nlohmann::json partials = nlohmann::json::array();
        for (const Partial& p : r.partials) {
            partials.push_back({{"ratio", p.ratio},
                                {"amplitude", p.amplitude},
                                {"decay", p.decay}});
        }
        root.push_back({{"label", to_string(r.label)},
                        {"partials", partials},
                        {"noise_level", r.noise_level},
                        {"duration", r.duration}});
    }
    return root.dump(2) + "\n";
}

std::vector<StrokeRecipe> recipes_from_json(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("recipe JSON: ") + e.what());
    }
    if (!root.is_array()) {
        throw std::runtime_error("recipe JSON: expected a top-level array");
    }
    std::vector<StrokeRecipe> recipes;
    for (const auto& item : root) {
        StrokeRecipe r;
        const auto label = label_from_string(item.at("label").get<std::string>());
        if (!label) {
            throw std::runtime_error("recipe JSON: unknown label " +
                                     item.at("label").get<std::string>());
        }
        r.label = *label;
        for (const auto& p : item.at("partials")) {
            r.partials.push_back({p.at("ratio").get<double>(),
                                  p.at("amplitude").get<double>(),
                                  p.at("decay").get<double>()});
        }
        r.noise_level = item.value("noise_level", 0.0);
        r.duration = item.value("duration", 0.5);
        validate_recipe(r);
        recipes.push_back(std::move(r));
    }
    return recipes;
}

}  // namespace mrt
