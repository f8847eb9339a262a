#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mrt/annotations.hpp"
#include "mrt/audio.hpp"

namespace mrt {

struct Partial {
    double ratio = 1.0;      // frequency as a multiple of the tonic
    double amplitude = 1.0;  // relative, pre-normalization
    double decay = 8.0;      // exponential decay rate, 1/s
};

struct StrokeRecipe {
    StrokeLabel label = StrokeLabel::lo;
    std::vector<Partial> partials;
    double noise_level = 0.0;  // white-noise amplitude relative to the partials
    double duration = 0.5;     // seconds
};

struct SynthCorpusSpec {
    double tonic_hz = 160.0;
    int strokes_per_class = 100;
    double min_gap = 0.15;  // successive onset spacing, seconds
    double max_gap = 0.35;
    std::uint64_t seed = 0;
};

// Throws unless: >= 1 partial, all ratios > 0, amplitudes sum to <= 1,
// noise_level >= 0, duration > 0.
void validate_recipe(const StrokeRecipe& recipe);

// One recipe per stroke class. The mid classes deliberately share partials
// with each other and the composite recipe is the lo and hi stacks summed,
// so the classes are separable but not trivially so.
std::vector<StrokeRecipe> default_recipes();

// Sum of exponentially decaying sinusoids at ratio*tonic_hz plus seeded white
// noise, peak-normalized to 0.9.
AudioClip generate_stroke(const StrokeRecipe& recipe, double tonic_hz,
                          std::uint64_t seed);

// Strokes mixed into one clip at seeded random inter-onset gaps (stroke tails
// overlap the following strokes, as real playing does). Returns the clip and
// exact onset annotations; each class appears exactly strokes_per_class times.
std::pair<AudioClip, std::vector<Annotation>> generate_corpus(
    const SynthCorpusSpec& spec, const std::vector<StrokeRecipe>& recipes);

std::string recipes_to_json(const std::vector<StrokeRecipe>& recipes);
std::vector<StrokeRecipe> recipes_from_json(const std::string& text);

}  // namespace mrt
