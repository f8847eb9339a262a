#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mrt {

// Reduced mridangam stroke label set plus the merged bass+treble event.
// Class indices are fixed: lo=0, hi=1, mid1=2, mid2=3, mid3=4, composite=5.
enum class StrokeLabel : std::uint8_t {
    lo = 0,
    hi = 1,
    mid1 = 2,
    mid2 = 3,
    mid3 = 4,
    composite = 5,
};

inline constexpr int kNumClasses = 6;

const char* to_string(StrokeLabel label);

// Case-insensitive label lookup; nullopt for unknown names.
std::optional<StrokeLabel> label_from_string(std::string_view name);

struct Annotation {
    double onset = 0.0;  // seconds
    StrokeLabel label = StrokeLabel::lo;
};

// Parses `<seconds><,|TAB><label>` lines (Sonic Visualiser CSV export layout).
// Returns annotations sorted by onset. A leading "seconds,label" header line is
// skipped so transcription output files can be fed back in. Throws on
// unparseable times, negative times, and unknown labels, naming the line.
std::vector<Annotation> parse_annotations(const std::string& text);

std::vector<Annotation> load_annotations(const std::string& path);

std::string format_annotations(const std::vector<Annotation>& annotations);

void save_annotations(const std::string& path, const std::vector<Annotation>& annotations);

// Collapses each maximal run of annotations whose successive gaps are all
// < threshold into a single composite event at the run's earliest onset.
// Isolated annotations pass through unchanged. Input must be sorted by onset.
std::vector<Annotation> merge_composites(const std::vector<Annotation>& annotations,
                                         double threshold = 0.03);

}  // namespace mrt
