#include "mrt/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mrt {

namespace {

const char* kLabelNames[kNumClasses] = {"lo", "hi", "mid1", "mid2", "mid3", "composite"};

std::string lowercase(std::string_view value) {
    std::string out(value);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string_view trim(std::string_view value) {
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front()))) {
        value.remove_prefix(1);
    }
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) {
        value.remove_suffix(1);
    }
    return value;
}

}  // namespace

const char* to_string(StrokeLabel label) {
    return kLabelNames[static_cast<int>(label)];
}

std::optional<StrokeLabel> label_from_string(std::string_view name) {
    const std::string needle = lowercase(trim(name));
    for (int i = 0; i < kNumClasses; ++i) {
        if (needle == kLabelNames[i]) {
            return static_cast<StrokeLabel>(i);
        }
    }
    return std::nullopt;
}

std::vector<Annotation> parse_annotations(const std::string& text) {
    std::vector<Annotation> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        line = trim(line);
        if (line.empty()) {
            continue;
        }

        std::size_t sep = line.find_first_of(",\t");
        if (sep == std::string_view::npos) {
            throw std::runtime_error("annotation line " + std::to_string(line_no) +
                                     ": expected `<seconds><,|TAB><label>`, got \"" +
                                     std::string(line) + "\"");
        }
        const std::string_view time_field = trim(line.substr(0, sep));
        const std::string_view label_field = trim(line.substr(sep + 1));

        if (out.empty() && line_no == 1 && lowercase(time_field) == "seconds" &&
            lowercase(label_field) == "label") {
            continue;  // header row written by the transcriber
        }

        double onset = 0.0;
        const auto [ptr, ec] =
            std::from_chars(time_field.data(), time_field.data() + time_field.size(), onset);
        if (ec != std::errc() || ptr != time_field.data() + time_field.size()) {
            throw std::runtime_error("annotation line " + std::to_string(line_no) +
                                     ": unparseable time \"" + std::string(time_field) + "\"");
        }
        if (onset < 0.0) {
            throw std::runtime_error("annotation line " + std::to_string(line_no) +
                                     ": negative onset " + std::string(time_field));
        }

        const auto label = label_from_string(label_field);
        if (!label) {
            throw std::runtime_error("annotation line " + std::to_string(line_no) +
                                     ": unknown label \"" + std::string(label_field) + "\"");
        }
        out.push_back(Annotation{onset, *label});
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Annotation& a, const Annotation& b) { return a.onset < b.onset; });
    return out;
}

std::vector<Annotation> load_annotations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open annotation file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_annotations(buf.str());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string format_annotations(const std::vector<Annotation>& annotations) {
    std::string out;
    char line[64];
    for (const Annotation& a : annotations) {
        std::snprintf(line, sizeof(line), "%.6f,%s\n", a.onset, to_string(a.label));
        out += line;
    }
    return out;
}

void save_annotations(const std::string& path, const std::vector<Annotation>& annotations) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write annotation file: " + path);
    }
    out << format_annotations(annotations);
}

std::vector<Annotation> merge_composites(const std::vector<Annotation>& annotations,
                                         double threshold) {
    for (std::size_t i = 1; i < annotations.size(); ++i) {
        if (annotations[i].onset < annotations[i - 1].onset) {
            throw std::runtime_error("merge_composites: annotations not sorted by onset");
        }
    }

    std::vector<Annotation> out;
    out.reserve(annotations.size());
    std::size_t i = 0;
    while (i < annotations.size()) {
        std::size_t j = i + 1;
        while (j < annotations.size() &&
               annotations[j].onset - annotations[j - 1].onset < threshold) {
            ++j;
        }
        if (j - i > 1) {
            out.push_back(Annotation{annotations[i].onset, StrokeLabel::composite});
        } else {
            out.push_back(annotations[i]);
        }
        i = j;
    }
    return out;
}

}  // namespace mrt
