#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "mrt/annotations.hpp"

using namespace mrt;

TEST_CASE("label names round-trip through the string mapping") {
    CHECK(to_string(StrokeLabel::lo) == std::string("lo"));
    CHECK(to_string(StrokeLabel::hi) == std::string("hi"));
    CHECK(to_string(StrokeLabel::mid1) == std::string("mid1"));
    CHECK(to_string(StrokeLabel::mid2) == std::string("mid2"));
    CHECK(to_string(StrokeLabel::mid3) == std::string("mid3"));
    CHECK(to_string(StrokeLabel::composite) == std::string("composite"));
    for (int c = 0; c < static_cast<int>(kNumClasses); ++c) {
        const auto label = static_cast<StrokeLabel>(c);
        const auto parsed = label_from_string(to_string(label));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == label);
    }
    CHECK(label_from_string("HI") == StrokeLabel::hi);
    CHECK(label_from_string("Mid2") == StrokeLabel::mid2);
    CHECK_FALSE(label_from_string("xyz").has_value());
}

TEST_CASE("class indices are fixed: lo=0 hi=1 mid1=2 mid2=3 mid3=4 composite=5") {
    CHECK(static_cast<int>(StrokeLabel::lo) == 0);
    CHECK(static_cast<int>(StrokeLabel::hi) == 1);
    CHECK(static_cast<int>(StrokeLabel::mid1) == 2);
    CHECK(static_cast<int>(StrokeLabel::mid2) == 3);
    CHECK(static_cast<int>(StrokeLabel::mid3) == 4);
    CHECK(static_cast<int>(StrokeLabel::composite) == 5);
    CHECK(kNumClasses == 6);
}

TEST_CASE("parse_annotations: empty text gives no events") {
    CHECK(parse_annotations("").empty());
    CHECK(parse_annotations("\n\n  \n").empty());
}

TEST_CASE("parse_annotations sorts by onset") {
    const auto events = parse_annotations("1.25,hi\n0.50,lo");
    REQUIRE(events.size() == 2);
    CHECK(events[0].onset == doctest::Approx(0.50));
    CHECK(events[0].label == StrokeLabel::lo);
    CHECK(events[1].onset == doctest::Approx(1.25));
    CHECK(events[1].label == StrokeLabel::hi);
}

TEST_CASE("parse_annotations accepts tab separators and a column-name header") {
    const auto events = parse_annotations("seconds,label\n0.5\thi\n1.0,mid3");
    REQUIRE(events.size() == 2);
    CHECK(events[0].label == StrokeLabel::hi);
    CHECK(events[1].label == StrokeLabel::mid3);
}

TEST_CASE("parse_annotations rejects unknown labels with the line number") {
    try {
        parse_annotations("0.5,xyz");
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        const std::string message = e.what();
        CHECK(message.find("xyz") != std::string::npos);
        CHECK(message.find("1") != std::string::npos);
    }
}

TEST_CASE("parse_annotations rejects garbage times and negative onsets") {
    CHECK_THROWS_AS(parse_annotations("abc,lo"), std::runtime_error);
    CHECK_THROWS_AS(parse_annotations("-0.25,lo"), std::runtime_error);
}

TEST_CASE("annotation format round-trip") {
    std::vector<Annotation> events = {{0.5, StrokeLabel::lo},
                                      {1.25, StrokeLabel::composite}};
    const auto parsed = parse_annotations(format_annotations(events));
    REQUIRE(parsed.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(parsed[i].onset == doctest::Approx(events[i].onset).epsilon(1e-9));
        CHECK(parsed[i].label == events[i].label);
    }
}

TEST_CASE("merge_composites collapses a close pair to one composite") {
    const std::vector<Annotation> events = {{1.000, StrokeLabel::lo},
                                            {1.020, StrokeLabel::hi}};
    const auto merged = merge_composites(events);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].onset == doctest::Approx(1.000));
    CHECK(merged[0].label == StrokeLabel::composite);
}

TEST_CASE("merge_composites leaves a 50 ms pair alone") {
    const std::vector<Annotation> events = {{1.000, StrokeLabel::lo},
                                            {1.050, StrokeLabel::hi}};
    const auto merged = merge_composites(events);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].label == StrokeLabel::lo);
    CHECK(merged[1].label == StrokeLabel::hi);
}

TEST_CASE("merge_composites collapses a whole chain to one event") {
    const std::vector<Annotation> events = {{1.00, StrokeLabel::lo},
                                            {1.02, StrokeLabel::hi},
                                            {1.04, StrokeLabel::lo}};
    const auto merged = merge_composites(events);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].onset == doctest::Approx(1.00));
    CHECK(merged[0].label == StrokeLabel::composite);
}

TEST_CASE("merge_composites: gap exactly at the threshold does not merge") {
    const std::vector<Annotation> events = {{1.00, StrokeLabel::lo},
                                            {1.03, StrokeLabel::hi}};
    CHECK(merge_composites(events).size() == 2);
}

TEST_CASE("merge_composites is idempotent and never grows the list") {
    const std::vector<Annotation> events = {
        {0.10, StrokeLabel::lo},  {0.12, StrokeLabel::hi},  {0.50, StrokeLabel::mid1},
        {0.52, StrokeLabel::mid2}, {0.54, StrokeLabel::mid3}, {1.00, StrokeLabel::hi},
    };
    const auto once = merge_composites(events);
    const auto twice = merge_composites(once);
    CHECK(once.size() <= events.size());
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(twice[i].onset == once[i].onset);
        CHECK(twice[i].label == once[i].label);
    }
    // After the collapse every consecutive gap clears the threshold.
    for (std::size_t i = 1; i < once.size(); ++i) {
        CHECK(once[i].onset - once[i - 1].onset >= 0.03);
    }
}

TEST_CASE("merge_composites rejects unsorted input") {
    const std::vector<Annotation> events = {{1.0, StrokeLabel::lo},
                                            {0.5, StrokeLabel::hi}};
    CHECK_THROWS_AS(merge_composites(events), std::runtime_error);
}
