#include <doctest.h>

#include "squarepack/errors.hpp"
#include "squarepack/sampler.hpp"
#include "squarepack/sticks.hpp"

using namespace squarepack;

namespace {

std::vector<Point> column(int x, int start, int step_count, int step = 2) {
    std::vector<Point> out;
    for (int k = 0; k < step_count; ++k) out.push_back({x, start + step * k});
    return out;
}

void append(std::vector<Point>& dst, const std::vector<Point>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

// Columns at x=1 (centers at odd y) and x=3 (even y) on an otherwise empty 8x8 torus.
Configuration offset_columns() {
    std::vector<Point> pts = column(1, 1, 4);
    append(pts, column(3, 0, 4));
    return Configuration::create(8, 8, Boundary::periodic, pts);
}

// Fully-packed 8x8 window in the ver0 packing with the x=3 column partly slid upward.
Configuration slid_window() {
    std::vector<Point> pts;
    for (int x : {1, 5, 7}) append(pts, column(x, 1, 4));
    append(pts, {{3, 1}, {3, 4}, {3, 6}});
    return Configuration::create(8, 8, Boundary::fully_packed, pts);
}

// 48x16 torus: a (ver,0) stick at x=2 and a (ver,1) stick at x=31, separated by vacant strips.
Configuration two_phase_strip() {
    std::vector<Point> pts = column(1, 1, 8);
    for (int x = 3; x <= 23; x += 2) append(pts, column(x, 0, 8));
    for (int x : {26, 28, 30}) append(pts, column(x, 1, 8));
    for (int x = 32; x <= 46; x += 2) append(pts, column(x, 0, 8));
    return Configuration::create(48, 16, Boundary::periodic, pts);
}

}  // namespace

TEST_CASE("stick edges of trivial configurations") {
    CHECK(detect_stick_edges(Configuration::empty(8, 8, Boundary::periodic)).empty());
    auto ver0 = seed_phase_configuration(8, 8, Boundary::periodic, Phase::ver0);
    CHECK(detect_stick_edges(ver0).empty());
    CHECK(detect_stick_edges(Configuration::empty(8, 8, Boundary::fully_packed)).empty());
    CHECK(detect_stick_edges(seed_phase_configuration(8, 8, Boundary::fully_packed, Phase::ver0)).empty());
}

TEST_CASE("offset columns give one wrapping (ver,0) stick") {
    auto c = offset_columns();
    auto edges = detect_stick_edges(c);
    REQUIRE(edges.size() == 8);
    for (const Edge& e : edges) {
        CHECK(e.orientation == Orientation::vertical);
        CHECK(e.start.x == 2);
    }
    auto sticks = extract_sticks(c);
    REQUIRE(sticks.size() == 1);
    CHECK(sticks[0].wraps);
    CHECK(sticks[0].length == 8);
    CHECK(sticks[0].type == StickType{Orientation::vertical, 0});
    auto flanks = stick_flank_parities(c, sticks[0]);
    REQUIRE(flanks.has_value());
    CHECK(flanks->first == ParityClass{0, 0});
    CHECK(flanks->second == ParityClass{0, 1});
}

TEST_CASE("sticks in a fully-packed window end at vacancy corners") {
    auto c = slid_window();
    auto sticks = extract_sticks(c);
    REQUIRE(sticks.size() == 2);
    for (const Stick& s : sticks) {
        CHECK(s.type == StickType{Orientation::vertical, 0});
        CHECK_FALSE(s.wraps);
        CHECK(s.length == 4);
        CHECK(s.anchor.y == 3);
        Point lo = s.anchor, hi{s.anchor.x, s.anchor.y + s.length};
        auto touches_vacancy = [&](Point v) {
            for (int dx = -1; dx <= 0; ++dx)
                for (int dy = -1; dy <= 0; ++dy)
                    if (c.face_vacant({v.x + dx, v.y + dy})) return true;
            return false;
        };
        CHECK(touches_vacancy(lo));
        CHECK(touches_vacancy(hi));
        CHECK(stick_flank_parities(c, s).has_value());
    }
    CHECK(sticks[0].anchor.x == 2);
    CHECK(sticks[1].anchor.x == 4);
    CHECK_FALSE(vertical_meets_horizontal(c));
}

TEST_CASE("sticks crossing the torus seam are single runs") {
    // Column x=3 offset by one over y = 6..9 (mod 8) only, which needs vacancies at both ends.
    std::vector<Point> pts = column(1, 1, 4);
    append(pts, {{3, 6}, {3, 0}, {3, 3}});
    auto c = Configuration::create(8, 8, Boundary::periodic, pts);
    for (const Stick& s : extract_sticks(c)) CHECK_FALSE(s.wraps);
    auto sticks = extract_sticks(c);
    int total = 0;
    for (const Stick& s : sticks) total += s.length;
    CHECK(total == static_cast<int>(detect_stick_edges(c).size()));
}

TEST_CASE("divides") {
    Segment v{Orientation::vertical, 2, 0, 2};
    CHECK(divides(v, {1, 0, 2, 2}));
    CHECK_FALSE(divides(v, {2, 0, 2, 2}));
    CHECK(vertically_divides(v, {1, 0, 2, 2}));
    CHECK_FALSE(horizontally_divides(v, {1, 0, 2, 2}));
    Segment h{Orientation::horizontal, 1, 0, 4};
    CHECK_FALSE(vertically_divides(h, {0, 0, 4, 2}));
    CHECK(horizontally_divides(h, {0, 0, 4, 2}));
    CHECK_FALSE(divides(h, {0, 0, 5, 2}));
}

TEST_CASE("proper division and the inner rectangle") {
    Rect r{0, 0, 16, 16};
    Rect in = inner_rect(r, 4);
    CHECK(in.x == 4);
    CHECK(in.K == 8);
    CHECK_THROWS_AS(inner_rect({0, 0, 10, 16}, 4), DimensionError);
    auto c = two_phase_strip();
    auto sticks = extract_sticks(c);
    REQUIRE(sticks.size() == 2);
    Stick s0 = sticks[0].type.parity == 0 ? sticks[0] : sticks[1];
    Stick s1 = sticks[0].type.parity == 0 ? sticks[1] : sticks[0];
    CHECK(s0.anchor.x == 2);
    CHECK(s1.anchor.x == 31);
    CHECK(stick_divides(c, s0, r));
    CHECK_FALSE(properly_divides(c, s0, r, 4));
    CHECK(properly_divides(c, s1, {24, 0, 16, 16}, 4));
    CHECK_THROWS_AS(properly_divides(c, s1, {24, 0, 15, 16}, 4), DimensionError);

    // Sticks that divide R but do not reach into R-.
    auto w = slid_window();
    for (const Stick& s : extract_sticks(w)) {
        CHECK(properly_divides(w, s, {s.anchor.x - 2, 3, 4, 4}, 4));
        CHECK(stick_divides(w, s, {s.anchor.x - 1, 3, 8, 4}));
        CHECK_FALSE(properly_divides(w, s, {s.anchor.x - 1, 3, 8, 4}, 4));
        CHECK_FALSE(stick_divides(w, s, {s.anchor.x - 1, 2, 8, 4}));
    }
}

TEST_CASE("psi sets on the two-phase strip") {
    auto c = two_phase_strip();
    StickType v0{Orientation::vertical, 0}, v1{Orientation::vertical, 1};
    for (int t = 0; t < 4; ++t) CHECK_FALSE(psi_set(c, 4, 4, StickType::from_index(t)).contains({0, 0}));
    auto p1 = psi_set(c, 4, 4, v1);
    CHECK(p1.contains({6, 0}));
    CHECK(p1.columns == 9);
    CHECK(p1.rows == 1);
    auto p0 = psi_set(c, 4, 4, v0);
    CHECK(p0.points.empty());
    CHECK(psi_set(Configuration::empty(16, 16, Boundary::periodic), 4, 4, v0).points.empty());
    CHECK_THROWS_AS(psi_set(c, 4, 8, v0), WrapError);
}

TEST_CASE("phase classification") {
    std::vector<int> alt{0, 1};
    auto ver0 = seed_phase_configuration(16, 16, Boundary::periodic, Phase::ver0, alt);
    CHECK(classify_phase(ver0, 1, 4) == Phase::ver0);
    CHECK(classify_phase(ver0.transposed(), 1, 4) == Phase::hor0);
    CHECK(classify_phase(ver0.translated(1, 0), 1, 4) == Phase::ver1);
    CHECK(classify_phase(ver0.translated(0, 1), 1, 4) == Phase::ver0);
    CHECK(classify_phase(ver0.transposed().translated(0, 1), 1, 4) == Phase::hor1);
    CHECK(classify_phase(Configuration::empty(8, 8, Boundary::periodic), 1, 2) == Phase::undetermined);
    // Identical offsets leave no sticks at all.
    CHECK(classify_phase(seed_phase_configuration(16, 16, Boundary::periodic, Phase::ver0), 1, 2) ==
          Phase::undetermined);
    // A tie between types is not a majority.
    CHECK(classify_phase(two_phase_strip(), 1, 2) == Phase::undetermined);
    CHECK(classify_phase(ver0, 100, 4) == Phase::undetermined);
    CHECK(default_stick_threshold(130) == 4);
    CHECK(default_stick_threshold(10) == 2);
}

TEST_CASE("census and exports") {
    auto c = offset_columns();
    auto census = stick_census(c);
    CHECK(census.counts[0] == 1);
    CHECK(census.length_histogram[0].at(8) == 1);
    CHECK(census.wrapping == 1);
    auto j = to_json(census);
    CHECK(j["types"]["ver0"]["count"] == 1);
    auto pj = to_json(psi_set(two_phase_strip(), 4, 4, {Orientation::vertical, 1}), {Orientation::vertical, 1});
    CHECK(pj["bitmap"][0] == ".....##..");
}

TEST_CASE("no rectangle divided both ways in constructed configurations") {
    for (const auto& c : {offset_columns(), slid_window(), two_phase_strip(), offset_columns().transposed()}) {
        CHECK_FALSE(rectangle_divided_both_ways(c, extract_sticks(c)));
        CHECK_FALSE(vertical_meets_horizontal(c));
    }
}

TEST_CASE("king adjacency between Psi sets") {
    std::vector<Point> a{{0, 0}, {5, 5}}, b{{1, 1}, {3, 0}, {5, 5}};
    CHECK(king_adjacent_pairs(a, b) == 2);
    CHECK(king_adjacent_pairs(a, {}) == 0);
    CHECK(king_adjacent_pairs({{2, 2}}, {{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 3}, {3, 1}, {3, 2}, {3, 3}, {4, 4}}) == 8);
    CHECK(psi_orientation_conflicts(two_phase_strip(), 4, 4) == 0);
}
