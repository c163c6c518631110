#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "squarepack/lattice.hpp"

namespace squarepack {

enum class Orientation { horizontal, vertical };

enum class Phase { ver0, ver1, hor0, hor1, undetermined };

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view text);

// Orientation plus parity of the stick's fixed coordinate.
struct StickType {
    Orientation orientation = Orientation::vertical;
    int parity = 0;
    int index() const { return (orientation == Orientation::vertical ? 0 : 2) + parity; }
    Phase phase() const { return static_cast<Phase>(index()); }
    static StickType from_index(int i) {
        return {i < 2 ? Orientation::vertical : Orientation::horizontal, i % 2};
    }
    friend bool operator==(const StickType&, const StickType&) = default;
};

std::string type_name(StickType t);

// Unit lattice edge from `start` to start+(0,1) (vertical) or start+(1,0) (horizontal).
struct Edge {
    Point start;
    Orientation orientation = Orientation::vertical;
    Point end() const {
        return orientation == Orientation::vertical ? Point{start.x, start.y + 1}
                                                    : Point{start.x + 1, start.y};
    }
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

bool is_stick_edge(const Configuration& config, const Edge& e);
std::vector<Edge> detect_stick_edges(const Configuration& config);

// Axis-parallel segment at fixed coordinate `fixed`, spanning lo..hi along the other axis.
struct Segment {
    Orientation orientation = Orientation::vertical;
    int fixed = 0;
    int lo = 0;
    int hi = 0;
};

struct Stick {
    StickType type;
    Point anchor;  // lower or left end; on a torus the run may continue past the seam
    int length = 0;
    bool wraps = false;

    Orientation orientation() const { return type.orientation; }
    Segment segment() const;
    std::vector<Edge> edges() const;  // unwrapped coordinates
};

std::vector<Stick> extract_sticks(const Configuration& config);

// [x, x+K] x [y, y+L].
struct Rect {
    int x = 0;
    int y = 0;
    int K = 0;
    int L = 0;
};

// A segment divides R in its own orientation: it spans R along its length and its fixed
// coordinate lies strictly inside R.
bool divides(const Segment& s, const Rect& r);
bool vertically_divides(const Segment& s, const Rect& r);
bool horizontally_divides(const Segment& s, const Rect& r);

// R shrunk by K/N and L/N on every side.
Rect inner_rect(const Rect& r, int N);

// Stick divides R and its inner rectangle. Torus images of the stick are taken into account
// when `config` is periodic.
bool properly_divides(const Configuration& config, const Stick& stick, const Rect& r, int N);
bool stick_divides(const Configuration& config, const Stick& stick, const Rect& r);

struct PsiSet {
    int K = 0, L = 0, N = 0;
    int columns = 0, rows = 0;  // index range of window corners
    std::vector<Point> points;
    bool contains(Point p) const;
};

PsiSet psi_set(const Configuration& config, int K, int L, StickType type, int N = 4);

// Pairs (p, q), p in `a` and q in `b`, with max(|dx|, |dy|) <= 1 in window-index space.
int king_adjacent_pairs(const std::vector<Point>& a, const std::vector<Point>& b);
// King-adjacent pairs between the vertical (ver0 and ver1) and horizontal Psi points.
int psi_orientation_conflicts(const Configuration& config, int K, int L, int N = 4);

// b = 2 floor(c sqrt(lambda) / (2N)) with c = 2, floored at 2.
int default_stick_threshold(double lambda, int N = 4);

struct PhaseVote {
    Phase phase = Phase::undetermined;
    std::array<int, 4> qualifying{};  // sticks of length >= b per type
};

// Strict majority among sticks of length >= b; fewer than `a` qualifying sticks or no strict
// majority gives undetermined.
PhaseVote classify_phase_detail(const Configuration& config, int a, int b);
Phase classify_phase(const Configuration& config, int a, int b);

struct StickCensus {
    std::array<int, 4> counts{};
    std::array<std::map<int, int>, 4> length_histogram;
    int edges = 0;
    int wrapping = 0;
};

StickCensus stick_census(const Configuration& config);
nlohmann::json to_json(const StickCensus& census);
nlohmann::json to_json(const PsiSet& psi, StickType type);

// Invariant checks used by tests and the acceptance suite.
bool vertical_meets_horizontal(const Configuration& config);
bool rectangle_divided_both_ways(const Configuration& config, const std::vector<Stick>& sticks);
// Parities of the tiles flanking the stick, if constant along its whole length.
std::optional<std::pair<ParityClass, ParityClass>> stick_flank_parities(const Configuration& config,
                                                                        const Stick& stick);

}  // namespace squarepack
