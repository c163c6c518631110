#include "squarepack/sticks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "squarepack/errors.hpp"

namespace squarepack {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::ver0: return "ver0";
        case Phase::ver1: return "ver1";
        case Phase::hor0: return "hor0";
        case Phase::hor1: return "hor1";
        case Phase::undetermined: return "undetermined";
    }
    return "undetermined";
}

Phase parse_phase(std::string_view text) {
    for (Phase p : {Phase::ver0, Phase::ver1, Phase::hor0, Phase::hor1, Phase::undetermined})
        if (to_string(p) == text) return p;
    throw SpecError("unknown phase '" + std::string(text) + "'");
}

std::string type_name(StickType t) {
    return std::string(t.orientation == Orientation::vertical ? "ver" : "hor") + std::to_string(t.parity);
}

namespace {

// Lower-left corners of the edges that need checking, per boundary mode.
struct EdgeRange {
    int x0, x1, y0, y1;  // half-open
};

EdgeRange edge_range(const Configuration& c, Orientation o) {
    int W = c.width(), H = c.height();
    bool v = o == Orientation::vertical;
    switch (c.boundary()) {
        case Boundary::periodic: return {0, W, 0, H};
        case Boundary::fully_packed: return v ? EdgeRange{0, W + 1, 0, H} : EdgeRange{0, W, 0, H + 1};
        case Boundary::free: return v ? EdgeRange{-1, W + 1, -1, H} : EdgeRange{-1, W, -1, H + 1};
    }
    return {0, W, 0, H};
}

std::pair<Point, Point> flank_faces(const Edge& e) {
    if (e.orientation == Orientation::vertical)
        return {{e.start.x - 1, e.start.y}, {e.start.x, e.start.y}};
    return {{e.start.x, e.start.y - 1}, {e.start.x, e.start.y}};
}

}  // namespace

bool is_stick_edge(const Configuration& config, const Edge& e) {
    auto [fa, fb] = flank_faces(e);
    auto a = config.covering_center(fa);
    if (!a) return false;
    auto b = config.covering_center(fb);
    if (!b) return false;
    return !(tile_parity_class(*a) == tile_parity_class(*b));
}

std::vector<Edge> detect_stick_edges(const Configuration& config) {
    std::vector<Edge> out;
    for (Orientation o : {Orientation::horizontal, Orientation::vertical}) {
        EdgeRange r = edge_range(config, o);
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x) {
                Edge e{{x, y}, o};
                if (is_stick_edge(config, e)) out.push_back(e);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Segment Stick::segment() const {
    if (type.orientation == Orientation::vertical)
        return {Orientation::vertical, anchor.x, anchor.y, anchor.y + length};
    return {Orientation::horizontal, anchor.y, anchor.x, anchor.x + length};
}

std::vector<Edge> Stick::edges() const {
    std::vector<Edge> out;
    for (int k = 0; k < length; ++k)
        out.push_back(type.orientation == Orientation::vertical ? Edge{{anchor.x, anchor.y + k}, Orientation::vertical}
                                                              : Edge{{anchor.x + k, anchor.y}, Orientation::horizontal});
    return out;
}

std::vector<Stick> extract_sticks(const Configuration& config) {
    std::vector<Stick> out;
    bool periodic = config.boundary() == Boundary::periodic;
    for (Orientation o : {Orientation::vertical, Orientation::horizontal}) {
        bool vert = o == Orientation::vertical;
        EdgeRange r = edge_range(config, o);
        // Lines at fixed coordinate, runs along the other axis.
        int f0 = vert ? r.x0 : r.y0, f1 = vert ? r.x1 : r.y1;
        int s0 = vert ? r.y0 : r.x0, s1 = vert ? r.y1 : r.x1;
        int n = s1 - s0;
        for (int f = f0; f < f1; ++f) {
            std::vector<uint8_t> on(n);
            for (int k = 0; k < n; ++k) {
                Point p = vert ? Point{f, s0 + k} : Point{s0 + k, f};
                on[k] = is_stick_edge(config, {p, o});
            }
            StickType type{o, floor_mod(f, 2)};
            auto make = [&](int start, int len, bool wraps) {
                Point a = vert ? Point{f, s0 + start} : Point{s0 + start, f};
                out.push_back({type, a, len, wraps});
            };
            if (periodic && std::all_of(on.begin(), on.end(), [](uint8_t b) { return b; })) {
                make(0, n, true);
                continue;
            }
            for (int k = 0; k < n; ++k) {
                if (!on[k]) continue;
                bool starts = periodic ? !on[(k - 1 + n) % n] : (k == 0 || !on[k - 1]);
                if (!starts) continue;
                int len = 0;
                if (periodic) {
                    while (on[(k + len) % n]) ++len;
                } else {
                    while (k + len < n && on[k + len]) ++len;
                }
                make(k, len, false);
            }
        }
    }
    return out;
}

bool divides(const Segment& s, const Rect& r) {
    if (s.orientation == Orientation::vertical)
        return s.lo <= r.y && r.y + r.L <= s.hi && r.x < s.fixed && s.fixed < r.x + r.K;
    return s.lo <= r.x && r.x + r.K <= s.hi && r.y < s.fixed && s.fixed < r.y + r.L;
}

bool vertically_divides(const Segment& s, const Rect& r) {
    return s.orientation == Orientation::vertical && divides(s, r);
}

bool horizontally_divides(const Segment& s, const Rect& r) {
    return s.orientation == Orientation::horizontal && divides(s, r);
}

Rect inner_rect(const Rect& r, int N) {
    if (N <= 2) throw DimensionError("division parameter N must exceed 2");
    if (r.K % N != 0 || r.L % N != 0)
        throw DimensionError("rectangle " + std::to_string(r.K) + "x" + std::to_string(r.L) +
                             " is not divisible by N=" + std::to_string(N));
    return {r.x + r.K / N, r.y + r.L / N, r.K - 2 * r.K / N, r.L - 2 * r.L / N};
}

bool stick_divides(const Configuration& config, const Stick& stick, const Rect& r) {
    Segment s = stick.segment();
    if (config.boundary() != Boundary::periodic) return divides(s, r);
    bool vert = stick.orientation() == Orientation::vertical;
    int fixed_period = vert ? config.width() : config.height();
    int run_period = vert ? config.height() : config.width();
    for (int k = -2; k <= 2; ++k) {
        Segment t = s;
        t.fixed = s.fixed + k * fixed_period;
        if (stick.wraps) {
            t.lo = std::min(vert ? r.y : r.x, t.lo);
            t.hi = std::max(vert ? r.y + r.L : r.x + r.K, t.hi);
            if (divides(t, r)) return true;
            continue;
        }
        for (int j = -2; j <= 2; ++j) {
            Segment u = t;
            u.lo = s.lo + j * run_period;
            u.hi = s.hi + j * run_period;
            if (divides(u, r)) return true;
        }
    }
    return false;
}

bool properly_divides(const Configuration& config, const Stick& stick, const Rect& r, int N) {
    Rect inner = inner_rect(r, N);
    return stick_divides(config, stick, r) && stick_divides(config, stick, inner);
}

bool PsiSet::contains(Point p) const {
    return std::binary_search(points.begin(), points.end(), p);
}

PsiSet psi_set(const Configuration& config, int K, int L, StickType type, int N) {
    if (K < 1 || L < 1) throw DimensionError("block sizes must be positive");
    if (N <= 2) throw DimensionError("division parameter N must exceed 2");
    if (N * K > config.width() || N * L > config.height())
        throw WrapError("a " + std::to_string(N * K) + "x" + std::to_string(N * L) +
                        " window does not fit in the " + std::to_string(config.width()) + "x" +
                        std::to_string(config.height()) + " region without wrapping");
    PsiSet psi{K, L, N, (config.width() - N * K) / K + 1, (config.height() - N * L) / L + 1, {}};
    std::vector<Stick> sticks;
    for (const Stick& s : extract_sticks(config))
        if (s.type == type) sticks.push_back(s);
    for (int x = 0; x < psi.columns; ++x)
        for (int y = 0; y < psi.rows; ++y) {
            Rect r{x * K, y * L, N * K, N * L};
            for (const Stick& s : sticks)
                if (properly_divides(config, s, r, N)) {
                    psi.points.push_back({x, y});
                    break;
                }
        }
    std::sort(psi.points.begin(), psi.points.end());
    return psi;
}

int king_adjacent_pairs(const std::vector<Point>& a, const std::vector<Point>& b) {
    std::set<Point> sb(b.begin(), b.end());
    int pairs = 0;
    for (Point p : a)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) pairs += static_cast<int>(sb.count({p.x + dx, p.y + dy}));
    return pairs;
}

int psi_orientation_conflicts(const Configuration& config, int K, int L, int N) {
    std::set<Point> ver, hor;
    for (int t = 0; t < 4; ++t) {
        StickType type = StickType::from_index(t);
        PsiSet psi = psi_set(config, K, L, type, N);
        (type.orientation == Orientation::vertical ? ver : hor).insert(psi.points.begin(), psi.points.end());
    }
    return king_adjacent_pairs({ver.begin(), ver.end()}, {hor.begin(), hor.end()});
}

int default_stick_threshold(double lambda, int N) {
    int b = 2 * static_cast<int>(std::floor(2.0 * std::sqrt(lambda) / (2.0 * N)));
    return std::max(2, b);
}

PhaseVote classify_phase_detail(const Configuration& config, int a, int b) {
    PhaseVote vote;
    for (const Stick& s : extract_sticks(config))
        if (s.length >= b) ++vote.qualifying[s.type.index()];
    int total = 0, best = 0;
    for (int i = 0; i < 4; ++i) {
        total += vote.qualifying[i];
        if (vote.qualifying[i] > vote.qualifying[best]) best = i;
    }
    if (total == 0 || total < a) return vote;
    if (2 * vote.qualifying[best] > total) vote.phase = static_cast<Phase>(best);
    return vote;
}

Phase classify_phase(const Configuration& config, int a, int b) {
    return classify_phase_detail(config, a, b).phase;
}

StickCensus stick_census(const Configuration& config) {
    StickCensus c;
    for (const Stick& s : extract_sticks(config)) {
        int i = s.type.index();
        ++c.counts[i];
        ++c.length_histogram[i][s.length];
        c.edges += s.length;
        if (s.wraps) ++c.wrapping;
    }
    return c;
}

nlohmann::json to_json(const StickCensus& census) {
    nlohmann::json types = nlohmann::json::object();
    for (int i = 0; i < 4; ++i) {
        nlohmann::json hist = nlohmann::json::object();
        for (auto [len, n] : census.length_histogram[i]) hist[std::to_string(len)] = n;
        types[type_name(StickType::from_index(i))] = {{"count", census.counts[i]}, {"length_histogram", hist}};
    }
    return {{"types", types}, {"stick_edges", census.edges}, {"wrapping", census.wrapping}};
}

nlohmann::json to_json(const PsiSet& psi, StickType type) {
    std::vector<std::string> rows;
    for (int y = psi.rows - 1; y >= 0; --y) {
        std::string row;
        for (int x = 0; x < psi.columns; ++x) row += psi.contains({x, y}) ? '#' : '.';
        rows.push_back(row);
    }
    nlohmann::json pts = nlohmann::json::array();
    for (Point p : psi.points) pts.push_back({p.x, p.y});
    return {{"type", type_name(type)}, {"K", psi.K}, {"L", psi.L}, {"N", psi.N},
            {"columns", psi.columns}, {"rows", psi.rows}, {"points", pts}, {"bitmap", rows}};
}

bool vertical_meets_horizontal(const Configuration& config) {
    std::set<Point> vert;
    const Domain& d = config.domain();
    std::vector<Edge> edges = detect_stick_edges(config);
    for (const Edge& e : edges)
        if (e.orientation == Orientation::vertical) {
            vert.insert(d.wrap(e.start));
            vert.insert(d.wrap(e.end()));
        }
    for (const Edge& e : edges)
        if (e.orientation == Orientation::horizontal &&
            (vert.count(d.wrap(e.start)) || vert.count(d.wrap(e.end()))))
            return true;
    return false;
}

bool rectangle_divided_both_ways(const Configuration& config, const std::vector<Stick>& sticks) {
    bool periodic = config.boundary() == Boundary::periodic;
    int W = config.width(), H = config.height();
    auto strictly_inside = [](int v, int lo, int hi, bool unbounded) {
        return unbounded || (lo < v && v < hi);
    };
    for (const Stick& v : sticks) {
        if (v.orientation() != Orientation::vertical) continue;
        Segment sv = v.segment();
        for (const Stick& h : sticks) {
            if (h.orientation() != Orientation::horizontal) continue;
            Segment sh = h.segment();
            int range = periodic ? 2 : 0;
            for (int k = -range; k <= range; ++k)
                for (int j = -range; j <= range; ++j) {
                    int xv = sv.fixed + k * W, yh = sh.fixed + j * H;
                    if (strictly_inside(xv, sh.lo, sh.hi, h.wraps) &&
                        strictly_inside(yh, sv.lo, sv.hi, v.wraps))
                        return true;
                }
        }
    }
    return false;
}

std::optional<std::pair<ParityClass, ParityClass>> stick_flank_parities(const Configuration& config,
                                                                        const Stick& stick) {
    std::optional<std::pair<ParityClass, ParityClass>> seen;
    for (const Edge& e : stick.edges()) {
        auto [fa, fb] = flank_faces(e);
        auto a = config.covering_center(fa);
        auto b = config.covering_center(fb);
        if (!a || !b) return std::nullopt;
        std::pair<ParityClass, ParityClass> p{tile_parity_class(*a), tile_parity_class(*b)};
        if (!seen) seen = p;
        else if (!(seen->first == p.first && seen->second == p.second)) return std::nullopt;
    }
    return seen;
}

}  // namespace squarepack
