#include "squarepack/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "squarepack/errors.hpp"
#include "squarepack/parallel.hpp"
#include "squarepack/rng.hpp"
#include "squarepack/sampler.hpp"

namespace squarepack {
namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

int torus_distance(int d, int period) {
    int m = floor_mod(d, period);
    return std::min(m, period - m);
}

std::vector<uint8_t> cells_of(const Configuration& c) {
    std::vector<uint8_t> cells(static_cast<std::size_t>(c.area()));
    for (int y = 0; y < c.height(); ++y)
        for (int x = 0; x < c.width(); ++x) cells[static_cast<std::size_t>(y) * c.width() + x] = c.occupied({x, y});
    return cells;
}

}  // namespace

std::vector<Point> disagreement_set(const Configuration& a, const Configuration& b) {
    if (!(a.domain() == b.domain()))
        throw ShapeMismatch("configurations differ in dimensions or boundary");
    std::vector<Point> out;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (a.occupied({x, y}) != b.occupied({x, y})) out.push_back({x, y});
    return out;
}

ClusterLabels king_clusters(std::span<const Point> points, const Domain* torus) {
    auto key = [&](Point p) { return torus ? torus->wrap(p) : p; };
    std::map<Point, int> index;
    for (std::size_t i = 0; i < points.size(); ++i) index.emplace(key(points[i]), static_cast<int>(i));
    UnionFind uf(static_cast<int>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy) continue;
                auto it = index.find(key({points[i].x + dx, points[i].y + dy}));
                if (it != index.end()) uf.unite(static_cast<int>(i), it->second);
            }
    ClusterLabels out;
    out.label.assign(points.size(), -1);
    std::map<int, int> numbering;
    for (std::size_t i = 0; i < points.size(); ++i) {
        int root = uf.find(static_cast<int>(i));
        auto [it, fresh] = numbering.emplace(root, out.count());
        if (fresh) out.sizes.push_back(0);
        out.label[i] = it->second;
        ++out.sizes[it->second];
    }
    return out;
}

std::pair<Configuration, Configuration> cluster_swap(const Configuration& a, const Configuration& b,
                                                     std::span<const Point> seeds) {
    auto delta = disagreement_set(a, b);
    const Domain* torus = a.boundary() == Boundary::periodic ? &a.domain() : nullptr;
    auto labels = king_clusters(delta, torus);
    std::vector<char> chosen(labels.count(), 0);
    for (Point s : seeds) {
        Point w = a.domain().wrap(s);
        auto it = std::lower_bound(delta.begin(), delta.end(), w,
                                   [](Point p, Point q) { return std::tie(p.y, p.x) < std::tie(q.y, q.x); });
        if (it != delta.end() && *it == w) chosen[labels.label[it - delta.begin()]] = 1;
    }
    auto ca = cells_of(a), cb = cells_of(b);
    for (std::size_t i = 0; i < delta.size(); ++i)
        if (chosen[labels.label[i]]) {
            std::size_t k = static_cast<std::size_t>(delta[i].y) * a.width() + delta[i].x;
            std::swap(ca[k], cb[k]);
        }
    return {Configuration::from_cells(a.width(), a.height(), a.boundary(), ca),
            Configuration::from_cells(b.width(), b.height(), b.boundary(), cb)};
}

void TailParams::validate() const {
    if (width < 4 || height < 4 || width % 2 || height % 2)
        throw DimensionError("coupling torus dimensions must be even and at least 4");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw NonpositiveFugacity("lambda must be positive");
    if (sweeps < 0 || burn_in < 0 || thinning < 1) throw SpecError("invalid sweep schedule");
    if (phase == Phase::undetermined) throw SpecError("coupling chains need a seed phase");
    if (N < 3) throw SpecError("N must be at least 3");
}

std::optional<double> TailTable::anisotropy() const {
    if (!fit_horizontal.resolved || !fit_vertical.resolved) return std::nullopt;
    return fit_vertical.length / fit_horizontal.length;
}

ClusterReach cluster_reach(std::span<const Point> points, const Domain& torus) {
    const int W = torus.width, H = torus.height;
    std::vector<int> at(static_cast<std::size_t>(W) * H, -1);
    for (std::size_t i = 0; i < points.size(); ++i) {
        Point p = torus.wrap(points[i]);
        at[static_cast<std::size_t>(p.y) * W + p.x] = static_cast<int>(i);
    }
    ClusterReach out;
    out.reach_x.assign(points.size(), 0);
    out.reach_y.assign(points.size(), 0);
    std::vector<char> seen(points.size(), 0);
    std::vector<Point> unwrapped(points.size());
    std::vector<int> members;
    for (std::size_t start = 0; start < points.size(); ++start) {
        if (seen[start]) continue;
        members.clear();
        bool wrap_x = false, wrap_y = false;
        std::queue<int> q;
        q.push(static_cast<int>(start));
        seen[start] = 1;
        unwrapped[start] = torus.wrap(points[start]);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            members.push_back(u);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    Point e{unwrapped[u].x + dx, unwrapped[u].y + dy};
                    Point w = torus.wrap(e);
                    int v = at[static_cast<std::size_t>(w.y) * W + w.x];
                    if (v < 0) continue;
                    if (!seen[v]) {
                        seen[v] = 1;
                        unwrapped[v] = e;
                        q.push(v);
                    } else {
                        wrap_x |= unwrapped[v].x != e.x;
                        wrap_y |= unwrapped[v].y != e.y;
                    }
                }
        }
        // Reach along one axis depends only on the member's coordinate on that axis.
        auto fill = [&](bool wraps, int period, auto coord, std::vector<int>& reach) {
            if (wraps) {
                for (int m : members) reach[m] = period / 2;
                return;
            }
            std::vector<int> values;
            for (int m : members) values.push_back(coord(unwrapped[m]));
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            std::map<int, int> best;
            for (int c : values) {
                int r = 0;
                for (int o : values) r = std::max(r, torus_distance(o - c, period));
                best[c] = r;
            }
            for (int m : members) reach[m] = best[coord(unwrapped[m])];
        };
        fill(wrap_x, W, [](Point p) { return p.x; }, out.reach_x);
        fill(wrap_y, H, [](Point p) { return p.y; }, out.reach_y);
    }
    return out;
}

TailFit fit_tail(std::span<const TailRow> rows, int64_t min_count) {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        if (r.d < 1) continue;
        if (r.count < min_count || r.probability <= 0.0) break;
        xs.push_back(r.d);
        ys.push_back(std::log(r.probability));
    }
    TailFit f;
    f.points = static_cast<int>(xs.size());
    if (xs.size() < 2) return f;
    const double n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    double slope = sxy / sxx;
    if (!(slope < 0.0)) return f;
    double ssr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (my + slope * (xs[i] - mx));
        ssr += r * r;
    }
    double slope_se = xs.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    f.length = -1.0 / slope;
    f.error = slope_se / (slope * slope);
    f.resolved = true;
    return f;
}

TailTable radius_tail_experiment(const TailParams& params) {
    params.validate();
    const int threads = resolve_threads(params.threads);
    const int b = params.phase_b > 0 ? params.phase_b : default_stick_threshold(params.lambda, params.N);
    Configuration initial = seed_phase_configuration(params.width, params.height, Boundary::periodic, params.phase);

    std::array<std::vector<Configuration>, 2> samples;
    parallel_for(2, threads, [&](std::size_t c) {
        ChainParams cp;
        cp.initial = initial;
        if (params.random_offsets) {
            bool vertical = params.phase == Phase::ver0 || params.phase == Phase::ver1;
            int lines = (vertical ? params.width : params.height) / 2;
            Rng rng(params.seed, 1000 + c);
            std::vector<int> offsets(lines);
            for (int& o : offsets) o = static_cast<int>(rng.below(2));
            cp.initial = seed_phase_configuration(params.width, params.height, Boundary::periodic, params.phase, offsets);
        }
        cp.lambda = params.lambda;
        cp.seed = params.seed;
        cp.stream = c;
        cp.sweeps = params.sweeps;
        cp.burn_in = params.burn_in;
        cp.thinning = params.thinning;
        cp.translation_move_fraction = params.translation_move_fraction;
        samples[c] = collect_samples(cp);
    });

    const Domain& torus = initial.domain();
    const int dmax_x = params.max_distance > 0 ? std::min(params.max_distance, params.width / 2) : params.width / 2;
    const int dmax_y = params.max_distance > 0 ? std::min(params.max_distance, params.height / 2) : params.height / 2;
    const std::size_t pairs = std::min(samples[0].size(), samples[1].size());

    struct Partial {
        std::vector<int64_t> hist_x, hist_y;
        int64_t used = 0, excluded = 0, disagreements = 0;
    };
    std::vector<Partial> partial(pairs);
    parallel_for(pairs, threads, [&](std::size_t i) {
        Partial& p = partial[i];
        p.hist_x.assign(params.width / 2 + 1, 0);
        p.hist_y.assign(params.height / 2 + 1, 0);
        if (classify_phase(samples[0][i], params.phase_a, b) != params.phase ||
            classify_phase(samples[1][i], params.phase_a, b) != params.phase) {
            p.excluded = 1;
            return;
        }
        p.used = 1;
        auto delta = disagreement_set(samples[0][i], samples[1][i]);
        p.disagreements = static_cast<int64_t>(delta.size());
        auto reach = cluster_reach(delta, torus);
        for (std::size_t k = 0; k < delta.size(); ++k) {
            ++p.hist_x[reach.reach_x[k]];
            ++p.hist_y[reach.reach_y[k]];
        }
    });

    TailTable t;
    t.params = params;
    std::vector<int64_t> hx(params.width / 2 + 1, 0), hy(params.height / 2 + 1, 0);
    int64_t disagreements = 0;
    for (const auto& p : partial) {
        t.pairs_used += p.used;
        t.pairs_excluded += p.excluded;
        disagreements += p.disagreements;
        for (std::size_t r = 0; r < p.hist_x.size(); ++r) hx[r] += p.hist_x[r];
        for (std::size_t r = 0; r < p.hist_y.size(); ++r) hy[r] += p.hist_y[r];
    }
    t.trials = t.pairs_used * params.width * params.height;
    t.disagreement_density = t.trials ? static_cast<double>(disagreements) / t.trials : 0.0;
    auto tabulate = [&](Axis axis, const std::vector<int64_t>& hist, int dmax, std::vector<TailRow>& rows) {
        int64_t tail = 0;
        std::vector<int64_t> at_least(hist.size() + 1, 0);
        for (int r = static_cast<int>(hist.size()) - 1; r >= 0; --r) at_least[r] = tail += hist[r];
        for (int d = 0; d <= dmax; ++d)
            rows.push_back({axis, d, at_least[d], t.trials ? static_cast<double>(at_least[d]) / t.trials : 0.0});
    };
    tabulate(Axis::x, hx, dmax_x, t.horizontal);
    tabulate(Axis::y, hy, dmax_y, t.vertical);
    t.fit_horizontal = fit_tail(t.horizontal, params.min_count);
    t.fit_vertical = fit_tail(t.vertical, params.min_count);
    return t;
}

std::string tail_csv(const TailTable& table) {
    std::ostringstream out;
    out << "direction,d,count,probability\n";
    out.precision(12);
    for (const auto& r : table.horizontal) out << "horizontal," << r.d << ',' << r.count << ',' << r.probability << '\n';
    for (const auto& r : table.vertical) out << "vertical," << r.d << ',' << r.count << ',' << r.probability << '\n';
    return out.str();
}

nlohmann::json to_json(const TailTable& table) {
    const auto& p = table.params;
    auto fit = [](const TailFit& f) {
        return nlohmann::json{{"length", f.length}, {"error", f.error}, {"points", f.points}, {"resolved", f.resolved}};
    };
    nlohmann::json j{{"params",
                      {{"width", p.width},
                       {"height", p.height},
                       {"lambda", p.lambda},
                       {"seed", p.seed},
                       {"sweeps", p.sweeps},
                       {"burn_in", p.burn_in},
                       {"thinning", p.thinning},
                       {"translation_move_fraction", p.translation_move_fraction},
                       {"phase", std::string(to_string(p.phase))},
                       {"random_offsets", p.random_offsets},
                       {"N", p.N},
                       {"phase_a", p.phase_a},
                       {"phase_b", p.phase_b > 0 ? p.phase_b : default_stick_threshold(p.lambda, p.N)},
                       {"min_count", p.min_count}}},
                     {"pairs_used", table.pairs_used},
                     {"pairs_excluded", table.pairs_excluded},
                     {"trials", table.trials},
                     {"disagreement_density", table.disagreement_density},
                     {"fit_horizontal", fit(table.fit_horizontal)},
                     {"fit_vertical", fit(table.fit_vertical)},
                     {"fit_note", "least squares on log P(d) over d >= 1 with count >= min_count"}};
    if (auto a = table.anisotropy()) j["anisotropy"] = *a;
    else j["anisotropy"] = nullptr;
    return j;
}

}  // namespace squarepack
