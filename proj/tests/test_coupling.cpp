#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "squarepack/coupling.hpp"
#include "squarepack/errors.hpp"
#include "squarepack/exact.hpp"
#include "squarepack/rng.hpp"

using namespace squarepack;

namespace {

// Brute-force BFS over the point set, independent of the union-find labelling.
std::vector<std::set<Point>> bfs_clusters(const std::vector<Point>& pts, const Domain* torus) {
    auto key = [&](Point p) { return torus ? torus->wrap(p) : p; };
    std::set<Point> all;
    for (Point p : pts) all.insert(key(p));
    std::set<Point> seen;
    std::vector<std::set<Point>> out;
    for (Point s : all) {
        if (seen.count(s)) continue;
        std::set<Point> cluster{s};
        std::queue<Point> q;
        q.push(s);
        seen.insert(s);
        while (!q.empty()) {
            Point u = q.front();
            q.pop();
            for (Point v : all)
                if (!seen.count(v)) {
                    int dx = std::abs(v.x - u.x), dy = std::abs(v.y - u.y);
                    if (torus) {
                        dx = std::min(dx, torus->width - dx);
                        dy = std::min(dy, torus->height - dy);
                    }
                    if (std::max(dx, dy) == 1) {
                        seen.insert(v);
                        cluster.insert(v);
                        q.push(v);
                    }
                }
        }
        out.push_back(cluster);
    }
    return out;
}

std::vector<uint8_t> cell_vector(const Configuration& c) {
    std::vector<uint8_t> v;
    for (int y = 0; y < c.height(); ++y)
        for (int x = 0; x < c.width(); ++x) v.push_back(c.occupied({x, y}));
    return v;
}

}  // namespace

TEST_CASE("disagreement sets") {
    auto a = Configuration::create(8, 8, Boundary::periodic, std::vector<Point>{{1, 1}, {5, 5}});
    CHECK(disagreement_set(a, a).empty());
    auto b = a.with({3, 6}, true);
    auto d = disagreement_set(a, b);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == Point{3, 6});
    auto c = Configuration::create(8, 8, Boundary::periodic, std::vector<Point>{{2, 2}});
    CHECK(disagreement_set(a, c) == disagreement_set(c, a));
    CHECK(disagreement_set(a, c).size() == 3);
    CHECK_THROWS_AS(disagreement_set(a, Configuration::empty(8, 6, Boundary::periodic)), ShapeMismatch);
    CHECK_THROWS_AS(disagreement_set(a, Configuration::empty(8, 8, Boundary::free)), ShapeMismatch);
}

TEST_CASE("king clusters") {
    std::vector<Point> diag{{0, 0}, {1, 1}};
    CHECK(king_clusters(diag).count() == 1);
    std::vector<Point> apart{{0, 0}, {2, 2}};
    CHECK(king_clusters(apart).count() == 2);
    CHECK(king_clusters(std::vector<Point>{}).count() == 0);

    Domain torus{6, 6, Boundary::periodic};
    std::vector<Point> seam{{0, 3}, {5, 4}};
    CHECK(king_clusters(seam).count() == 2);
    CHECK(king_clusters(seam, &torus).count() == 1);
}

TEST_CASE("king clusters agree with a BFS oracle") {
    Domain torus{14, 12, Boundary::periodic};
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        Rng rng(seed);
        std::vector<Point> pts;
        double density = 0.05 + 0.3 * rng.uniform();
        for (int y = 0; y < torus.height; ++y)
            for (int x = 0; x < torus.width; ++x)
                if (rng.uniform() < density) pts.push_back({x, y});
        for (const Domain* t : {static_cast<const Domain*>(nullptr), static_cast<const Domain*>(&torus)}) {
            auto labels = king_clusters(pts, t);
            auto oracle = bfs_clusters(pts, t);
            REQUIRE(labels.count() == static_cast<int>(oracle.size()));
            std::map<int, std::set<Point>> mine;
            for (std::size_t i = 0; i < pts.size(); ++i) mine[labels.label[i]].insert(pts[i]);
            std::set<std::set<Point>> a, b(oracle.begin(), oracle.end());
            for (auto& [l, s] : mine) {
                CHECK(static_cast<int>(s.size()) == labels.sizes[l]);
                a.insert(s);
            }
            CHECK(a == b);
        }
    }
}

TEST_CASE("cluster swap preserves the product measure on the 4x4 torus") {
    SiteLattice lattice(Domain{4, 4, Boundary::periodic});
    auto masks = enumerate_configurations(lattice);
    std::vector<Configuration> configs;
    std::map<std::vector<uint8_t>, int> index;
    for (uint64_t m : masks) {
        configs.push_back(lattice.to_configuration(m));
        index[cell_vector(configs.back())] = static_cast<int>(configs.size()) - 1;
    }
    const int n = static_cast<int>(configs.size());
    const double lambda = 2.0;
    std::vector<double> w(n);
    double z = 0;
    for (int i = 0; i < n; ++i) z += w[i] = std::pow(lambda, configs[i].tile_count());

    std::vector<Point> seeds{{0, 0}, {2, 1}};
    std::vector<int> image(static_cast<std::size_t>(n) * n, -1);
    std::vector<double> pushed(static_cast<std::size_t>(n) * n, 0.0);
    int moved = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto [p, q] = cluster_swap(configs[i], configs[j], seeds);
            CHECK(p.tile_count() + q.tile_count() == configs[i].tile_count() + configs[j].tile_count());
            int pi = index.at(cell_vector(p)), qi = index.at(cell_vector(q));
            if (pi != i) ++moved;
            image[static_cast<std::size_t>(i) * n + j] = pi * n + qi;
            pushed[static_cast<std::size_t>(pi) * n + qi] += w[i] * w[j] / (z * z);
            auto [pp, qq] = cluster_swap(p, q, seeds);
            CHECK(pp == configs[i]);
            CHECK(qq == configs[j]);
        }
    CHECK(moved > 0);
    std::vector<int> sorted = image;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    double tv = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) tv += std::abs(pushed[static_cast<std::size_t>(i) * n + j] - w[i] * w[j] / (z * z));
    CHECK(tv / 2 < 1e-12);
}

TEST_CASE("cluster reach") {
    Domain torus{20, 20, Boundary::periodic};
    std::vector<Point> line{{3, 0}, {3, 1}, {3, 2}, {3, 3}, {3, 4}};
    auto r = cluster_reach(line, torus);
    CHECK(r.reach_y == std::vector<int>{4, 3, 2, 3, 4});
    CHECK(r.reach_x == std::vector<int>{0, 0, 0, 0, 0});

    std::vector<Point> seam{{19, 5}, {0, 6}, {1, 7}};
    auto s = cluster_reach(seam, torus);
    CHECK(s.reach_x == std::vector<int>{2, 1, 2});

    std::vector<Point> column;
    for (int y = 0; y < 20; ++y) column.push_back({7, y});
    auto c = cluster_reach(column, torus);
    CHECK(std::all_of(c.reach_y.begin(), c.reach_y.end(), [](int v) { return v == 10; }));
}

TEST_CASE("tail fit") {
    std::vector<TailRow> rows;
    for (int d = 0; d <= 10; ++d) {
        double p = 0.4 * std::exp(-d / 3.0);
        rows.push_back({Axis::y, d, d < 8 ? 1000 : 10, p});
    }
    auto f = fit_tail(rows, 50);
    CHECK(f.resolved);
    CHECK(f.points == 7);
    CHECK(f.length == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(f.error == doctest::Approx(0.0).epsilon(1e-6));
    rows[2].count = 0;
    CHECK_FALSE(fit_tail(rows, 50).resolved);
}

TEST_CASE("radius tail experiment on a small torus") {
    TailParams p;
    p.width = 16;
    p.height = 16;
    p.lambda = 400;
    p.sweeps = 600;
    p.burn_in = 100;
    p.thinning = 10;
    p.min_count = 5;
    p.threads = 1;
    auto t = radius_tail_experiment(p);
    CHECK(t.pairs_used + t.pairs_excluded == 50);
    REQUIRE(t.pairs_used > 0);
    REQUIRE(t.horizontal.size() == 9);
    REQUIRE(t.vertical.size() == 9);
    CHECK(t.horizontal[0].probability == doctest::Approx(t.disagreement_density));
    CHECK(t.vertical[0].count == t.horizontal[0].count);
    for (const auto* rows : {&t.horizontal, &t.vertical})
        for (std::size_t d = 1; d < rows->size(); ++d) CHECK((*rows)[d].count <= (*rows)[d - 1].count);

    auto again = radius_tail_experiment(p);
    CHECK(tail_csv(again) == tail_csv(t));
    CHECK(tail_csv(t).rfind("direction,d,count,probability\n", 0) == 0);
    auto j = to_json(t);
    CHECK(j["pairs_used"] == t.pairs_used);
    CHECK(j["params"]["phase"] == "ver0");

    p.phase = Phase::undetermined;
    CHECK_THROWS_AS(radius_tail_experiment(p), SpecError);
}
