#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "squarepack/errors.hpp"
#include "squarepack/observables.hpp"
#include "squarepack/rng.hpp"
#include "squarepack/sampler.hpp"

using namespace squarepack;

namespace {

std::vector<Configuration> chain_samples(int w, int h, double lambda, long sweeps, long burn_in, long thinning,
                                         uint64_t seed) {
    ChainParams p;
    Rng rng(seed, 77);
    std::vector<int> offsets(w / 2);
    for (int& o : offsets) o = static_cast<int>(rng.below(2));
    p.initial = seed_phase_configuration(w, h, Boundary::periodic, Phase::ver0, offsets);
    p.lambda = lambda;
    p.seed = seed;
    p.sweeps = sweeps;
    p.burn_in = burn_in;
    p.thinning = thinning;
    return collect_samples(p);
}

// Independent Bernoulli marks at every site, then every mark with a marked king neighbour is
// dropped. Occupancies at l-infinity distance 3 or more are independent.
std::vector<Configuration> thinned_noise(int w, int h, double p, int count, uint64_t seed) {
    Rng rng(seed);
    std::vector<Configuration> out;
    for (int s = 0; s < count; ++s) {
        std::vector<uint8_t> marks(static_cast<std::size_t>(w) * h);
        for (auto& m : marks) m = rng.uniform() < p;
        std::vector<uint8_t> cells(marks.size(), 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!marks[y * w + x]) continue;
                bool lonely = true;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if ((dx || dy) && marks[floor_mod(y + dy, h) * w + floor_mod(x + dx, w)]) lonely = false;
                cells[y * w + x] = lonely;
            }
        out.push_back(Configuration::from_cells(w, h, Boundary::periodic, cells));
    }
    return out;
}

}  // namespace

TEST_CASE("parity densities of fixed configurations") {
    std::vector<Configuration> packed{seed_phase_configuration(8, 8, Boundary::periodic, Phase::ver0)};
    auto d = parity_density(packed);
    CHECK(d.odd_x.mean == doctest::Approx(0.5));
    CHECK(d.even_x.mean == 0.0);
    CHECK(d.tile.mean == doctest::Approx(0.25));
    CHECK(d.vacancy.mean == 0.0);

    std::vector<Configuration> empty{Configuration::empty(8, 8, Boundary::periodic)};
    auto e = parity_density(empty);
    for (const auto& r : e.residue) CHECK(r.mean == 0.0);
    CHECK(e.tile.mean == 0.0);
    CHECK(e.vacancy.mean == 1.0);

    CHECK_THROWS_AS(parity_density(std::vector<Configuration>{}), InsufficientData);
}

TEST_CASE("class densities add up to the tile density") {
    auto samples = chain_samples(16, 12, 20.0, 400, 50, 10, 3);
    for (const auto& c : samples) {
        std::vector<Configuration> one{c};
        auto d = parity_density(one);
        double sum = 0;
        for (const auto& r : d.residue) sum += r.mean / 4.0;
        CHECK(sum == doctest::Approx(d.tile.mean));
        CHECK((d.even_x.mean + d.odd_x.mean) / 2 == doctest::Approx(d.tile.mean));
        CHECK(d.vacancy.mean == doctest::Approx(1.0 - 4.0 * d.tile.mean));
        for (const auto& r : d.residue) {
            CHECK(r.mean >= 0.0);
            CHECK(r.mean <= 1.0);
        }
    }
}

TEST_CASE("estimators do not depend on sample order") {
    auto samples = chain_samples(16, 16, 50.0, 600, 100, 5, 11);
    auto shuffled = samples;
    std::mt19937 gen(5);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    auto a = parity_density(samples), b = parity_density(shuffled);
    for (int k = 0; k < 4; ++k) CHECK(a.residue[k].mean == doctest::Approx(b.residue[k].mean).epsilon(1e-12));
    CHECK(two_point_covariance(samples, {1, 0}, {3, 0}).mean ==
          doctest::Approx(two_point_covariance(shuffled, {1, 0}, {3, 0}).mean).epsilon(1e-12));
    auto ca = correlation_function(samples, Axis::y), cb = correlation_function(shuffled, Axis::y);
    REQUIRE(ca.values.size() == cb.values.size());
    for (std::size_t k = 0; k < ca.values.size(); ++k)
        CHECK(ca.values[k].mean == doctest::Approx(cb.values[k].mean).epsilon(1e-12));
}

TEST_CASE("covariance") {
    auto noise = thinned_noise(16, 16, 0.1, 800, 9);
    auto var = two_point_covariance(noise, {4, 4}, {4, 4});
    std::vector<double> occ;
    for (const auto& c : noise) occ.push_back(c.occupied({4, 4}));
    double p = std::accumulate(occ.begin(), occ.end(), 0.0) / occ.size();
    CHECK(var.mean >= 0.0);
    CHECK(var.mean == doctest::Approx(p * (1 - p)).epsilon(1e-9));
    auto far = two_point_covariance(noise, {2, 2}, {10, 9});
    CHECK(std::abs(far.mean) < 4 * far.error + 1e-12);
}

TEST_CASE("correlation length of thinned noise is below resolution") {
    auto noise = thinned_noise(16, 16, 0.1, 400, 21);
    for (Axis a : {Axis::x, Axis::y}) {
        // Thinning leaves a weak positive correlation at distance 2 only, which is below the
        // stride of the fit.
        auto f = correlation_length_fit(noise, a);
        if (f.resolved) CHECK(f.length < 1.0);
        else CHECK(f.upper_bound < 1.0);
    }
    CHECK_THROWS_AS(correlation_length_fit(std::span<const Configuration>(noise.data(), 1), Axis::x), InsufficientData);
}

TEST_CASE("correlation fit recovers an exponential curve") {
    CorrelationCurve c;
    c.axis = Axis::y;
    for (int d = 0; d <= 20; d += 2) {
        c.distances.push_back(d);
        c.values.push_back({0.2 * std::exp(-d / 5.0), 1e-4});
    }
    auto f = fit_correlation_curve(c);
    CHECK(f.resolved);
    CHECK(f.length == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(correlation_csv(c).rfind("axis,d,C,stderr\n", 0) == 0);
}

TEST_CASE("even-x tiles in ordered samples see vacancies before the flanking sticks") {
    auto samples = chain_samples(32, 32, 130.0, 3000, 500, 50, 4);
    int even_tiles = 0, fully = 0;
    for (const auto& c : samples) {
        auto chk = even_column_tile_check(c);
        CHECK(chk.violations == 0);
        even_tiles += chk.tiles;
        fully += chk.fully_flanked_tiles;
        if (chk.fully_flanked_tiles > 0) CHECK(chk.min_vacancies_fully_flanked >= 4);
    }
    CHECK(even_tiles > 0);
    MESSAGE("even-x tiles " << even_tiles << ", fully flanked " << fully);
}

TEST_CASE("observable specs and reports") {
    auto s = ObservableSpec::from_names({"parity_density", "phase", "covariance:1,0,3,0"});
    CHECK(s.parity);
    CHECK(s.phase);
    CHECK_FALSE(s.sticks);
    REQUIRE(s.covariances.size() == 1);
    CHECK(s.covariances[0].second == Point{3, 0});
    CHECK_THROWS_AS(ObservableSpec::from_names({"nonsense"}), SpecError);
    CHECK_THROWS_AS(ObservableSpec::from_names({"covariance:1,2"}), SpecError);

    auto samples = chain_samples(16, 16, 30.0, 300, 50, 10, 8);
    RunMetadata meta;
    meta.seed = 8;
    meta.lambda = 30.0;
    meta.width = meta.height = 16;
    auto spec = ObservableSpec::from_names({"parity_density", "sticks", "phase", "structural", "covariance:1,0,3,0"});
    auto report = summarize(samples, spec, meta);
    auto j = report.to_json();
    CHECK(j["metadata"]["seed"] == 8);
    CHECK(j["samples"] == static_cast<int>(samples.size()));
    double tile = j["parity_density"]["tile_density"]["mean"];
    double vac = j["parity_density"]["vacancy_density"]["mean"];
    CHECK(vac == doctest::Approx(1.0 - 4.0 * tile));
    CHECK(j.contains("covariances"));
}
