#include <doctest.h>

#include <cmath>
#include <map>

#include "squarepack/errors.hpp"
#include "squarepack/exact.hpp"
#include "squarepack/sampler.hpp"

using namespace squarepack;

namespace {

uint64_t state_key(const ChainState& s, int sites) {
    uint64_t k = 0;
    for (int i = 0; i < sites; ++i) k |= static_cast<uint64_t>(s.cells()[i]) << i;
    return k;
}

double tv_to_exact(int w, int h, double lambda, long sweeps, uint64_t seed) {
    TorusEnsemble ens({w, h, Boundary::periodic}, lambda);
    std::map<uint64_t, double> exact;
    for (std::size_t i = 0; i < ens.states().size(); ++i)
        exact[ens.states()[i]] = static_cast<double>(ens.probabilities()[i]);
    ChainState st(Configuration::empty(w, h, Boundary::periodic), seed);
    std::map<uint64_t, long> hist;
    for (int k = 0; k < 1000; ++k) st.sweep(lambda, 0.5);
    for (long k = 0; k < sweeps; ++k) {
        st.sweep(lambda, 0.5);
        ++hist[state_key(st, w * h)];
    }
    double tv = 0;
    for (auto& [key, p] : exact) {
        auto it = hist.find(key);
        double q = it == hist.end() ? 0.0 : static_cast<double>(it->second) / sweeps;
        tv += std::fabs(p - q);
    }
    for (auto& [key, n] : hist) CHECK(exact.count(key) == 1);
    return tv / 2;
}

}  // namespace

TEST_CASE("phase seeds") {
    std::vector<int> alt{0, 1};
    auto ver0 = seed_phase_configuration(8, 8, Boundary::periodic, Phase::ver0, alt);
    CHECK(ver0.tile_count() == 16);
    for (Point p : ver0.centers()) CHECK(p.x % 2 == 1);
    CHECK(count_vacancies(ver0) == 0);
    auto hor0 = seed_phase_configuration(8, 8, Boundary::periodic, Phase::hor0, alt);
    CHECK(hor0 == ver0.transposed());
    CHECK(seed_phase_configuration(8, 8, Boundary::periodic, Phase::ver1, alt) == ver0.translated(1, 0));
    CHECK(seed_phase_configuration(8, 8, Boundary::periodic, Phase::hor1, alt) == hor0.translated(0, 1));
    auto rect = seed_phase_configuration(12, 8, Boundary::periodic, Phase::hor0, alt);
    CHECK(rect.width() == 12);
    CHECK(rect.tile_count() == 24);
    auto fp = seed_phase_configuration(8, 8, Boundary::fully_packed, Phase::ver0);
    CHECK(count_vacancies(fp) == 0);
    CHECK(seed_phase_configuration(8, 8, Boundary::free, Phase::ver0, alt).tile_count() == 16);
    CHECK_THROWS_AS(seed_phase_configuration(7, 8, Boundary::periodic, Phase::ver0), DimensionError);
    CHECK_THROWS_AS(seed_phase_configuration(8, 8, Boundary::periodic, Phase::undetermined), SpecError);
}

TEST_CASE("heat-bath insertion and removal probabilities at the first raster site") {
    const double lambda = 3.0;
    const int trials = 20000;
    int inserted = 0, removed = 0;
    auto packed = seed_phase_configuration(8, 8, Boundary::periodic, Phase::ver1, std::vector<int>{1});
    REQUIRE(packed.occupied({0, 0}));
    for (int t = 0; t < trials; ++t) {
        ChainState e(Configuration::empty(8, 8, Boundary::periodic), 11, t);
        e.sweep(lambda, 0.0);
        inserted += e.cells()[0];
        ChainState f(packed, 12, t);
        f.sweep(lambda, 0.0);
        removed += 1 - f.cells()[0];
    }
    double p_in = lambda / (1 + lambda), p_out = 1 / (1 + lambda);
    CHECK(std::fabs(static_cast<double>(inserted) / trials - p_in) < 4 * std::sqrt(p_in * (1 - p_in) / trials));
    CHECK(std::fabs(static_cast<double>(removed) / trials - p_out) < 4 * std::sqrt(p_out * (1 - p_out) / trials));
}

TEST_CASE("every state stays valid and bookkeeping matches") {
    for (Boundary b : {Boundary::periodic, Boundary::free, Boundary::fully_packed}) {
        ChainState st(Configuration::empty(10, 8, b), 5);
        for (int k = 0; k < 300; ++k) {
            st.sweep(k % 2 ? 40.0 : 0.7, 0.6);
            REQUIRE(st.valid());
        }
        Configuration c = st.configuration();
        CHECK(c.tile_count() == st.tile_count());
        CHECK(st.sweeps_done() == 300);
    }
}

TEST_CASE("translation moves alone keep the tile count") {
    // With lambda so large that removals essentially never happen and a packing with no room for
    // insertions, the count can only move through failed or accepted slides.
    auto packed = seed_phase_configuration(8, 8, Boundary::periodic, Phase::ver0, std::vector<int>{0, 1});
    auto sparse = packed.with({1, 1}, false).with({5, 5}, false);
    ChainState st(sparse, 2);
    for (int k = 0; k < 50; ++k) {
        st.sweep(1e300, 1.0);
        REQUIRE(st.valid());
    }
    CHECK(st.tile_count() >= sparse.tile_count());
}

TEST_CASE("sampling schedule and determinism") {
    ChainParams p;
    p.initial = Configuration::empty(8, 8, Boundary::periodic);
    p.lambda = 2;
    p.seed = 99;
    p.sweeps = 10;
    p.burn_in = 4;
    p.thinning = 3;
    CHECK(collect_samples(p).size() == 2);
    p.sweeps = 0;
    p.burn_in = 0;
    auto only = collect_samples(p);
    REQUIRE(only.size() == 1);
    CHECK(only[0] == p.initial);
    p.sweeps = 200;
    p.burn_in = 50;
    p.thinning = 5;
    auto a = run_chain(p, ObservableSpec{}).to_json().dump();
    auto b = run_chain(p, ObservableSpec{}).to_json().dump();
    CHECK(a == b);
    p.seed = 100;
    CHECK(run_chain(p, ObservableSpec{}).to_json().dump() != a);
    p.burn_in = 300;
    CHECK_THROWS_AS(p.validate(), SpecError);
    p.burn_in = 0;
    p.lambda = 0;
    CHECK_THROWS_AS(p.validate(), NonpositiveFugacity);
}

TEST_CASE("stationary distribution on the 4x4 torus (short run)") {
    CHECK(tv_to_exact(4, 4, 2.0, 200000, 1) < 0.03);
}
