#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "squarepack/lattice.hpp"
#include "squarepack/observables.hpp"
#include "squarepack/sticks.hpp"

namespace squarepack {

// Grid points where the two occupancies differ, in row-major order.
std::vector<Point> disagreement_set(const Configuration& a, const Configuration& b);

struct ClusterLabels {
    std::vector<int> label;  // per input point, clusters numbered by first appearance
    std::vector<int> sizes;
    int count() const { return static_cast<int>(sizes.size()); }
};

// Components under 8-neighbour adjacency; with a torus domain, adjacency wraps.
ClusterLabels king_clusters(std::span<const Point> points, const Domain* torus = nullptr);

// Exchanges the two configurations on the union of disagreement clusters that meet `seeds`.
// Points next to that union agree in both, so the results are valid and the total tile count
// is unchanged.
std::pair<Configuration, Configuration> cluster_swap(const Configuration& a, const Configuration& b,
                                                     std::span<const Point> seeds);

struct TailParams {
    int width = 64;
    int height = 64;
    double lambda = 100.0;
    uint64_t seed = 1;
    long sweeps = 2000;  // per chain, including burn-in
    long burn_in = 500;
    long thinning = 10;
    double translation_move_fraction = 0.5;
    Phase phase = Phase::ver0;
    bool random_offsets = true;  // each chain draws its own column offsets
    int N = 4;
    int phase_a = 1;
    int phase_b = 0;  // 0 selects default_stick_threshold
    int max_distance = 0;  // 0 selects half the torus side
    int64_t min_count = 50;
    int threads = 0;

    void validate() const;
};

struct TailRow {
    Axis axis = Axis::x;
    int d = 0;
    int64_t count = 0;
    double probability = 0.0;
};

struct TailFit {
    double length = 0.0;
    double error = 0.0;
    int points = 0;
    bool resolved = false;
};

struct TailTable {
    TailParams params;
    int64_t pairs_used = 0;
    int64_t pairs_excluded = 0;
    int64_t trials = 0;  // used pairs times sites
    double disagreement_density = 0.0;
    std::vector<TailRow> horizontal;
    std::vector<TailRow> vertical;
    TailFit fit_horizontal;
    TailFit fit_vertical;

    std::optional<double> anisotropy() const;  // vertical over horizontal decay length
};

// Per-point reach of its disagreement cluster, as torus distances along x and y.
struct ClusterReach {
    std::vector<int> reach_x;
    std::vector<int> reach_y;
};
ClusterReach cluster_reach(std::span<const Point> points, const Domain& torus);

// Accumulates, for every point u, whether u's cluster reaches |dx| >= d (horizontal) or
// |dy| >= d (vertical), over all sites of all phase-matched pairs.
TailTable radius_tail_experiment(const TailParams& params);

// Least squares on log P over d >= 1 while count >= min_count.
TailFit fit_tail(std::span<const TailRow> rows, int64_t min_count);

std::string tail_csv(const TailTable& table);
nlohmann::json to_json(const TailTable& table);

}  // namespace squarepack
