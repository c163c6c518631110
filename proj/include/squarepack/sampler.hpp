#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "squarepack/lattice.hpp"
#include "squarepack/observables.hpp"
#include "squarepack/rng.hpp"
#include "squarepack/sticks.hpp"

namespace squarepack {

// Fully packed column (ver) or row (hor) family. Column i of ver0 sits at x = 2i+1 with
// centers at y = 1 + offsets[i mod n] (mod 2) spaced by 2; ver1 is ver0 moved by (1,0);
// hor0/hor1 are the transposes. On fully-packed regions columns that would leave the
// allowed interior are dropped.
Configuration seed_phase_configuration(int width, int height, Boundary boundary, Phase phase,
                                       std::span<const int> offsets = {});

struct ChainParams {
    Configuration initial;
    double lambda = 1.0;
    uint64_t seed = 0;
    long sweeps = 0;   // total, including burn-in
    long burn_in = 0;
    double translation_move_fraction = 0.5;
    long thinning = 1;
    uint64_t stream = 0;

    void validate() const;
};

// Mutable working copy owned by one chain. Occupancy is a byte per site plus a sentinel
// cell that stays empty, so out-of-region neighbours need no branches.
class ChainState {
public:
    ChainState(const Configuration& initial, uint64_t seed, uint64_t stream = 0);

    // One raster pass: heat-bath update at every site, each followed with probability
    // `translation_move_fraction` by a proposal to slide a tile across a random axis edge.
    void sweep(double lambda, double translation_move_fraction);

    Configuration configuration() const;
    long sweeps_done() const { return sweeps_; }
    int tile_count() const { return tiles_; }
    const std::vector<uint8_t>& cells() const { return cells_; }  // row-major, plus sentinel
    bool valid() const;

private:
    bool free_of_neighbours(int s) const;
    bool can_move(int from, int to) const;

    Domain domain_;
    int sites_ = 0;
    std::vector<uint8_t> cells_;
    std::vector<uint8_t> allowed_;
    std::vector<int> king_;  // 8 neighbours per site
    std::vector<int> axis_;  // right, up, left, down
    Rng rng_;
    long sweeps_ = 0;
    int tiles_ = 0;
};

void mcmc_sweep(ChainState& state, double lambda, double translation_move_fraction = 0.5);

// Thinned post-burn-in samples; if none are taken the final state is returned alone.
std::vector<Configuration> collect_samples(const ChainParams& params);

ObservableReport run_chain(const ChainParams& params, const ObservableSpec& observables);

}  // namespace squarepack
