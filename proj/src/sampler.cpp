#include "squarepack/sampler.hpp"

#include <cmath>

#include "squarepack/errors.hpp"

namespace squarepack {

namespace {

std::vector<Point> ver_family(int width, int height, Boundary boundary, int shift,
                              std::span<const int> offsets) {
    std::vector<Point> pts;
    Domain d{width, height, boundary};
    for (int i = 0; 2 * i + 1 < width; ++i) {
        int x = 2 * i + 1 + shift;
        if (boundary == Boundary::periodic) x = floor_mod(x, width);
        int off = offsets.empty() ? 0 : floor_mod(offsets[i % offsets.size()], 2);
        int start = boundary == Boundary::fully_packed ? 1 + off : floor_mod(1 + off, 2);
        for (int y = start; y < height; y += 2)
            if (d.allowed_center({x, y})) pts.push_back({x, y});
    }
    return pts;
}

}  // namespace

Configuration seed_phase_configuration(int width, int height, Boundary boundary, Phase phase,
                                       std::span<const int> offsets) {
    if (width < 4 || height < 4 || width % 2 || height % 2)
        throw DimensionError("phase seeds need even dimensions >= 4");
    switch (phase) {
        case Phase::ver0: return Configuration::create(width, height, boundary, ver_family(width, height, boundary, 0, offsets));
        case Phase::ver1: return Configuration::create(width, height, boundary, ver_family(width, height, boundary, 1, offsets));
        case Phase::hor0: return seed_phase_configuration(height, width, boundary, Phase::ver0, offsets).transposed();
        case Phase::hor1: return seed_phase_configuration(height, width, boundary, Phase::ver1, offsets).transposed();
        case Phase::undetermined: break;
    }
    throw SpecError("a seed phase must be one of ver0, ver1, hor0, hor1");
}

void ChainParams::validate() const {
    if (!(lambda > 0) || !std::isfinite(lambda)) throw NonpositiveFugacity("fugacity must be positive");
    if (burn_in < 0 || sweeps < burn_in) throw SpecError("need sweeps >= burn_in >= 0");
    if (thinning < 1) throw SpecError("thinning must be at least 1");
    if (!(translation_move_fraction >= 0 && translation_move_fraction <= 1))
        throw SpecError("translation_move_fraction must lie in [0,1]");
    if (initial.width() == 0) throw SpecError("chain needs an initial configuration");
}

ChainState::ChainState(const Configuration& initial, uint64_t seed, uint64_t stream)
    : domain_(initial.domain()), rng_(seed, stream) {
    const int W = domain_.width, H = domain_.height;
    sites_ = W * H;
    cells_.assign(sites_ + 1, 0);
    allowed_.assign(sites_ + 1, 0);
    king_.assign(static_cast<std::size_t>(sites_) * 8, sites_);
    axis_.assign(static_cast<std::size_t>(sites_) * 4, sites_);
    auto index = [&](int x, int y) {
        Point q = domain_.wrap({x, y});
        return domain_.in_grid(q) ? q.y * W + q.x : sites_;
    };
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            int s = y * W + x;
            allowed_[s] = domain_.allowed_center({x, y});
            cells_[s] = initial.occupied({x, y});
            int k = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (dx || dy) king_[s * 8 + k++] = index(x + dx, y + dy);
            axis_[s * 4 + 0] = index(x + 1, y);
            axis_[s * 4 + 1] = index(x, y + 1);
            axis_[s * 4 + 2] = index(x - 1, y);
            axis_[s * 4 + 3] = index(x, y - 1);
        }
    tiles_ = initial.tile_count();
}

bool ChainState::free_of_neighbours(int s) const {
    const int* n = &king_[static_cast<std::size_t>(s) * 8];
    return !(cells_[n[0]] | cells_[n[1]] | cells_[n[2]] | cells_[n[3]] | cells_[n[4]] |
             cells_[n[5]] | cells_[n[6]] | cells_[n[7]]);
}

bool ChainState::can_move(int from, int to) const {
    const int* n = &king_[static_cast<std::size_t>(to) * 8];
    for (int k = 0; k < 8; ++k)
        if (n[k] != from && cells_[n[k]]) return false;
    return true;
}

void ChainState::sweep(double lambda, double translation_move_fraction) {
    const double p = lambda / (1.0 + lambda);
    const bool translate = translation_move_fraction > 0;
    for (int s = 0; s < sites_; ++s) {
        if (allowed_[s]) {
            double u = rng_.uniform();
            if (free_of_neighbours(s)) {
                uint8_t next = u < p;
                tiles_ += static_cast<int>(next) - cells_[s];
                cells_[s] = next;
            }
        }
        if (!translate || rng_.uniform() >= translation_move_fraction) continue;
        int t = axis_[static_cast<std::size_t>(s) * 4 + rng_.below(4)];
        if (t == sites_ || !allowed_[t] || !allowed_[s]) continue;
        // Swapping the pair is its own inverse and keeps the tile count, so accepting
        // whenever the result is valid preserves the Gibbs weights.
        if (cells_[s] && !cells_[t] && can_move(s, t)) {
            cells_[s] = 0;
            cells_[t] = 1;
        } else if (cells_[t] && !cells_[s] && can_move(t, s)) {
            cells_[t] = 0;
            cells_[s] = 1;
        }
    }
    ++sweeps_;
}

bool ChainState::valid() const {
    for (int s = 0; s < sites_; ++s)
        if (cells_[s] && (!allowed_[s] || !free_of_neighbours(s))) return false;
    return cells_[sites_] == 0;
}

Configuration ChainState::configuration() const {
    std::vector<uint8_t> cells(cells_.begin(), cells_.begin() + sites_);
    return Configuration::from_cells(domain_.width, domain_.height, domain_.boundary, cells);
}

void mcmc_sweep(ChainState& state, double lambda, double translation_move_fraction) {
    state.sweep(lambda, translation_move_fraction);
}

std::vector<Configuration> collect_samples(const ChainParams& params) {
    params.validate();
    ChainState state(params.initial, params.seed, params.stream);
    std::vector<Configuration> samples;
    for (long k = 1; k <= params.sweeps; ++k) {
        state.sweep(params.lambda, params.translation_move_fraction);
        if (k > params.burn_in && (k - params.burn_in) % params.thinning == 0)
            samples.push_back(state.configuration());
    }
    if (samples.empty()) samples.push_back(state.configuration());
    return samples;
}

ObservableReport run_chain(const ChainParams& params, const ObservableSpec& observables) {
    std::vector<Configuration> samples = collect_samples(params);
    RunMetadata meta;
    meta.seed = params.seed;
    meta.lambda = params.lambda;
    meta.width = params.initial.width();
    meta.height = params.initial.height();
    meta.boundary = params.initial.boundary();
    meta.sweeps = params.sweeps;
    meta.burn_in = params.burn_in;
    meta.thinning = params.thinning;
    meta.translation_move_fraction = params.translation_move_fraction;
    meta.initial = encode(params.initial);
    return summarize(samples, observables, meta);
}

}  // namespace squarepack
