#include "squarepack/exact.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "squarepack/errors.hpp"
#include "squarepack/parallel.hpp"

namespace squarepack {

namespace {

void require_positive(double lambda) {
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw NonpositiveFugacity("fugacity must be positive and finite, got " +
                                  std::to_string(lambda));
}

void require_even_length(int L) {
    if (L < 0 || L % 2 != 0) throw OddLength("length must be even and >= 0, got " + std::to_string(L));
}

}  // namespace

TransferEigenvalues one_dim_transfer(double lambda) {
    require_positive(lambda);
    long double t = 1.0L / std::sqrt(static_cast<long double>(lambda));
    long double plus = (t + std::sqrt(t * t + 4.0L)) / 2.0L;
    // The determinant is -1; dividing avoids cancellation in t - sqrt(t^2+4).
    return {plus, -1.0L / plus};
}

long double z1d_periodic(int L, double lambda) {
    require_even_length(L);
    TransferEigenvalues g = one_dim_transfer(lambda);
    return std::pow(g.plus, static_cast<long double>(L)) +
           std::pow(g.minus, static_cast<long double>(L));
}

long double z1d_free(int L, double lambda) {
    require_even_length(L);
    require_positive(lambda);
    long double lam = lambda;
    long double total = 0;
    for (int n = 0; 2 * n <= L; ++n) {
        long double binom = 1;
        for (int k = 1; k <= n; ++k) binom = binom * (L - 2 * n + k) / k;  // C(L-n, n)
        total += binom * std::pow(lam, static_cast<long double>(n) - L / 2.0L);
    }
    return total;
}

long double z1d_periodic_by_sequences(int L, double lambda) {
    require_even_length(L);
    require_positive(lambda);
    if (L == 0) return 2;
    if (L > 30) throw TooLarge("sequence enumeration is limited to L <= 30");
    long double lam = lambda;
    long double total = 0;
    for (uint64_t r = 0; r < (uint64_t{1} << L); ++r) {
        bool ok = true;
        int vacant_pairs = 0;
        for (int i = 0; i < L; ++i) {
            int a = (r >> i) & 1, b = (r >> ((i + 1) % L)) & 1;
            if (a && b) { ok = false; break; }
            vacant_pairs += (1 - a) * (1 - b);
        }
        if (ok) total += std::pow(lam, -0.5L * vacant_pairs);
    }
    return total;
}

long double PartitionPolynomial::tile_convention(long double lambda) const {
    long double total = 0, p = 1;
    for (const BigInt& a : coefficients) {
        total += a.convert_to<long double>() * p;
        p *= lambda;
    }
    return total;
}

long double PartitionPolynomial::vacancy_convention(long double lambda) const {
    return tile_convention(lambda) * std::pow(lambda, -domain.face_area() / 4.0L);
}

static nlohmann::json big_to_json(const BigInt& a) {
    if (a <= BigInt(std::numeric_limits<int64_t>::max())) return a.convert_to<int64_t>();
    return a.str();
}

nlohmann::json PartitionPolynomial::to_json(std::span<const double> lambdas) const {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const BigInt& a : coefficients) coeffs.push_back(big_to_json(a));
    nlohmann::json evals = nlohmann::json::array();
    for (double lam : lambdas)
        evals.push_back({{"lambda", lam},
                         {"value_tile_convention", static_cast<double>(tile_convention(lam))},
                         {"value_vacancy_convention", static_cast<double>(vacancy_convention(lam))}});
    return {{"dims", {domain.width, domain.height}},
            {"boundary", squarepack::to_string(domain.boundary)},
            {"face_area", domain.face_area()},
            {"coefficients", coeffs},
            {"evaluations", evals},
            {"weight_conventions",
             "tile: lambda^n; vacancy: lambda^(-v/4) = lambda^(n - face_area/4)"}};
}

void validate_exact_domain(const Domain& d) {
    if (d.width < 2 || d.height < 2)
        throw DimensionError("exact computations need dimensions >= 2");
    if (d.boundary == Boundary::fully_packed && (d.width % 2 || d.height % 2))
        throw DimensionError("fully-packed regions need even dimensions");
}

SiteLattice::SiteLattice(const Domain& d, const SiteFilter& allowed) : domain_(d) {
    validate_exact_domain(d);
    if (d.width * d.height > 64)
        throw TooLarge("site lattice holds at most 64 grid points, got " +
                       std::to_string(d.width * d.height));
    conflicts_.assign(sites(), 0);
    for (int i = 0; i < sites(); ++i) {
        Point p = point(i);
        if (d.allowed_center(p) && (!allowed || allowed(p))) allowed_ |= uint64_t{1} << i;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy) continue;
                int j = index({p.x + dx, p.y + dy});
                if (j >= 0 && j != i) conflicts_[i] |= uint64_t{1} << j;
            }
    }
}

int SiteLattice::index(Point p) const {
    Point q = domain_.wrap(p);
    if (!domain_.in_grid(q)) return -1;
    return q.y * domain_.width + q.x;
}

bool SiteLattice::has_tile(uint64_t mask, Point center) const {
    int i = index(center);
    if (i >= 0) return (mask >> i) & 1u;
    return domain_.exterior_tile(center);
}

bool SiteLattice::face_vacant(uint64_t mask, Point face) const {
    for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx)
            if (has_tile(mask, {face.x + dx, face.y + dy})) return false;
    return true;
}

int SiteLattice::vacancies(uint64_t mask) const {
    return domain_.face_area() - 4 * __builtin_popcountll(mask);
}

Configuration SiteLattice::to_configuration(uint64_t mask) const {
    std::vector<uint8_t> cells(sites(), 0);
    for (int i = 0; i < sites(); ++i) cells[i] = (mask >> i) & 1u;
    return Configuration::from_cells(domain_.width, domain_.height, domain_.boundary, cells);
}

namespace {

template <class Visit>
void search(const SiteLattice& lat, uint64_t avail, uint64_t mask, Visit& visit) {
    if (!avail) {
        visit(mask);
        return;
    }
    int s = __builtin_ctzll(avail);
    uint64_t rest = avail & (avail - 1);
    search(lat, rest, mask, visit);
    search(lat, rest & ~lat.conflicts(s), mask | (uint64_t{1} << s), visit);
}

void split(const SiteLattice& lat, uint64_t avail, uint64_t mask, int depth,
           std::vector<SearchTask>& out) {
    if (!avail || depth == 0) {
        out.push_back({avail, mask});
        return;
    }
    int s = __builtin_ctzll(avail);
    uint64_t rest = avail & (avail - 1);
    split(lat, rest, mask, depth - 1, out);
    split(lat, rest & ~lat.conflicts(s), mask | (uint64_t{1} << s), depth - 1, out);
}

// One result slot per search subtree, merged in subtree order so the output does not
// depend on how many workers ran.
template <class Acc, class MakeVisit>
std::vector<Acc> search_parallel(const SiteLattice& lat, int threads, MakeVisit make_visit) {
    std::vector<SearchTask> tasks;
    int workers = resolve_threads(threads);
    split(lat, lat.allowed_mask(), 0, workers > 1 ? 10 : 0, tasks);
    std::vector<Acc> results(tasks.size());
    parallel_for(tasks.size(), workers, [&](std::size_t t) {
        auto visit = make_visit(results[t]);
        search(lat, tasks[t].avail, tasks[t].mask, visit);
    });
    return results;
}

void check_area(const Domain& d, const EnumerationLimits& limits) {
    int area = d.width * d.height;
    if (area > limits.max_area)
        throw TooLarge("area " + std::to_string(area) + " exceeds the enumeration cap " +
                       std::to_string(limits.max_area));
}

}  // namespace

std::vector<SearchTask> split_search(const SiteLattice& lattice, int depth) {
    std::vector<SearchTask> tasks;
    split(lattice, lattice.allowed_mask(), 0, depth, tasks);
    return tasks;
}

void run_search_task(const SiteLattice& lattice, const SearchTask& task,
                     const std::function<void(uint64_t)>& visit) {
    auto v = [&](uint64_t m) { visit(m); };
    search(lattice, task.avail, task.mask, v);
}

void for_each_configuration(const SiteLattice& lattice, const std::function<void(uint64_t)>& visit) {
    auto v = [&](uint64_t m) { visit(m); };
    search(lattice, lattice.allowed_mask(), 0, v);
}

std::vector<uint64_t> enumerate_configurations(const SiteLattice& lattice,
                                               const EnumerationLimits& limits) {
    check_area(lattice.domain(), limits);
    auto parts = search_parallel<std::vector<uint64_t>>(lattice, limits.threads, [](auto& acc) {
        return [&acc](uint64_t m) { acc.push_back(m); };
    });
    std::vector<uint64_t> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

namespace {

using Poly = std::vector<BigInt>;

void add_shifted(Poly& dst, const Poly& src, int shift) {
    if (dst.size() < src.size() + shift) dst.resize(src.size() + shift);
    for (std::size_t i = 0; i < src.size(); ++i)
        if (!src[i].is_zero()) dst[i + shift] += src[i];
}

PartitionPolynomial brute_force_polynomial(const Domain& d, const EnumerationLimits& limits,
                                           const SiteFilter& allowed) {
    check_area(d, limits);
    SiteLattice lat(d, allowed);
    auto parts = search_parallel<std::vector<uint64_t>>(lat, limits.threads, [](auto& acc) {
        return [&acc](uint64_t m) {
            std::size_t n = __builtin_popcountll(m);
            if (acc.size() <= n) acc.resize(n + 1, 0);
            ++acc[n];
        };
    });
    Poly coeffs(1, 0);
    for (auto& p : parts) {
        if (coeffs.size() < p.size()) coeffs.resize(p.size(), 0);
        for (std::size_t n = 0; n < p.size(); ++n) coeffs[n] += p[n];
    }
    return {d, coeffs};
}

uint32_t row_spread(uint32_t a, int width, bool cyclic) {
    uint32_t full = (width >= 32) ? ~0u : ((1u << width) - 1);
    uint32_t s = a | (a << 1) | (a >> 1);
    if (cyclic) {
        if (a & 1u) s |= 1u << (width - 1);
        if (a & (1u << (width - 1))) s |= 1u;
    }
    return s & full;
}

std::vector<uint32_t> row_states(uint32_t allowed, int width, bool cyclic) {
    std::vector<uint32_t> out;
    for (uint32_t r = 0; r < (1u << width); ++r) {
        if (r & ~allowed) continue;
        bool ok = true;
        for (int x = 0; x + 1 < width && ok; ++x)
            if (((r >> x) & 1u) && ((r >> (x + 1)) & 1u)) ok = false;
        if (cyclic && width > 2 && (r & 1u) && ((r >> (width - 1)) & 1u)) ok = false;
        if (ok) out.push_back(r);
    }
    return out;
}

PartitionPolynomial row_transfer_polynomial(const Domain& d, const EnumerationLimits& limits,
                                            const SiteFilter& allowed) {
    validate_exact_domain(d);
    if (d.width > limits.max_transfer_width)
        throw TooLarge("row transfer supports width <= " + std::to_string(limits.max_transfer_width));
    bool cyclic_x = d.boundary == Boundary::periodic;
    bool cyclic_y = d.boundary == Boundary::periodic;
    std::vector<std::vector<uint32_t>> states(d.height);
    for (int y = 0; y < d.height; ++y) {
        uint32_t mask = 0;
        for (int x = 0; x < d.width; ++x)
            if (d.allowed_center({x, y}) && (!allowed || allowed({x, y}))) mask |= 1u << x;
        states[y] = row_states(mask, d.width, cyclic_x);
    }
    auto compatible = [&](uint32_t a, uint32_t b) { return !(row_spread(a, d.width, cyclic_x) & b); };

    auto run = [&](std::vector<Poly> cur, int first_row) {
        for (int y = first_row + 1; y < d.height; ++y) {
            std::vector<Poly> next(states[y].size());
            for (std::size_t bi = 0; bi < states[y].size(); ++bi) {
                uint32_t b = states[y][bi];
                int nb = __builtin_popcount(b);
                for (std::size_t ai = 0; ai < states[y - 1].size(); ++ai)
                    if (!cur[ai].empty() && compatible(states[y - 1][ai], b))
                        add_shifted(next[bi], cur[ai], nb);
            }
            cur = std::move(next);
        }
        return cur;
    };

    Poly total;
    if (!cyclic_y) {
        std::vector<Poly> init(states[0].size());
        for (std::size_t i = 0; i < states[0].size(); ++i) {
            init[i].assign(__builtin_popcount(states[0][i]) + 1, 0);
            init[i].back() = 1;
        }
        for (const Poly& p : run(std::move(init), 0)) add_shifted(total, p, 0);
    } else {
        for (std::size_t s0 = 0; s0 < states[0].size(); ++s0) {
            std::vector<Poly> init(states[0].size());
            init[s0].assign(__builtin_popcount(states[0][s0]) + 1, 0);
            init[s0].back() = 1;
            std::vector<Poly> last = run(std::move(init), 0);
            for (std::size_t ai = 0; ai < last.size(); ++ai)
                if (!last[ai].empty() && compatible(states[d.height - 1][ai], states[0][s0]))
                    add_shifted(total, last[ai], 0);
        }
    }
    while (total.size() > 1 && total.back().is_zero()) total.pop_back();
    if (total.empty()) total.push_back(0);
    return {d, total};
}

}  // namespace

PartitionPolynomial partition_polynomial(const Domain& d, EnumerationMethod method,
                                         const EnumerationLimits& limits, const SiteFilter& allowed) {
    validate_exact_domain(d);
    switch (method) {
        case EnumerationMethod::brute_force: return brute_force_polynomial(d, limits, allowed);
        case EnumerationMethod::row_transfer: return row_transfer_polynomial(d, limits, allowed);
        case EnumerationMethod::automatic:
            if (d.width * d.height <= limits.max_area && d.width * d.height <= 64)
                return brute_force_polynomial(d, limits, allowed);
            if (d.width <= limits.max_transfer_width) return row_transfer_polynomial(d, limits, allowed);
            if (d.height <= limits.max_transfer_width) {
                Domain t{d.height, d.width, d.boundary};
                SiteFilter f;
                if (allowed) f = [&](Point p) { return allowed({p.y, p.x}); };
                PartitionPolynomial p = row_transfer_polynomial(t, limits, f);
                p.domain = d;
                return p;
            }
            throw TooLarge("region too large for exact enumeration");
    }
    throw TooLarge("unknown enumeration method");
}

long double log_partition_function(const Domain& d, double lambda, const EnumerationLimits& limits) {
    require_positive(lambda);
    validate_exact_domain(d);
    if (d.width > limits.max_transfer_width)
        throw TooLarge("row transfer supports width <= " + std::to_string(limits.max_transfer_width));
    bool cyclic = d.boundary == Boundary::periodic;
    // Rows that can hold centers all look alike: periodic and free use every row,
    // fully-packed uses rows 1..H-1 and columns 1..W-1.
    int width = d.width, rows = d.height;
    if (d.boundary == Boundary::fully_packed) {
        width = d.width - 1;
        rows = d.height - 1;
    }
    std::vector<uint32_t> st = row_states((1u << width) - 1, width, cyclic);
    const int n = static_cast<int>(st.size());
    Eigen::MatrixXd T(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            T(a, b) = (row_spread(st[a], width, cyclic) & st[b]) ? 0.0
                                                         : std::pow(lambda, __builtin_popcount(st[b]));

    // Matrix power with a running log scale.
    auto normalize = [](Eigen::MatrixXd& m, long double& logscale) {
        double s = m.cwiseAbs().maxCoeff();
        if (s > 0) {
            m /= s;
            logscale += std::log(static_cast<long double>(s));
        }
    };
    auto power = [&](int e, long double& logscale) {
        Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd base = T;
        long double base_log = 0;
        normalize(base, base_log);
        logscale = 0;
        while (e > 0) {
            if (e & 1) {
                result = result * base;
                logscale += base_log;
                normalize(result, logscale);
            }
            e >>= 1;
            if (e) {
                base = base * base;
                base_log *= 2;
                normalize(base, base_log);
            }
        }
        return result;
    };

    long double log_tile;
    if (cyclic) {
        long double ls;
        Eigen::MatrixXd P = power(rows, ls);
        log_tile = ls + std::log(static_cast<long double>(P.trace()));
    } else {
        Eigen::VectorXd u(n);
        for (int a = 0; a < n; ++a) u(a) = std::pow(lambda, __builtin_popcount(st[a]));
        long double ls;
        Eigen::MatrixXd P = power(rows - 1, ls);
        double s = u.transpose() * P * Eigen::VectorXd::Ones(n);
        log_tile = ls + std::log(static_cast<long double>(s));
    }
    return log_tile - d.face_area() / 4.0L * std::log(static_cast<long double>(lambda));
}

long double event_weight(const Domain& d, double lambda,
                         const std::function<bool(const SiteLattice&, uint64_t)>& predicate,
                         const EnumerationLimits& limits) {
    require_positive(lambda);
    check_area(d, limits);
    SiteLattice lat(d);
    long double lam = lambda, total = 0;
    long double offset = d.face_area() / 4.0L;
    for (uint64_t m : enumerate_configurations(lat, limits))
        if (predicate(lat, m)) total += std::pow(lam, __builtin_popcountll(m) - offset);
    return total;
}

TorusEnsemble::TorusEnsemble(const Domain& torus, double lambda, const EnumerationLimits& limits)
    : lattice_(torus), lambda_(lambda) {
    require_positive(lambda);
    if (torus.boundary != Boundary::periodic)
        throw GeometryMismatch("reflection arguments need a periodic torus");
    states_ = enumerate_configurations(lattice_, limits);
    long double lam = lambda, z = 0;
    prob_.resize(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        prob_[i] = std::pow(lam, static_cast<long double>(__builtin_popcountll(states_[i])));
        z += prob_[i];
    }
    for (auto& p : prob_) p /= z;
    z_vacancy_ = z * std::pow(lam, -torus.face_area() / 4.0L);
}

long double TorusEnsemble::expectation(const std::function<long double(uint64_t)>& f) const {
    long double total = 0;
    for (std::size_t i = 0; i < states_.size(); ++i) total += prob_[i] * f(states_[i]);
    return total;
}

uint64_t gather_pattern(uint64_t state, const std::vector<int>& sites) {
    uint64_t pat = 0;
    for (std::size_t k = 0; k < sites.size(); ++k) pat |= ((state >> sites[k]) & 1u) << k;
    return pat;
}

std::vector<std::vector<int>> block_images(const Domain& torus, const Block& R) {
    if (torus.boundary != Boundary::periodic)
        throw GeometryMismatch("blocks are defined on a periodic torus");
    if (R.K < 1 || R.L < 1 || torus.width % (2 * R.K) != 0 || torus.height % (2 * R.L) != 0)
        throw BlockConditionViolated("a " + std::to_string(R.K) + "x" + std::to_string(R.L) +
                                     " block needs 2K | width and 2L | height of the " +
                                     std::to_string(torus.width) + "x" +
                                     std::to_string(torus.height) + " torus");
    if (R.points() > 64) throw TooLarge("block has more than 64 points");
    SiteLattice lat(torus);
    auto reflect = [](int v, int origin, int size, int k) {
        return (k % 2 == 0) ? v + k * size : 2 * origin + (k + 1) * size - v;
    };
    std::vector<std::vector<int>> images;
    for (int n = 0; n < torus.height / R.L; ++n)
        for (int m = 0; m < torus.width / R.K; ++m) {
            std::vector<int> sites;
            for (int j = 0; j <= R.L; ++j)
                for (int i = 0; i <= R.K; ++i) {
                    int x = reflect(R.x0 + i, R.x0, R.K, m);
                    int y = reflect(R.y0 + j, R.y0, R.L, n);
                    sites.push_back(lat.index({x, y}));
                }
            images.push_back(std::move(sites));
        }
    return images;
}

long double chessboard_product(const TorusEnsemble& ensemble, const Block& R,
                               std::span<const LocalFunction> per_image) {
    auto images = block_images(ensemble.lattice().domain(), R);
    if (per_image.size() != images.size())
        throw GeometryMismatch("expected one function per block image (" +
                               std::to_string(images.size()) + ")");
    const auto& states = ensemble.states();
    const auto& prob = ensemble.probabilities();
    long double total = 0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        long double prod = 1;
        for (std::size_t t = 0; t < images.size() && prod != 0; ++t)
            prod *= per_image[t](gather_pattern(states[s], images[t]));
        total += prob[s] * prod;
    }
    return total;
}

long double chessboard_seminorm(const TorusEnsemble& ensemble, const Block& R, const LocalFunction& f) {
    auto images = block_images(ensemble.lattice().domain(), R);
    std::vector<LocalFunction> fs(images.size(), f);
    long double mu = chessboard_product(ensemble, R, fs);
    if (mu < 0) {
        if (mu > -1e-15L) return 0;
        return std::numeric_limits<long double>::quiet_NaN();
    }
    return std::pow(mu, 1.0L / images.size());
}

long double chessboard_seminorm(const SeminormQuery& query, double lambda, const EnumerationLimits& limits) {
    block_images(query.torus, query.block);  // validates the block before enumerating
    TorusEnsemble ensemble(query.torus, lambda, limits);
    return chessboard_seminorm(ensemble, query.block, query.f);
}

ReflectionValue reflection_positivity_value(const TorusEnsemble& ensemble, const Block& R,
                                            const LocalFunction& f) {
    const Domain& d = ensemble.lattice().domain();
    bool horizontal = d.width == 2 * R.K && d.height == R.L;
    bool vertical = d.width == R.K && d.height == 2 * R.L;
    if (!horizontal && !vertical)
        throw GeometryMismatch("torus must be the block doubled along one axis");
    if (R.points() > 64) throw TooLarge("block has more than 64 points");
    const SiteLattice& lat = ensemble.lattice();
    std::vector<int> direct, mirrored;
    for (int j = 0; j <= R.L; ++j)
        for (int i = 0; i <= R.K; ++i) {
            int x = R.x0 + i, y = R.y0 + j;
            direct.push_back(lat.index({x, y}));
            if (horizontal) mirrored.push_back(lat.index({2 * (R.x0 + R.K) - x, y}));
            else mirrored.push_back(lat.index({x, 2 * (R.y0 + R.L) - y}));
        }
    ReflectionValue out{0, 0};
    const auto& states = ensemble.states();
    const auto& prob = ensemble.probabilities();
    for (std::size_t s = 0; s < states.size(); ++s) {
        long double a = f(gather_pattern(states[s], direct));
        long double b = f(gather_pattern(states[s], mirrored));
        out.value += prob[s] * a * b;
        out.scale += prob[s] * std::fabs(a * b);
    }
    return out;
}

}  // namespace squarepack
