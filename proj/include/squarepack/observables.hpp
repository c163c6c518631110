#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "squarepack/lattice.hpp"
#include "squarepack/sticks.hpp"

namespace squarepack {

struct Estimate {
    double mean = 0;
    double error = std::numeric_limits<double>::quiet_NaN();  // batch-means standard error
};

// Mean and standard error from (up to) 32 contiguous batches.
Estimate batch_mean(std::span<const double> series, int batches = 32);

struct ParityDensity {
    std::array<Estimate, 4> residue;  // index (x mod 2) + 2 (y mod 2)
    Estimate even_x, odd_x, even_y, odd_y;
    Estimate tile;     // tiles per site
    Estimate vacancy;  // vacant faces per face
};

ParityDensity parity_density(std::span<const Configuration> samples);

Estimate two_point_covariance(std::span<const Configuration> samples, Point u, Point v);

enum class Axis { x, y };

// Sites whose coordinate residue selects them; `automatic` picks the densest class.
enum class SiteClass { automatic, all, even_x, odd_x, even_y, odd_y };

std::string_view to_string(SiteClass c);

struct CorrelationOptions {
    int stride = 2;
    int max_distance = 0;  // 0: half the extent along the axis
    SiteClass sites = SiteClass::automatic;
    double significance = 3.0;
};

struct CorrelationCurve {
    Axis axis = Axis::x;
    SiteClass sites = SiteClass::all;
    std::vector<int> distances;
    std::vector<Estimate> values;
};

CorrelationCurve correlation_function(std::span<const Configuration> samples, Axis axis,
                                      const CorrelationOptions& options = {});

struct CorrelationFit {
    Axis axis = Axis::x;
    double length = 0;
    double error = std::numeric_limits<double>::quiet_NaN();
    // Fewer than two significant points: `length` is 0 and `upper_bound` bounds it.
    bool resolved = false;
    double upper_bound = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> fitted_distances;
    CorrelationCurve curve;
};

// Exponential fit of |C(d)| over the leading run of distances with C(d) > significance * SE.
CorrelationFit correlation_length_fit(std::span<const Configuration> samples, Axis axis,
                                      const CorrelationOptions& options = {});
CorrelationFit fit_correlation_curve(const CorrelationCurve& curve, double significance = 3.0);

// Walks left and right from every tile with even-x center along its two face rows. Tiles keep
// their horizontal parity along a row until a vacant face, so each side that meets a (ver,0)
// stick edge must show a vacancy before it.
struct EvenColumnCheck {
    int tiles = 0;
    int flanked_sides = 0;
    int fully_flanked_tiles = 0;       // all four row-sides reach a (ver,0) stick
    int min_vacancies_fully_flanked = -1;
    int violations = 0;
};

EvenColumnCheck even_column_tile_check(const Configuration& config);

struct ObservableSpec {
    bool parity = true;
    bool sticks = true;
    bool phase = true;
    bool correlations = false;
    bool structural = false;
    bool keep_samples = false;
    CorrelationOptions correlation;
    std::vector<std::pair<Point, Point>> covariances;
    int phase_a = 1;
    int phase_b = 0;  // 0: default threshold from lambda
    int N = 4;

    static ObservableSpec from_names(const std::vector<std::string>& names);
};

struct RunMetadata {
    uint64_t seed = 0;
    double lambda = 0;
    int width = 0, height = 0;
    Boundary boundary = Boundary::periodic;
    long sweeps = 0, burn_in = 0, thinning = 1;
    double translation_move_fraction = 0;
    std::string initial;
};

struct CensusSummary {
    std::array<Estimate, 4> mean_counts;
    std::array<std::map<int, long>, 4> length_histogram;
};

struct ObservableReport {
    RunMetadata meta;
    int samples = 0;
    std::optional<ParityDensity> density;
    std::optional<CensusSummary> census;
    Phase phase = Phase::undetermined;
    std::array<double, 5> phase_fractions{};
    int phase_threshold = 0;
    std::optional<CorrelationFit> fit_x, fit_y;
    std::vector<std::pair<std::pair<Point, Point>, Estimate>> covariances;
    std::optional<EvenColumnCheck> structural;
    std::vector<Configuration> raw_samples;

    nlohmann::json to_json() const;
};

ObservableReport summarize(std::span<const Configuration> samples, const ObservableSpec& spec,
                           const RunMetadata& meta);

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const CorrelationFit& fit);
std::string correlation_csv(const CorrelationCurve& curve);

}  // namespace squarepack
