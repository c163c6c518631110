#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "squarepack/lattice.hpp"

namespace squarepack {

using BigInt = boost::multiprecision::cpp_int;

struct TransferEigenvalues {
    long double plus;
    long double minus;
};

// Eigenvalues of [[t,1],[1,0]] with t = lambda^{-1/2}.
TransferEigenvalues one_dim_transfer(double lambda);
long double z1d_periodic(int L, double lambda);
long double z1d_free(int L, double lambda);
// Direct sum over cyclic 0/1 sequences with no two adjacent ones; used as an oracle.
long double z1d_periodic_by_sequences(int L, double lambda);

// Z = sum_n a_n lambda^n over tile count n. Vacancy convention: Z_vac = lambda^{-faces/4} Z.
struct PartitionPolynomial {
    Domain domain;
    std::vector<BigInt> coefficients;

    long double tile_convention(long double lambda) const;
    long double vacancy_convention(long double lambda) const;
    nlohmann::json to_json(std::span<const double> lambdas) const;
};

enum class EnumerationMethod { automatic, brute_force, row_transfer };

struct EnumerationLimits {
    int max_area = 36;            // brute-force cap on width*height
    int max_transfer_width = 14;  // row-transfer cap
    int threads = 1;
};

using SiteFilter = std::function<bool(Point)>;

// Grid points of a small domain as bit positions, with hard-core conflict masks.
// Exact computations accept any dims >= 2 (even for fully-packed), unlike Configuration.
class SiteLattice {
public:
    explicit SiteLattice(const Domain& d, const SiteFilter& allowed = {});

    const Domain& domain() const { return domain_; }
    int sites() const { return domain_.width * domain_.height; }
    int index(Point p) const;  // -1 when p is not a grid point (after wrap)
    Point point(int i) const { return {i % domain_.width, i / domain_.width}; }
    uint64_t allowed_mask() const { return allowed_; }
    uint64_t conflicts(int i) const { return conflicts_[i]; }
    bool has_tile(uint64_t mask, Point center) const;
    bool face_vacant(uint64_t mask, Point face) const;
    int vacancies(uint64_t mask) const;
    Configuration to_configuration(uint64_t mask) const;

private:
    Domain domain_;
    uint64_t allowed_ = 0;
    std::vector<uint64_t> conflicts_;
};

void validate_exact_domain(const Domain& d);

// Calls visit(mask) for every valid configuration, in a fixed order.
void for_each_configuration(const SiteLattice& lattice, const std::function<void(uint64_t)>& visit);
std::vector<uint64_t> enumerate_configurations(const SiteLattice& lattice,
                                               const EnumerationLimits& limits = {});

// Subtrees of the configuration search, for callers that accumulate per subtree and merge
// in subtree order.
struct SearchTask {
    uint64_t avail;
    uint64_t mask;
};
std::vector<SearchTask> split_search(const SiteLattice& lattice, int depth);
void run_search_task(const SiteLattice& lattice, const SearchTask& task,
                     const std::function<void(uint64_t)>& visit);

PartitionPolynomial partition_polynomial(const Domain& d,
                                         EnumerationMethod method = EnumerationMethod::automatic,
                                         const EnumerationLimits& limits = {},
                                         const SiteFilter& allowed = {});

// Natural log of Z in the vacancy convention, by numeric row transfer with rescaling.
// Handles heights far beyond the reach of exact coefficients.
long double log_partition_function(const Domain& d, double lambda,
                                   const EnumerationLimits& limits = {});

// Sum of lambda^{-v/4} over configurations accepted by the predicate.
long double event_weight(const Domain& d, double lambda,
                         const std::function<bool(const SiteLattice&, uint64_t)>& predicate,
                         const EnumerationLimits& limits = {});

// Closed block R of (K+1)x(L+1) points with lower-left corner (x0,y0).
struct Block {
    int x0 = 0;
    int y0 = 0;
    int K = 1;
    int L = 1;
    int points() const { return (K + 1) * (L + 1); }
};

// Local functions read the restriction of a configuration to a block:
// bit j*(K+1)+i of the pattern is the occupancy of (x0+i, y0+j).
using LocalFunction = std::function<double(uint64_t pattern)>;

struct SeminormQuery {
    Domain torus;
    Block block;
    LocalFunction f;
};

// All configurations of a torus with their normalized Gibbs probabilities.
class TorusEnsemble {
public:
    TorusEnsemble(const Domain& torus, double lambda, const EnumerationLimits& limits = {});

    const SiteLattice& lattice() const { return lattice_; }
    double lambda() const { return lambda_; }
    const std::vector<uint64_t>& states() const { return states_; }
    const std::vector<long double>& probabilities() const { return prob_; }
    long double partition_vacancy() const { return z_vacancy_; }
    long double expectation(const std::function<long double(uint64_t)>& f) const;

private:
    SiteLattice lattice_;
    double lambda_;
    std::vector<uint64_t> states_;
    std::vector<long double> prob_;
    long double z_vacancy_ = 0;
};

// Site indices visited when reading block R through each reflection image tau_{m,n}.
std::vector<std::vector<int>> block_images(const Domain& torus, const Block& R);
uint64_t gather_pattern(uint64_t state, const std::vector<int>& sites);

long double chessboard_seminorm(const TorusEnsemble& ensemble, const Block& R, const LocalFunction& f);
long double chessboard_seminorm(const SeminormQuery& query, double lambda,
                                const EnumerationLimits& limits = {});
// mu(prod_tau tau f_tau) with one function per image, images ordered as in block_images.
long double chessboard_product(const TorusEnsemble& ensemble, const Block& R,
                               std::span<const LocalFunction> per_image);

struct ReflectionValue {
    long double value;  // mu(f * tau f)
    long double scale;  // mu(|f| * |tau f|)
};

// Lambda must be R doubled along exactly one axis; tau reflects through the far side of R.
ReflectionValue reflection_positivity_value(const TorusEnsemble& ensemble, const Block& R,
                                            const LocalFunction& f);

}  // namespace squarepack
