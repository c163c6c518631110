#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "squarepack/lattice.hpp"
#include "squarepack/sticks.hpp"

namespace squarepack {

enum class EdgeKind { stick, vacancy };

// Directed right (horizontal) or up (vertical); length > 1 only after compression.
struct MarkedEdge {
    int tail = 0;
    int head = 0;
    Orientation orientation = Orientation::vertical;
    EdgeKind kind = EdgeKind::vacancy;
    int length = 1;
};

// One connected component of the configuration graph.  Vertices are sorted and translated
// so the smallest one sits at the origin; `offset` is that vertex in the host configuration.
struct ComponentGraph {
    std::vector<Point> vertices;
    std::vector<MarkedEdge> edges;
    Point offset;
    bool touches_boundary = false;  // has a vertex on the rim of the vertex range
    bool wraps = false;             // winds around a torus, so not a finite planar component

    bool trivial() const { return edges.empty(); }
    ComponentGraph translated(Point by) const;
    ComponentGraph rotated() const;  // quarter turn, edges re-directed right/up
};

struct ComponentStats {
    int vacancies = 0;
    int k_ver = 0;
    int k_hor = 0;
    int max_stick_run = 0;
    int k() const { return k_ver + k_hor; }
};

struct ConfigurationGraph {
    std::vector<ComponentGraph> components;  // ordered by host offset
    int isolated_vertices = 0;
    int vertex_count = 0;
};

// Vertex range is the closure of the face set; edges on its rim see exterior faces (vacant
// for free, parity (0,0) tiles for fully packed).
ConfigurationGraph build_component_graph(const Configuration& config);

ComponentStats component_stats(const ComponentGraph& h);
ComponentGraph compress(const ComponentGraph& h);

// Translation-invariant key of the embedded graph; the trivial graph gets "".
std::string canonicalize(const ComponentGraph& h);
// Isomorphism class of the marked directed graph, ignoring edge lengths and embedding.
std::string abstract_key(const ComponentGraph& h);

bool has_degree_one_vertex(const ComponentGraph& h);
// Rebuilds positions from edge lengths along a spanning tree and checks that every edge and
// every stored vertex agree, which is the zero signed-length condition on all cycles.
bool closed_walks_balanced(const ComponentGraph& h);

nlohmann::json to_json(const ComponentGraph& h);
nlohmann::json to_json(const ComponentStats& s);

struct CatalogEntry {
    std::string key;
    ComponentGraph graph;
    ComponentStats stats;
    std::string abstract;             // abstract_key of the component
    std::string compressed_abstract;  // abstract_key of its compression
    int compressed_k = 0;
    int64_t occurrences = 0;          // (configuration, placement) pairs
    uint64_t first_host = 0;          // site mask of the first host configuration
    std::string signature;            // faces bordering the component, relative to offset
};

struct ComponentEnumerationOptions {
    int max_area = 64;
    int threads = 1;
    bool keep_boundary_components = false;
};

struct ComponentCatalog {
    int width = 0;
    int height = 0;
    bool keep_boundary_components = false;
    int64_t configurations = 0;
    int64_t discarded_boundary = 0;
    int64_t rigidity_violations = 0;
    int64_t degree_one_violations = 0;
    int64_t membership_violations = 0;
    int64_t balance_violations = 0;
    int64_t compression_k_mismatches = 0;
    int64_t abstract_collisions = 0;  // distinct keys sharing an abstract class
    std::vector<CatalogEntry> entries;  // sorted by key

    // Entries with max stick run <= M, i.e. the non-trivial members of H_M.
    std::vector<const CatalogEntry*> members(int M) const;
};

// Exhausts the fully packed W x H window (W*H <= max_area) and harvests components lying
// strictly inside it.
ComponentCatalog enumerate_components(int width, int height,
                                      const ComponentEnumerationOptions& options = {});

void write_catalog_jsonl(std::ostream& out, const ComponentCatalog& catalog, int M);

struct CountingReport {
    int M = 0;
    int64_t members = 0;
    int64_t classes = 0;
    int64_t v4_violations = 0;
    int64_t vk_violations = 0;
    int64_t fiber_violations = 0;
    int64_t fiber_k_inconsistencies = 0;
    int max_fiber = 0;
    std::vector<double> lambdas;
    std::vector<double> sums;  // sum over H_M (trivial graph included) of lambda^{-v/4}
    double c_fit = 0.0;        // smallest C with sum <= 1 + C M / lambda on the grid
    std::vector<std::string> violations;
    bool all_pass() const {
        return v4_violations == 0 && vk_violations == 0 && fiber_violations == 0 &&
               fiber_k_inconsistencies == 0;
    }
};

CountingReport verify_counting_bounds(const ComponentCatalog& catalog, int M,
                                      std::span<const double> lambdas);
nlohmann::json to_json(const CountingReport& r, const ComponentCatalog& catalog);

}  // namespace squarepack
