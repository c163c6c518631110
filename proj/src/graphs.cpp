#include "squarepack/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "squarepack/errors.hpp"
#include "squarepack/exact.hpp"
#include "squarepack/parallel.hpp"

namespace squarepack {
namespace {

constexpr int kVacant = -1;

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Face states (vacant or parity index) over the face rectangle plus a one-face margin.
struct FaceField {
    FaceRect rect;
    bool periodic = false;
    int stride = 0;
    std::vector<int8_t> states;

    template <class CoveringCenter>
    FaceField(const Domain& d, CoveringCenter&& cover) : rect(d.faces()), periodic(d.boundary == Boundary::periodic) {
        stride = rect.width + 2;
        states.assign(static_cast<std::size_t>(stride) * (rect.height + 2), kVacant);
        for (int j = -1; j <= rect.height; ++j)
            for (int i = -1; i <= rect.width; ++i) {
                Point f{rect.x0 + i, rect.y0 + j};
                if (periodic) f = {floor_mod(f.x, d.width), floor_mod(f.y, d.height)};
                std::optional<Point> c = cover(f);
                states[static_cast<std::size_t>(j + 1) * stride + i + 1] =
                    c ? static_cast<int8_t>(tile_parity_class(*c).index()) : kVacant;
            }
    }

    int at(Point f) const {
        int i = f.x - rect.x0, j = f.y - rect.y0;
        if (periodic) {
            i = floor_mod(i, rect.width);
            j = floor_mod(j, rect.height);
        }
        return states[static_cast<std::size_t>(j + 1) * stride + i + 1];
    }
};

std::optional<EdgeKind> classify(int a, int b) {
    if (a == kVacant || b == kVacant) return EdgeKind::vacancy;
    if (a != b) return EdgeKind::stick;
    return std::nullopt;
}

struct FieldGraph {
    ConfigurationGraph graph;
    std::vector<std::string> signatures;
    int membership_violations = 0;
};

void normalize(ComponentGraph& h) {
    if (h.vertices.empty()) return;
    std::vector<int> order(h.vertices.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return h.vertices[a] < h.vertices[b]; });
    std::vector<int> rank(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r);
    Point base = h.vertices[order[0]];
    std::vector<Point> sorted;
    sorted.reserve(order.size());
    for (int i : order) sorted.push_back({h.vertices[i].x - base.x, h.vertices[i].y - base.y});
    h.vertices = std::move(sorted);
    for (auto& e : h.edges) {
        e.tail = rank[e.tail];
        e.head = rank[e.head];
    }
    h.offset = {h.offset.x + base.x, h.offset.y + base.y};
}

Point step(Point p, Orientation o, int length = 1) {
    return o == Orientation::horizontal ? Point{p.x + length, p.y} : Point{p.x, p.y + length};
}

// Vacancies and tile parities on both sides of every edge.
std::string face_signature(const ComponentGraph& h, const FaceField& field) {
    std::set<std::tuple<int, int, int>> faces;
    for (const auto& e : h.edges) {
        Point t = h.vertices[e.tail];
        Point a = e.orientation == Orientation::vertical ? Point{t.x - 1, t.y} : Point{t.x, t.y - 1};
        for (Point f : {a, t}) {
            Point host{f.x + h.offset.x, f.y + h.offset.y};
            int st = field.at(host);
            // Parity relative to the offset, so translated hosts compare equal.
            if (st != kVacant) st ^= floor_mod(h.offset.x, 2) | floor_mod(h.offset.y, 2) << 1;
            faces.insert({f.x, f.y, st});
        }
    }
    std::string s;
    for (auto [x, y, st] : faces) s += std::to_string(x) + ',' + std::to_string(y) + ':' + std::to_string(st) + ';';
    return s;
}

FieldGraph build_from_field(const Domain& d, const FaceField& field, bool with_signatures) {
    const bool periodic = d.boundary == Boundary::periodic;
    const FaceRect r = field.rect;
    const int vx0 = periodic ? 0 : r.x0, vy0 = periodic ? 0 : r.y0;
    const int nvx = periodic ? d.width : r.width + 1;
    const int nvy = periodic ? d.height : r.height + 1;
    auto vid = [&](Point p) {
        int x = p.x - vx0, y = p.y - vy0;
        if (periodic) {
            x = floor_mod(x, nvx);
            y = floor_mod(y, nvy);
        }
        return y * nvx + x;
    };
    auto vpoint = [&](int id) { return Point{vx0 + id % nvx, vy0 + id / nvx}; };

    struct RawEdge {
        int tail, head;
        Orientation o;
        EdgeKind k;
    };
    std::vector<RawEdge> raw;
    UnionFind uf(nvx * nvy);
    // On a torus the vertex grid wraps, giving nvx * nvy edges per orientation.
    const int vmax_x = nvx, vmax_y = periodic ? nvy : nvy - 1;
    for (int yy = 0; yy < vmax_y; ++yy)
        for (int xx = 0; xx < vmax_x; ++xx) {
            Point p{vx0 + xx, vy0 + yy};
            if (auto k = classify(field.at({p.x - 1, p.y}), field.at(p))) {
                raw.push_back({vid(p), vid({p.x, p.y + 1}), Orientation::vertical, *k});
                uf.unite(raw.back().tail, raw.back().head);
            }
        }
    const int hmax_x = periodic ? nvx : nvx - 1, hmax_y = nvy;
    for (int yy = 0; yy < hmax_y; ++yy)
        for (int xx = 0; xx < hmax_x; ++xx) {
            Point p{vx0 + xx, vy0 + yy};
            if (auto k = classify(field.at({p.x, p.y - 1}), field.at(p))) {
                raw.push_back({vid(p), vid({p.x + 1, p.y}), Orientation::horizontal, *k});
                uf.unite(raw.back().tail, raw.back().head);
            }
        }

    FieldGraph out;
    out.graph.vertex_count = nvx * nvy;

    // Every vacant face must have its four sides in one component.
    for (int j = 0; j < r.height; ++j)
        for (int i = 0; i < r.width; ++i) {
            Point f{r.x0 + i, r.y0 + j};
            if (field.at(f) != kVacant) continue;
            int a = uf.find(vid(f));
            if (uf.find(vid({f.x + 1, f.y})) != a || uf.find(vid({f.x, f.y + 1})) != a ||
                uf.find(vid({f.x + 1, f.y + 1})) != a)
                ++out.membership_violations;
        }

    std::map<int, std::vector<int>> by_root;
    for (std::size_t e = 0; e < raw.size(); ++e) by_root[uf.find(raw[e].tail)].push_back(static_cast<int>(e));

    int covered = 0;
    for (auto& [root, edge_ids] : by_root) {
        (void)root;
        std::map<int, int> local;
        ComponentGraph h;
        std::vector<int> ids;
        for (int e : edge_ids)
            for (int v : {raw[e].tail, raw[e].head})
                if (local.emplace(v, static_cast<int>(ids.size())).second) ids.push_back(v);
        for (int e : edge_ids)
            h.edges.push_back({local[raw[e].tail], local[raw[e].head], raw[e].o, raw[e].k, 1});
        covered += static_cast<int>(ids.size());

        // Coordinates by walking edges from the first vertex; a mismatch means the component
        // winds around the torus.
        std::vector<std::optional<Point>> pos(ids.size());
        std::vector<std::vector<std::pair<int, int>>> adj(ids.size());
        for (std::size_t e = 0; e < h.edges.size(); ++e) {
            adj[h.edges[e].tail].push_back({static_cast<int>(e), +1});
            adj[h.edges[e].head].push_back({static_cast<int>(e), -1});
        }
        pos[0] = vpoint(ids[0]);
        std::queue<int> q;
        q.push(0);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (auto [e, sgn] : adj[u]) {
                const auto& me = h.edges[e];
                int w = sgn > 0 ? me.head : me.tail;
                Point pw = step(*pos[u], me.orientation, sgn);
                if (!pos[w]) {
                    pos[w] = pw;
                    q.push(w);
                } else if (*pos[w] != pw) {
                    h.wraps = true;
                }
            }
        }
        for (auto& p : pos) h.vertices.push_back(*p);
        normalize(h);
        if (!periodic) {
            for (Point v : h.vertices) {
                Point host{v.x + h.offset.x, v.y + h.offset.y};
                if (host.x == r.x0 || host.y == r.y0 || host.x == r.x0 + r.width || host.y == r.y0 + r.height)
                    h.touches_boundary = true;
            }
        }
        if (with_signatures) out.signatures.push_back(face_signature(h, field));
        out.graph.components.push_back(std::move(h));
    }
    out.graph.isolated_vertices = out.graph.vertex_count - covered;

    std::vector<int> order(out.graph.components.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return out.graph.components[a].offset < out.graph.components[b].offset;
    });
    std::vector<ComponentGraph> comps;
    std::vector<std::string> sigs;
    for (int i : order) {
        comps.push_back(std::move(out.graph.components[i]));
        if (with_signatures) sigs.push_back(std::move(out.signatures[i]));
    }
    out.graph.components = std::move(comps);
    out.signatures = std::move(sigs);
    return out;
}

// Ports: 0 out-horizontal, 1 in-horizontal, 2 out-vertical, 3 in-vertical.
std::vector<std::array<int, 4>> port_table(const ComponentGraph& h) {
    std::vector<std::array<int, 4>> ports(h.vertices.size(), {-1, -1, -1, -1});
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        int base = h.edges[e].orientation == Orientation::horizontal ? 0 : 2;
        ports[h.edges[e].tail][base] = static_cast<int>(e);
        ports[h.edges[e].head][base + 1] = static_cast<int>(e);
    }
    return ports;
}

int count_subcomponents(const ComponentGraph& h, Orientation dropped_sticks) {
    UnionFind uf(static_cast<int>(h.vertices.size()));
    std::vector<char> touched(h.vertices.size(), 0);
    for (const auto& e : h.edges) {
        if (e.kind == EdgeKind::stick && e.orientation == dropped_sticks) continue;
        uf.unite(e.tail, e.head);
        touched[e.tail] = touched[e.head] = 1;
    }
    std::set<int> roots;
    for (std::size_t v = 0; v < h.vertices.size(); ++v)
        if (touched[v]) roots.insert(uf.find(static_cast<int>(v)));
    return static_cast<int>(roots.size());
}

}  // namespace

ComponentGraph ComponentGraph::translated(Point by) const {
    ComponentGraph h = *this;
    h.offset = {offset.x + by.x, offset.y + by.y};
    return h;
}

ComponentGraph ComponentGraph::rotated() const {
    ComponentGraph h;
    h.touches_boundary = touches_boundary;
    h.wraps = wraps;
    for (Point v : vertices) h.vertices.push_back({-v.y, v.x});
    for (const auto& e : edges) {
        MarkedEdge r = e;
        if (e.orientation == Orientation::horizontal) {
            r.orientation = Orientation::vertical;
        } else {
            r.orientation = Orientation::horizontal;
            std::swap(r.tail, r.head);
        }
        h.edges.push_back(r);
    }
    h.offset = {-offset.y, offset.x};
    normalize(h);
    return h;
}

ConfigurationGraph build_component_graph(const Configuration& config) {
    FaceField field(config.domain(), [&](Point f) { return config.covering_center(f); });
    return build_from_field(config.domain(), field, false).graph;
}

ComponentStats component_stats(const ComponentGraph& h) {
    ComponentStats s;
    if (h.trivial()) return s;
    std::set<std::pair<Point, Orientation>> vac;
    for (const auto& e : h.edges)
        if (e.kind == EdgeKind::vacancy && e.length == 1)
            vac.insert({h.vertices[e.tail], e.orientation});
    for (const auto& [p, o] : vac) {
        if (o != Orientation::horizontal) continue;
        if (vac.count({{p.x, p.y + 1}, Orientation::horizontal}) && vac.count({p, Orientation::vertical}) &&
            vac.count({{p.x + 1, p.y}, Orientation::vertical}))
            ++s.vacancies;
    }
    s.k_ver = count_subcomponents(h, Orientation::horizontal);
    s.k_hor = count_subcomponents(h, Orientation::vertical);
    ComponentGraph c = compress(h);
    for (const auto& e : c.edges)
        if (e.kind == EdgeKind::stick) s.max_stick_run = std::max(s.max_stick_run, e.length);
    return s;
}

ComponentGraph compress(const ComponentGraph& h) {
    auto ports = port_table(h);
    const int n = static_cast<int>(h.vertices.size());
    std::vector<char> internal(n, 0);
    for (int v = 0; v < n; ++v) {
        int deg = 0;
        for (int p : ports[v]) deg += p >= 0;
        if (deg != 2) continue;
        for (int base : {0, 2}) {
            int in = ports[v][base + 1], out = ports[v][base];
            if (in >= 0 && out >= 0 && h.edges[in].kind == EdgeKind::stick && h.edges[out].kind == EdgeKind::stick)
                internal[v] = 1;
        }
    }
    if (std::all_of(internal.begin(), internal.end(), [](char c) { return c != 0; })) return h;

    ComponentGraph c;
    c.offset = h.offset;
    c.touches_boundary = h.touches_boundary;
    c.wraps = h.wraps;
    std::vector<int> remap(n, -1);
    for (int v = 0; v < n; ++v)
        if (!internal[v]) {
            remap[v] = static_cast<int>(c.vertices.size());
            c.vertices.push_back(h.vertices[v]);
        }
    for (const auto& e : h.edges) {
        if (internal[e.tail]) continue;
        MarkedEdge m = e;
        int head = e.head, length = e.length;
        if (e.kind == EdgeKind::stick) {
            int base = e.orientation == Orientation::horizontal ? 0 : 2;
            while (internal[head]) {
                const auto& next = h.edges[ports[head][base]];
                length += next.length;
                head = next.head;
            }
        }
        m.tail = remap[e.tail];
        m.head = remap[head];
        m.length = length;
        c.edges.push_back(m);
    }
    normalize(c);
    return c;
}

std::string canonicalize(const ComponentGraph& h) {
    if (h.trivial()) return {};
    Point base = *std::min_element(h.vertices.begin(), h.vertices.end());
    std::vector<std::tuple<int, int, int, int, int>> rows;
    for (const auto& e : h.edges) {
        Point t = h.vertices[e.tail];
        rows.push_back({t.x - base.x, t.y - base.y, e.orientation == Orientation::horizontal ? 0 : 1,
                        e.kind == EdgeKind::stick ? 0 : 1, e.length});
    }
    std::sort(rows.begin(), rows.end());
    std::string s;
    for (auto [x, y, o, k, len] : rows) {
        s += std::to_string(x) + ',' + std::to_string(y) + ',' + (o ? 'v' : 'h') + (k ? 'v' : 's');
        if (len != 1) s += std::to_string(len);
        s += ';';
    }
    return s;
}

std::string abstract_key(const ComponentGraph& h) {
    if (h.trivial()) return {};
    auto ports = port_table(h);
    const int n = static_cast<int>(h.vertices.size());
    std::vector<int> best;
    std::vector<int> id(n), order;
    for (int root = 0; root < n; ++root) {
        std::fill(id.begin(), id.end(), -1);
        order.assign(1, root);
        id[root] = 0;
        std::vector<int> code;
        code.reserve(8 * n);
        for (std::size_t q = 0; q < order.size(); ++q) {
            int u = order[q];
            for (int p = 0; p < 4; ++p) {
                int e = ports[u][p];
                if (e < 0) {
                    code.push_back(-1);
                    continue;
                }
                int w = (p % 2 == 0) ? h.edges[e].head : h.edges[e].tail;
                if (id[w] < 0) {
                    id[w] = static_cast<int>(order.size());
                    order.push_back(w);
                }
                code.push_back(h.edges[e].kind == EdgeKind::stick ? 0 : 1);
                code.push_back(id[w]);
            }
        }
        if (best.empty() || code < best) best = std::move(code);
    }
    std::string s;
    for (int c : best) s += std::to_string(c) + ' ';
    return s;
}

bool has_degree_one_vertex(const ComponentGraph& h) {
    std::vector<int> deg(h.vertices.size(), 0);
    for (const auto& e : h.edges) {
        ++deg[e.tail];
        ++deg[e.head];
    }
    return std::find(deg.begin(), deg.end(), 1) != deg.end();
}

bool closed_walks_balanced(const ComponentGraph& h) {
    if (h.trivial()) return true;
    const std::size_t n = h.vertices.size();
    std::vector<std::optional<Point>> pos(n);
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
        adj[h.edges[e].tail].push_back({static_cast<int>(e), +1});
        adj[h.edges[e].head].push_back({static_cast<int>(e), -1});
    }
    pos[0] = h.vertices[0];
    std::queue<int> q;
    q.push(0);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [e, sgn] : adj[u]) {
            int w = sgn > 0 ? h.edges[e].head : h.edges[e].tail;
            if (!pos[w]) {
                pos[w] = step(*pos[u], h.edges[e].orientation, sgn * h.edges[e].length);
                q.push(w);
            }
        }
    }
    for (const auto& e : h.edges)
        if (!pos[e.tail] || !pos[e.head] || step(*pos[e.tail], e.orientation, e.length) != *pos[e.head])
            return false;
    for (std::size_t v = 0; v < n; ++v)
        if (pos[v] != h.vertices[v]) return false;
    return true;
}

nlohmann::json to_json(const ComponentGraph& h) {
    nlohmann::json verts = nlohmann::json::array(), edges = nlohmann::json::array();
    for (Point v : h.vertices) verts.push_back({v.x, v.y});
    for (const auto& e : h.edges)
        edges.push_back({{"tail", e.tail},
                         {"head", e.head},
                         {"orientation", e.orientation == Orientation::horizontal ? "horizontal" : "vertical"},
                         {"kind", e.kind == EdgeKind::stick ? "stick" : "vacancy"},
                         {"length", e.length}});
    return {{"offset", {h.offset.x, h.offset.y}}, {"vertices", verts}, {"edges", edges},
            {"touches_boundary", h.touches_boundary}, {"wraps", h.wraps}};
}

nlohmann::json to_json(const ComponentStats& s) {
    return {{"v", s.vacancies}, {"k_ver", s.k_ver}, {"k_hor", s.k_hor}, {"k", s.k()},
            {"max_stick_run", s.max_stick_run}};
}

std::vector<const CatalogEntry*> ComponentCatalog::members(int M) const {
    std::vector<const CatalogEntry*> out;
    for (const auto& e : entries)
        if (e.stats.max_stick_run <= M) out.push_back(&e);
    return out;
}

namespace {

struct Harvest {
    std::unordered_map<std::string, CatalogEntry> entries;
    int64_t configurations = 0, discarded = 0, rigidity = 0, degree_one = 0, membership = 0, balance = 0,
            k_mismatch = 0;

    void absorb(CatalogEntry&& entry) {
        auto [it, inserted] = entries.try_emplace(entry.key);
        if (inserted) {
            it->second = std::move(entry);
            return;
        }
        it->second.occurrences += entry.occurrences;
        if (it->second.signature != entry.signature) ++rigidity;
    }
};

CatalogEntry make_entry(ComponentGraph&& h, std::string key, std::string signature, uint64_t host,
                        Harvest& counters) {
    CatalogEntry e;
    e.key = std::move(key);
    e.stats = component_stats(h);
    e.abstract = abstract_key(h);
    ComponentGraph c = compress(h);
    e.compressed_abstract = abstract_key(c);
    e.compressed_k = component_stats(c).k();
    if (e.compressed_k != e.stats.k()) ++counters.k_mismatch;
    if (has_degree_one_vertex(h)) ++counters.degree_one;
    if (!closed_walks_balanced(c)) ++counters.balance;
    e.graph = std::move(h);
    e.occurrences = 1;
    e.first_host = host;
    e.signature = std::move(signature);
    return e;
}

}  // namespace

ComponentCatalog enumerate_components(int width, int height, const ComponentEnumerationOptions& options) {
    if (width < 2 || height < 2 || width % 2 || height % 2)
        throw DimensionError("component window dimensions must be even and at least 2");
    if (width * height > options.max_area)
        throw TooLarge("window " + std::to_string(width) + "x" + std::to_string(height) +
                       " exceeds the area cap " + std::to_string(options.max_area));
    Domain d{width, height, Boundary::fully_packed};
    SiteLattice lattice(d);
    auto tasks = split_search(lattice, 12);
    std::vector<Harvest> harvests(tasks.size());

    parallel_for(tasks.size(), resolve_threads(options.threads), [&](std::size_t t) {
        Harvest& hv = harvests[t];
        run_search_task(lattice, tasks[t], [&](uint64_t mask) {
            ++hv.configurations;
            FaceField field(d, [&](Point f) -> std::optional<Point> {
                for (int dy = 0; dy <= 1; ++dy)
                    for (int dx = 0; dx <= 1; ++dx)
                        if (lattice.has_tile(mask, {f.x + dx, f.y + dy})) return Point{f.x + dx, f.y + dy};
                return std::nullopt;
            });
            FieldGraph g = build_from_field(d, field, true);
            hv.membership += g.membership_violations;
            for (std::size_t c = 0; c < g.graph.components.size(); ++c) {
                ComponentGraph& h = g.graph.components[c];
                if (h.touches_boundary && !options.keep_boundary_components) {
                    ++hv.discarded;
                    continue;
                }
                std::string key = canonicalize(h);
                auto it = hv.entries.find(key);
                if (it != hv.entries.end()) {
                    ++it->second.occurrences;
                    if (it->second.signature != g.signatures[c]) ++hv.rigidity;
                    continue;
                }
                CatalogEntry e = make_entry(std::move(h), key, std::move(g.signatures[c]), mask, hv);
                hv.entries.emplace(e.key, std::move(e));
            }
        });
    });

    Harvest total = std::move(harvests.front());
    // Entries first seen in earlier subtrees keep their host; later subtrees only add counts.
    for (std::size_t t = 1; t < harvests.size(); ++t) {
        Harvest& hv = harvests[t];
        total.configurations += hv.configurations;
        total.discarded += hv.discarded;
        total.rigidity += hv.rigidity;
        total.degree_one += hv.degree_one;
        total.membership += hv.membership;
        total.balance += hv.balance;
        total.k_mismatch += hv.k_mismatch;
        std::vector<std::string> keys;
        for (auto& [k, e] : hv.entries) keys.push_back(k);
        std::sort(keys.begin(), keys.end());
        for (const auto& k : keys) {
            CatalogEntry e = std::move(hv.entries[k]);
            auto it = total.entries.find(k);
            if (it == total.entries.end()) {
                total.entries.emplace(k, std::move(e));
            } else {
                it->second.occurrences += e.occurrences;
                if (it->second.signature != e.signature) ++total.rigidity;
            }
        }
        hv.entries.clear();
    }

    ComponentCatalog cat;
    cat.width = width;
    cat.height = height;
    cat.keep_boundary_components = options.keep_boundary_components;
    cat.configurations = total.configurations;
    cat.discarded_boundary = total.discarded;
    cat.rigidity_violations = total.rigidity;
    cat.degree_one_violations = total.degree_one;
    cat.membership_violations = total.membership;
    cat.balance_violations = total.balance;
    cat.compression_k_mismatches = total.k_mismatch;
    for (auto& [k, e] : total.entries) cat.entries.push_back(std::move(e));
    std::sort(cat.entries.begin(), cat.entries.end(),
              [](const CatalogEntry& a, const CatalogEntry& b) { return a.key < b.key; });
    std::map<std::string, int> abstract_sizes;
    for (const auto& e : cat.entries) ++abstract_sizes[e.abstract];
    for (const auto& [a, n] : abstract_sizes) cat.abstract_collisions += n - 1;
    return cat;
}

void write_catalog_jsonl(std::ostream& out, const ComponentCatalog& catalog, int M) {
    for (const CatalogEntry* e : catalog.members(M)) {
        nlohmann::json j{{"key", e->key},
                         {"stats", to_json(e->stats)},
                         {"vertices", e->graph.vertices.size()},
                         {"edges", e->graph.edges.size()},
                         {"occurrences", e->occurrences},
                         {"compressed_class", e->compressed_abstract}};
        out << j.dump() << '\n';
    }
}

CountingReport verify_counting_bounds(const ComponentCatalog& catalog, int M, std::span<const double> lambdas) {
    CountingReport r;
    r.M = M;
    auto members = catalog.members(M);
    r.members = static_cast<int64_t>(members.size());
    auto note = [&](const std::string& what, const CatalogEntry& e) {
        if (r.violations.size() < 20) r.violations.push_back(what + " " + e.key);
    };
    struct Fiber {
        int count = 0;
        int k = -1;
        bool mixed = false;
    };
    std::map<std::string, Fiber> fibers;
    for (const CatalogEntry* e : members) {
        const auto& s = e->stats;
        if (s.vacancies < 4) {
            ++r.v4_violations;
            note("v<4", *e);
        }
        if (s.vacancies < 2 * (s.k() - 1)) {
            ++r.vk_violations;
            note("v<2(k-1)", *e);
        }
        Fiber& f = fibers[e->compressed_abstract];
        ++f.count;
        if (f.k >= 0 && f.k != s.k()) f.mixed = true;
        f.k = s.k();
    }
    r.classes = static_cast<int64_t>(fibers.size());
    for (const auto& [cls, f] : fibers) {
        r.max_fiber = std::max(r.max_fiber, f.count);
        if (f.mixed) {
            ++r.fiber_k_inconsistencies;
            if (r.violations.size() < 20) r.violations.push_back("mixed k in class " + cls);
        }
        double bound = f.k >= 2 ? std::pow(static_cast<double>(M), f.k - 2) : 0.0;
        if (f.count > bound + 1e-9) {
            ++r.fiber_violations;
            if (r.violations.size() < 20)
                r.violations.push_back("fiber " + std::to_string(f.count) + " > M^(k-2) in class " + cls);
        }
    }
    for (double lam : lambdas) {
        double sum = 1.0;
        for (const CatalogEntry* e : members) sum += std::pow(lam, -e->stats.vacancies / 4.0);
        r.lambdas.push_back(lam);
        r.sums.push_back(sum);
        if (M > 0) r.c_fit = std::max(r.c_fit, (sum - 1.0) * lam / M);
    }
    return r;
}

nlohmann::json to_json(const CountingReport& r, const ComponentCatalog& catalog) {
    nlohmann::json sums = nlohmann::json::array();
    for (std::size_t i = 0; i < r.lambdas.size(); ++i)
        sums.push_back({{"lambda", r.lambdas[i]}, {"sum", r.sums[i]}, {"sum_minus_one", r.sums[i] - 1.0}});
    return {{"window", {catalog.width, catalog.height}},
            {"boundary", "fully_packed"},
            {"completeness", "relative to the window: components touching its rim are " +
                                 std::string(catalog.keep_boundary_components ? "kept" : "discarded")},
            {"configurations", catalog.configurations},
            {"distinct_components", catalog.entries.size()},
            {"discarded_boundary_placements", catalog.discarded_boundary},
            {"rigidity_violations", catalog.rigidity_violations},
            {"abstract_collisions", catalog.abstract_collisions},
            {"degree_one_violations", catalog.degree_one_violations},
            {"membership_violations", catalog.membership_violations},
            {"balance_violations", catalog.balance_violations},
            {"compression_k_mismatches", catalog.compression_k_mismatches},
            {"M", r.M},
            {"members", r.members},
            {"compressed_classes", r.classes},
            {"max_fiber", r.max_fiber},
            {"v4_violations", r.v4_violations},
            {"vk_violations", r.vk_violations},
            {"fiber_violations", r.fiber_violations},
            {"fiber_k_inconsistencies", r.fiber_k_inconsistencies},
            {"weighted_sums", sums},
            {"c_fit", r.c_fit},
            {"c_fit_note", "empirical constant over the lambda grid, not a derived bound"},
            {"violations", r.violations},
            {"all_pass", r.all_pass()}};
}

}  // namespace squarepack
