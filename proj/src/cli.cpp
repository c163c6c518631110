#include "squarepack/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "squarepack/coupling.hpp"
#include "squarepack/errors.hpp"
#include "squarepack/exact.hpp"
#include "squarepack/graphs.hpp"
#include "squarepack/observables.hpp"
#include "squarepack/parallel.hpp"
#include "squarepack/render.hpp"
#include "squarepack/rng.hpp"
#include "squarepack/sampler.hpp"
#include "squarepack/sticks.hpp"

namespace squarepack {

namespace {

using nlohmann::json;

enum class Kind { integer, unsigned_integer, number, text, boolean, numbers, texts };

struct Param {
    std::string key;
    Kind kind;
    std::string help;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Param> params;
};

const std::vector<Param>& common_params() {
    static const std::vector<Param> p{
        {"seed", Kind::unsigned_integer, "64-bit seed (default 1)"},
        {"out", Kind::text, "write the JSON report (or image, for render) to this path"},
        {"threads", Kind::integer, "worker cap; 0 falls back to SQUAREPACK_THREADS"},
    };
    return p;
}

const std::vector<Command>& commands() {
    static const std::vector<Command> c{
        {"exact1d", "transfer-matrix partition function of the 2 x L strip; prints the value",
         {{"L", Kind::integer, "even strip length"},
          {"lambda", Kind::number, "fugacity"},
          {"boundary", Kind::text, "periodic or free"}}},
        {"exact2d", "exact partition polynomial of a small region",
         {{"width", Kind::integer, "region width"},
          {"height", Kind::integer, "region height"},
          {"boundary", Kind::text, "periodic, free or fully_packed"},
          {"lambda", Kind::numbers, "evaluation fugacities"},
          {"method", Kind::text, "automatic, brute_force or row_transfer"},
          {"max_area", Kind::integer, "brute-force area cap"},
          {"max_transfer_width", Kind::integer, "row-transfer width cap"}}},
        {"chessboard", "chessboard seminorm of a local event on a small torus",
         {{"width", Kind::integer, "torus width"},
          {"height", Kind::integer, "torus height"},
          {"lambda", Kind::numbers, "fugacities"},
          {"event", Kind::text, "vacant_face, occupied_site or all"},
          {"x0", Kind::integer, "block corner x"},
          {"y0", Kind::integer, "block corner y"},
          {"K", Kind::integer, "block width in edges"},
          {"block_height", Kind::integer, "block height in edges"},
          {"max_area", Kind::integer, "enumeration area cap"}}},
        {"sample", "Markov chain run with observable report",
         {{"width", Kind::integer, "domain width"},
          {"height", Kind::integer, "domain height"},
          {"boundary", Kind::text, "periodic, free or fully_packed"},
          {"lambda", Kind::number, "fugacity"},
          {"sweeps", Kind::integer, "total sweeps including burn-in"},
          {"burn_in", Kind::integer, "discarded sweeps"},
          {"thinning", Kind::integer, "sweeps between samples"},
          {"translation_move_fraction", Kind::number, "probability of a slide proposal per site"},
          {"initial", Kind::text, "empty, ver0, ver1, hor0, hor1 or a configuration file"},
          {"offsets", Kind::text, "aligned or random column offsets for a phase seed"},
          {"observables", Kind::texts, "parity_density, sticks, phase, correlations, structural, samples, covariance:x1,y1,x2,y2"},
          {"N", Kind::integer, "stick threshold divisor"},
          {"a", Kind::integer, "minimum qualifying sticks for a phase vote"},
          {"b", Kind::integer, "minimum stick length; 0 derives it from lambda"},
          {"final_out", Kind::text, "save the last sample to this path"}}},
        {"sticks", "stick census and invariant checks of a configuration",
         {{"config", Kind::text, "configuration file"},
          {"type", Kind::text, "stick type for the Psi set (ver0, ver1, hor0, hor1)"},
          {"K", Kind::integer, "Psi window width"},
          {"block_height", Kind::integer, "Psi window height"},
          {"N", Kind::integer, "Psi divisor"}}},
        {"phase", "phase vote of a configuration",
         {{"config", Kind::text, "configuration file"},
          {"lambda", Kind::number, "fugacity for the default stick threshold"},
          {"N", Kind::integer, "stick threshold divisor"},
          {"a", Kind::integer, "minimum qualifying sticks"},
          {"b", Kind::integer, "minimum stick length; 0 derives it from lambda"}}},
        {"components", "component graphs of a configuration, or exhaustive window enumeration",
         {{"config", Kind::text, "configuration file; omit to enumerate a window"},
          {"width", Kind::integer, "window width"},
          {"height", Kind::integer, "window height"},
          {"M", Kind::numbers, "stick-run caps"},
          {"lambdas", Kind::numbers, "fugacities for the counting sums"},
          {"keep_boundary", Kind::boolean, "also harvest components touching the window rim"},
          {"max_area", Kind::integer, "window area cap"},
          {"catalog_out", Kind::text, "write the largest-M member catalog as JSON lines"}}},
        {"coupling", "phase-matched coupling of two chains and cluster radius tails",
         {{"width", Kind::integer, "torus width"},
          {"height", Kind::integer, "torus height"},
          {"lambda", Kind::number, "fugacity"},
          {"sweeps", Kind::integer, "sweeps per chain including burn-in"},
          {"burn_in", Kind::integer, "discarded sweeps"},
          {"thinning", Kind::integer, "sweeps between pairs"},
          {"translation_move_fraction", Kind::number, "probability of a slide proposal per site"},
          {"phase", Kind::text, "seed phase"},
          {"random_offsets", Kind::boolean, "draw column offsets per chain"},
          {"N", Kind::integer, "stick threshold divisor"},
          {"a", Kind::integer, "minimum qualifying sticks"},
          {"b", Kind::integer, "minimum stick length; 0 derives it from lambda"},
          {"max_distance", Kind::integer, "largest tail distance; 0 means half the side"},
          {"min_count", Kind::integer, "smallest count used in the tail fit"},
          {"csv_out", Kind::text, "write the tail table as CSV"}}},
        {"render", "draw a configuration as SVG or PPM",
         {{"config", Kind::text, "configuration file"},
          {"format", Kind::text, "svg or ppm; default from the output suffix"},
          {"cell", Kind::integer, "pixels per lattice unit"},
          {"sticks", Kind::boolean, "overlay sticks"},
          {"grid", Kind::boolean, "draw the face grid"}}},
    };
    return c;
}

const Command& find_command(const std::string& name) {
    for (const Command& c : commands())
        if (c.name == name) return c;
    throw SpecError("unknown subcommand '" + name + "'");
}

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    for (char& ch : f)
        if (ch == '_') ch = '-';
    return f;
}

const Param* find_param(const Command& cmd, const std::string& key) {
    for (const Param& p : cmd.params)
        if (p.key == key) return &p;
    for (const Param& p : common_params())
        if (p.key == key) return &p;
    return nullptr;
}

// Reads parameters with defaults and records every value used, so reports carry the full spec.
class Params {
public:
    Params(const json& spec, const Command& cmd) : cmd_(cmd) {
        if (!spec.is_object()) throw SpecError("spec must be a JSON object");
        for (auto it = spec.begin(); it != spec.end(); ++it) {
            if (it.key() == "subcommand") continue;
            if (!find_param(cmd, it.key()))
                throw SpecError("unknown parameter '" + it.key() + "' for " + cmd.name);
        }
        in_ = spec;
        resolved_["subcommand"] = cmd.name;
    }

    bool has(const std::string& key) const { return in_.contains(key) && !in_[key].is_null(); }

    long long integer(const std::string& key, long long fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (!v.is_number_integer()) throw SpecError("'" + key + "' must be an integer");
        resolved_[key] = v;
        return v.get<long long>();
    }
    int small_integer(const std::string& key, int fallback) {
        long long v = integer(key, fallback);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw SpecError("'" + key + "' is out of range");
        return static_cast<int>(v);
    }
    uint64_t unsigned_integer(const std::string& key, uint64_t fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw SpecError("'" + key + "' must be a nonnegative integer");
        resolved_[key] = v;
        return v.get<uint64_t>();
    }
    double number(const std::string& key, double fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (!v.is_number()) throw SpecError("'" + key + "' must be a number");
        resolved_[key] = v;
        return v.get<double>();
    }
    std::string text(const std::string& key, const std::string& fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (!v.is_string()) throw SpecError("'" + key + "' must be a string");
        resolved_[key] = v;
        return v.get<std::string>();
    }
    std::string required_text(const std::string& key) {
        if (!has(key)) throw SpecError(cmd_.name + " needs '" + key + "'");
        return text(key, "");
    }
    bool boolean(const std::string& key, bool fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (!v.is_boolean()) throw SpecError("'" + key + "' must be true or false");
        resolved_[key] = v;
        return v.get<bool>();
    }
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (v.is_number()) v = json::array({v});
        if (!v.is_array() || v.empty()) throw SpecError("'" + key + "' must be a number or a nonempty list");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) throw SpecError("'" + key + "' must hold numbers");
            out.push_back(e.get<double>());
        }
        resolved_[key] = out;
        return out;
    }
    std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback) {
        json v = has(key) ? in_[key] : json(fallback);
        if (v.is_string()) v = json::array({v});
        if (!v.is_array()) throw SpecError("'" + key + "' must be a string or a list");
        std::vector<std::string> out;
        for (const json& e : v) {
            if (!e.is_string()) throw SpecError("'" + key + "' must hold strings");
            out.push_back(e.get<std::string>());
        }
        resolved_[key] = out;
        return out;
    }
    // Common parameters are always recorded, so every artifact names its seed.
    uint64_t seed() { return unsigned_integer("seed", 1); }
    int threads() { return resolve_threads(small_integer("threads", 0)); }
    std::string out() { return text("out", ""); }

    const json& resolved() const { return resolved_; }

private:
    const Command& cmd_;
    json in_;
    json resolved_;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << content;
    if (!f) throw IoError("write failed for '" + path + "'");
}

std::string format_value(long double v) {
    std::ostringstream o;
    o << std::setprecision(15) << static_cast<double>(v);
    return o.str();
}

json point_json(Point p) { return json::array({p.x, p.y}); }

// Finishes a JSON-producing subcommand: the report goes to --out or to stdout.
json emit(json report, Params& p, const std::string& out_path, std::ostream& out) {
    report["spec"] = p.resolved();
    if (out_path.empty()) out << report.dump(2) << '\n';
    else write_file(out_path, report.dump(2) + "\n");
    return report;
}

json run_exact1d(Params& p, std::ostream& out) {
    p.seed();
    p.threads();
    int L = p.small_integer("L", 4);
    double lambda = p.number("lambda", 1.0);
    std::string boundary = p.text("boundary", "periodic");
    std::string out_path = p.out();
    json r;
    if (boundary == "periodic") {
        long double z = z1d_periodic(L, lambda);
        long double bound = std::pow(1.0L + 0.5L / std::sqrt(static_cast<long double>(lambda)), L);
        r = {{"value", static_cast<double>(z)}, {"lower_bound", static_cast<double>(bound)}, {"bound_holds", z >= bound}};
        out << format_value(z) << '\n';
    } else if (boundary == "free") {
        long double z = z1d_free(L, lambda);
        long double bound = 1.0L + static_cast<long double>(L) * L / (8.0L * lambda);
        r = {{"value", static_cast<double>(z)}, {"lower_bound", static_cast<double>(bound)}, {"bound_holds", z >= bound}};
        out << format_value(z) << '\n';
    } else {
        throw SpecError("exact1d boundary must be periodic or free");
    }
    r["spec"] = p.resolved();
    if (!out_path.empty()) write_file(out_path, r.dump(2) + "\n");
    return r;
}

EnumerationMethod parse_method(const std::string& m) {
    if (m == "automatic") return EnumerationMethod::automatic;
    if (m == "brute_force") return EnumerationMethod::brute_force;
    if (m == "row_transfer") return EnumerationMethod::row_transfer;
    throw SpecError("unknown method '" + m + "'");
}

json run_exact2d(Params& p, std::ostream& out) {
    p.seed();
    Domain d{p.small_integer("width", 4), p.small_integer("height", 4), parse_boundary(p.text("boundary", "periodic"))};
    std::vector<double> lambdas = p.numbers("lambda", {1.0});
    EnumerationMethod method = parse_method(p.text("method", "automatic"));
    EnumerationLimits limits;
    limits.max_area = p.small_integer("max_area", limits.max_area);
    limits.max_transfer_width = p.small_integer("max_transfer_width", limits.max_transfer_width);
    limits.threads = p.threads();
    std::string out_path = p.out();
    PartitionPolynomial poly = partition_polynomial(d, method, limits);
    return emit(poly.to_json(lambdas), p, out_path, out);
}

json run_chessboard(Params& p, std::ostream& out) {
    p.seed();
    Domain torus{p.small_integer("width", 4), p.small_integer("height", 4), Boundary::periodic};
    std::vector<double> lambdas = p.numbers("lambda", {1.0});
    std::string event = p.text("event", "vacant_face");
    Block block{p.small_integer("x0", 0), p.small_integer("y0", 0), p.small_integer("K", 1),
                p.small_integer("block_height", 1)};
    EnumerationLimits limits;
    limits.max_area = p.small_integer("max_area", limits.max_area);
    limits.threads = p.threads();
    std::string out_path = p.out();

    const int row = block.K + 1;
    LocalFunction f;
    if (event == "vacant_face") {
        // The lower-left face of the block is covered only by centers on its four corners.
        uint64_t corners = 1ULL | (1ULL << 1) | (1ULL << row) | (1ULL << (row + 1));
        f = [corners](uint64_t pat) { return (pat & corners) == 0 ? 1.0 : 0.0; };
    } else if (event == "occupied_site") {
        f = [](uint64_t pat) { return (pat & 1ULL) ? 1.0 : 0.0; };
    } else if (event == "all") {
        f = [](uint64_t) { return 1.0; };
    } else {
        throw SpecError("unknown event '" + event + "'");
    }
    json rows = json::array();
    for (double lambda : lambdas) {
        TorusEnsemble ensemble(torus, lambda, limits);
        long double zeta = chessboard_seminorm(ensemble, block, f);
        json row_json{{"lambda", lambda}, {"zeta", static_cast<double>(zeta)}};
        if (event == "vacant_face") {
            double bound = std::pow(lambda, -0.25);
            row_json["bound"] = bound;
            row_json["bound_holds"] = static_cast<double>(zeta) <= bound + 1e-12;
        }
        rows.push_back(row_json);
    }
    json r{{"torus", {torus.width, torus.height}},
           {"block", {{"x0", block.x0}, {"y0", block.y0}, {"K", block.K}, {"L", block.L}}},
           {"images", block_images(torus, block).size()},
           {"event", event},
           {"evaluations", rows}};
    return emit(r, p, out_path, out);
}

Configuration initial_configuration(Params& p, uint64_t seed) {
    std::string initial = p.text("initial", "empty");
    std::string offsets_mode = p.text("offsets", "aligned");
    if (offsets_mode != "aligned" && offsets_mode != "random")
        throw SpecError("offsets must be aligned or random");
    const std::set<std::string> phases{"ver0", "ver1", "hor0", "hor1"};
    if (initial != "empty" && !phases.count(initial)) {
        Configuration c = load_configuration(initial);
        if (p.small_integer("width", c.width()) != c.width() || p.small_integer("height", c.height()) != c.height() ||
            parse_boundary(p.text("boundary", std::string(to_string(c.boundary())))) != c.boundary())
            throw SpecError("width, height and boundary disagree with the initial configuration");
        return c;
    }
    int w = p.small_integer("width", 16), h = p.small_integer("height", 16);
    Boundary b = parse_boundary(p.text("boundary", "periodic"));
    if (initial == "empty") return Configuration::empty(w, h, b);
    Phase phase = parse_phase(initial);
    bool vertical = phase == Phase::ver0 || phase == Phase::ver1;
    std::vector<int> offsets;
    if (offsets_mode == "random") {
        Rng rng(seed, 77);
        offsets.resize((vertical ? w : h) / 2);
        for (int& o : offsets) o = static_cast<int>(rng.below(2));
    }
    return seed_phase_configuration(w, h, b, phase, offsets);
}

json run_sample(Params& p, std::ostream& out) {
    uint64_t seed = p.seed();
    p.threads();
    ChainParams cp;
    cp.initial = initial_configuration(p, seed);
    cp.seed = seed;
    cp.lambda = p.number("lambda", 1.0);
    cp.sweeps = p.integer("sweeps", 1000);
    cp.burn_in = p.integer("burn_in", cp.sweeps / 5);
    cp.thinning = p.integer("thinning", 10);
    cp.translation_move_fraction = p.number("translation_move_fraction", 0.5);
    ObservableSpec spec = ObservableSpec::from_names(p.texts("observables", {"parity_density", "sticks", "phase"}));
    spec.N = p.small_integer("N", spec.N);
    spec.phase_a = p.small_integer("a", spec.phase_a);
    spec.phase_b = p.small_integer("b", spec.phase_b);
    std::string final_out = p.text("final_out", "");
    std::string out_path = p.out();
    cp.validate();

    std::vector<Configuration> samples = collect_samples(cp);
    RunMetadata meta;
    meta.seed = seed;
    meta.lambda = cp.lambda;
    meta.width = cp.initial.width();
    meta.height = cp.initial.height();
    meta.boundary = cp.initial.boundary();
    meta.sweeps = cp.sweeps;
    meta.burn_in = cp.burn_in;
    meta.thinning = cp.thinning;
    meta.translation_move_fraction = cp.translation_move_fraction;
    meta.initial = encode(cp.initial);
    ObservableReport report = summarize(samples, spec, meta);
    if (!final_out.empty()) save_configuration(samples.back(), final_out);
    return emit(report.to_json(), p, out_path, out);
}

json stick_json(const Stick& s) {
    return {{"type", type_name(s.type)}, {"anchor", point_json(s.anchor)}, {"length", s.length}, {"wraps", s.wraps}};
}

json run_sticks(Params& p, std::ostream& out) {
    p.seed();
    p.threads();
    Configuration c = load_configuration(p.required_text("config"));
    std::string out_path = p.out();
    std::vector<Stick> sticks = extract_sticks(c);
    json list = json::array();
    for (const Stick& s : sticks) list.push_back(stick_json(s));
    json r{{"census", to_json(stick_census(c))},
           {"sticks", list},
           {"stick_edges", detect_stick_edges(c).size()},
           {"checks",
            {{"vertical_meets_horizontal", vertical_meets_horizontal(c)},
             {"rectangle_divided_both_ways", rectangle_divided_both_ways(c, sticks)}}}};
    if (p.has("type")) {
        Phase ph = parse_phase(p.text("type", ""));
        if (ph == Phase::undetermined) throw SpecError("Psi needs a stick type");
        StickType t = StickType::from_index(static_cast<int>(ph));
        int K = p.small_integer("K", 8), L = p.small_integer("block_height", 8), N = p.small_integer("N", 4);
        r["psi"] = to_json(psi_set(c, K, L, t, N), t);
    }
    return emit(r, p, out_path, out);
}

json run_phase(Params& p, std::ostream& out) {
    p.seed();
    p.threads();
    Configuration c = load_configuration(p.required_text("config"));
    int N = p.small_integer("N", 4);
    int a = p.small_integer("a", 1);
    int b = p.small_integer("b", 0);
    if (b == 0) {
        if (!p.has("lambda")) throw SpecError("phase needs 'lambda' or an explicit 'b'");
        b = default_stick_threshold(p.number("lambda", 0.0), N);
    }
    std::string out_path = p.out();
    PhaseVote v = classify_phase_detail(c, a, b);
    json q;
    for (int t = 0; t < 4; ++t) q[type_name(StickType::from_index(t))] = v.qualifying[t];
    json r{{"phase", std::string(to_string(v.phase))}, {"a", a}, {"b", b}, {"qualifying", q}};
    return emit(r, p, out_path, out);
}

json run_components(Params& p, std::ostream& out) {
    p.seed();
    int threads = p.threads();
    if (p.has("config")) {
        Configuration c = load_configuration(p.text("config", ""));
        std::string out_path = p.out();
        ConfigurationGraph g = build_component_graph(c);
        json comps = json::array();
        for (const ComponentGraph& h : g.components) {
            json e = to_json(h);
            e["stats"] = to_json(component_stats(h));
            e["key"] = canonicalize(h);
            e["abstract"] = abstract_key(h);
            comps.push_back(e);
        }
        json r{{"components", comps}, {"isolated_vertices", g.isolated_vertices}, {"vertex_count", g.vertex_count}};
        return emit(r, p, out_path, out);
    }
    int w = p.small_integer("width", 6), h = p.small_integer("height", 6);
    std::vector<double> Ms = p.numbers("M", {1, 2, 3});
    std::vector<double> lambdas = p.numbers("lambdas", {10, 100, 1e4});
    ComponentEnumerationOptions opts;
    opts.keep_boundary_components = p.boolean("keep_boundary", false);
    opts.max_area = p.small_integer("max_area", opts.max_area);
    opts.threads = threads;
    std::string catalog_out = p.text("catalog_out", "");
    std::string out_path = p.out();
    std::vector<int> caps;
    for (double m : Ms) {
        if (m < 1 || m != std::floor(m)) throw SpecError("'M' values must be positive integers");
        caps.push_back(static_cast<int>(m));
    }
    ComponentCatalog cat = enumerate_components(w, h, opts);
    json reports = json::array();
    bool pass = true;
    for (int M : caps) {
        CountingReport rep = verify_counting_bounds(cat, M, lambdas);
        pass = pass && rep.all_pass();
        reports.push_back(to_json(rep, cat));
    }
    if (!catalog_out.empty()) {
        std::ofstream f(catalog_out, std::ios::binary);
        if (!f) throw IoError("cannot write '" + catalog_out + "'");
        write_catalog_jsonl(f, cat, *std::max_element(caps.begin(), caps.end()));
    }
    json r{{"window", {w, h}}, {"counting", reports}, {"all_pass", pass}};
    return emit(r, p, out_path, out);
}

json run_coupling(Params& p, std::ostream& out) {
    TailParams t;
    t.seed = p.seed();
    t.threads = p.threads();
    t.width = p.small_integer("width", t.width);
    t.height = p.small_integer("height", t.height);
    t.lambda = p.number("lambda", t.lambda);
    t.sweeps = p.integer("sweeps", t.sweeps);
    t.burn_in = p.integer("burn_in", t.burn_in);
    t.thinning = p.integer("thinning", t.thinning);
    t.translation_move_fraction = p.number("translation_move_fraction", t.translation_move_fraction);
    t.phase = parse_phase(p.text("phase", "ver0"));
    t.random_offsets = p.boolean("random_offsets", t.random_offsets);
    t.N = p.small_integer("N", t.N);
    t.phase_a = p.small_integer("a", t.phase_a);
    t.phase_b = p.small_integer("b", t.phase_b);
    t.max_distance = p.small_integer("max_distance", t.max_distance);
    t.min_count = p.integer("min_count", t.min_count);
    std::string csv_out = p.text("csv_out", "");
    std::string out_path = p.out();
    TailTable table = radius_tail_experiment(t);
    if (!csv_out.empty()) write_file(csv_out, tail_csv(table));
    return emit(to_json(table), p, out_path, out);
}

json run_render(Params& p, std::ostream& out) {
    p.seed();
    p.threads();
    Configuration c = load_configuration(p.required_text("config"));
    std::string path = p.required_text("out");
    RenderStyle style;
    style.format = p.has("format") ? parse_image_format(p.text("format", "")) : image_format_for_path(path);
    style.cell = p.small_integer("cell", style.cell);
    style.sticks = p.boolean("sticks", false);
    style.grid = p.boolean("grid", true);
    style.metadata = {{"spec", p.resolved()}};
    render_image(c, style, path);
    json r{{"image", path},
           {"format", style.format == ImageFormat::ppm ? "ppm" : "svg"},
           {"tiles", c.tile_count()},
           {"sticks", style.sticks ? static_cast<int>(extract_sticks(c).size()) : 0},
           {"spec", p.resolved()}};
    out << r.dump(2) << '\n';
    return r;
}

// Converts one flag value to the JSON type of its parameter.
json flag_value(const Param& p, const std::vector<std::string>& values) {
    auto fail = [&](const std::string& v) -> json {
        throw SpecError("invalid value '" + v + "' for " + flag_name(p.key));
    };
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        return parts;
    };
    auto to_number = [&](const std::string& v) -> json {
        try {
            std::size_t used = 0;
            double d = std::stod(v, &used);
            if (used != v.size()) return fail(v);
            return d;
        } catch (const std::logic_error&) {
            return fail(v);
        }
    };
    if (p.kind == Kind::boolean && (values.empty() || values.back().empty())) return true;
    if (values.empty()) return fail("");
    const std::string& last = values.back();
    try {
        switch (p.kind) {
            case Kind::integer: {
                std::size_t used = 0;
                long long v = std::stoll(last, &used);
                if (used != last.size()) return fail(last);
                return v;
            }
            case Kind::unsigned_integer: {
                std::size_t used = 0;
                if (!last.empty() && last[0] == '-') return fail(last);
                unsigned long long v = std::stoull(last, &used);
                if (used != last.size()) return fail(last);
                return v;
            }
            case Kind::number: return to_number(last);
            case Kind::text: return last;
            case Kind::boolean:
                if (last == "true" || last == "1") return true;
                if (last == "false" || last == "0") return false;
                return fail(last);
            case Kind::numbers: {
                json arr = json::array();
                for (const std::string& v : values)
                    for (const std::string& part : split(v)) arr.push_back(to_number(part));
                return arr;
            }
            case Kind::texts: return values;
        }
    } catch (const std::logic_error&) {
        return fail(last);
    }
    return fail(last);
}

void report_error(std::ostream& err, const std::string& code, const std::string& message) {
    err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

std::vector<std::string> subcommand_names() {
    std::vector<std::string> out;
    for (const Command& c : commands()) out.push_back(c.name);
    return out;
}

json execute_spec(const json& spec, std::ostream& out) {
    if (!spec.is_object() || !spec.contains("subcommand") || !spec["subcommand"].is_string())
        throw SpecError("spec needs a string 'subcommand'");
    const Command& cmd = find_command(spec["subcommand"].get<std::string>());
    Params p(spec, cmd);
    try {
        if (cmd.name == "exact1d") return run_exact1d(p, out);
        if (cmd.name == "exact2d") return run_exact2d(p, out);
        if (cmd.name == "chessboard") return run_chessboard(p, out);
        if (cmd.name == "sample") return run_sample(p, out);
        if (cmd.name == "sticks") return run_sticks(p, out);
        if (cmd.name == "phase") return run_phase(p, out);
        if (cmd.name == "components") return run_components(p, out);
        if (cmd.name == "coupling") return run_coupling(p, out);
        return run_render(p, out);
    } catch (const json::exception& e) {
        throw SpecError(std::string("malformed spec: ") + e.what());
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hard-square tile packings: exact enumeration, sampling, sticks, components and couplings",
                 "squarepack"};
    app.require_subcommand(1);

    struct Bound {
        const Param* param;
        CLI::Option* option;
        std::vector<std::string> values;
        bool flag = false;
    };
    // Node-stable storage for option targets.
    std::map<std::string, std::map<std::string, Bound>> bound;
    std::map<std::string, std::string> spec_paths;
    std::map<std::string, CLI::App*> subs;

    for (const Command& cmd : commands()) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        subs[cmd.name] = sub;
        sub->add_option("--spec", spec_paths[cmd.name], "JSON experiment spec; flags override its keys");
        std::vector<const Param*> all;
        for (const Param& p : cmd.params) all.push_back(&p);
        for (const Param& p : common_params()) all.push_back(&p);
        for (const Param* p : all) {
            Bound& b = bound[cmd.name][p->key];
            b.param = p;
            b.option = sub->add_option(flag_name(p->key), b.values, p->help);
            if (p->kind == Kind::boolean) b.option->expected(0, 1);
            else if (p->kind != Kind::numbers && p->kind != Kind::texts) b.option->expected(1);
            else b.option->expected(1, CLI::detail::expected_max_vector_size)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    std::string name;
    for (const auto& [n, sub] : subs)
        if (sub->parsed()) name = n;

    try {
        json spec = json::object();
        const std::string& spec_path = spec_paths[name];
        if (!spec_path.empty()) {
            std::ifstream f(spec_path, std::ios::binary);
            if (!f) throw IoError("cannot open '" + spec_path + "'");
            try {
                spec = json::parse(f);
            } catch (const json::parse_error& e) {
                throw SpecError("invalid JSON in '" + spec_path + "': " + e.what());
            }
            if (!spec.is_object()) throw SpecError("spec must be a JSON object");
            if (spec.contains("subcommand") && spec["subcommand"] != name)
                throw SpecError("spec is for '" + spec["subcommand"].dump() + "', not '" + name + "'");
        }
        spec["subcommand"] = name;
        for (const auto& [key, b] : bound[name])
            if (b.option->count() > 0) spec[key] = flag_value(*b.param, b.values);
        execute_spec(spec, out);
        return 0;
    } catch (const Error& e) {
        report_error(err, e.code(), e.what());
    } catch (const std::exception& e) {
        report_error(err, "InternalError", e.what());
    }
    return 1;
}

}  // namespace squarepack
