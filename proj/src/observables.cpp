#include "squarepack/observables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "squarepack/errors.hpp"

namespace squarepack {

Estimate batch_mean(std::span<const double> series, int batches) {
    Estimate e;
    const std::size_t n = series.size();
    if (n == 0) return e;
    double total = 0;
    for (double v : series) total += v;
    e.mean = total / n;
    if (n < 2) return e;
    std::size_t b = std::min<std::size_t>(std::max(batches, 2), n);
    std::vector<double> means(b, 0);
    for (std::size_t j = 0; j < b; ++j) {
        std::size_t lo = j * n / b, hi = (j + 1) * n / b;
        double s = 0;
        for (std::size_t i = lo; i < hi; ++i) s += series[i];
        means[j] = s / (hi - lo);
    }
    double mbar = 0;
    for (double m : means) mbar += m;
    mbar /= b;
    double ss = 0;
    for (double m : means) ss += (m - mbar) * (m - mbar);
    e.error = std::sqrt(ss / (static_cast<double>(b) * (b - 1)));
    return e;
}

namespace {

void require_samples(std::span<const Configuration> samples, std::size_t minimum = 1) {
    if (samples.size() < minimum)
        throw InsufficientData("need at least " + std::to_string(minimum) + " samples, got " +
                               std::to_string(samples.size()));
}

std::vector<uint8_t> cells_of(const Configuration& c) {
    std::vector<uint8_t> out(static_cast<std::size_t>(c.area()), 0);
    for (Point p : c.centers()) out[static_cast<std::size_t>(p.y) * c.width() + p.x] = 1;
    return out;
}

bool in_class(SiteClass c, int x, int y) {
    switch (c) {
        case SiteClass::even_x: return x % 2 == 0;
        case SiteClass::odd_x: return x % 2 == 1;
        case SiteClass::even_y: return y % 2 == 0;
        case SiteClass::odd_y: return y % 2 == 1;
        default: return true;
    }
}

}  // namespace

std::string_view to_string(SiteClass c) {
    switch (c) {
        case SiteClass::automatic: return "automatic";
        case SiteClass::all: return "all";
        case SiteClass::even_x: return "even_x";
        case SiteClass::odd_x: return "odd_x";
        case SiteClass::even_y: return "even_y";
        case SiteClass::odd_y: return "odd_y";
    }
    return "all";
}

ParityDensity parity_density(std::span<const Configuration> samples) {
    require_samples(samples);
    const std::size_t n = samples.size();
    std::array<std::vector<double>, 4> residue;
    std::vector<double> ex(n), ox(n), ey(n), oy(n), tile(n), vac(n);
    for (auto& r : residue) r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Configuration& c = samples[i];
        std::array<int, 4> counts{};
        for (Point p : c.centers()) ++counts[(p.x % 2) + 2 * (p.y % 2)];
        // Class sizes are equal for even dimensions.
        double quarter = c.area() / 4.0;
        for (int r = 0; r < 4; ++r) residue[r][i] = counts[r] / quarter;
        ex[i] = (counts[0] + counts[2]) / (2 * quarter);
        ox[i] = (counts[1] + counts[3]) / (2 * quarter);
        ey[i] = (counts[0] + counts[1]) / (2 * quarter);
        oy[i] = (counts[2] + counts[3]) / (2 * quarter);
        tile[i] = static_cast<double>(c.tile_count()) / c.area();
        vac[i] = static_cast<double>(count_vacancies(c)) / c.domain().face_area();
    }
    ParityDensity d;
    for (int r = 0; r < 4; ++r) d.residue[r] = batch_mean(residue[r]);
    d.even_x = batch_mean(ex);
    d.odd_x = batch_mean(ox);
    d.even_y = batch_mean(ey);
    d.odd_y = batch_mean(oy);
    d.tile = batch_mean(tile);
    d.vacancy = batch_mean(vac);
    return d;
}

Estimate two_point_covariance(std::span<const Configuration> samples, Point u, Point v) {
    require_samples(samples);
    const Domain& d = samples.front().domain();
    for (Point p : {u, v})
        if (!d.in_grid(d.wrap(p))) throw RegionOutOfBounds("point outside the sampled region");
    const std::size_t n = samples.size();
    std::vector<double> a(n), b(n);
    double abar = 0, bbar = 0;
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = samples[i].occupied(u);
        b[i] = samples[i].occupied(v);
        abar += a[i];
        bbar += b[i];
    }
    abar /= n;
    bbar /= n;
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = (a[i] - abar) * (b[i] - bbar);
    return batch_mean(prod);
}

CorrelationCurve correlation_function(std::span<const Configuration> samples, Axis axis,
                                      const CorrelationOptions& options) {
    require_samples(samples, 2);
    const Configuration& first = samples.front();
    const int W = first.width(), H = first.height();
    const bool periodic = first.boundary() == Boundary::periodic;
    const int extent = axis == Axis::x ? W : H;
    if (options.stride < 1) throw SpecError("correlation stride must be positive");
    int max_d = options.max_distance > 0 ? options.max_distance : (periodic ? extent / 2 : extent - 1);
    max_d = std::min(max_d, periodic ? extent / 2 : extent - 1);

    SiteClass cls = options.sites;
    if (options.stride % 2 != 0) cls = SiteClass::all;
    if (cls == SiteClass::automatic) {
        ParityDensity pd = parity_density(samples);
        std::array<std::pair<double, SiteClass>, 4> cand{{{pd.even_x.mean, SiteClass::even_x},
                                                          {pd.odd_x.mean, SiteClass::odd_x},
                                                          {pd.even_y.mean, SiteClass::even_y},
                                                          {pd.odd_y.mean, SiteClass::odd_y}}};
        cls = std::max_element(cand.begin(), cand.end(), [](auto& l, auto& r) { return l.first < r.first; })->second;
    }

    CorrelationCurve curve;
    curve.axis = axis;
    curve.sites = cls;
    for (int d = 0; d <= max_d; d += options.stride) curve.distances.push_back(d);
    const std::size_t nd = curve.distances.size(), n = samples.size();

    std::vector<int> site_list;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (in_class(cls, x, y)) site_list.push_back(y * W + x);

    std::vector<std::vector<double>> P(nd, std::vector<double>(n));
    double mbar = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<uint8_t> cells = cells_of(samples[i]);
        long m = 0;
        for (int s : site_list) m += cells[s];
        mbar += static_cast<double>(m) / site_list.size();
        for (std::size_t k = 0; k < nd; ++k) {
            int d = curve.distances[k];
            long hits = 0, pairs = 0;
            for (int s : site_list) {
                int x = s % W, y = s / W;
                int tx = axis == Axis::x ? x + d : x, ty = axis == Axis::y ? y + d : y;
                if (periodic) {
                    tx %= W;
                    ty %= H;
                } else if (tx >= W || ty >= H) {
                    continue;
                }
                ++pairs;
                hits += cells[s] & cells[ty * W + tx];
            }
            P[k][i] = pairs ? static_cast<double>(hits) / pairs : 0.0;
        }
    }
    mbar /= n;
    for (std::size_t k = 0; k < nd; ++k) {
        Estimate e = batch_mean(P[k]);
        e.mean -= mbar * mbar;
        curve.values.push_back(e);
    }
    return curve;
}

CorrelationFit fit_correlation_curve(const CorrelationCurve& curve, double significance) {
    CorrelationFit fit;
    fit.axis = curve.axis;
    fit.curve = curve;
    std::vector<std::size_t> run;
    for (std::size_t k = 0; k < curve.values.size(); ++k) {
        const Estimate& e = curve.values[k];
        bool significant = e.mean > 0 && (std::isnan(e.error) ? false : e.mean > significance * e.error);
        if (!significant) break;
        run.push_back(k);
    }
    std::vector<std::size_t> use;
    for (std::size_t k : run)
        if (curve.distances[k] > 0) use.push_back(k);
    if (use.size() < 2) use = run;
    if (use.size() < 2) {
        fit.resolved = false;
        fit.length = 0;
        // With C(0) significant but C(stride) not, the decay length lies below
        // stride / ln(C(0) / (significance * SE(stride))).
        if (run.size() == 1 && curve.values.size() > 1) {
            const Estimate& e0 = curve.values[0];
            const Estimate& e1 = curve.values[1];
            double floor_value = significance * e1.error;
            if (floor_value > 0 && e0.mean > floor_value)
                fit.upper_bound = curve.distances[1] / std::log(e0.mean / floor_value);
        }
        return fit;
    }
    double sw = 0, sd = 0, sy = 0;
    std::vector<double> w(use.size()), dd(use.size()), yy(use.size());
    for (std::size_t i = 0; i < use.size(); ++i) {
        const Estimate& e = curve.values[use[i]];
        double sigma = std::max(e.error / e.mean, 1e-12);
        w[i] = 1.0 / (sigma * sigma);
        dd[i] = curve.distances[use[i]];
        yy[i] = std::log(e.mean);
        sw += w[i];
        sd += w[i] * dd[i];
        sy += w[i] * yy[i];
    }
    double dbar = sd / sw, ybar = sy / sw, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < use.size(); ++i) {
        sxx += w[i] * (dd[i] - dbar) * (dd[i] - dbar);
        sxy += w[i] * (dd[i] - dbar) * (yy[i] - ybar);
    }
    double slope = sxy / sxx;
    for (std::size_t k : use) fit.fitted_distances.push_back(curve.distances[k]);
    if (!(slope < 0)) {
        fit.resolved = false;
        fit.length = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.resolved = true;
    fit.length = -1.0 / slope;
    fit.error = (1.0 / std::sqrt(sxx)) / (slope * slope);
    return fit;
}

CorrelationFit correlation_length_fit(std::span<const Configuration> samples, Axis axis,
                                      const CorrelationOptions& options) {
    require_samples(samples, 2);
    return fit_correlation_curve(correlation_function(samples, axis, options), options.significance);
}

EvenColumnCheck even_column_tile_check(const Configuration& config) {
    EvenColumnCheck out;
    const Domain& d = config.domain();
    const FaceRect faces = d.faces();
    const bool periodic = d.boundary == Boundary::periodic;
    auto ver0_edge = [&](int x, int j) {
        return floor_mod(x, 2) == 0 && is_stick_edge(config, {{x, j}, Orientation::vertical});
    };
    auto face_ok = [&](int i) { return periodic || (i >= faces.x0 && i < faces.x0 + faces.width); };
    for (Point t : config.centers()) {
        if (t.x % 2 != 0) continue;
        ++out.tiles;
        int sides = 0, vacancies = 0;
        for (int j : {t.y - 1, t.y}) {
            for (int dir : {-1, 1}) {
                int vac = 0;
                bool found = false;
                // Line just outside the tile on this side, then alternate face / line.
                int line = dir < 0 ? t.x - 1 : t.x + 1;
                for (int step = 0; step < d.width; ++step) {
                    int face = dir < 0 ? line - 1 : line;
                    if (!face_ok(face)) break;
                    if (config.face_vacant({face, j})) ++vac;
                    line += dir;
                    if (ver0_edge(line, j)) {
                        found = true;
                        break;
                    }
                }
                if (!found) continue;
                ++sides;
                ++out.flanked_sides;
                vacancies += vac;
                if (vac == 0) ++out.violations;
            }
        }
        if (sides == 4) {
            ++out.fully_flanked_tiles;
            if (out.min_vacancies_fully_flanked < 0 || vacancies < out.min_vacancies_fully_flanked)
                out.min_vacancies_fully_flanked = vacancies;
        }
    }
    return out;
}

ObservableSpec ObservableSpec::from_names(const std::vector<std::string>& names) {
    ObservableSpec s;
    s.parity = s.sticks = s.phase = false;
    for (const std::string& n : names) {
        if (n == "parity_density") s.parity = true;
        else if (n == "sticks") s.sticks = true;
        else if (n == "phase") s.phase = true;
        else if (n == "correlations") s.correlations = true;
        else if (n == "structural") s.structural = true;
        else if (n == "samples") s.keep_samples = true;
        else if (n.rfind("covariance:", 0) == 0) {
            std::istringstream in(n.substr(11));
            int x1, y1, x2, y2;
            char c1, c2, c3;
            if (!(in >> x1 >> c1 >> y1 >> c2 >> x2 >> c3 >> y2) || c1 != ',' || c2 != ',' || c3 != ',')
                throw SpecError("covariance observables look like covariance:x1,y1,x2,y2");
            s.covariances.push_back({{x1, y1}, {x2, y2}});
        } else {
            throw SpecError("unknown observable '" + n + "'");
        }
    }
    return s;
}

ObservableReport summarize(std::span<const Configuration> samples, const ObservableSpec& spec,
                           const RunMetadata& meta) {
    require_samples(samples);
    ObservableReport r;
    r.meta = meta;
    r.samples = static_cast<int>(samples.size());
    if (spec.parity) r.density = parity_density(samples);
    if (spec.sticks) {
        CensusSummary cs;
        std::array<std::vector<double>, 4> counts;
        for (const Configuration& c : samples) {
            StickCensus sc = stick_census(c);
            for (int t = 0; t < 4; ++t) {
                counts[t].push_back(sc.counts[t]);
                for (auto [len, k] : sc.length_histogram[t]) cs.length_histogram[t][len] += k;
            }
        }
        for (int t = 0; t < 4; ++t) cs.mean_counts[t] = batch_mean(counts[t]);
        r.census = cs;
    }
    if (spec.phase) {
        r.phase_threshold = spec.phase_b > 0 ? spec.phase_b : default_stick_threshold(meta.lambda, spec.N);
        std::array<int, 5> tally{};
        for (const Configuration& c : samples)
            ++tally[static_cast<int>(classify_phase(c, spec.phase_a, r.phase_threshold))];
        for (int k = 0; k < 5; ++k) {
            r.phase_fractions[k] = static_cast<double>(tally[k]) / samples.size();
            if (2 * tally[k] > static_cast<int>(samples.size())) r.phase = static_cast<Phase>(k);
        }
    }
    if (spec.correlations && samples.size() >= 2) {
        r.fit_x = correlation_length_fit(samples, Axis::x, spec.correlation);
        r.fit_y = correlation_length_fit(samples, Axis::y, spec.correlation);
    }
    for (const auto& uv : spec.covariances)
        r.covariances.push_back({uv, two_point_covariance(samples, uv.first, uv.second)});
    if (spec.structural) {
        EvenColumnCheck total;
        for (const Configuration& c : samples) {
            EvenColumnCheck e = even_column_tile_check(c);
            total.tiles += e.tiles;
            total.flanked_sides += e.flanked_sides;
            total.fully_flanked_tiles += e.fully_flanked_tiles;
            total.violations += e.violations;
            if (e.min_vacancies_fully_flanked >= 0 &&
                (total.min_vacancies_fully_flanked < 0 || e.min_vacancies_fully_flanked < total.min_vacancies_fully_flanked))
                total.min_vacancies_fully_flanked = e.min_vacancies_fully_flanked;
        }
        r.structural = total;
    }
    if (spec.keep_samples) r.raw_samples.assign(samples.begin(), samples.end());
    return r;
}

nlohmann::json to_json(const Estimate& e) {
    nlohmann::json j = {{"mean", e.mean}};
    j["stderr"] = std::isnan(e.error) ? nlohmann::json(nullptr) : nlohmann::json(e.error);
    return j;
}

static nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const CorrelationFit& fit) {
    nlohmann::json curve = nlohmann::json::array();
    for (std::size_t k = 0; k < fit.curve.distances.size(); ++k)
        curve.push_back({{"d", fit.curve.distances[k]}, {"C", fit.curve.values[k].mean},
                         {"stderr", number_or_null(fit.curve.values[k].error)}});
    return {{"axis", fit.axis == Axis::x ? "x" : "y"},
            {"sites", to_string(fit.curve.sites)},
            {"length", number_or_null(fit.length)},
            {"stderr", number_or_null(fit.error)},
            {"resolved", fit.resolved},
            {"upper_bound", number_or_null(fit.upper_bound)},
            {"fitted_distances", fit.fitted_distances},
            {"curve", curve}};
}

std::string correlation_csv(const CorrelationCurve& curve) {
    std::ostringstream out;
    out << "axis,d,C,stderr\n";
    for (std::size_t k = 0; k < curve.distances.size(); ++k)
        out << (curve.axis == Axis::x ? "x" : "y") << ',' << curve.distances[k] << ','
            << curve.values[k].mean << ',' << curve.values[k].error << '\n';
    return out.str();
}

nlohmann::json ObservableReport::to_json() const {
    using squarepack::to_json;
    nlohmann::json j;
    j["metadata"] = {{"seed", meta.seed},
                     {"lambda", meta.lambda},
                     {"dims", {meta.width, meta.height}},
                     {"boundary", squarepack::to_string(meta.boundary)},
                     {"sweeps", meta.sweeps},
                     {"burn_in", meta.burn_in},
                     {"thinning", meta.thinning},
                     {"translation_move_fraction", meta.translation_move_fraction},
                     {"initial", meta.initial},
                     {"weight_convention",
                      "sampler weights lambda^n; the vacancy weight lambda^(-v/4) differs by the "
                      "constant lambda^(-area/4) on a torus"}};
    j["samples"] = samples;
    if (density) {
        nlohmann::json res = nlohmann::json::object();
        const char* names[4] = {"x0_y0", "x1_y0", "x0_y1", "x1_y1"};
        for (int k = 0; k < 4; ++k) res[names[k]] = to_json(density->residue[k]);
        j["parity_density"] = {{"by_residue", res},
                               {"even_x", to_json(density->even_x)},
                               {"odd_x", to_json(density->odd_x)},
                               {"even_y", to_json(density->even_y)},
                               {"odd_y", to_json(density->odd_y)},
                               {"tile_density", to_json(density->tile)},
                               {"vacancy_density", to_json(density->vacancy)}};
    }
    if (census) {
        nlohmann::json types = nlohmann::json::object();
        for (int t = 0; t < 4; ++t) {
            nlohmann::json hist = nlohmann::json::object();
            for (auto [len, k] : census->length_histogram[t]) hist[std::to_string(len)] = k;
            types[type_name(StickType::from_index(t))] = {{"mean_count", to_json(census->mean_counts[t])},
                                                          {"length_histogram", hist}};
        }
        j["stick_census"] = types;
    }
    if (phase_threshold > 0) {
        nlohmann::json fr = nlohmann::json::object();
        for (int k = 0; k < 5; ++k) fr[std::string(squarepack::to_string(static_cast<Phase>(k)))] = phase_fractions[k];
        j["phase"] = {{"label", squarepack::to_string(phase)},
                      {"fractions", fr},
                      {"stick_length_threshold", phase_threshold},
                      {"threshold_note", "calibration choice: b = 2 floor(2 sqrt(lambda) / (2N)), at least 2"}};
    }
    if (fit_x || fit_y) {
        j["correlation_fits"] = nlohmann::json::object();
        if (fit_x) j["correlation_fits"]["x"] = to_json(*fit_x);
        if (fit_y) j["correlation_fits"]["y"] = to_json(*fit_y);
    }
    if (!covariances.empty()) {
        nlohmann::json cv = nlohmann::json::array();
        for (const auto& [uv, e] : covariances)
            cv.push_back({{"u", {uv.first.x, uv.first.y}}, {"v", {uv.second.x, uv.second.y}},
                          {"covariance", to_json(e)}});
        j["covariances"] = cv;
    }
    if (structural)
        j["even_column_check"] = {{"tiles", structural->tiles},
                                  {"flanked_sides", structural->flanked_sides},
                                  {"fully_flanked_tiles", structural->fully_flanked_tiles},
                                  {"min_vacancies_fully_flanked", structural->min_vacancies_fully_flanked},
                                  {"violations", structural->violations}};
    if (!raw_samples.empty()) {
        nlohmann::json s = nlohmann::json::array();
        for (const Configuration& c : raw_samples) s.push_back(squarepack::to_json(c)["occupied"]);
        j["raw_samples"] = s;
    }
    return j;
}

}  // namespace squarepack
