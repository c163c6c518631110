#include "squarepack/lattice.hpp"

#include <fstream>
#include <sstream>

#include "squarepack/errors.hpp"

namespace squarepack {

std::string_view to_string(Boundary b) {
    switch (b) {
        case Boundary::periodic: return "periodic";
        case Boundary::free: return "free";
        case Boundary::fully_packed: return "fully_packed";
    }
    return "periodic";
}

Boundary parse_boundary(std::string_view text) {
    if (text == "periodic") return Boundary::periodic;
    if (text == "free") return Boundary::free;
    if (text == "fully_packed") return Boundary::fully_packed;
    throw SpecError("unknown boundary '" + std::string(text) + "'");
}

ParityClass tile_parity_class(Point center) {
    return {floor_mod(center.x - 1, 2), floor_mod(center.y - 1, 2)};
}

FaceRect Domain::faces() const {
    if (boundary == Boundary::free) return {-1, -1, width + 1, height + 1};
    return {0, 0, width, height};
}

bool Domain::allowed_center(Point p) const {
    if (boundary == Boundary::periodic) return true;
    if (!in_grid(p)) return false;
    if (boundary == Boundary::fully_packed) return p.x >= 1 && p.y >= 1;
    return true;
}

Point Domain::wrap(Point p) const {
    if (boundary != Boundary::periodic) return p;
    return {floor_mod(p.x, width), floor_mod(p.y, height)};
}

bool Domain::exterior_tile(Point p) const {
    if (boundary != Boundary::fully_packed) return false;
    if (in_grid(p)) return false;
    return floor_mod(p.x, 2) == 1 && floor_mod(p.y, 2) == 1;
}

void Configuration::validate_dims(int width, int height) {
    if (width < 4 || height < 4)
        throw DimensionError("dimensions must be at least 4, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    if (width % 2 != 0 || height % 2 != 0)
        throw DimensionError("dimensions must be even, got " + std::to_string(width) + "x" +
                             std::to_string(height));
}

Configuration::Configuration(Domain d, std::vector<uint64_t> bits)
    : domain_(d), bits_(std::move(bits)) {
    tiles_ = 0;
    for (uint64_t w : bits_) tiles_ += __builtin_popcountll(w);
}

static std::string point_text(Point p) {
    return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

Configuration Configuration::from_cells(int width, int height, Boundary boundary,
                                        const std::vector<uint8_t>& cells) {
    validate_dims(width, height);
    Domain d{width, height, boundary};
    if (cells.size() != static_cast<std::size_t>(width) * height)
        throw DimensionError("cell vector has wrong length");
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (!cells[static_cast<std::size_t>(y) * width + x]) continue;
            Point p{x, y};
            if (!d.allowed_center(p))
                throw BoundaryConflict("center " + point_text(p) +
                                       " overlaps the fully-packed exterior");
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    Point q{x + dx, y + dy};
                    if (boundary == Boundary::periodic) q = d.wrap(q);
                    else if (!d.in_grid(q)) continue;
                    if (cells[static_cast<std::size_t>(q.y) * width + q.x])
                        throw OverlapError("centers " + point_text(p) + " and " + point_text(q) +
                                           " are at distance 1");
                }
        }
    std::vector<uint64_t> bits((cells.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i]) bits[i >> 6] |= uint64_t{1} << (i & 63);
    return Configuration(d, std::move(bits));
}

Configuration Configuration::create(int width, int height, Boundary boundary,
                                    std::span<const Point> occupied) {
    validate_dims(width, height);
    Domain d{width, height, boundary};
    std::vector<uint8_t> cells(static_cast<std::size_t>(width) * height, 0);
    for (Point p : occupied) {
        Point q = d.wrap(p);
        if (!d.in_grid(q))
            throw RegionOutOfBounds("center " + point_text(p) + " lies outside the " +
                                    std::to_string(width) + "x" + std::to_string(height) + " grid");
        cells[static_cast<std::size_t>(q.y) * width + q.x] = 1;
    }
    return from_cells(width, height, boundary, cells);
}

Configuration Configuration::empty(int width, int height, Boundary boundary) {
    return create(width, height, boundary, {});
}

bool Configuration::occupied(Point p) const {
    Point q = domain_.wrap(p);
    if (!domain_.in_grid(q)) return false;
    return bit(q.x, q.y);
}

bool Configuration::has_tile(Point p) const {
    if (domain_.boundary == Boundary::periodic) return occupied(p);
    if (domain_.in_grid(p)) return bit(p.x, p.y);
    return domain_.exterior_tile(p);
}

std::optional<Point> Configuration::covering_center(Point face) const {
    for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) {
            Point c{face.x + dx, face.y + dy};
            if (has_tile(c)) return domain_.wrap(c);
        }
    return std::nullopt;
}

std::vector<Point> Configuration::centers() const {
    std::vector<Point> out;
    out.reserve(tiles_);
    for (int y = 0; y < height(); ++y)
        for (int x = 0; x < width(); ++x)
            if (bit(x, y)) out.push_back({x, y});
    return out;
}

Configuration Configuration::with(Point p, bool occ) const {
    std::vector<uint8_t> cells(static_cast<std::size_t>(area()), 0);
    for (Point c : centers()) cells[static_cast<std::size_t>(c.y) * width() + c.x] = 1;
    Point q = domain_.wrap(p);
    if (!domain_.in_grid(q)) throw RegionOutOfBounds("center " + point_text(p) + " outside grid");
    cells[static_cast<std::size_t>(q.y) * width() + q.x] = occ ? 1 : 0;
    return from_cells(width(), height(), boundary(), cells);
}

Configuration Configuration::translated(int dx, int dy) const {
    if (boundary() != Boundary::periodic)
        throw DimensionError("translation is only defined on a torus");
    std::vector<Point> pts = centers();
    for (Point& p : pts) p = {p.x + dx, p.y + dy};
    return create(width(), height(), boundary(), pts);
}

Configuration Configuration::transposed() const {
    std::vector<Point> pts = centers();
    for (Point& p : pts) p = {p.y, p.x};
    return create(height(), width(), boundary(), pts);
}

int count_vacancies(const Configuration& config, const FaceRect& region) {
    FaceRect dom = config.domain().faces();
    if (region.width < 0 || region.height < 0 || region.x0 < dom.x0 || region.y0 < dom.y0 ||
        region.x0 + region.width > dom.x0 + dom.width ||
        region.y0 + region.height > dom.y0 + dom.height)
        throw RegionOutOfBounds("face region exceeds the configuration domain");
    int v = 0;
    for (int j = region.y0; j < region.y0 + region.height; ++j)
        for (int i = region.x0; i < region.x0 + region.width; ++i)
            if (config.face_vacant({i, j})) ++v;
    return v;
}

int count_vacancies(const Configuration& config) {
    return count_vacancies(config, config.domain().faces());
}

std::string encode(const Configuration& config) {
    std::string out = std::to_string(config.width()) + " " + std::to_string(config.height()) +
                      " " + std::string(to_string(config.boundary())) + "\n";
    for (int y = config.height() - 1; y >= 0; --y) {
        for (int x = 0; x < config.width(); ++x) out += config.occupied({x, y}) ? 'o' : '.';
        out += '\n';
    }
    return out;
}

Configuration decode(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(1, 1, "missing header");

    std::istringstream header{std::string(lines[0])};
    int w = 0, h = 0;
    std::string bname, extra;
    if (!(header >> w >> h >> bname) || (header >> extra))
        throw ParseError(1, 1, "header must be 'W H BOUNDARY'");
    Boundary b;
    try {
        b = parse_boundary(bname);
    } catch (const SpecError&) {
        throw ParseError(1, static_cast<int>(lines[0].find(bname)) + 1,
                         "unknown boundary '" + bname + "'");
    }
    if (w < 1 || h < 1) throw ParseError(1, 1, "dimensions must be positive");
    if (static_cast<int>(lines.size()) - 1 != h)
        throw ParseError(static_cast<int>(lines.size()) + 1, 1,
                         "expected " + std::to_string(h) + " grid rows, found " +
                             std::to_string(lines.size() - 1));

    std::vector<Point> pts;
    for (int r = 0; r < h; ++r) {
        std::string_view row = lines[r + 1];
        int line_no = r + 2;
        for (int c = 0; c < static_cast<int>(row.size()); ++c) {
            char ch = row[c];
            if (c >= w) throw ParseError(line_no, c + 1, "row longer than width");
            if (ch == 'o') pts.push_back({c, h - 1 - r});
            else if (ch != '.')
                throw ParseError(line_no, c + 1, std::string("unexpected character '") + ch + "'");
        }
        if (static_cast<int>(row.size()) < w)
            throw ParseError(line_no, static_cast<int>(row.size()) + 1, "row shorter than width");
    }
    return Configuration::create(w, h, b, pts);
}

nlohmann::json to_json(const Configuration& config) {
    nlohmann::json occ = nlohmann::json::array();
    for (Point p : config.centers()) occ.push_back({p.x, p.y});
    return {{"width", config.width()},
            {"height", config.height()},
            {"boundary", to_string(config.boundary())},
            {"occupied", occ}};
}

Configuration configuration_from_json(const nlohmann::json& j) {
    try {
        std::vector<Point> pts;
        for (const auto& p : j.at("occupied")) pts.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        return Configuration::create(j.at("width").get<int>(), j.at("height").get<int>(),
                                     parse_boundary(j.at("boundary").get<std::string>()), pts);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed configuration JSON: ") + e.what());
    }
}

Configuration load_configuration(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw SpecError(std::string("invalid JSON in '") + path + "': " + e.what());
        }
        return configuration_from_json(j);
    }
    return decode(text);
}

void save_configuration(const Configuration& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    bool as_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (as_json) out << to_json(config).dump(2) << '\n';
    else out << encode(config);
}

}  // namespace squarepack
