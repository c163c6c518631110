#include "squarepack/render.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "squarepack/errors.hpp"
#include "squarepack/sticks.hpp"

namespace squarepack {

namespace {

struct Box {
    int x0, y0, x1, y1;  // lattice coordinates, x0 < x1, y0 < y1
};

// Geometry shared by both back ends.
struct Scene {
    FaceRect view;
    std::vector<std::pair<Box, int>> tiles;  // box and parity index
    std::vector<std::vector<Box>> sticks;    // zero-width boxes, one list per stick
};

bool overlaps(const Box& b, const FaceRect& v) {
    return b.x1 > v.x0 && b.x0 < v.x0 + v.width && b.y1 > v.y0 && b.y0 < v.y0 + v.height;
}

Scene build_scene(const Configuration& config, bool with_sticks) {
    Scene s;
    s.view = config.domain().faces();
    const bool torus = config.boundary() == Boundary::periodic;
    const int W = config.width(), H = config.height();
    for (Point c : config.centers()) {
        Box b{c.x - 1, c.y - 1, c.x + 1, c.y + 1};
        int parity = tile_parity_class(c).index();
        if (!torus) {
            s.tiles.push_back({b, parity});
            continue;
        }
        for (int sy = -1; sy <= 1; ++sy)
            for (int sx = -1; sx <= 1; ++sx) {
                Box t{b.x0 + sx * W, b.y0 + sy * H, b.x1 + sx * W, b.y1 + sy * H};
                if (overlaps(t, s.view)) s.tiles.push_back({t, parity});
            }
    }
    if (!with_sticks) return s;
    for (const Stick& st : extract_sticks(config)) {
        Segment seg = st.segment();
        const bool vertical = seg.orientation == Orientation::vertical;
        std::vector<Box> pieces;
        auto add = [&](int fixed, int lo, int hi) {
            pieces.push_back(vertical ? Box{fixed, lo, fixed, hi} : Box{lo, fixed, hi, fixed});
        };
        if (!torus) {
            add(seg.fixed, seg.lo, seg.hi);
        } else {
            const int along = vertical ? H : W, across = vertical ? W : H;
            std::vector<int> fixes{floor_mod(seg.fixed, across)};
            if (fixes[0] == 0) fixes.push_back(across);
            for (int f : fixes)
                for (int k = -2; k <= 2; ++k) {
                    int lo = std::max(seg.lo + k * along, 0), hi = std::min(seg.hi + k * along, along);
                    if (lo < hi) add(f, lo, hi);
                }
        }
        s.sticks.push_back(std::move(pieces));
    }
    return s;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

void check_style(const RenderStyle& style) {
    if (style.cell < 2 || style.cell > 256) throw SpecError("cell size must be in [2, 256]");
}

}  // namespace

ImageFormat parse_image_format(std::string_view text) {
    if (text == "svg") return ImageFormat::svg;
    if (text == "ppm") return ImageFormat::ppm;
    throw SpecError("unknown image format '" + std::string(text) + "'");
}

ImageFormat image_format_for_path(std::string_view path) {
    return path.size() >= 4 && path.substr(path.size() - 4) == ".ppm" ? ImageFormat::ppm : ImageFormat::svg;
}

std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

std::string render_svg(const Configuration& config, const RenderStyle& style) {
    check_style(style);
    Scene s = build_scene(config, style.sticks);
    const int cell = style.cell;
    const FaceRect& v = s.view;
    const int pw = v.width * cell, ph = v.height * cell;
    auto px = [&](int x) { return (x - v.x0) * cell; };
    auto py = [&](int y) { return (v.y0 + v.height - y) * cell; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pw << "\" height=\"" << ph
      << "\" viewBox=\"0 0 " << pw << ' ' << ph << "\">\n";
    if (!style.metadata.is_null()) o << "<metadata>" << xml_escape(style.metadata.dump()) << "</metadata>\n";
    o << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\""
      << hex_color(kBackground) << "\"/>\n";
    if (style.grid) {
        o << "<path class=\"grid\" stroke=\"" << hex_color(kGridColor) << "\" stroke-width=\"1\" d=\"";
        for (int x = v.x0; x <= v.x0 + v.width; ++x) o << 'M' << px(x) << " 0V" << ph;
        for (int y = v.y0; y <= v.y0 + v.height; ++y) o << "M0 " << py(y) << 'H' << pw;
        o << "\"/>\n";
    }
    for (const auto& [b, parity] : s.tiles)
        o << "<rect class=\"tile p" << parity << "\" x=\"" << px(b.x0) << "\" y=\"" << py(b.y1) << "\" width=\""
          << 2 * cell << "\" height=\"" << 2 * cell << "\" fill=\"" << hex_color(kParityColors[parity])
          << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    const int stroke = std::max(2, cell / 4);
    for (const auto& pieces : s.sticks) {
        o << "<path class=\"stick\" fill=\"none\" stroke=\"" << hex_color(kStickColor) << "\" stroke-width=\""
          << stroke << "\" d=\"";
        for (const Box& b : pieces) o << 'M' << px(b.x0) << ' ' << py(b.y0) << 'L' << px(b.x1) << ' ' << py(b.y1);
        o << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string render_ppm(const Configuration& config, const RenderStyle& style) {
    check_style(style);
    Scene s = build_scene(config, style.sticks);
    const int cell = style.cell;
    const FaceRect& v = s.view;
    const int pw = v.width * cell, ph = v.height * cell;
    std::vector<Rgb> pixels(static_cast<std::size_t>(pw) * ph, kBackground);
    auto fill = [&](int x0, int y0, int x1, int y1, Rgb c) {  // pixel rectangle, half-open
        x0 = std::max(x0, 0), y0 = std::max(y0, 0), x1 = std::min(x1, pw), y1 = std::min(y1, ph);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) pixels[static_cast<std::size_t>(y) * pw + x] = c;
    };
    auto px = [&](int x) { return (x - v.x0) * cell; };
    auto py = [&](int y) { return (v.y0 + v.height - y) * cell; };

    if (style.grid) {
        for (int x = 0; x <= v.width; ++x) fill(x * cell, 0, x * cell + 1, ph, kGridColor);
        for (int y = 0; y <= v.height; ++y) fill(0, y * cell, pw, y * cell + 1, kGridColor);
    }
    const Rgb outline{0, 0, 0};
    for (const auto& [b, parity] : s.tiles) {
        int x0 = px(b.x0), x1 = px(b.x1), y0 = py(b.y1), y1 = py(b.y0);
        fill(x0, y0, x1, y1, outline);
        fill(x0 + 1, y0 + 1, x1 - 1, y1 - 1, kParityColors[parity]);
    }
    const int half = std::max(1, cell / 8);
    for (const auto& pieces : s.sticks)
        for (const Box& b : pieces) {
            int x0 = px(b.x0), x1 = px(b.x1), y0 = py(b.y1), y1 = py(b.y0);
            fill(x0 - half, y0 - half, x1 + half, y1 + half, kStickColor);
        }

    std::ostringstream o;
    o << "P6\n";
    if (!style.metadata.is_null()) o << "# " << style.metadata.dump() << '\n';
    o << pw << ' ' << ph << "\n255\n";
    for (const Rgb& p : pixels) o << static_cast<char>(p.r) << static_cast<char>(p.g) << static_cast<char>(p.b);
    return o.str();
}

std::string render(const Configuration& config, const RenderStyle& style) {
    return style.format == ImageFormat::ppm ? render_ppm(config, style) : render_svg(config, style);
}

void render_image(const Configuration& config, const RenderStyle& style, const std::string& path) {
    std::string data = render(config, style);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace squarepack
