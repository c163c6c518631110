#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "squarepack/lattice.hpp"

namespace squarepack {

enum class ImageFormat { svg, ppm };

ImageFormat parse_image_format(std::string_view text);
// ".ppm" selects PPM, anything else SVG.
ImageFormat image_format_for_path(std::string_view path);

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Fill per parity class index hpar + 2 vpar: (0,0) blue, (1,0) deep blue, (0,1) orange,
// (1,1) red.
inline constexpr std::array<Rgb, 4> kParityColors{{{86, 156, 230}, {26, 35, 126}, {245, 145, 40}, {214, 39, 40}}};
inline constexpr Rgb kStickColor{44, 160, 44};
inline constexpr Rgb kGridColor{200, 200, 200};
inline constexpr Rgb kBackground{255, 255, 255};

std::string hex_color(Rgb c);

struct RenderStyle {
    ImageFormat format = ImageFormat::svg;
    int cell = 12;  // pixels per lattice unit
    bool grid = true;
    bool sticks = false;
    nlohmann::json metadata;  // embedded verbatim when not null
};

// The face region is drawn with y pointing up. Tiles crossing a torus seam are drawn in every
// wrapped position; each stick is one <path class="stick"> in SVG.
std::string render_svg(const Configuration& config, const RenderStyle& style = {});
// Binary P6; metadata goes into a header comment.
std::string render_ppm(const Configuration& config, const RenderStyle& style = {});
std::string render(const Configuration& config, const RenderStyle& style);
void render_image(const Configuration& config, const RenderStyle& style, const std::string& path);

}  // namespace squarepack
