#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace squarepack {

enum class Boundary { periodic, free, fully_packed };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view text);

struct Point {
    int x = 0;
    int y = 0;
    friend auto operator<=>(const Point&, const Point&) = default;
};

inline int floor_mod(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}

// Parity of a tile centered at (x,y): ((x-1) mod 2, (y-1) mod 2).
struct ParityClass {
    int hpar = 0;
    int vpar = 0;
    int index() const { return hpar + 2 * vpar; }
    friend bool operator==(const ParityClass&, const ParityClass&) = default;
};

ParityClass tile_parity_class(Point center);

// Rectangle of unit faces given by lower-left corners x0..x0+width-1, y0..y0+height-1.
struct FaceRect {
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
};

// Where tile centers may sit and which faces belong to the region.
//   periodic:     centers are residues mod (W,H); faces [0,W)x[0,H).
//   free:         centers at grid points 0..W-1 x 0..H-1, nothing outside; faces [-1,W)x[-1,H),
//                 so every tile lies inside the region.
//   fully_packed: region [0,W]x[0,H]; outside it sits the column packing with centers at
//                 odd-odd points; interior centers 1..W-1 x 1..H-1; faces [0,W)x[0,H).
struct Domain {
    int width = 0;
    int height = 0;
    Boundary boundary = Boundary::periodic;

    FaceRect faces() const;
    int face_area() const { return faces().width * faces().height; }
    bool in_grid(Point p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
    // Grid points where a center may be placed.
    bool allowed_center(Point p) const;
    // Torus-reduced point for periodic domains, identity otherwise.
    Point wrap(Point p) const;
    bool exterior_tile(Point p) const;
    friend bool operator==(const Domain&, const Domain&) = default;
};

// Immutable, validated occupancy grid. Bits are stored row-major, one bit per grid point.
class Configuration {
public:
    Configuration() = default;

    static Configuration create(int width, int height, Boundary boundary,
                                std::span<const Point> occupied);
    static Configuration empty(int width, int height, Boundary boundary);
    // Bit vector of length width*height, row-major; validated like create().
    static Configuration from_cells(int width, int height, Boundary boundary,
                                    const std::vector<uint8_t>& cells);

    int width() const { return domain_.width; }
    int height() const { return domain_.height; }
    Boundary boundary() const { return domain_.boundary; }
    const Domain& domain() const { return domain_; }
    int area() const { return domain_.width * domain_.height; }

    // Occupancy of a grid point; periodic domains wrap, others return false outside the grid.
    bool occupied(Point p) const;
    // Tile present at center p, counting the implicit exterior of fully-packed regions.
    bool has_tile(Point p) const;
    // Center of the tile covering face (i,j), if any.
    std::optional<Point> covering_center(Point face) const;
    bool face_vacant(Point face) const { return !covering_center(face).has_value(); }

    std::vector<Point> centers() const;
    int tile_count() const { return tiles_; }

    Configuration with(Point p, bool occupied) const;
    Configuration translated(int dx, int dy) const;  // periodic only
    Configuration transposed() const;

    friend bool operator==(const Configuration& a, const Configuration& b) {
        return a.domain_ == b.domain_ && a.bits_ == b.bits_;
    }

private:
    Configuration(Domain d, std::vector<uint64_t> bits);
    static void validate_dims(int width, int height);
    bool bit(int x, int y) const {
        std::size_t i = static_cast<std::size_t>(y) * domain_.width + x;
        return (bits_[i >> 6] >> (i & 63)) & 1u;
    }

    Domain domain_;
    std::vector<uint64_t> bits_;
    int tiles_ = 0;
};

int count_vacancies(const Configuration& config, const FaceRect& region);
int count_vacancies(const Configuration& config);

// Text codec: header "W H BOUNDARY", then H rows from y = H-1 down to y = 0 of '.' and 'o'.
std::string encode(const Configuration& config);
Configuration decode(std::string_view text);

nlohmann::json to_json(const Configuration& config);
Configuration configuration_from_json(const nlohmann::json& j);

Configuration load_configuration(const std::string& path);
void save_configuration(const Configuration& config, const std::string& path);

}  // namespace squarepack
