#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace openloop {

/// Malformed map or config document. The message starts with the JSON
/// pointer (or byte offset, for syntax errors) of the offending element.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool contains_strict(double px, double py) const {
        return px > x && px < x + w && py > y && py < y + h;
    }
    bool contains_closed(double px, double py) const {
        return px >= x && px <= x + w && py >= y && py <= y + h;
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class MapKind { Continuous, Discrete };

/// Map for either PTSP variant.
///
/// Continuous maps use real coordinates; walls are axis-aligned rectangles and
/// a waypoint is captured within `capture_radius` of its centre. Discrete maps
/// use integer cells: the map spans `width` x `height` cells, a wall rectangle
/// blocks cells [x, x+w) x [y, y+h), and waypoints/start are cell coordinates.
struct PtspMap {
    MapKind kind = MapKind::Continuous;
    double width = 0.0;
    double height = 0.0;
    std::vector<Rect> walls;
    std::vector<Point> waypoints;
    Point start;
    double start_theta = 0.0;
    double start_speed = 0.1;
    double capture_radius = 0.3;
    int time_limit = 300;

    /// Throws SchemaError when the start or a waypoint lies in a wall or
    /// outside the bounds, or when sizes are out of range.
    void validate() const;
};

PtspMap parse_ptsp_map(const nlohmann::json& doc);
PtspMap load_ptsp_map(const std::filesystem::path& path);
nlohmann::json to_json(const PtspMap& map);

/// Reads and parses a JSON file, converting syntax errors into SchemaError
/// with the file name and byte position.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace openloop
