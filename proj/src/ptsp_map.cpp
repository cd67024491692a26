#include "openloop/ptsp_map.hpp"

#include "json_fields.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace openloop {
namespace {

using nlohmann::json;
using detail::fail;
using detail::member;
using detail::number;
using detail::number_field;
using detail::optional_number;

Point parse_point(const json& v, const std::string& where) {
    if (v.is_array()) {
        if (v.size() != 2) {
            fail(where, "expected [x, y]");
        }
        return {number(v[0], where + "/0"), number(v[1], where + "/1")};
    }
    return {number_field(v, where, "x"), number_field(v, where, "y")};
}

bool is_integral(double v) {
    return std::floor(v) == v;
}

bool in_wall(const PtspMap& map, double px, double py) {
    for (const Rect& r : map.walls) {
        if (map.kind == MapKind::Discrete) {
            // cell centres
            if (r.contains_strict(px + 0.5, py + 0.5)) {
                return true;
            }
        } else if (r.contains_closed(px, py)) {
            return true;
        }
    }
    return false;
}

}  // namespace

void PtspMap::validate() const {
    if (!(width > 0.0 && height > 0.0)) {
        throw SchemaError("/width: map bounds must be positive");
    }
    if (waypoints.empty()) {
        throw SchemaError("/waypoints: at least one waypoint is required");
    }
    if (waypoints.size() > 32) {
        throw SchemaError("/waypoints: at most 32 waypoints are supported");
    }
    if (time_limit < 1) {
        throw SchemaError("/time_limit: must be positive");
    }
    const bool discrete = kind == MapKind::Discrete;
    if (discrete && (!is_integral(width) || !is_integral(height))) {
        throw SchemaError("/width: discrete maps need integer dimensions");
    }
    if (!discrete && !(capture_radius > 0.0)) {
        throw SchemaError("/capture_radius: must be positive");
    }
    if (!discrete && !(start_speed > 0.0)) {
        throw SchemaError("/start/v: speed must be positive");
    }
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const Rect& r = walls[i];
        if (!(r.w > 0.0 && r.h > 0.0)) {
            throw SchemaError("/walls/" + std::to_string(i) + ": wall must have positive size");
        }
    }
    auto inside = [&](Point p) {
        if (discrete) {
            return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
        }
        return p.x > 0 && p.y > 0 && p.x < width && p.y < height;
    };
    if (discrete && (!is_integral(start.x) || !is_integral(start.y))) {
        throw SchemaError("/start: discrete start must be a cell");
    }
    if (!inside(start)) {
        throw SchemaError("/start: start lies outside the map");
    }
    if (in_wall(*this, start.x, start.y)) {
        throw SchemaError("/start: start lies inside a wall");
    }
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const Point p = waypoints[i];
        const std::string where = "/waypoints/" + std::to_string(i);
        if (discrete && (!is_integral(p.x) || !is_integral(p.y))) {
            throw SchemaError(where + ": discrete waypoints must be cells");
        }
        if (!inside(p)) {
            throw SchemaError(where + ": waypoint lies outside the map");
        }
        if (in_wall(*this, p.x, p.y)) {
            throw SchemaError(where + ": waypoint overlaps a wall");
        }
    }
}

PtspMap parse_ptsp_map(const json& doc) {
    PtspMap map;
    const std::string root;
    if (!doc.is_object()) {
        fail("/", "expected an object");
    }
    const json& kind = member(doc, root, "kind");
    if (kind == "continuous") {
        map.kind = MapKind::Continuous;
    } else if (kind == "discrete") {
        map.kind = MapKind::Discrete;
        map.start_speed = 1.0;
        map.time_limit = 100;
    } else {
        fail("/kind", "expected \"continuous\" or \"discrete\"");
    }
    map.width = number_field(doc, root, "width");
    map.height = number_field(doc, root, "height");

    if (doc.contains("walls")) {
        const json& walls = doc.at("walls");
        if (!walls.is_array()) {
            fail("/walls", "expected an array");
        }
        for (std::size_t i = 0; i < walls.size(); ++i) {
            const std::string where = "/walls/" + std::to_string(i);
            map.walls.push_back(Rect{number_field(walls[i], where, "x"), number_field(walls[i], where, "y"),
                                     number_field(walls[i], where, "w"), number_field(walls[i], where, "h")});
        }
    }

    const json& waypoints = member(doc, root, "waypoints");
    if (!waypoints.is_array()) {
        fail("/waypoints", "expected an array");
    }
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        map.waypoints.push_back(parse_point(waypoints[i], "/waypoints/" + std::to_string(i)));
    }

    const json& start = member(doc, root, "start");
    map.start = parse_point(start, "/start");
    if (start.is_object()) {
        map.start_theta = optional_number(start, "/start", "theta", 0.0);
        map.start_speed = optional_number(start, "/start", "v", map.start_speed);
    }
    map.capture_radius = optional_number(doc, root, "capture_radius", map.capture_radius);
    if (doc.contains("time_limit")) {
        const json& limit = doc.at("time_limit");
        if (!limit.is_number_integer()) {
            fail("/time_limit", "expected an integer");
        }
        map.time_limit = limit.get<int>();
    }
    map.validate();
    return map;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError(path.string() + ": cannot open file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

PtspMap load_ptsp_map(const std::filesystem::path& path) {
    const json doc = read_json_file(path);
    try {
        return parse_ptsp_map(doc);
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

json to_json(const PtspMap& map) {
    json walls = json::array();
    for (const Rect& r : map.walls) {
        walls.push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
    }
    json waypoints = json::array();
    for (const Point& p : map.waypoints) {
        waypoints.push_back({p.x, p.y});
    }
    return {
        {"kind", map.kind == MapKind::Discrete ? "discrete" : "continuous"},
        {"width", map.width},
        {"height", map.height},
        {"walls", walls},
        {"waypoints", waypoints},
        {"start", {{"x", map.start.x}, {"y", map.start.y}, {"theta", map.start_theta}, {"v", map.start_speed}}},
        {"capture_radius", map.capture_radius},
        {"time_limit", map.time_limit},
    };
}

}  // namespace openloop
