#include "navmem/scene.hpp"

#include "navmem/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>

namespace navmem {

OccGrid planning_grid(const Scene& scene, int inflate_cells) {
    OccGrid g;
    g.width = scene.width;
    g.height = scene.height;
    g.occ.assign(scene.occ.size(), 0);
    for (int cy = 0; cy < scene.height; ++cy) {
        for (int cx = 0; cx < scene.width; ++cx) {
            if (!scene.occupied(cx, cy)) continue;
            for (int dy = -inflate_cells; dy <= inflate_cells; ++dy) {
                for (int dx = -inflate_cells; dx <= inflate_cells; ++dx) {
                    const int nx = cx + dx, ny = cy + dy;
                    if (nx >= 0 && nx < g.width && ny >= 0 && ny < g.height) {
                        g.occ[static_cast<size_t>(ny) * g.width + nx] = 1;
                    }
                }
            }
        }
    }
    return g;
}

bool disc_hits_occupancy(const Scene& scene, Vec2 pos, double radius_m) {
    const int cx_lo = scene.cell_of(pos.x - radius_m);
    const int cx_hi = scene.cell_of(pos.x + radius_m);
    const int cy_lo = scene.cell_of(pos.y - radius_m);
    const int cy_hi = scene.cell_of(pos.y + radius_m);
    for (int cy = cy_lo; cy <= cy_hi; ++cy) {
        for (int cx = cx_lo; cx <= cx_hi; ++cx) {
            if (!scene.occupied(cx, cy)) continue;
            // Nearest point of the cell rectangle to the disc center.
            const double rx0 = cx * scene.cell_m, rx1 = (cx + 1) * scene.cell_m;
            const double ry0 = cy * scene.cell_m, ry1 = (cy + 1) * scene.cell_m;
            const double nx = std::clamp(pos.x, rx0, rx1);
            const double ny = std::clamp(pos.y, ry0, ry1);
            if (distance(pos, {nx, ny}) < radius_m) return true;
        }
    }
    return false;
}

bool line_of_sight(const Scene& scene, int x0, int y0, int x1, int y1) {
    // Bresenham; only strictly intermediate cells occlude.
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    int x = x0, y = y0;
    while (true) {
        if (!(x == x0 && y == y0) && !(x == x1 && y == y1) && scene.occupied(x, y)) return false;
        if (x == x1 && y == y1) return true;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

namespace {

using nlohmann::json;

json rle_encode_row(const Scene& scene, int cy) {
    json runs = json::array();
    int x = 0;
    uint8_t want = 0; // rows alternate free/occupied starting with free
    while (x < scene.width) {
        int len = 0;
        while (x + len < scene.width &&
               scene.occ[static_cast<size_t>(cy) * scene.width + x + len] == want) {
            ++len;
        }
        runs.push_back(len);
        x += len;
        want = want ? 0 : 1;
    }
    return runs;
}

json vec_to_json(Vec2 v) { return json{{"x", v.x}, {"y", v.y}}; }

Vec2 vec_from_json(const json& j) { return Vec2{j.at("x").get<double>(), j.at("y").get<double>()}; }

} // namespace

std::string scene_to_json(const Scene& scene) {
    json j;
    j["width"] = scene.width;
    j["height"] = scene.height;
    j["cell_m"] = scene.cell_m;
    json rows = json::array();
    for (int cy = 0; cy < scene.height; ++cy) rows.push_back(rle_encode_row(scene, cy));
    j["rows"] = std::move(rows);
    json objs = json::array();
    for (const SceneObject& o : scene.objects) {
        objs.push_back(json{{"category", o.category}, {"color", o.color}, {"pos", vec_to_json(o.pos)}});
    }
    j["objects"] = std::move(objs);
    json humans = json::array();
    for (const HumanSpec& h : scene.humans) {
        json wps = json::array();
        for (Vec2 w : h.waypoints) wps.push_back(vec_to_json(w));
        humans.push_back(json{{"id", h.id},
                              {"description", h.description},
                              {"start", vec_to_json(h.start)},
                              {"waypoints", std::move(wps)}});
    }
    j["humans"] = std::move(humans);
    return j.dump();
}

Scene scene_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("scene json: ") + e.what());
    }
    try {
        Scene s;
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        s.cell_m = j.at("cell_m").get<double>();
        if (s.width <= 0 || s.height <= 0) throw SchemaMismatch("scene json: non-positive size");
        s.occ.assign(static_cast<size_t>(s.width) * s.height, 0);
        const json& rows = j.at("rows");
        if (static_cast<int>(rows.size()) != s.height) {
            throw SchemaMismatch("scene json: row count does not match height");
        }
        for (int cy = 0; cy < s.height; ++cy) {
            int x = 0;
            uint8_t fill = 0;
            for (const json& run : rows[static_cast<size_t>(cy)]) {
                const int len = run.get<int>();
                if (len < 0 || x + len > s.width) {
                    throw SchemaMismatch("scene json: run-length overflow in row " +
                                         std::to_string(cy));
                }
                for (int i = 0; i < len; ++i) {
                    s.occ[static_cast<size_t>(cy) * s.width + x + i] = fill;
                }
                x += len;
                fill = fill ? 0 : 1;
            }
            if (x != s.width) {
                throw SchemaMismatch("scene json: row " + std::to_string(cy) + " sums to " +
                                     std::to_string(x) + ", want " + std::to_string(s.width));
            }
        }
        for (const json& o : j.at("objects")) {
            s.objects.push_back(SceneObject{o.at("category").get<std::string>(),
                                            o.at("color").get<std::string>(),
                                            vec_from_json(o.at("pos"))});
        }
        for (const json& h : j.at("humans")) {
            HumanSpec spec;
            spec.id = h.at("id").get<int>();
            spec.description = h.at("description").get<std::string>();
            spec.start = vec_from_json(h.at("start"));
            for (const json& w : h.at("waypoints")) spec.waypoints.push_back(vec_from_json(w));
            s.humans.push_back(std::move(spec));
        }
        return s;
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("scene json: ") + e.what());
    }
}

} // namespace navmem
