#pragma once

#include "navmem/geometry.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace navmem {

struct SceneObject {
    std::string category;
    std::string color; // attribute asked about by question episodes
    Vec2 pos;          // meters, on a free cell
};

struct HumanSpec {
    int id = 0;
    std::string description;
    Vec2 start;
    std::vector<Vec2> waypoints; // visited cyclically
};

// Axis-aligned occupancy grid, cell edge 0.25 m. Cell (cx, cy) covers
// [cx*cell_m, (cx+1)*cell_m) x [cy*cell_m, (cy+1)*cell_m); out of bounds
// counts as occupied. Objects are markers, not obstacles.
struct Scene {
    int width = 0;  // cells
    int height = 0; // cells
    double cell_m = 0.25;
    std::vector<uint8_t> occ; // row-major cy*width+cx, 1 = occupied
    std::vector<SceneObject> objects;
    std::vector<HumanSpec> humans;

    bool in_bounds(int cx, int cy) const { return cx >= 0 && cx < width && cy >= 0 && cy < height; }
    bool occupied(int cx, int cy) const {
        return !in_bounds(cx, cy) || occ[static_cast<size_t>(cy) * width + cx] != 0;
    }
    int cell_of(double coord_m) const { return static_cast<int>(std::floor(coord_m / cell_m)); }
    Vec2 cell_center(int cx, int cy) const {
        return {(cx + 0.5) * cell_m, (cy + 0.5) * cell_m};
    }
};

// Occupancy dilated by `inflate_cells` rings (Chebyshev metric), the grid
// planners run on so disc bodies keep clearance from walls.
struct OccGrid {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> occ;

    bool occupied(int cx, int cy) const {
        return cx < 0 || cx >= width || cy < 0 || cy >= height ||
               occ[static_cast<size_t>(cy) * width + cx] != 0;
    }
    int index(int cx, int cy) const { return cy * width + cx; }
};

OccGrid planning_grid(const Scene& scene, int inflate_cells);

// Disc of radius_m centered at pos overlaps some occupied cell.
bool disc_hits_occupancy(const Scene& scene, Vec2 pos, double radius_m);

// Straight-line visibility between two cells; intermediate occupied cells
// block, endpoints do not.
bool line_of_sight(const Scene& scene, int from_cx, int from_cy, int to_cx, int to_cy);

// Scene as a JSON object string; grid rows are run-length encoded as
// alternating free/occupied run lengths starting with free.
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

} // namespace navmem
