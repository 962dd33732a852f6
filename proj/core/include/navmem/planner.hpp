#pragma once

#include "navmem/scene.hpp"

#include <vector>

namespace navmem {

struct Pose {
    double x = 0.0; // meters
    double y = 0.0;
    int heading_deg = 0; // multiple of 30, in [0, 360)
};

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

// Path cost over 8-connected moves: straight edges count 1, diagonal edges
// sqrt(2). Kept as exact integer coefficients so comparisons never suffer
// float ties (a + b*sqrt(2) = c + d*sqrt(2) only when a=c and b=d).
struct PathCost {
    int64_t straight = 0;
    int64_t diag = 0;

    double value() const;
    bool operator<(const PathCost& o) const;
    bool operator==(const PathCost& o) const { return straight == o.straight && diag == o.diag; }
};

struct PlanResult {
    std::vector<Cell> cells; // excludes the start cell, includes the goal; empty if from==to
    PathCost cost;

    double meters(double cell_m) const { return cost.value() * cell_m; }
};

// Dijkstra over (cell, incoming direction) states, tie-broken by
// (cost, heading-change count, cell index, direction index) so equal-cost
// layouts always yield the same path. Diagonal steps require both adjacent
// orthogonal cells free (no corner cutting). The start cell is usable even
// if marked occupied (a body can drift into the inflation ring); the goal
// must be free. Throws Unreachable otherwise.
PlanResult plan_path(const OccGrid& grid, Cell from, Cell to);

// Pose-level wrapper on the inflated grid for a given body clearance.
PlanResult plan_shortest_path(const Scene& scene, const Pose& from, Vec2 to, int inflate_cells);

// Geodesic distance in meters between two points on the inflated grid.
double geodesic_m(const Scene& scene, Vec2 from, Vec2 to, int inflate_cells);

// Nearest free cell to `c` on the grid (c itself if free), by breadth-first
// ring search with deterministic ordering. Throws Unreachable if the grid has
// no free cell.
Cell nearest_free_cell(const OccGrid& grid, Cell c);

} // namespace navmem
