#include "navmem/planner.hpp"

#include "navmem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace navmem {

double PathCost::value() const {
    return static_cast<double>(straight) + static_cast<double>(diag) * std::sqrt(2.0);
}

bool PathCost::operator<(const PathCost& o) const {
    // straight + diag*sqrt(2) < o.straight + o.diag*sqrt(2)
    // <=> a < b*sqrt(2) with a = straight - o.straight, b = o.diag - diag.
    const int64_t a = straight - o.straight;
    const int64_t b = o.diag - diag;
    if (b == 0) return a < 0;
    if (b > 0) return a < 0 || a * a < 2 * b * b;
    return a < 0 && a * a > 2 * b * b;
}

namespace {

// Neighbor order fixes the direction index used in tie-breaking.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNoDir = 8;

bool is_diag(int dir) { return kDx[dir] != 0 && kDy[dir] != 0; }

struct NodeKey {
    PathCost cost;
    int32_t changes;
    int32_t cell;
    int32_t dir;

    bool operator>(const NodeKey& o) const {
        if (!(cost == o.cost)) return o.cost < cost;
        if (changes != o.changes) return changes > o.changes;
        if (cell != o.cell) return cell > o.cell;
        return dir > o.dir;
    }
};

} // namespace

PlanResult plan_path(const OccGrid& grid, Cell from, Cell to) {
    if (grid.occupied(to.x, to.y)) {
        throw Unreachable("plan_path: goal cell (" + std::to_string(to.x) + "," +
                          std::to_string(to.y) + ") is not free");
    }
    if (from.x < 0 || from.x >= grid.width || from.y < 0 || from.y >= grid.height) {
        throw Unreachable("plan_path: start cell out of bounds");
    }
    if (from == to) return PlanResult{};

    const int n_cells = grid.width * grid.height;
    const int n_states = n_cells * 9;
    struct Best {
        PathCost cost;
        int32_t changes = -1; // -1 = unvisited
        int32_t pred = -1;
    };
    std::vector<Best> best(static_cast<size_t>(n_states));
    std::priority_queue<NodeKey, std::vector<NodeKey>, std::greater<NodeKey>> open;

    const int start_state = grid.index(from.x, from.y) * 9 + kNoDir;
    best[static_cast<size_t>(start_state)] = Best{PathCost{}, 0, -1};
    open.push(NodeKey{PathCost{}, 0, grid.index(from.x, from.y), kNoDir});

    int goal_state = -1;
    while (!open.empty()) {
        const NodeKey top = open.top();
        open.pop();
        const int state = top.cell * 9 + top.dir;
        const Best& b = best[static_cast<size_t>(state)];
        if (b.changes != top.changes || !(b.cost == top.cost)) continue; // stale entry
        const int cx = top.cell % grid.width;
        const int cy = top.cell / grid.width;
        if (cx == to.x && cy == to.y) {
            goal_state = state;
            break;
        }
        for (int dir = 0; dir < 8; ++dir) {
            const int nx = cx + kDx[dir], ny = cy + kDy[dir];
            if (grid.occupied(nx, ny)) continue;
            if (is_diag(dir) && (grid.occupied(cx + kDx[dir], cy) || grid.occupied(cx, cy + kDy[dir]))) {
                continue; // no squeezing between diagonal blockers
            }
            PathCost nc = top.cost;
            if (is_diag(dir)) {
                nc.diag += 1;
            } else {
                nc.straight += 1;
            }
            const int32_t nchanges =
                top.changes + ((top.dir != kNoDir && top.dir != dir) ? 1 : 0);
            const int nstate = grid.index(nx, ny) * 9 + dir;
            Best& nb = best[static_cast<size_t>(nstate)];
            const bool improve = nb.changes < 0 || nc < nb.cost ||
                                 (nc == nb.cost && nchanges < nb.changes);
            if (improve) {
                nb = Best{nc, nchanges, state};
                open.push(NodeKey{nc, nchanges, grid.index(nx, ny), dir});
            }
        }
    }
    if (goal_state < 0) {
        throw Unreachable("plan_path: no route from (" + std::to_string(from.x) + "," +
                          std::to_string(from.y) + ") to (" + std::to_string(to.x) + "," +
                          std::to_string(to.y) + ")");
    }

    PlanResult result;
    result.cost = best[static_cast<size_t>(goal_state)].cost;
    for (int s = goal_state; s != start_state; s = best[static_cast<size_t>(s)].pred) {
        const int cell = s / 9;
        result.cells.push_back(Cell{cell % grid.width, cell / grid.width});
    }
    std::reverse(result.cells.begin(), result.cells.end());
    return result;
}

PlanResult plan_shortest_path(const Scene& scene, const Pose& from, Vec2 to, int inflate_cells) {
    const OccGrid grid = planning_grid(scene, inflate_cells);
    const Cell a{scene.cell_of(from.x), scene.cell_of(from.y)};
    const Cell b{scene.cell_of(to.x), scene.cell_of(to.y)};
    return plan_path(grid, a, b);
}

double geodesic_m(const Scene& scene, Vec2 from, Vec2 to, int inflate_cells) {
    return plan_shortest_path(scene, Pose{from.x, from.y, 0}, to, inflate_cells)
        .meters(scene.cell_m);
}

Cell nearest_free_cell(const OccGrid& grid, Cell c) {
    c.x = std::clamp(c.x, 0, grid.width - 1);
    c.y = std::clamp(c.y, 0, grid.height - 1);
    if (!grid.occupied(c.x, c.y)) return c;
    const int max_r = std::max(grid.width, grid.height);
    for (int r = 1; r < max_r; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                if (!grid.occupied(c.x + dx, c.y + dy)) return Cell{c.x + dx, c.y + dy};
            }
        }
    }
    throw Unreachable("nearest_free_cell: grid fully occupied");
}

} // namespace navmem
