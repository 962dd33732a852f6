#pragma once

#include <cstdint>
#include <vector>

namespace navmem {

// One visible entity inside the agent's field of view, in agent-relative
// grid offsets.
struct VisTag {
    enum class Kind : uint8_t { Object = 0, Human = 1 };
    Kind kind = Kind::Object;
    int32_t id = 0; // object: category index; human: avatar id
    int32_t dx = 0; // cell offset relative to the agent's cell
    int32_t dy = 0;

    bool operator==(const VisTag&) const = default;
};

// Egocentric observation: a (2*radius+1)^2 occupancy window centered on the
// agent's cell, the agent's heading, and the entity tags visible within the
// field of view. Out-of-bounds cells are reported occupied.
struct LocalView {
    int radius = 8;
    int heading_deg = 0;
    std::vector<uint8_t> patch; // (2*radius+1)^2 cells, row-major, 1 = occupied
    std::vector<VisTag> tags;   // sorted (kind, id, dx, dy)

    int side() const { return 2 * radius + 1; }
    bool operator==(const LocalView&) const = default;
};

} // namespace navmem
