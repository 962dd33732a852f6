#pragma once

#include <cmath>

namespace navmem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Unit vector for a compass heading in screen coordinates (y grows downward,
// positive angles turn clockwise on screen).
inline Vec2 heading_vec(int heading_deg) {
    const double r = deg_to_rad(static_cast<double>(heading_deg));
    return {std::cos(r), std::sin(r)};
}

// Signed smallest rotation from heading `from_deg` to `to_deg`, in (-180, 180].
inline double angle_diff_deg(double to_deg, double from_deg) {
    double d = std::fmod(to_deg - from_deg, 360.0);
    if (d <= -180.0) d += 360.0;
    if (d > 180.0) d -= 360.0;
    return d;
}

inline double bearing_deg(Vec2 from, Vec2 to) {
    return std::atan2(to.y - from.y, to.x - from.x) * 180.0 / kPi;
}

} // namespace navmem
