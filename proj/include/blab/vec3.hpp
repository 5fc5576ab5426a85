#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace blab {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    double normInf() const { return std::max({std::fabs(x), std::fabs(y), std::fabs(z)}); }
    double norm2() const { return std::sqrt(x * x + y * y + z * z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

// Row-major 3x3 matrix, enough for Jacobians.
struct Mat3 {
    std::array<std::array<double, 3>, 3> a{};

    Vec3 operator*(const Vec3& v) const {
        return {a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
                a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
                a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z};
    }
    double det() const {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
             - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
             + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    }
};

// Axis-aligned box, the reference domains live here.
struct Box3 {
    Vec3 lo{-4, -4, -40};
    Vec3 hi{4, 4, 22};

    bool contains(const Vec3& v, double tol = 0.0) const {
        return v.x >= lo.x - tol && v.x <= hi.x + tol &&
               v.y >= lo.y - tol && v.y <= hi.y + tol &&
               v.z >= lo.z - tol && v.z <= hi.z + tol;
    }
    double yExtent() const { return hi.y - lo.y; }
    double zExtent() const { return hi.z - lo.z; }

    // The blender's reference domain Delta.
    static Box3 delta() { return Box3{}; }
};

}  // namespace blab
