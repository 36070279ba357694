#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace lidarpaint {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double squared_norm() const { return x * x + y * y + z * z; }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
    }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double squared_distance(const Vec3& a, const Vec3& b) {
    return (a - b).squared_norm();
}

/// Rigid body transform (rotation + translation), stored as a 4x4
/// homogeneous matrix in row-major order. The rotation block is kept
/// orthonormal with det = +1; compose() re-orthonormalizes when the
/// accumulated drift exceeds 1e-9.
class RigidTransform {
  public:
    RigidTransform() { m_ = kIdentity; }

    static RigidTransform identity() { return RigidTransform{}; }

    /// From a 3x3 row-major rotation and a translation.
    static RigidTransform from_rotation_translation(const std::array<double, 9>& r,
                                                    const Vec3& t);

    /// From a full 4x4 row-major matrix. Throws InputError if the matrix is
    /// not rigid (orthonormality / determinant / bottom row checked to 1e-6).
    static RigidTransform from_matrix(const std::array<double, 16>& m);

    static RigidTransform translation(const Vec3& t);
    static RigidTransform rotation_x(double radians);
    static RigidTransform rotation_y(double radians);
    static RigidTransform rotation_z(double radians);
    static RigidTransform axis_angle(const Vec3& axis, double radians);

    const std::array<double, 16>& matrix() const { return m_; }

    double rotation(int row, int col) const { return m_[4 * row + col]; }
    Vec3 translation_part() const { return {m_[3], m_[7], m_[11]}; }

    /// p' = R p + t
    Vec3 apply(const Vec3& p) const {
        return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z + m_[3],
                m_[4] * p.x + m_[5] * p.y + m_[6] * p.z + m_[7],
                m_[8] * p.x + m_[9] * p.y + m_[10] * p.z + m_[11]};
    }

    /// Rotation only, no translation.
    Vec3 rotate(const Vec3& p) const {
        return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z,
                m_[4] * p.x + m_[5] * p.y + m_[6] * p.z,
                m_[8] * p.x + m_[9] * p.y + m_[10] * p.z};
    }

    RigidTransform inverse() const;

    /// Max deviation of R^T R from identity plus |det - 1|.
    double orthonormality_drift() const;

    bool is_identity() const { return m_ == kIdentity; }

    /// Finite entries, orthonormal rotation, unit determinant, clean bottom row.
    bool is_rigid(double tol = 1e-6) const;

    bool operator==(const RigidTransform& o) const { return m_ == o.m_; }

  private:
    friend RigidTransform compose(const RigidTransform&, const RigidTransform&);

    static const std::array<double, 16> kIdentity;

    std::array<double, 16> m_{};
};

/// Matrix product a*b (apply b first, then a). Re-orthonormalizes the
/// rotation block if drift exceeds 1e-9.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

}  // namespace lidarpaint
