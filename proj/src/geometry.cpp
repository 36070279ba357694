#include "lidarpaint/geometry.hpp"

#include <algorithm>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

const std::array<double, 16> RigidTransform::kIdentity = {
    1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

namespace {

double det3(const std::array<double, 16>& m) {
    return m[0] * (m[5] * m[10] - m[6] * m[9]) -
           m[1] * (m[4] * m[10] - m[6] * m[8]) +
           m[2] * (m[4] * m[9] - m[5] * m[8]);
}

/// Max |R^T R - I| over the 3x3 block.
double gram_drift(const std::array<double, 16>& m) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += m[4 * k + i] * m[4 * k + j];
            worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

void orthonormalize_rows(std::array<double, 16>& m) {
    Vec3 r0{m[0], m[1], m[2]};
    Vec3 r1{m[4], m[5], m[6]};
    r0 = r0.normalized();
    r1 = (r1 - r0 * r0.dot(r1)).normalized();
    Vec3 r2 = r0.cross(r1);
    m[0] = r0.x; m[1] = r0.y; m[2] = r0.z;
    m[4] = r1.x; m[5] = r1.y; m[6] = r1.z;
    m[8] = r2.x; m[9] = r2.y; m[10] = r2.z;
}

}  // namespace

RigidTransform RigidTransform::from_rotation_translation(
    const std::array<double, 9>& r, const Vec3& t) {
    std::array<double, 16> m = kIdentity;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m[4 * i + j] = r[3 * i + j];
    m[3] = t.x;
    m[7] = t.y;
    m[11] = t.z;
    return from_matrix(m);
}

RigidTransform RigidTransform::from_matrix(const std::array<double, 16>& m) {
    RigidTransform t;
    t.m_ = m;
    if (!t.is_rigid()) throw InputError("matrix is not a rigid transform");
    return t;
}

RigidTransform RigidTransform::translation(const Vec3& t) {
    RigidTransform r;
    r.m_[3] = t.x;
    r.m_[7] = t.y;
    r.m_[11] = t.z;
    return r;
}

RigidTransform RigidTransform::rotation_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    RigidTransform r;
    r.m_ = {1, 0, 0, 0, 0, c, -s, 0, 0, s, c, 0, 0, 0, 0, 1};
    return r;
}

RigidTransform RigidTransform::rotation_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    RigidTransform r;
    r.m_ = {c, 0, s, 0, 0, 1, 0, 0, -s, 0, c, 0, 0, 0, 0, 1};
    return r;
}

RigidTransform RigidTransform::rotation_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    RigidTransform r;
    r.m_ = {c, -s, 0, 0, s, c, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    return r;
}

RigidTransform RigidTransform::axis_angle(const Vec3& axis, double a) {
    const Vec3 u = axis.normalized();
    const double c = std::cos(a), s = std::sin(a), ic = 1.0 - c;
    RigidTransform r;
    r.m_ = {c + u.x * u.x * ic,       u.x * u.y * ic - u.z * s, u.x * u.z * ic + u.y * s, 0,
            u.y * u.x * ic + u.z * s, c + u.y * u.y * ic,       u.y * u.z * ic - u.x * s, 0,
            u.z * u.x * ic - u.y * s, u.z * u.y * ic + u.x * s, c + u.z * u.z * ic,       0,
            0,                        0,                        0,                        1};
    return r;
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    // R^T
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) inv.m_[4 * i + j] = m_[4 * j + i];
    // -R^T t
    const Vec3 t = translation_part();
    inv.m_[3] = -(inv.m_[0] * t.x + inv.m_[1] * t.y + inv.m_[2] * t.z);
    inv.m_[7] = -(inv.m_[4] * t.x + inv.m_[5] * t.y + inv.m_[6] * t.z);
    inv.m_[11] = -(inv.m_[8] * t.x + inv.m_[9] * t.y + inv.m_[10] * t.z);
    return inv;
}

double RigidTransform::orthonormality_drift() const {
    return gram_drift(m_) + std::abs(det3(m_) - 1.0);
}

bool RigidTransform::is_rigid(double tol) const {
    for (double v : m_)
        if (!std::isfinite(v)) return false;
    if (m_[12] != 0.0 || m_[13] != 0.0 || m_[14] != 0.0 || m_[15] != 1.0) return false;
    return gram_drift(m_) <= tol && std::abs(det3(m_) - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    const auto& ma = a.matrix();
    const auto& mb = b.matrix();
    RigidTransform out;
    std::array<double, 16> m{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += ma[4 * i + k] * mb[4 * k + j];
            m[4 * i + j] = acc;
        }
    }
    m[12] = 0.0; m[13] = 0.0; m[14] = 0.0; m[15] = 1.0;
    if (gram_drift(m) > 1e-9) orthonormalize_rows(m);
    out.m_ = m;
    return out;
}

}  // namespace lidarpaint
