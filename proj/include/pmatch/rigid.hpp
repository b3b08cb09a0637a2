#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pmatch/assignment.hpp"
#include "pmatch/point_cloud.hpp"

namespace pmatch {

struct Mat3 {
    // row-major
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double& operator()(std::size_t r, std::size_t c) { return m[r * 3 + c]; }
    double operator()(std::size_t r, std::size_t c) const { return m[r * 3 + c]; }

    static Mat3 identity() { return Mat3{}; }
    static Mat3 zero() {
        Mat3 a;
        a.m.fill(0.0);
        return a;
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r = zero();
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t j = 0; j < 3; ++j) r(i, j) += (*this)(i, k) * o(k, j);
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 transposed() const {
        Mat3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    double frobenius_distance(const Mat3& o) const {
        double s = 0.0;
        for (std::size_t i = 0; i < 9; ++i) s += (m[i] - o.m[i]) * (m[i] - o.m[i]);
        return std::sqrt(s);
    }

    Vec3 col(std::size_t c) const { return {m[c], m[3 + c], m[6 + c]}; }
    void set_col(std::size_t c, const Vec3& v) {
        m[c] = v.x;
        m[3 + c] = v.y;
        m[6 + c] = v.z;
    }
};

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
    const Mat3 should_be_i = r.transposed() * r;
    return should_be_i.frobenius_distance(Mat3::identity()) <= tol * 3 &&
           std::abs(r.det() - 1.0) <= tol;
}

struct RigidTransform {
    Mat3 rotation;
    Vec3 translation;

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

struct Svd3 {
    Mat3 u;
    Vec3 sigma;  // non-negative, descending
    Mat3 v;     // A = U diag(sigma) V^T
};

// SVD of a 3x3 matrix by one-sided Jacobi: right-rotations orthogonalize the
// columns of A, giving A V = U diag(sigma). Missing U columns for zero
// singular values are completed to an orthonormal basis.
inline Svd3 svd3(const Mat3& a_in, double tol = 1e-14, std::size_t max_sweeps = 60) {
    Mat3 b = a_in;
    Mat3 v = Mat3::identity();

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < 2; ++p) {
            for (std::size_t q = p + 1; q < 3; ++q) {
                const Vec3 bp = b.col(p), bq = b.col(q);
                const double alpha = bp.squared_norm();
                const double beta = bq.squared_norm();
                const double gamma = bp.dot(bq);
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                b.set_col(p, bp * c - bq * s);
                b.set_col(q, bp * s + bq * c);
                const Vec3 vp = v.col(p), vq = v.col(q);
                v.set_col(p, vp * c - vq * s);
                v.set_col(q, vp * s + vq * c);
            }
        }
        if (!rotated) break;
    }

    Svd3 out;
    out.v = v;
    std::array<double, 3> sig{b.col(0).norm(), b.col(1).norm(), b.col(2).norm()};

    // descending order
    std::array<std::size_t, 3> order{0, 1, 2};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            if (sig[order[j]] > sig[order[i]]) std::swap(order[i], order[j]);

    Mat3 u = Mat3::zero();
    Mat3 v_sorted = Mat3::zero();
    Vec3 sigma;
    const double rank_tol = 1e-300;
    std::array<bool, 3> have_u{false, false, false};
    for (std::size_t k = 0; k < 3; ++k) {
        const std::size_t src = order[k];
        const double s = sig[src];
        (k == 0 ? sigma.x : k == 1 ? sigma.y : sigma.z) = s;
        v_sorted.set_col(k, v.col(src));
        if (s > rank_tol) {
            u.set_col(k, b.col(src) * (1.0 / s));
            have_u[k] = true;
        }
    }
    // complete orthonormal U columns for (near-)zero singular values
    for (std::size_t k = 0; k < 3; ++k) {
        if (have_u[k]) continue;
        Vec3 cand;
        if (k == 2 && have_u[0] && have_u[1]) {
            cand = u.col(0).cross(u.col(1));
        } else {
            // pick the coordinate axis least aligned with existing columns
            Vec3 best{1, 0, 0};
            double best_score = 1e300;
            for (std::size_t ax = 0; ax < 3; ++ax) {
                Vec3 e{ax == 0 ? 1.0 : 0.0, ax == 1 ? 1.0 : 0.0, ax == 2 ? 1.0 : 0.0};
                double score = 0.0;
                for (std::size_t j = 0; j < 3; ++j)
                    if (have_u[j]) score += std::abs(e.dot(u.col(j)));
                if (score < best_score) {
                    best_score = score;
                    best = e;
                }
            }
            cand = best;
            for (std::size_t j = 0; j < 3; ++j)
                if (have_u[j]) cand = cand - u.col(j) * cand.dot(u.col(j));
        }
        const double n = cand.norm();
        u.set_col(k, n > 0.0 ? cand * (1.0 / n) : Vec3{1, 0, 0});
        have_u[k] = true;
    }

    out.u = u;
    out.sigma = sigma;
    out.v = v_sorted;
    return out;
}

// Least-squares rigid alignment of matched point sets (Kabsch): center both
// clouds, SVD the cross-covariance H = sum x~ y~^T, then
// R = V diag(1,1,det(VU^T)) U^T and t = y_bar - R x_bar, so that
// y_sigma(i) ~ R x_i + t.
inline RigidTransform procrustes(const PointCloud& x, const PointCloud& y,
                                 const PermutationMatrix& m) {
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("procrustes: need at least 3 points");
    if (y.size() != n || m.size() != n)
        throw std::invalid_argument("procrustes: size mismatch between clouds and matching");

    const Vec3 x_bar = x.centroid();
    Vec3 y_bar;
    for (std::size_t i = 0; i < n; ++i) y_bar += y[m.col_of(i)];
    y_bar = y_bar * (1.0 / static_cast<double>(n));

    Mat3 h = Mat3::zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 xt = x[i] - x_bar;
        const Vec3 yt = y[m.col_of(i)] - y_bar;
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) h(r, c) += xt[r] * yt[c];
    }

    const Svd3 svd = svd3(h);
    // collinear or degenerate input leaves the in-plane rotation undetermined
    if (svd.sigma.y <= 1e-12 * std::max(1.0, svd.sigma.x))
        throw std::runtime_error("procrustes: rank-deficient cross-covariance (degenerate cloud)");

    Mat3 d = Mat3::identity();
    d(2, 2) = (svd.v * svd.u.transposed()).det();
    RigidTransform out;
    out.rotation = svd.v * d * svd.u.transposed();
    out.translation = y_bar - out.rotation * x_bar;
    return out;
}

inline double deg_from_rad(double r) { return r * 180.0 / std::numbers::pi; }
inline double rad_from_deg(double d) { return d * std::numbers::pi / 180.0; }

struct EulerZyx {
    double yaw_deg = 0.0;    // about Z
    double pitch_deg = 0.0;  // about Y
    double roll_deg = 0.0;   // about X
};

inline Mat3 rotation_from_euler_zyx(const EulerZyx& e) {
    const double ca = std::cos(rad_from_deg(e.yaw_deg)), sa = std::sin(rad_from_deg(e.yaw_deg));
    const double cb = std::cos(rad_from_deg(e.pitch_deg)), sb = std::sin(rad_from_deg(e.pitch_deg));
    const double cg = std::cos(rad_from_deg(e.roll_deg)), sg = std::sin(rad_from_deg(e.roll_deg));
    Mat3 rz = Mat3::identity(), ry = Mat3::identity(), rx = Mat3::identity();
    rz(0, 0) = ca;
    rz(0, 1) = -sa;
    rz(1, 0) = sa;
    rz(1, 1) = ca;
    ry(0, 0) = cb;
    ry(0, 2) = sb;
    ry(2, 0) = -sb;
    ry(2, 2) = cb;
    rx(1, 1) = cg;
    rx(1, 2) = -sg;
    rx(2, 1) = sg;
    rx(2, 2) = cg;
    return rz * ry * rx;
}

// Intrinsic Z-Y-X decomposition in degrees. At gimbal lock (|pitch| = 90) the
// roll is zeroed and folded into the yaw.
inline EulerZyx euler_from_rotation(const Mat3& r) {
    if (!is_rotation(r, 1e-6)) throw std::invalid_argument("euler_from_rotation: not a rotation matrix");
    EulerZyx e;
    const double sb = -r(2, 0);
    if (std::abs(sb) < 1.0 - 1e-12) {
        e.pitch_deg = deg_from_rad(std::asin(sb));
        e.yaw_deg = deg_from_rad(std::atan2(r(1, 0), r(0, 0)));
        e.roll_deg = deg_from_rad(std::atan2(r(2, 1), r(2, 2)));
    } else if (sb > 0.0) {  // pitch = +90
        e.pitch_deg = 90.0;
        e.roll_deg = 0.0;
        e.yaw_deg = deg_from_rad(std::atan2(-r(0, 1), r(0, 2)));
    } else {  // pitch = -90
        e.pitch_deg = -90.0;
        e.roll_deg = 0.0;
        e.yaw_deg = deg_from_rad(std::atan2(-r(0, 1), -r(0, 2)));
    }
    return e;
}

inline Mat3 rotation_from_axis_angle(const Vec3& axis, double angle_rad) {
    const Vec3 u = axis.normalized();
    const double c = std::cos(angle_rad), s = std::sin(angle_rad), t = 1.0 - c;
    Mat3 r;
    r(0, 0) = c + u.x * u.x * t;
    r(0, 1) = u.x * u.y * t - u.z * s;
    r(0, 2) = u.x * u.z * t + u.y * s;
    r(1, 0) = u.y * u.x * t + u.z * s;
    r(1, 1) = c + u.y * u.y * t;
    r(1, 2) = u.y * u.z * t - u.x * s;
    r(2, 0) = u.z * u.x * t - u.y * s;
    r(2, 1) = u.z * u.y * t + u.x * s;
    r(2, 2) = c + u.z * u.z * t;
    return r;
}

} // namespace pmatch
