#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pmatch/tensor.hpp"

namespace pmatch {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double squared_norm() const { return dot(*this); }
    double norm() const { return std::sqrt(squared_norm()); }

    Vec3 normalized() const {
        const double n = norm();
        if (n == 0.0) throw std::invalid_argument("Vec3::normalized: zero vector");
        return {x / n, y / n, z / n};
    }

    double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

struct PointCloud {
    std::vector<Vec3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    Vec3& operator[](std::size_t i) { return points[i]; }
    const Vec3& operator[](std::size_t i) const { return points[i]; }

    Tensor to_tensor() const {
        Tensor t(points.size(), 3);
        for (std::size_t i = 0; i < points.size(); ++i) {
            t(i, 0) = points[i].x;
            t(i, 1) = points[i].y;
            t(i, 2) = points[i].z;
        }
        return t;
    }

    static PointCloud from_tensor(const Tensor& t) {
        if (t.cols() != 3) throw std::invalid_argument("PointCloud::from_tensor: expected Nx3");
        PointCloud pc;
        pc.points.reserve(t.rows());
        for (std::size_t i = 0; i < t.rows(); ++i) pc.points.push_back({t(i, 0), t(i, 1), t(i, 2)});
        return pc;
    }

    Vec3 centroid() const {
        Vec3 c;
        for (const Vec3& p : points) c += p;
        return c * (1.0 / static_cast<double>(points.size()));
    }
};

// K nearest neighbors of every point, self excluded, sorted by increasing
// Euclidean distance with ties broken by lower index.
class KnnGraph {
public:
    KnnGraph(std::size_t n, std::size_t k) : n_(n), k_(k), idx_(n * k, 0) {}

    std::size_t point_count() const { return n_; }
    std::size_t k() const { return k_; }

    std::uint32_t neighbor(std::size_t i, std::size_t j) const { return idx_[i * k_ + j]; }
    std::uint32_t& neighbor(std::size_t i, std::size_t j) { return idx_[i * k_ + j]; }

private:
    std::size_t n_, k_;
    std::vector<std::uint32_t> idx_;
};

inline KnnGraph knn_graph(const PointCloud& cloud, std::size_t k) {
    const std::size_t n = cloud.size();
    if (k < 1 || k >= n) {
        throw std::invalid_argument("knn_graph: need 1 <= K < N, got K=" + std::to_string(k) +
                                    " N=" + std::to_string(n));
    }
    KnnGraph graph(n, k);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dist[j] = {(cloud[i] - cloud[j]).squared_norm(), j};
        }
        dist[i].first = std::numeric_limits<double>::infinity();  // exclude self
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t j = 0; j < k; ++j)
            graph.neighbor(i, j) = static_cast<std::uint32_t>(dist[j].second);
    }
    return graph;
}

// Center on the mean and scale to max radius 1 (no-op scale for a degenerate
// all-coincident cloud).
inline PointCloud normalize_cloud(const PointCloud& cloud) {
    if (cloud.size() == 0) return cloud;
    const Vec3 c = cloud.centroid();
    double max_r = 0.0;
    for (const Vec3& p : cloud.points) max_r = std::max(max_r, (p - c).norm());
    PointCloud out;
    out.points.reserve(cloud.size());
    const double inv = max_r > 1e-12 ? 1.0 / max_r : 1.0;
    for (const Vec3& p : cloud.points) out.points.push_back((p - c) * inv);
    return out;
}

} // namespace pmatch
