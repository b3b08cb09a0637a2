#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/assignment.hpp"
#include "pmatch/format.hpp"
#include "pmatch/point_cloud.hpp"
#include "pmatch/rigid.hpp"

namespace pmatch {

// Percentage of rows whose predicted assignment agrees with the ground truth:
// 100 * (1/N) ||M_pred (.) M_gt||_1.
inline double strict_precision(const PermutationMatrix& pred, const PermutationMatrix& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("strict_precision: size mismatch");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred.col_of(i) == gt.col_of(i)) ++agree;
    return 100.0 * static_cast<double>(agree) / static_cast<double>(pred.size());
}

// Self-adaptive threshold: tau_i is the mean distance from point i to its K
// nearest neighbors.
inline std::vector<double> adaptive_threshold(const PointCloud& points, std::size_t k) {
    const KnnGraph graph = knn_graph(points, k);  // validates 1 <= K < N
    std::vector<double> tau(points.size(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) s += (points[i] - points[graph.neighbor(i, j)]).norm();
        tau[i] = s / static_cast<double>(k);
    }
    return tau;
}

// Correspondence i counts as correct when the predicted corresponding point
// lies within tau of the true corresponding point. Distances and tau both
// live on the target cloud; the threshold is the one local to the true
// corresponding point. K = 0 reduces to strict precision.
inline double relaxed_precision(const PermutationMatrix& pred, const PermutationMatrix& gt,
                                const PointCloud& target_points, std::size_t k) {
    if (pred.size() != gt.size() || target_points.size() != pred.size())
        throw std::invalid_argument("relaxed_precision: size mismatch");
    if (k == 0) return strict_precision(pred, gt);
    const std::vector<double> tau = adaptive_threshold(target_points, k);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const std::size_t j_pred = pred.col_of(i);
        const std::size_t j_gt = gt.col_of(i);
        if ((target_points[j_pred] - target_points[j_gt]).norm() <= tau[j_gt]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

// Componentwise errors of one transform pair: Euler angles in degrees and
// translation components. Dataset-level RMSE/MAE aggregate over all
// components of all pairs.
struct TransformErrors {
    std::array<double, 3> angle_diff_deg{0, 0, 0};
    std::array<double, 3> trans_diff{0, 0, 0};
};

inline TransformErrors transform_errors(const RigidTransform& pred, const RigidTransform& gt) {
    const EulerZyx ep = euler_from_rotation(pred.rotation);
    const EulerZyx eg = euler_from_rotation(gt.rotation);
    TransformErrors out;
    out.angle_diff_deg = {ep.yaw_deg - eg.yaw_deg, ep.pitch_deg - eg.pitch_deg,
                          ep.roll_deg - eg.roll_deg};
    const Vec3 dt = pred.translation - gt.translation;
    out.trans_diff = {dt.x, dt.y, dt.z};
    return out;
}

struct TransformErrorStats {
    double rmse_r = 0.0;
    double mae_r = 0.0;
    double rmse_t = 0.0;
    double mae_t = 0.0;
};

inline TransformErrorStats aggregate_transform_errors(const std::vector<TransformErrors>& errs) {
    if (errs.empty()) return {};
    double sq_r = 0.0, abs_r = 0.0, sq_t = 0.0, abs_t = 0.0;
    for (const TransformErrors& e : errs) {
        for (double a : e.angle_diff_deg) {
            sq_r += a * a;
            abs_r += std::abs(a);
        }
        for (double t : e.trans_diff) {
            sq_t += t * t;
            abs_t += std::abs(t);
        }
    }
    const double count = 3.0 * static_cast<double>(errs.size());
    TransformErrorStats s;
    s.rmse_r = std::sqrt(sq_r / count);
    s.mae_r = abs_r / count;
    s.rmse_t = std::sqrt(sq_t / count);
    s.mae_t = abs_t / count;
    return s;
}

// Long-form metric report: one row per (pair, metric, value).
struct MetricRow {
    std::string pair;
    std::string metric;
    double value = 0.0;
};

inline void write_metric_rows(std::ostream& os, const std::vector<MetricRow>& rows) {
    os << "pair,metric,value\n";
    for (const MetricRow& r : rows) os << r.pair << ',' << r.metric << ',' << format_double(r.value) << '\n';
}

} // namespace pmatch
