#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pmatch/tape.hpp"
#include "pmatch/tensor.hpp"

namespace pmatch {

// Central finite differences of a scalar function at `point`.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> point, double step) {
    std::vector<double> grad(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + step;
        const double hi = f(point);
        point[i] = saved - step;
        const double lo = f(point);
        point[i] = saved;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

// max_i |analytic_i - numeric_i| / max(1, |numeric_i|)
inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max(1.0, std::abs(numeric[i]));
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

// Records `program` on a fresh tape with `point` as the single trainable leaf,
// compares the tape gradient of the returned scalar node against central
// finite differences.
inline double grad_check(const std::function<NodeId(Tape&, NodeId)>& program, const Tensor& point,
                         double step) {
    Tape tape;
    const NodeId x = tape.leaf(point, true);
    const NodeId loss = program(tape, x);
    const auto grads = tape.backward(loss);
    std::vector<double> analytic(point.size(), 0.0);
    if (grads.has(x)) analytic = grads.at(x).values();

    auto forward = [&](const std::vector<double>& flat) {
        Tape t;
        const NodeId xx = t.leaf(Tensor(point.rows(), point.cols(), flat), true);
        return t.value(program(t, xx))(0, 0);
    };
    const auto numeric = numeric_gradient(forward, point.values(), step);
    return max_relative_error(analytic, numeric);
}

} // namespace pmatch
