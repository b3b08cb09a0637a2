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

// One-to-one matching stored as an assignment vector: sigma[i] is the column
// matched to row i. The constructor rejects anything that is not a bijection.
class PermutationMatrix {
public:
    explicit PermutationMatrix(std::vector<std::size_t> sigma) : sigma_(std::move(sigma)) {
        std::vector<bool> seen(sigma_.size(), false);
        for (std::size_t c : sigma_) {
            if (c >= sigma_.size() || seen[c])
                throw std::invalid_argument("PermutationMatrix: sigma is not a bijection");
            seen[c] = true;
        }
    }

    static PermutationMatrix identity(std::size_t n) {
        std::vector<std::size_t> s(n);
        std::iota(s.begin(), s.end(), 0);
        return PermutationMatrix(std::move(s));
    }

    std::size_t size() const { return sigma_.size(); }
    std::size_t col_of(std::size_t row) const { return sigma_[row]; }
    const std::vector<std::size_t>& sigma() const { return sigma_; }

    PermutationMatrix inverse() const {
        std::vector<std::size_t> inv(sigma_.size());
        for (std::size_t i = 0; i < sigma_.size(); ++i) inv[sigma_[i]] = i;
        return PermutationMatrix(std::move(inv));
    }

    Tensor to_tensor() const {
        Tensor m(sigma_.size(), sigma_.size());
        for (std::size_t i = 0; i < sigma_.size(); ++i) m(i, sigma_[i]) = 1.0;
        return m;
    }

    // Frobenius inner product <M, P> = sum_i P(i, sigma(i)).
    double objective(const Tensor& profit) const {
        double s = 0.0;
        for (std::size_t i = 0; i < sigma_.size(); ++i) s += profit(i, sigma_[i]);
        return s;
    }

    bool operator==(const PermutationMatrix& o) const { return sigma_ == o.sigma_; }

private:
    std::vector<std::size_t> sigma_;
};

// Checks the permutation-matrix invariants on a dense matrix: binary entries,
// unit row sums, unit column sums.
inline bool is_permutation_tensor(const Tensor& m) {
    if (m.rows() != m.cols()) return false;
    const std::size_t n = m.rows();
    std::vector<double> col_sums(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = m(i, j);
            if (v != 0.0 && v != 1.0) return false;
            row_sum += v;
            col_sums[j] += v;
        }
        if (row_sum != 1.0) return false;
    }
    for (double s : col_sums)
        if (s != 1.0) return false;
    return true;
}

// Exact max-profit assignment via the Hungarian algorithm (Kuhn-Munkres with
// dual potentials, O(N^3)). Maximization is reduced to minimization with
// cost = max(P) - P. Scan order is fixed (ascending rows, then columns), so
// the result is deterministic for a given input.
inline PermutationMatrix hungarian_max(const Tensor& profit) {
    if (profit.rows() != profit.cols() || profit.rows() == 0)
        throw std::invalid_argument("hungarian_max: profit must be square and non-empty");
    for (double v : profit.values())
        if (std::isnan(v)) throw std::invalid_argument("hungarian_max: NaN in profit matrix");

    const std::size_t n = profit.rows();
    double max_p = -std::numeric_limits<double>::infinity();
    for (double v : profit.values()) max_p = std::max(max_p, v);

    auto cost = [&](std::size_t i, std::size_t j) { return max_p - profit(i, j); };

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays; p[j] is the row matched to column j, column 0 is virtual.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<bool> used(n + 1, false);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> sigma(n);
    for (std::size_t j = 1; j <= n; ++j) sigma[p[j] - 1] = j - 1;
    return PermutationMatrix(std::move(sigma));
}

// Exhaustive N! oracle for the assignment problem. Ties return the
// lexicographically first sigma. Refuses N > 9.
inline PermutationMatrix brute_force_assignment(const Tensor& profit) {
    if (profit.rows() != profit.cols() || profit.rows() == 0)
        throw std::invalid_argument("brute_force_assignment: profit must be square and non-empty");
    const std::size_t n = profit.rows();
    if (n > 9)
        throw std::invalid_argument("brute_force_assignment: N=" + std::to_string(n) +
                                    " exceeds the N<=9 cost guard");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_obj = -std::numeric_limits<double>::infinity();
    do {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += profit(i, perm[i]);
        if (obj > best_obj) {
            best_obj = obj;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return PermutationMatrix(std::move(best));
}

} // namespace pmatch
