#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "pmatch/rng.hpp"
#include "pmatch/tape.hpp"
#include "pmatch/tensor.hpp"

namespace pmatch {

struct SinkhornConfig {
    double mu = 0.5;
    std::size_t iters = 5;

    void validate() const {
        if (mu <= 0.0) throw std::invalid_argument("SinkhornConfig: mu must be positive");
        if (iters < 1) throw std::invalid_argument("SinkhornConfig: iters must be >= 1");
    }
};

// i.i.d. standard Gumbel noise, eps = -log(-log(u)), u uniform on (0,1)
// clamped away from {0,1} by 1e-12. Reproducible from the seed.
inline Tensor sample_gumbel(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_gumbel: n must be >= 1");
    Rng rng(seed);
    Tensor eps(n, n);
    for (double& v : eps.values()) {
        double u = rng.uniform();
        u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
        v = -std::log(-std::log(u));
    }
    return eps;
}

// Gumbel-Sinkhorn on the tape: exponentiate (S + eps)/mu, then alternate
// row-wise and column-wise normalization for `iters` rounds, returning the
// doubly stochastic relaxation after the final column normalization.
//
// Runs in the log domain (log-sum-exp with max subtraction) so large logits
// survive the exp; the result is the same normalization sequence, and every
// entry of the returned matrix is strictly positive.
inline NodeId gumbel_sinkhorn(Tape& tape, NodeId similarity, const Tensor& gumbel_noise,
                              const SinkhornConfig& cfg) {
    cfg.validate();
    const Tensor& s = tape.value(similarity);
    if (s.rows() != s.cols()) throw std::invalid_argument("gumbel_sinkhorn: similarity must be square");
    if (!gumbel_noise.same_shape(s))
        throw std::invalid_argument("gumbel_sinkhorn: noise shape " + gumbel_noise.shape_string() +
                                    " does not match similarity " + s.shape_string());

    NodeId logits = tape.scale(tape.add(similarity, tape.constant(gumbel_noise)), 1.0 / cfg.mu);
    for (std::size_t it = 0; it < cfg.iters; ++it) {
        logits = tape.sub_rows(logits, tape.logsumexp_rows(logits));
        logits = tape.sub_cols(logits, tape.logsumexp_cols(logits));
    }
    return tape.exp(logits);
}

// Forward-only convenience wrapper.
inline Tensor gumbel_sinkhorn_values(const Tensor& similarity, const Tensor& gumbel_noise,
                                     const SinkhornConfig& cfg) {
    Tape tape;
    return tape.value(gumbel_sinkhorn(tape, tape.constant(similarity), gumbel_noise, cfg));
}

// Largest |row sum - 1| and |column sum - 1| of a candidate DSM.
struct MarginalDeviation {
    double row = 0.0;
    double col = 0.0;
    double max() const { return row > col ? row : col; }
};

inline MarginalDeviation marginal_deviation(const Tensor& p) {
    MarginalDeviation dev;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) rs += p(i, j);
        dev.row = std::max(dev.row, std::abs(rs - 1.0));
    }
    for (std::size_t j = 0; j < p.cols(); ++j) {
        double cs = 0.0;
        for (std::size_t i = 0; i < p.rows(); ++i) cs += p(i, j);
        dev.col = std::max(dev.col, std::abs(cs - 1.0));
    }
    return dev;
}

} // namespace pmatch
