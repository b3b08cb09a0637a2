#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/params.hpp"
#include "pmatch/point_cloud.hpp"
#include "pmatch/tape.hpp"
#include "pmatch/tensor.hpp"

namespace pmatch {

struct FeatureConfig {
    std::size_t knn = 24;
    std::vector<std::size_t> edgeconv_widths = {32, 64};
    std::size_t feature_dim = 64;
    std::size_t attention_heads = 1;
    double leaky_slope = 0.2;

    void validate(std::size_t n_points) const {
        if (knn < 1 || knn >= n_points)
            throw std::invalid_argument("FeatureConfig: need 1 <= K < N, got K=" + std::to_string(knn) +
                                        " N=" + std::to_string(n_points));
        if (feature_dim < 1) throw std::invalid_argument("FeatureConfig: feature_dim must be >= 1");
        if (edgeconv_widths.empty())
            throw std::invalid_argument("FeatureConfig: edgeconv widths must be nonempty");
        if (attention_heads != 1)
            throw std::invalid_argument("FeatureConfig: only a single attention head is supported");
    }
};

// Tape node ids of one feature extractor's parameters, aligned with the
// ParamSet layout produced by init_feature_params.
struct FeatureLeaves {
    std::vector<NodeId> edgeconv_w;
    std::vector<NodeId> edgeconv_b;
    NodeId proj_w = 0;
    bool has_proj = false;
    NodeId wq = 0, wk = 0, wv = 0, wo = 0;
};

inline ParamSet init_feature_params(const FeatureConfig& cfg, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x9e37));
    ParamSet params;
    std::size_t in = 3;
    for (std::size_t l = 0; l < cfg.edgeconv_widths.size(); ++l) {
        const std::size_t out = cfg.edgeconv_widths[l];
        params.add("edgeconv" + std::to_string(l) + ".weight", init_linear(2 * in, out, rng));
        params.add("edgeconv" + std::to_string(l) + ".bias", init_bias(2 * in, out, rng));
        in = out;
    }
    if (in != cfg.feature_dim) {
        params.add("proj.weight", init_linear(in, cfg.feature_dim, rng));
    }
    const std::size_t d = cfg.feature_dim;
    params.add("attn.wq", init_linear(d, d, rng));
    params.add("attn.wk", init_linear(d, d, rng));
    params.add("attn.wv", init_linear(d, d, rng));
    params.add("attn.wo", init_linear(d, d, rng));
    return params;
}

// Registers every parameter as a trainable leaf, in ParamSet order.
inline FeatureLeaves register_feature_leaves(Tape& tape, const FeatureConfig& cfg,
                                             const ParamSet& params, std::vector<NodeId>* all_leaves) {
    FeatureLeaves leaves;
    std::size_t i = 0;
    auto take = [&](const std::string& expect) {
        const ParamSet::Entry& e = params.entry(i++);
        if (e.name != expect) throw std::logic_error("feature params out of order: " + e.name);
        const NodeId id = tape.leaf(e.value, true);
        if (all_leaves) all_leaves->push_back(id);
        return id;
    };
    std::size_t in = 3;
    for (std::size_t l = 0; l < cfg.edgeconv_widths.size(); ++l) {
        leaves.edgeconv_w.push_back(take("edgeconv" + std::to_string(l) + ".weight"));
        leaves.edgeconv_b.push_back(take("edgeconv" + std::to_string(l) + ".bias"));
        in = cfg.edgeconv_widths[l];
    }
    if (in != cfg.feature_dim) {
        leaves.proj_w = take("proj.weight");
        leaves.has_proj = true;
    }
    leaves.wq = take("attn.wq");
    leaves.wk = take("attn.wk");
    leaves.wv = take("attn.wv");
    leaves.wo = take("attn.wo");
    return leaves;
}

// One EdgeConv layer: out_i = max over neighbors j of
// leaky_relu(W [f_i ; f_j - f_i] + b). The graph stays fixed across layers.
inline NodeId edgeconv(Tape& tape, NodeId features, const KnnGraph& graph, NodeId weight,
                       NodeId bias, double leaky_slope) {
    const std::size_t n = graph.point_count();
    const std::size_t k = graph.k();
    if (tape.value(features).rows() != n)
        throw std::invalid_argument("edgeconv: feature rows do not match graph size");

    std::vector<std::uint32_t> center_idx(n * k), neigh_idx(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            center_idx[i * k + j] = static_cast<std::uint32_t>(i);
            neigh_idx[i * k + j] = graph.neighbor(i, j);
        }
    }
    const NodeId center = tape.gather_rows(features, center_idx);
    const NodeId neigh = tape.gather_rows(features, neigh_idx);
    const NodeId edge = tape.concat_cols(center, tape.sub(neigh, center));
    const NodeId act = tape.leaky_relu(tape.add_row_vec(tape.matmul(edge, weight), bias), leaky_slope);
    return tape.max_pool_groups(act, k);
}

// EdgeConv stack over a static KNN graph built on the input coordinates, with
// an optional final linear projection to feature_dim.
inline NodeId point_features(Tape& tape, const PointCloud& cloud, const FeatureConfig& cfg,
                             const FeatureLeaves& leaves) {
    cfg.validate(cloud.size());
    const KnnGraph graph = knn_graph(cloud, cfg.knn);
    NodeId f = tape.constant(cloud.to_tensor());
    for (std::size_t l = 0; l < leaves.edgeconv_w.size(); ++l)
        f = edgeconv(tape, f, graph, leaves.edgeconv_w[l], leaves.edgeconv_b[l], cfg.leaky_slope);
    if (leaves.has_proj) f = tape.matmul(f, leaves.proj_w);
    return f;
}

// eta(Q_in, KV_in): scaled-dot-product attention (queries from the first
// argument, keys/values from the second) followed by a linear output map.
inline NodeId attention_eta(Tape& tape, NodeId q_in, NodeId kv_in, const FeatureLeaves& leaves,
                            std::size_t feature_dim) {
    const NodeId q = tape.matmul(q_in, leaves.wq);
    const NodeId k = tape.matmul(kv_in, leaves.wk);
    const NodeId v = tape.matmul(kv_in, leaves.wv);
    const NodeId scores =
        tape.scale(tape.matmul(q, tape.transpose(k)), 1.0 / std::sqrt(static_cast<double>(feature_dim)));
    const NodeId attn = tape.softmax_rows(scores);
    return tape.matmul(tape.matmul(attn, v), leaves.wo);
}

struct CrossFeatures {
    NodeId phi_x;
    NodeId phi_y;
};

// Phi_X = F_X + eta(F_X, F_Y), Phi_Y = F_Y + eta(F_Y, F_X). The residual form
// is part of the contract.
inline CrossFeatures cross_attention(Tape& tape, NodeId fx, NodeId fy, const FeatureLeaves& leaves,
                                     std::size_t feature_dim) {
    if (!tape.value(fx).same_shape(tape.value(fy)))
        throw std::invalid_argument("cross_attention: feature shapes differ");
    CrossFeatures out;
    out.phi_x = tape.add(fx, attention_eta(tape, fx, fy, leaves, feature_dim));
    out.phi_y = tape.add(fy, attention_eta(tape, fy, fx, leaves, feature_dim));
    return out;
}

// S = Phi_X Phi_Y^T / sqrt(d)
inline NodeId similarity(Tape& tape, NodeId phi_x, NodeId phi_y) {
    const Tensor& a = tape.value(phi_x);
    const Tensor& b = tape.value(phi_y);
    if (a.cols() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("similarity: feature shapes differ");
    return tape.scale(tape.matmul(phi_x, tape.transpose(phi_y)),
                      1.0 / std::sqrt(static_cast<double>(a.cols())));
}

} // namespace pmatch
