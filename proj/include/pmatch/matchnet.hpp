#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/assignment.hpp"
#include "pmatch/features.hpp"
#include "pmatch/params.hpp"
#include "pmatch/point_cloud.hpp"
#include "pmatch/sinkhorn.hpp"
#include "pmatch/tape.hpp"

namespace pmatch {

enum class MatchMode {
    TwoStage,     // similarity -> Gumbel-Sinkhorn DSM -> Hungarian, straight-through backward
    OneStage,     // Hungarian directly on the similarity matrix (ablation)
    PostProcess,  // train on the DSM only; Hungarian applied at evaluation time
};

inline std::string to_string(MatchMode m) {
    switch (m) {
        case MatchMode::TwoStage: return "two-stage";
        case MatchMode::OneStage: return "one-stage";
        case MatchMode::PostProcess: return "post-process";
    }
    return "?";
}

inline MatchMode match_mode_from_string(const std::string& s) {
    if (s == "two-stage") return MatchMode::TwoStage;
    if (s == "one-stage") return MatchMode::OneStage;
    if (s == "post-process") return MatchMode::PostProcess;
    throw std::invalid_argument("unknown match mode: " + s);
}

// Eq-2 style matching loss: -(1/N) sum_ij pred_ij gt_ij. Accepts a soft
// prediction (DSM) or a hard one (PM in tensor form).
inline double match_loss(const Tensor& pred, const PermutationMatrix& gt) {
    if (pred.rows() != gt.size() || pred.cols() != gt.size())
        throw std::invalid_argument("match_loss: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) s += pred(i, gt.col_of(i));
    return -s / static_cast<double>(gt.size());
}

inline double match_loss(const PermutationMatrix& pred, const PermutationMatrix& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("match_loss: size mismatch");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (pred.col_of(i) == gt.col_of(i)) ++agree;
    return -static_cast<double>(agree) / static_cast<double>(gt.size());
}

// The straight-through seed: dL/dm_ij = -(1/N) gt_ij, assigned verbatim to
// the pre-projection variable. Depends only on the ground truth and N.
inline Tensor straight_through_seed(const PermutationMatrix& gt) {
    const std::size_t n = gt.size();
    Tensor seed(n, n);
    for (std::size_t i = 0; i < n; ++i) seed(i, gt.col_of(i)) = -1.0 / static_cast<double>(n);
    return seed;
}

struct MatchOutput {
    MatchMode mode = MatchMode::TwoStage;
    Tape tape;
    std::vector<NodeId> param_nodes;  // aligned with the ParamSet order
    NodeId s_node = 0;
    NodeId p_node = 0;  // unset in OneStage mode
    bool has_p = false;
    Tensor similarity;
    Tensor dsm;  // empty in OneStage mode
    std::optional<PermutationMatrix> matching;
    double loss = 0.0;  // filled by the caller-side loss helpers below
};

// Feature extraction, similarity, and the per-mode matching head, all
// recorded on one tape. Training passes sample fresh Gumbel noise from
// `noise_seed`; evaluation runs with zero noise.
class MatchNet {
public:
    MatchNet(FeatureConfig cfg, ParamSet params) : cfg_(std::move(cfg)), params_(std::move(params)) {}

    MatchNet(FeatureConfig cfg, std::uint64_t init_seed)
        : cfg_(std::move(cfg)), params_(init_feature_params(cfg_, init_seed)) {}

    const FeatureConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    MatchOutput forward(const PointCloud& x, const PointCloud& y, MatchMode mode,
                        const SinkhornConfig& sk, std::uint64_t noise_seed,
                        bool eval = false) const {
        if (x.size() != y.size())
            throw std::invalid_argument("MatchNet::forward: cloud sizes differ (" +
                                        std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
        cfg_.validate(x.size());

        MatchOutput out;
        out.mode = mode;
        const FeatureLeaves leaves = register_feature_leaves(out.tape, cfg_, params_, &out.param_nodes);
        const NodeId fx = point_features(out.tape, x, cfg_, leaves);
        const NodeId fy = point_features(out.tape, y, cfg_, leaves);
        const CrossFeatures phi = cross_attention(out.tape, fx, fy, leaves, cfg_.feature_dim);
        out.s_node = similarity(out.tape, phi.phi_x, phi.phi_y);
        out.similarity = out.tape.value(out.s_node);
        if (!out.similarity.all_finite())
            throw std::runtime_error("MatchNet::forward: non-finite similarity matrix");

        if (mode == MatchMode::OneStage) {
            out.matching = hungarian_max(out.similarity);
            return out;
        }

        const Tensor noise = eval ? Tensor(x.size(), x.size(), 0.0)
                                  : sample_gumbel(x.size(), noise_seed);
        out.p_node = gumbel_sinkhorn(out.tape, out.s_node, noise, sk);
        out.has_p = true;
        out.dsm = out.tape.value(out.p_node);
        if (mode == MatchMode::TwoStage || eval) out.matching = hungarian_max(out.dsm);
        return out;
    }

    // Straight-through backward (two-stage): seed dL/dP := dL/dM and let the
    // gradient flow through the unrolled Sinkhorn into the features.
    std::vector<Tensor> backward_straight_through(const MatchOutput& fwd,
                                                  const PermutationMatrix& gt) const {
        if (fwd.mode != MatchMode::TwoStage)
            throw std::logic_error("backward_straight_through: forward pass was not two-stage");
        return collect(fwd, fwd.tape.backward_seeded(fwd.p_node, straight_through_seed(gt)));
    }

    // One-stage ablation: the same seed lands directly on the similarity
    // matrix, so only N of its N^2 entries receive supervision.
    std::vector<Tensor> backward_one_stage(const MatchOutput& fwd, const PermutationMatrix& gt) const {
        if (fwd.mode != MatchMode::OneStage)
            throw std::logic_error("backward_one_stage: forward pass was not one-stage");
        return collect(fwd, fwd.tape.backward_seeded(fwd.s_node, straight_through_seed(gt)));
    }

    // Post-process (DSM-only) training: Eq. 2 applied to the soft P, recorded
    // on the tape and differentiated as an ordinary scalar loss.
    std::vector<Tensor> backward_soft(MatchOutput& fwd, const PermutationMatrix& gt) const {
        if (fwd.mode != MatchMode::PostProcess)
            throw std::logic_error("backward_soft: forward pass was not post-process");
        Tape& tape = fwd.tape;
        const NodeId gt_mask = tape.constant(gt.to_tensor());
        const NodeId loss = tape.scale(tape.sum(tape.mul(fwd.p_node, gt_mask)),
                                       -1.0 / static_cast<double>(gt.size()));
        return collect(fwd, tape.backward(loss));
    }

private:
    FeatureConfig cfg_;
    ParamSet params_;

    std::vector<Tensor> collect(const MatchOutput& fwd, const Tape::Gradients& grads) const {
        std::vector<Tensor> out;
        out.reserve(fwd.param_nodes.size());
        for (std::size_t i = 0; i < fwd.param_nodes.size(); ++i) {
            const NodeId id = fwd.param_nodes[i];
            if (grads.has(id)) {
                out.push_back(grads.at(id));
            } else {
                const Tensor& v = params_.entry(i).value;
                out.push_back(Tensor(v.rows(), v.cols()));
            }
        }
        return out;
    }
};

} // namespace pmatch
