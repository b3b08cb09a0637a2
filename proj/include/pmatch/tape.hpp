#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/tensor.hpp"

namespace pmatch {

using NodeId = std::size_t;

enum class OpKind {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Scale,
    Exp,
    Log,
    MatMul,
    Transpose,
    RowSum,
    ColSum,
    SubRows,
    SubCols,
    DivRows,
    DivCols,
    LogSumExpRows,
    LogSumExpCols,
    SoftmaxRows,
    LeakyRelu,
    MaxPoolGroups,
    GatherRows,
    ConcatCols,
    AddRowVec,
    Sum,
    Mean,
};

// Reverse-mode tape. Operations are recorded in topological order with their
// forward values computed eagerly; backward() walks the record once in
// reverse. A tape is single-owner while recording; independent tapes may run
// on independent threads.
class Tape {
public:
    struct Node {
        OpKind kind = OpKind::Leaf;
        std::array<NodeId, 2> in{0, 0};
        int n_in = 0;
        Tensor value;
        bool trainable = false;
        double scalar = 0.0;                 // scale factor or leaky slope
        std::size_t group = 0;               // max-pool group size
        std::vector<std::uint32_t> indices;  // gather indices or pool argmax
    };

    // Gradients of one backward pass, indexed by node id. Nodes the loss does
    // not depend on hold an empty tensor.
    class Gradients {
    public:
        explicit Gradients(std::vector<Tensor> g) : grads_(std::move(g)) {}

        bool has(NodeId id) const { return id < grads_.size() && grads_[id].size() > 0; }

        const Tensor& at(NodeId id) const {
            if (!has(id)) throw std::out_of_range("Gradients: no gradient for node " + std::to_string(id));
            return grads_[id];
        }

    private:
        std::vector<Tensor> grads_;
    };

    NodeId leaf(Tensor value, bool trainable = false) {
        Node n;
        n.kind = OpKind::Leaf;
        n.value = std::move(value);
        n.trainable = trainable;
        return push(std::move(n));
    }

    NodeId constant(Tensor value) { return leaf(std::move(value), false); }

    std::size_t node_count() const { return nodes_.size(); }

    const Tensor& value(NodeId id) const { return at(id).value; }

    bool trainable(NodeId id) const { return at(id).trainable; }

    // ---- elementwise ----

    NodeId add(NodeId a, NodeId b) { return binary_same_shape(OpKind::Add, a, b); }
    NodeId sub(NodeId a, NodeId b) { return binary_same_shape(OpKind::Sub, a, b); }
    NodeId mul(NodeId a, NodeId b) { return binary_same_shape(OpKind::Mul, a, b); }
    NodeId div(NodeId a, NodeId b) { return binary_same_shape(OpKind::Div, a, b); }

    NodeId scale(NodeId a, double c) {
        Node n = unary(OpKind::Scale, a);
        n.scalar = c;
        for (double& v : n.value.values()) v *= c;
        return push(std::move(n));
    }

    NodeId exp(NodeId a) {
        Node n = unary(OpKind::Exp, a);
        for (double& v : n.value.values()) v = std::exp(v);
        return push(std::move(n));
    }

    NodeId log(NodeId a) {
        Node n = unary(OpKind::Log, a);
        for (double& v : n.value.values()) v = std::log(v);
        return push(std::move(n));
    }

    NodeId leaky_relu(NodeId a, double slope) {
        Node n = unary(OpKind::LeakyRelu, a);
        n.scalar = slope;
        for (double& v : n.value.values())
            if (v < 0.0) v *= slope;
        return push(std::move(n));
    }

    // ---- linear algebra ----

    NodeId matmul(NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (av.cols() != bv.rows()) {
            throw std::invalid_argument("matmul: shape mismatch " + av.shape_string() + " * " +
                                        bv.shape_string());
        }
        Node n;
        n.kind = OpKind::MatMul;
        n.in = {a, b};
        n.n_in = 2;
        n.value = matmul_values(av, bv, false, false);
        return push(std::move(n));
    }

    NodeId transpose(NodeId a) {
        const Tensor& av = value(a);
        Node n;
        n.kind = OpKind::Transpose;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = Tensor(av.cols(), av.rows());
        for (std::size_t r = 0; r < av.rows(); ++r)
            for (std::size_t c = 0; c < av.cols(); ++c) n.value(c, r) = av(r, c);
        return push(std::move(n));
    }

    // ---- reductions and broadcasts ----

    NodeId row_sum(NodeId a) {
        const Tensor& av = value(a);
        Node n;
        n.kind = OpKind::RowSum;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = Tensor(av.rows(), 1);
        for (std::size_t r = 0; r < av.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < av.cols(); ++c) s += av(r, c);
            n.value(r, 0) = s;
        }
        return push(std::move(n));
    }

    NodeId col_sum(NodeId a) {
        const Tensor& av = value(a);
        Node n;
        n.kind = OpKind::ColSum;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = Tensor(1, av.cols());
        for (std::size_t c = 0; c < av.cols(); ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < av.rows(); ++r) s += av(r, c);
            n.value(0, c) = s;
        }
        return push(std::move(n));
    }

    NodeId sub_rows(NodeId a, NodeId r) { return rows_broadcast(OpKind::SubRows, a, r); }
    NodeId div_rows(NodeId a, NodeId r) { return rows_broadcast(OpKind::DivRows, a, r); }
    NodeId sub_cols(NodeId a, NodeId c) { return cols_broadcast(OpKind::SubCols, a, c); }
    NodeId div_cols(NodeId a, NodeId c) { return cols_broadcast(OpKind::DivCols, a, c); }

    // Divide every row by its own sum (and the column analogue).
    NodeId normalize_rows(NodeId a) { return div_rows(a, row_sum(a)); }
    NodeId normalize_cols(NodeId a) { return div_cols(a, col_sum(a)); }

    NodeId logsumexp_rows(NodeId a) {
        const Tensor& av = value(a);
        Node n;
        n.kind = OpKind::LogSumExpRows;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = Tensor(av.rows(), 1);
        for (std::size_t r = 0; r < av.rows(); ++r) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < av.cols(); ++c) m = std::max(m, av(r, c));
            double s = 0.0;
            for (std::size_t c = 0; c < av.cols(); ++c) s += std::exp(av(r, c) - m);
            n.value(r, 0) = m + std::log(s);
        }
        return push(std::move(n));
    }

    NodeId logsumexp_cols(NodeId a) {
        const Tensor& av = value(a);
        Node n;
        n.kind = OpKind::LogSumExpCols;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = Tensor(1, av.cols());
        for (std::size_t c = 0; c < av.cols(); ++c) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < av.rows(); ++r) m = std::max(m, av(r, c));
            double s = 0.0;
            for (std::size_t r = 0; r < av.rows(); ++r) s += std::exp(av(r, c) - m);
            n.value(0, c) = m + std::log(s);
        }
        return push(std::move(n));
    }

    NodeId softmax_rows(NodeId a) {
        const Tensor& av = value(a);
        Node n;
        n.kind = OpKind::SoftmaxRows;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = Tensor(av.rows(), av.cols());
        for (std::size_t r = 0; r < av.rows(); ++r) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < av.cols(); ++c) m = std::max(m, av(r, c));
            double s = 0.0;
            for (std::size_t c = 0; c < av.cols(); ++c) {
                const double e = std::exp(av(r, c) - m);
                n.value(r, c) = e;
                s += e;
            }
            for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) /= s;
        }
        return push(std::move(n));
    }

    // ---- structure ops ----

    // Max over consecutive groups of `group_size` rows. Gradient flows only to
    // the argmax row; ties break to the lowest index.
    NodeId max_pool_groups(NodeId a, std::size_t group_size) {
        const Tensor& av = value(a);
        if (group_size == 0 || av.rows() % group_size != 0) {
            throw std::invalid_argument("max_pool_groups: rows " + std::to_string(av.rows()) +
                                        " not divisible by group size " + std::to_string(group_size));
        }
        const std::size_t groups = av.rows() / group_size;
        Node n;
        n.kind = OpKind::MaxPoolGroups;
        n.in = {a, 0};
        n.n_in = 1;
        n.group = group_size;
        n.value = Tensor(groups, av.cols());
        n.indices.resize(groups * av.cols());
        for (std::size_t g = 0; g < groups; ++g) {
            for (std::size_t c = 0; c < av.cols(); ++c) {
                double best = av(g * group_size, c);
                std::size_t best_r = g * group_size;
                for (std::size_t k = 1; k < group_size; ++k) {
                    const double v = av(g * group_size + k, c);
                    if (v > best) {
                        best = v;
                        best_r = g * group_size + k;
                    }
                }
                n.value(g, c) = best;
                n.indices[g * av.cols() + c] = static_cast<std::uint32_t>(best_r);
            }
        }
        return push(std::move(n));
    }

    NodeId gather_rows(NodeId a, const std::vector<std::uint32_t>& row_indices) {
        const Tensor& av = value(a);
        for (std::uint32_t r : row_indices) {
            if (r >= av.rows())
                throw std::invalid_argument("gather_rows: index " + std::to_string(r) + " out of range");
        }
        Node n;
        n.kind = OpKind::GatherRows;
        n.in = {a, 0};
        n.n_in = 1;
        n.indices = row_indices;
        n.value = Tensor(row_indices.size(), av.cols());
        for (std::size_t r = 0; r < row_indices.size(); ++r)
            for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) = av(row_indices[r], c);
        return push(std::move(n));
    }

    NodeId concat_cols(NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (av.rows() != bv.rows()) {
            throw std::invalid_argument("concat_cols: row mismatch " + av.shape_string() + " | " +
                                        bv.shape_string());
        }
        Node n;
        n.kind = OpKind::ConcatCols;
        n.in = {a, b};
        n.n_in = 2;
        n.value = Tensor(av.rows(), av.cols() + bv.cols());
        for (std::size_t r = 0; r < av.rows(); ++r) {
            for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) = av(r, c);
            for (std::size_t c = 0; c < bv.cols(); ++c) n.value(r, av.cols() + c) = bv(r, c);
        }
        return push(std::move(n));
    }

    // Broadcast-add a 1xC row vector to every row (bias).
    NodeId add_row_vec(NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (bv.rows() != 1 || bv.cols() != av.cols()) {
            throw std::invalid_argument("add_row_vec: expected 1x" + std::to_string(av.cols()) +
                                        ", got " + bv.shape_string());
        }
        Node n;
        n.kind = OpKind::AddRowVec;
        n.in = {a, b};
        n.n_in = 2;
        n.value = av;
        for (std::size_t r = 0; r < av.rows(); ++r)
            for (std::size_t c = 0; c < av.cols(); ++c) n.value(r, c) += bv(0, c);
        return push(std::move(n));
    }

    NodeId sum(NodeId a) {
        Node n;
        n.kind = OpKind::Sum;
        n.in = {a, 0};
        n.n_in = 1;
        double s = 0.0;
        for (double v : value(a).values()) s += v;
        n.value = Tensor::scalar(s);
        return push(std::move(n));
    }

    NodeId mean(NodeId a) {
        Node n;
        n.kind = OpKind::Mean;
        n.in = {a, 0};
        n.n_in = 1;
        double s = 0.0;
        for (double v : value(a).values()) s += v;
        n.value = Tensor::scalar(s / static_cast<double>(value(a).size()));
        return push(std::move(n));
    }

    // ---- backward ----

    // Gradient of a scalar loss node with respect to every node it depends on.
    Gradients backward(NodeId loss) const {
        if (!value(loss).is_scalar())
            throw std::invalid_argument("backward: loss node must be scalar, got " +
                                        value(loss).shape_string());
        return backward_seeded(loss, Tensor::scalar(1.0));
    }

    // Backward pass seeded with an arbitrary upstream gradient at `node`.
    // This is the straight-through entry point: the seed substitutes for the
    // derivative of everything downstream of `node`.
    Gradients backward_seeded(NodeId node, const Tensor& seed) const {
        if (!value(node).same_shape(seed))
            throw std::invalid_argument("backward_seeded: seed shape " + seed.shape_string() +
                                        " does not match node shape " + value(node).shape_string());
        std::vector<Tensor> grads(nodes_.size());
        grads[node] = seed;
        for (std::size_t i = node + 1; i-- > 0;) {
            if (grads[i].size() == 0) continue;
            accumulate_inputs(i, grads);
        }
        return Gradients(std::move(grads));
    }

private:
    std::vector<Node> nodes_;

    const Node& at(NodeId id) const {
        if (id >= nodes_.size()) throw std::out_of_range("Tape: bad node id");
        return nodes_[id];
    }

    NodeId push(Node n) {
        nodes_.push_back(std::move(n));
        return nodes_.size() - 1;
    }

    Node unary(OpKind kind, NodeId a) {
        Node n;
        n.kind = kind;
        n.in = {a, 0};
        n.n_in = 1;
        n.value = value(a);
        return n;
    }

    NodeId binary_same_shape(OpKind kind, NodeId a, NodeId b) {
        const Tensor& av = value(a);
        const Tensor& bv = value(b);
        if (!av.same_shape(bv)) {
            throw std::invalid_argument("elementwise op: shape mismatch " + av.shape_string() +
                                        " vs " + bv.shape_string());
        }
        Node n;
        n.kind = kind;
        n.in = {a, b};
        n.n_in = 2;
        n.value = Tensor(av.rows(), av.cols());
        for (std::size_t i = 0; i < av.size(); ++i) {
            switch (kind) {
                case OpKind::Add: n.value[i] = av[i] + bv[i]; break;
                case OpKind::Sub: n.value[i] = av[i] - bv[i]; break;
                case OpKind::Mul: n.value[i] = av[i] * bv[i]; break;
                case OpKind::Div: n.value[i] = av[i] / bv[i]; break;
                default: throw std::logic_error("binary_same_shape: bad op");
            }
        }
        return push(std::move(n));
    }

    NodeId rows_broadcast(OpKind kind, NodeId a, NodeId r) {
        const Tensor& av = value(a);
        const Tensor& rv = value(r);
        if (rv.rows() != av.rows() || rv.cols() != 1) {
            throw std::invalid_argument("row broadcast: expected " + std::to_string(av.rows()) +
                                        "x1, got " + rv.shape_string());
        }
        Node n;
        n.kind = kind;
        n.in = {a, r};
        n.n_in = 2;
        n.value = av;
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t c = 0; c < av.cols(); ++c)
                n.value(i, c) = kind == OpKind::SubRows ? av(i, c) - rv(i, 0) : av(i, c) / rv(i, 0);
        return push(std::move(n));
    }

    NodeId cols_broadcast(OpKind kind, NodeId a, NodeId c) {
        const Tensor& av = value(a);
        const Tensor& cv = value(c);
        if (cv.cols() != av.cols() || cv.rows() != 1) {
            throw std::invalid_argument("col broadcast: expected 1x" + std::to_string(av.cols()) +
                                        ", got " + cv.shape_string());
        }
        Node n;
        n.kind = kind;
        n.in = {a, c};
        n.n_in = 2;
        n.value = av;
        for (std::size_t r = 0; r < av.rows(); ++r)
            for (std::size_t j = 0; j < av.cols(); ++j)
                n.value(r, j) = kind == OpKind::SubCols ? av(r, j) - cv(0, j) : av(r, j) / cv(0, j);
        return push(std::move(n));
    }

    static Tensor matmul_values(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
        const std::size_t m = trans_a ? a.cols() : a.rows();
        const std::size_t k = trans_a ? a.rows() : a.cols();
        const std::size_t n = trans_b ? b.rows() : b.cols();
        Tensor out(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
                const double av = trans_a ? a(p, i) : a(i, p);
                if (av == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    out(i, j) += av * (trans_b ? b(j, p) : b(p, j));
                }
            }
        }
        return out;
    }

    static void add_into(Tensor& acc, const Tensor& g, std::size_t rows, std::size_t cols) {
        if (acc.size() == 0) acc = Tensor(rows, cols);
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
    }

    void accumulate_inputs(NodeId id, std::vector<Tensor>& grads) const {
        const Node& n = nodes_[id];
        const Tensor& g = grads[id];
        auto acc = [&](NodeId input, const Tensor& contrib) {
            const Tensor& iv = nodes_[input].value;
            if (grads[input].size() == 0) grads[input] = Tensor(iv.rows(), iv.cols());
            Tensor& dst = grads[input];
            for (std::size_t i = 0; i < contrib.size(); ++i) dst[i] += contrib[i];
        };

        switch (n.kind) {
            case OpKind::Leaf:
                break;
            case OpKind::Add:
                acc(n.in[0], g);
                acc(n.in[1], g);
                break;
            case OpKind::Sub: {
                acc(n.in[0], g);
                Tensor neg = g;
                for (double& v : neg.values()) v = -v;
                acc(n.in[1], neg);
                break;
            }
            case OpKind::Mul: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& b = nodes_[n.in[1]].value;
                Tensor da(a.rows(), a.cols()), db(b.rows(), b.cols());
                for (std::size_t i = 0; i < g.size(); ++i) {
                    da[i] = g[i] * b[i];
                    db[i] = g[i] * a[i];
                }
                acc(n.in[0], da);
                acc(n.in[1], db);
                break;
            }
            case OpKind::Div: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& b = nodes_[n.in[1]].value;
                Tensor da(a.rows(), a.cols()), db(b.rows(), b.cols());
                for (std::size_t i = 0; i < g.size(); ++i) {
                    da[i] = g[i] / b[i];
                    db[i] = -g[i] * a[i] / (b[i] * b[i]);
                }
                acc(n.in[0], da);
                acc(n.in[1], db);
                break;
            }
            case OpKind::Scale: {
                Tensor da = g;
                for (double& v : da.values()) v *= n.scalar;
                acc(n.in[0], da);
                break;
            }
            case OpKind::Exp: {
                Tensor da = g;
                for (std::size_t i = 0; i < da.size(); ++i) da[i] *= n.value[i];
                acc(n.in[0], da);
                break;
            }
            case OpKind::Log: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da = g;
                for (std::size_t i = 0; i < da.size(); ++i) da[i] /= a[i];
                acc(n.in[0], da);
                break;
            }
            case OpKind::LeakyRelu: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da = g;
                for (std::size_t i = 0; i < da.size(); ++i)
                    if (a[i] < 0.0) da[i] *= n.scalar;
                acc(n.in[0], da);
                break;
            }
            case OpKind::MatMul: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& b = nodes_[n.in[1]].value;
                acc(n.in[0], matmul_values(g, b, false, true));  // dA = g * B^T
                acc(n.in[1], matmul_values(a, g, true, false));  // dB = A^T * g
                break;
            }
            case OpKind::Transpose: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c) da(r, c) = g(c, r);
                acc(n.in[0], da);
                break;
            }
            case OpKind::RowSum: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c) da(r, c) = g(r, 0);
                acc(n.in[0], da);
                break;
            }
            case OpKind::ColSum: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c) da(r, c) = g(0, c);
                acc(n.in[0], da);
                break;
            }
            case OpKind::SubRows: {
                const Tensor& r = nodes_[n.in[1]].value;
                acc(n.in[0], g);
                Tensor dr(r.rows(), 1);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t c = 0; c < g.cols(); ++c) dr(i, 0) -= g(i, c);
                acc(n.in[1], dr);
                break;
            }
            case OpKind::SubCols: {
                const Tensor& cvec = nodes_[n.in[1]].value;
                acc(n.in[0], g);
                Tensor dc(1, cvec.cols());
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c) dc(0, c) -= g(r, c);
                acc(n.in[1], dc);
                break;
            }
            case OpKind::DivRows: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& r = nodes_[n.in[1]].value;
                Tensor da(a.rows(), a.cols());
                Tensor dr(r.rows(), 1);
                for (std::size_t i = 0; i < a.rows(); ++i) {
                    const double ri = r(i, 0);
                    for (std::size_t c = 0; c < a.cols(); ++c) {
                        da(i, c) = g(i, c) / ri;
                        dr(i, 0) -= g(i, c) * a(i, c) / (ri * ri);
                    }
                }
                acc(n.in[0], da);
                acc(n.in[1], dr);
                break;
            }
            case OpKind::DivCols: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& cvec = nodes_[n.in[1]].value;
                Tensor da(a.rows(), a.cols());
                Tensor dc(1, cvec.cols());
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    for (std::size_t c = 0; c < a.cols(); ++c) {
                        const double cc = cvec(0, c);
                        da(r, c) = g(r, c) / cc;
                        dc(0, c) -= g(r, c) * a(r, c) / (cc * cc);
                    }
                }
                acc(n.in[0], da);
                acc(n.in[1], dc);
                break;
            }
            case OpKind::LogSumExpRows: {
                // d lse / d x = softmax(x) per row; reconstructed from output.
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c)
                        da(r, c) = g(r, 0) * std::exp(a(r, c) - n.value(r, 0));
                acc(n.in[0], da);
                break;
            }
            case OpKind::LogSumExpCols: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c)
                        da(r, c) = g(0, c) * std::exp(a(r, c) - n.value(0, c));
                acc(n.in[0], da);
                break;
            }
            case OpKind::SoftmaxRows: {
                const Tensor& y = n.value;
                Tensor da(y.rows(), y.cols());
                for (std::size_t r = 0; r < y.rows(); ++r) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                    for (std::size_t c = 0; c < y.cols(); ++c)
                        da(r, c) = y(r, c) * (g(r, c) - dot);
                }
                acc(n.in[0], da);
                break;
            }
            case OpKind::MaxPoolGroups: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t gr = 0; gr < n.value.rows(); ++gr)
                    for (std::size_t c = 0; c < n.value.cols(); ++c)
                        da(n.indices[gr * n.value.cols() + c], c) += g(gr, c);
                acc(n.in[0], da);
                break;
            }
            case OpKind::GatherRows: {
                const Tensor& a = nodes_[n.in[0]].value;
                Tensor da(a.rows(), a.cols());
                for (std::size_t r = 0; r < n.indices.size(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c) da(n.indices[r], c) += g(r, c);
                acc(n.in[0], da);
                break;
            }
            case OpKind::ConcatCols: {
                const Tensor& a = nodes_[n.in[0]].value;
                const Tensor& b = nodes_[n.in[1]].value;
                Tensor da(a.rows(), a.cols()), db(b.rows(), b.cols());
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    for (std::size_t c = 0; c < a.cols(); ++c) da(r, c) = g(r, c);
                    for (std::size_t c = 0; c < b.cols(); ++c) db(r, c) = g(r, a.cols() + c);
                }
                acc(n.in[0], da);
                acc(n.in[1], db);
                break;
            }
            case OpKind::AddRowVec: {
                const Tensor& b = nodes_[n.in[1]].value;
                acc(n.in[0], g);
                Tensor db(1, b.cols());
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c) db(0, c) += g(r, c);
                acc(n.in[1], db);
                break;
            }
            case OpKind::Sum: {
                const Tensor& a = nodes_[n.in[0]].value;
                acc(n.in[0], Tensor::full(a.rows(), a.cols(), g(0, 0)));
                break;
            }
            case OpKind::Mean: {
                const Tensor& a = nodes_[n.in[0]].value;
                acc(n.in[0], Tensor::full(a.rows(), a.cols(), g(0, 0) / static_cast<double>(a.size())));
                break;
            }
        }
    }
};

} // namespace pmatch
