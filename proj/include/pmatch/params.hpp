#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/rng.hpp"
#include "pmatch/tensor.hpp"

namespace pmatch {

// Named learnable tensors in a fixed order. Gradients and optimizer state are
// kept as parallel vectors aligned with this order.
class ParamSet {
public:
    struct Entry {
        std::string name;
        Tensor value;
    };

    void add(std::string name, Tensor value) {
        for (const Entry& e : entries_)
            if (e.name == name) throw std::invalid_argument("ParamSet: duplicate name " + name);
        entries_.push_back({std::move(name), std::move(value)});
    }

    std::size_t count() const { return entries_.size(); }
    const Entry& entry(std::size_t i) const { return entries_[i]; }
    Entry& entry(std::size_t i) { return entries_[i]; }

    Tensor& find(const std::string& name) {
        for (Entry& e : entries_)
            if (e.name == name) return e.value;
        throw std::out_of_range("ParamSet: no parameter named " + name);
    }
    const Tensor& find(const std::string& name) const {
        for (const Entry& e : entries_)
            if (e.name == name) return e.value;
        throw std::out_of_range("ParamSet: no parameter named " + name);
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const Entry& e : entries_) n += e.value.size();
        return n;
    }

    std::vector<double> flatten() const {
        std::vector<double> flat;
        flat.reserve(scalar_count());
        for (const Entry& e : entries_)
            flat.insert(flat.end(), e.value.values().begin(), e.value.values().end());
        return flat;
    }

    void unflatten(const std::vector<double>& flat) {
        if (flat.size() != scalar_count())
            throw std::invalid_argument("ParamSet::unflatten: size mismatch");
        std::size_t off = 0;
        for (Entry& e : entries_) {
            for (double& v : e.value.values()) v = flat[off++];
        }
    }

    // FNV-1a over the raw parameter bytes; used for cheap equality probes.
    std::uint64_t content_hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto feed = [&](const void* data, std::size_t len) {
            const auto* bytes = static_cast<const unsigned char*>(data);
            for (std::size_t i = 0; i < len; ++i) {
                h ^= bytes[i];
                h *= 1099511628211ULL;
            }
        };
        for (const Entry& e : entries_) {
            feed(e.name.data(), e.name.size());
            feed(e.value.values().data(), e.value.values().size() * sizeof(double));
        }
        return h;
    }

private:
    std::vector<Entry> entries_;
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
inline Tensor init_linear(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w(fan_in, fan_out);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    return w;
}

inline Tensor init_bias(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor b(1, fan_out);
    for (double& v : b.values()) v = rng.uniform(-bound, bound);
    return b;
}

} // namespace pmatch
