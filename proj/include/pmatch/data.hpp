#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmatch/assignment.hpp"
#include "pmatch/cloud_io.hpp"
#include "pmatch/point_cloud.hpp"
#include "pmatch/rigid.hpp"
#include "pmatch/rng.hpp"

namespace pmatch {

enum class ShapeKind { Sphere, Box, Torus, Helix };

inline const std::vector<ShapeKind>& all_shape_kinds() {
    static const std::vector<ShapeKind> kinds = {ShapeKind::Sphere, ShapeKind::Box,
                                                 ShapeKind::Torus, ShapeKind::Helix};
    return kinds;
}

inline std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::Sphere: return "sphere";
        case ShapeKind::Box: return "box";
        case ShapeKind::Torus: return "torus";
        case ShapeKind::Helix: return "helix";
    }
    return "?";
}

// Random surface samples of one shape category, centered and scaled to max
// radius 1.
inline PointCloud sample_shape(ShapeKind kind, std::size_t n, Rng& rng) {
    PointCloud cloud;
    cloud.points.reserve(n);
    switch (kind) {
        case ShapeKind::Sphere:
            for (std::size_t i = 0; i < n; ++i) {
                Vec3 v{rng.normal(), rng.normal(), rng.normal()};
                if (v.norm() < 1e-9) v = {1, 0, 0};
                cloud.points.push_back(v.normalized());
            }
            break;
        case ShapeKind::Box:
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t face = rng.uniform_index(6);
                const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
                const double s = face % 2 == 0 ? 1.0 : -1.0;
                if (face / 2 == 0) cloud.points.push_back({s, a, b});
                else if (face / 2 == 1) cloud.points.push_back({a, s, b});
                else cloud.points.push_back({a, b, s});
            }
            break;
        case ShapeKind::Torus:
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng.uniform(0.0, 2.0 * std::numbers::pi);
                const double v = rng.uniform(0.0, 2.0 * std::numbers::pi);
                const double r = 0.35;
                cloud.points.push_back({(1.0 + r * std::cos(v)) * std::cos(u),
                                        (1.0 + r * std::cos(v)) * std::sin(u), r * std::sin(v)});
            }
            break;
        case ShapeKind::Helix:
            for (std::size_t i = 0; i < n; ++i) {
                const double t = rng.uniform(0.0, 4.0 * std::numbers::pi);
                cloud.points.push_back({std::cos(t), std::sin(t), t / (2.0 * std::numbers::pi) - 1.0});
            }
            break;
    }
    return normalize_cloud(cloud);
}

struct NoiseConfig {
    double sigma = 0.0;
    double clip = 0.05;

    void validate() const {
        if (sigma < 0.0 || clip < 0.0) throw std::invalid_argument("NoiseConfig: negative sigma or clip");
    }
};

struct PairSample {
    PointCloud x;
    PointCloud y;  // y[sigma(i)] corresponds to x[i]
    PermutationMatrix gt;
    std::optional<RigidTransform> rigid;

    PairSample(PointCloud x_, PointCloud y_, PermutationMatrix gt_)
        : x(std::move(x_)), y(std::move(y_)), gt(std::move(gt_)) {}
};

struct RigidPairConfig {
    std::size_t n = 64;
    ShapeKind shape = ShapeKind::Sphere;
    double rot_max_deg = 45.0;
    double trans_max = 0.5;
    NoiseConfig noise;

    void validate() const {
        if (n < 3) throw std::invalid_argument("RigidPairConfig: need n >= 3");
        if (rot_max_deg < 0.0 || trans_max < 0.0)
            throw std::invalid_argument("RigidPairConfig: negative rotation or translation range");
        noise.validate();
    }
};

// Y = permute(R X + t + clipped Gaussian noise) with a seeded random
// permutation as ground truth. Everything derives from the seed.
inline PairSample gen_rigid_pair(const RigidPairConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(mix_seed(seed, 0x5161d));
    const PointCloud x = sample_shape(cfg.shape, cfg.n, rng);

    Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
    if (axis.norm() < 1e-9) axis = {0, 0, 1};
    const double angle = rng.uniform(0.0, rad_from_deg(cfg.rot_max_deg));
    RigidTransform transform;
    transform.rotation = rotation_from_axis_angle(axis, angle);
    transform.translation = {rng.uniform(-cfg.trans_max, cfg.trans_max),
                             rng.uniform(-cfg.trans_max, cfg.trans_max),
                             rng.uniform(-cfg.trans_max, cfg.trans_max)};

    auto clipped = [&](double v) { return std::min(std::max(v, -cfg.noise.clip), cfg.noise.clip); };
    std::vector<Vec3> noise(cfg.n);
    for (Vec3& nv : noise) {
        nv = {clipped(rng.normal() * cfg.noise.sigma), clipped(rng.normal() * cfg.noise.sigma),
              clipped(rng.normal() * cfg.noise.sigma)};
    }

    PermutationMatrix gt(rng.permutation(cfg.n));
    PointCloud y;
    y.points.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) y[gt.col_of(i)] = transform.apply(x[i]) + noise[i];

    PairSample sample(x, std::move(y), std::move(gt));
    sample.rigid = transform;
    return sample;
}

struct NonRigidPairConfig {
    std::size_t n = 64;
    ShapeKind shape = ShapeKind::Sphere;
    double amplitude = 0.05;

    void validate() const {
        if (n < 3) throw std::invalid_argument("NonRigidPairConfig: need n >= 3");
        if (amplitude < 0.0) throw std::invalid_argument("NonRigidPairConfig: negative amplitude");
    }
};

// Smooth warp: the displacement field is a sum of three seeded low-frequency
// sinusoidal modes scaled by the amplitude.
inline PairSample gen_nonrigid_pair(const NonRigidPairConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(mix_seed(seed, 0x2077));
    const PointCloud x = sample_shape(cfg.shape, cfg.n, rng);

    struct Mode {
        Vec3 dir;
        Vec3 wave;
        double phase;
    };
    std::vector<Mode> modes;
    for (int m = 0; m < 3; ++m) {
        Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
        if (dir.norm() < 1e-9) dir = {1, 0, 0};
        Vec3 wave{rng.normal(), rng.normal(), rng.normal()};
        if (wave.norm() < 1e-9) wave = {0, 1, 0};
        wave = wave.normalized() * rng.uniform(0.5 * std::numbers::pi, std::numbers::pi);
        modes.push_back({dir.normalized(), wave, rng.uniform(0.0, 2.0 * std::numbers::pi)});
    }
    auto displacement = [&](const Vec3& p) {
        Vec3 d;
        for (const Mode& m : modes) d += m.dir * std::sin(m.wave.dot(p) + m.phase);
        return d * cfg.amplitude;
    };

    PermutationMatrix gt(rng.permutation(cfg.n));
    PointCloud y;
    y.points.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) y[gt.col_of(i)] = x[i] + displacement(x[i]);

    return PairSample(x, std::move(y), std::move(gt));
}

// ---- dataset splits ----

enum class SplitSetting { UPC, UC, ND, NonRigid };

inline std::string to_string(SplitSetting s) {
    switch (s) {
        case SplitSetting::UPC: return "upc";
        case SplitSetting::UC: return "uc";
        case SplitSetting::ND: return "nd";
        case SplitSetting::NonRigid: return "nonrigid";
    }
    return "?";
}

inline SplitSetting split_setting_from_string(const std::string& s) {
    if (s == "upc") return SplitSetting::UPC;
    if (s == "uc") return SplitSetting::UC;
    if (s == "nd") return SplitSetting::ND;
    if (s == "nonrigid") return SplitSetting::NonRigid;
    throw std::invalid_argument("unknown split setting: " + s);
}

// Deterministic pair stream: sample(i) is a pure function of the generator
// config, the base seed, and the stream tag, so train and test never share
// instance seeds.
struct PairGenerator {
    SplitSetting setting = SplitSetting::UPC;
    std::vector<ShapeKind> categories;
    std::uint64_t base_seed = 0;
    std::uint64_t stream = 0;  // 1 = train, 2 = test
    std::size_t n = 64;
    double rot_max_deg = 45.0;
    double trans_max = 0.5;
    NoiseConfig noise;
    double warp_amplitude = 0.05;

    PairSample sample(std::size_t index) const {
        const ShapeKind shape = categories[index % categories.size()];
        const std::uint64_t seed = mix_seed(base_seed, stream, index);
        if (setting == SplitSetting::NonRigid) {
            NonRigidPairConfig cfg;
            cfg.n = n;
            cfg.shape = shape;
            cfg.amplitude = warp_amplitude;
            return gen_nonrigid_pair(cfg, seed);
        }
        RigidPairConfig cfg;
        cfg.n = n;
        cfg.shape = shape;
        cfg.rot_max_deg = rot_max_deg;
        cfg.trans_max = trans_max;
        cfg.noise = noise;
        return gen_rigid_pair(cfg, seed);
    }

    std::vector<PairSample> take(std::size_t count) const {
        std::vector<PairSample> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back(sample(i));
        return out;
    }
};

struct DatasetSplit {
    PairGenerator train;
    PairGenerator test;
};

// UPC: same categories, disjoint instance seed streams. UC: first half of the
// categories train, the rest test. ND: the UPC split with noise applied.
inline DatasetSplit make_split(SplitSetting setting, const std::vector<ShapeKind>& categories,
                               std::uint64_t seed) {
    if (categories.empty()) throw std::invalid_argument("make_split: no shape categories");
    DatasetSplit split;
    split.train.setting = split.test.setting = setting;
    split.train.base_seed = split.test.base_seed = seed;
    split.train.stream = 1;
    split.test.stream = 2;
    if (setting == SplitSetting::UC) {
        if (categories.size() < 2)
            throw std::invalid_argument("make_split: UC needs at least 2 shape categories");
        const std::size_t half = categories.size() / 2;
        split.train.categories.assign(categories.begin(), categories.begin() + half);
        split.test.categories.assign(categories.begin() + half, categories.end());
    } else {
        split.train.categories = categories;
        split.test.categories = categories;
    }
    if (setting == SplitSetting::ND) {
        split.train.noise.sigma = 0.01;
        split.test.noise.sigma = 0.01;
    }
    return split;
}

// ---- pair file I/O ----

inline constexpr char kPairMagic[4] = {'P', 'M', 'P', 'R'};
inline constexpr std::uint32_t kPairVersion = 1;

inline void save_pair(const PairSample& pair, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_pair: cannot open " + path);
    os.write(kPairMagic, 4);
    detail::write_u32(os, kPairVersion);
    detail::write_u32(os, static_cast<std::uint32_t>(pair.x.size()));
    detail::write_u32(os, pair.rigid ? 1u : 0u);
    for (const Vec3& p : pair.x.points) {
        detail::write_f64(os, p.x);
        detail::write_f64(os, p.y);
        detail::write_f64(os, p.z);
    }
    for (const Vec3& p : pair.y.points) {
        detail::write_f64(os, p.x);
        detail::write_f64(os, p.y);
        detail::write_f64(os, p.z);
    }
    for (std::size_t i = 0; i < pair.gt.size(); ++i)
        detail::write_u32(os, static_cast<std::uint32_t>(pair.gt.col_of(i)));
    if (pair.rigid) {
        for (std::size_t i = 0; i < 9; ++i) detail::write_f64(os, pair.rigid->rotation.m[i]);
        detail::write_f64(os, pair.rigid->translation.x);
        detail::write_f64(os, pair.rigid->translation.y);
        detail::write_f64(os, pair.rigid->translation.z);
    }
    if (!os) throw std::runtime_error("save_pair: write failed for " + path);
}

inline PairSample load_pair(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_pair: cannot open " + path);
    std::size_t offset = 0;
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kPairMagic, 4) != 0)
        throw std::runtime_error("parse error: " + path + ": bad magic at byte offset 0");
    offset = 4;
    const std::uint32_t version = detail::read_u32(is, offset, path);
    if (version != kPairVersion)
        throw std::runtime_error("parse error: " + path + ": unsupported version " +
                                 std::to_string(version));
    const std::uint32_t n = detail::read_u32(is, offset, path);
    const std::uint32_t flags = detail::read_u32(is, offset, path);

    auto read_cloud = [&]() {
        PointCloud c;
        c.points.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const double x = detail::read_f64(is, offset, path);
            const double y = detail::read_f64(is, offset, path);
            const double z = detail::read_f64(is, offset, path);
            c.points.push_back({x, y, z});
        }
        return c;
    };
    PointCloud x = read_cloud();
    PointCloud y = read_cloud();
    std::vector<std::size_t> sigma(n);
    for (std::uint32_t i = 0; i < n; ++i) sigma[i] = detail::read_u32(is, offset, path);

    PairSample pair(std::move(x), std::move(y), PermutationMatrix(std::move(sigma)));
    if (flags & 1u) {
        RigidTransform t;
        for (std::size_t i = 0; i < 9; ++i) t.rotation.m[i] = detail::read_f64(is, offset, path);
        t.translation.x = detail::read_f64(is, offset, path);
        t.translation.y = detail::read_f64(is, offset, path);
        t.translation.z = detail::read_f64(is, offset, path);
        pair.rigid = t;
    }
    return pair;
}

} // namespace pmatch
