#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "grid.hpp"
#include "robinson.hpp"

namespace nsft {

// Independent generator streams: one seed, one stream id per consumer.
enum Stream : std::uint64_t { NOISE_STREAM = 1, FLIP_STREAM = 2, SAMPLE_STREAM = 3 };

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                     std::uint32_t(stream >> 32)};
    return std::mt19937_64(sq);
}

// Uniform double in [0,1) from the top 53 bits, identical on every platform.
inline double unit(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }

struct NoiseField {
    int width = 0, height = 0;
    std::vector<std::uint8_t> bits;
    double epsilon = 0;
    std::uint64_t seed = 0;

    bool at(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
    long popcount() const {
        long n = 0;
        for (auto b : bits) n += b;
        return n;
    }
};

inline NoiseField sample_noise(int width, int height, double eps, std::uint64_t seed) {
    require(eps >= 0 && eps <= 1, "epsilon must lie in [0,1]");
    require(width >= 0 && height >= 0, "negative noise size");
    NoiseField f{width, height, std::vector<std::uint8_t>(std::size_t(width) * height), eps, seed};
    auto g = make_rng(seed, NOISE_STREAM);
    for (auto& b : f.bits) b = unit(g) < eps;
    return f;
}

inline NoiseField constant_noise(int width, int height, bool v) {
    return NoiseField{width, height, std::vector<std::uint8_t>(std::size_t(width) * height, v), v ? 1.0 : 0.0, 0};
}

// Violations of F none of whose constrained cells is obscured.
inline std::vector<Violation> clear_violations(const Configuration& c, const NoiseField& noise,
                                               const ForbiddenSet& F) {
    require(noise.width == c.width && noise.height == c.height, "noise size differs from configuration");
    std::vector<Violation> out;
    for (auto& v : check_local_admissibility(c, F)) {
        bool clear = true;
        for (auto& rc : F.rules[v.rule].cells) {
            int x = v.x + rc.dx, y = v.y + rc.dy;
            if (c.boundary == Boundary::periodic) {
                x = ((x % c.width) + c.width) % c.width;
                y = ((y % c.height) + c.height) % c.height;
            }
            if (noise.at(x, y)) {
                clear = false;
                break;
            }
        }
        if (clear) out.push_back(v);
    }
    return out;
}

struct FlipEvent {
    int scale = 0;
    int x = 0, y = 0;  // macro-tile origin
    bool flippable = false;
    bool flipped = false;
};

struct FlipLog {
    std::vector<FlipEvent> events;
    int start_scale = 2;
    int scales_processed = 0;
};

// Exchange of the two alternating colours, as a symbol permutation of the tileset.
inline std::vector<Sym> colour_swap_table(const robinson::Tileset& ts) {
    using namespace robinson;
    auto swap = [](LineColour& c) {
        if (c.main == RED) c.main = BLACK;
        else if (c.main == BLACK) c.main = RED;
    };
    std::vector<Sym> out(ts.info.size());
    for (std::size_t i = 0; i < ts.info.size(); ++i) {
        Tile t = ts.info[i].tile;
        for (auto& e : t.e) swap(e.col);
        auto it = ts.index.find(t);
        if (it == ts.index.end()) throw input_error("colour exchange leaves the alphabet of " + ts.tag);
        out[i] = it->second;
    }
    return out;
}

inline int cross_orientation(const robinson::Tileset& ts, Sym s) {
    const auto& t = ts.info.at(s).tile;
    for (int d = 0; d < 4; ++d)
        if (t.e[d].P && t.e[robinson::cw(d)].P && t.e[d].d == d && t.e[robinson::cw(d)].d == robinson::cw(d))
            return d;
    return -1;
}

inline int macro_scale_of(const Configuration& c) {
    for (int n = 1; n < 30; ++n)
        if ((1L << n) - 1 == c.width && c.width == c.height) return n;
    return -1;
}

struct FlipResult {
    Configuration config;
    FlipLog log;
};

// For every scale s in [start, max], every s-macro-tile whose two bi-coloured crosses are
// obscured swaps its colours with probability 1/2. The principal arm cells beyond those
// crosses belong to the enclosing square and keep their colours.
inline FlipResult flip_process(const Configuration& c, const robinson::Tileset& ts, const NoiseField& noise,
                               int max_scale, int start_scale, std::uint64_t seed) {
    using namespace robinson;
    int n = macro_scale_of(c);
    if (n < 0 || !same_alphabet(c.alphabet, ts.alphabet))
        throw input_error("unknown structure: not a macro-tile of this tileset");
    require(noise.width == c.width && noise.height == c.height, "noise size differs from configuration");
    require(start_scale >= 2, "first flippable scale is 2");
    if (max_scale > n) throw input_error("scale exceeds configuration size");
    auto swap = colour_swap_table(ts);
    FlipResult r{c, {}};
    r.log.start_scale = start_scale;
    r.log.scales_processed = max_scale;
    auto coins = make_rng(seed, FLIP_STREAM);
    auto& out = r.config;
    for (int s = start_scale; s <= max_scale; ++s) {
        const int step = 1 << s, side = step - 1, half = (1 << (s - 1)) - 1;
        const int reach = int(crossing_distance(s));
        for (int oy = 0; oy + side <= c.height; oy += step)
            for (int ox = 0; ox + side <= c.width; ox += step) {
                int cx = ox + half, cy = oy + half;
                int d1 = cross_orientation(ts, out.at(cx, cy));
                if (d1 < 0) throw input_error("unknown structure: no central cross");
                int d2 = cw(d1);
                FlipEvent ev{s, ox, oy, false, false};
                ev.flippable = noise.at(cx + DX[d1] * reach, cy + DY[d1] * reach) &&
                               noise.at(cx + DX[d2] * reach, cy + DY[d2] * reach);
                if (ev.flippable) ev.flipped = (coins() >> 63) != 0;
                if (ev.flipped) {
                    for (int y = oy; y < oy + side; ++y)
                        for (int x = ox; x < ox + side; ++x) {
                            bool arm_end = false;
                            for (int d : {d1, d2}) {
                                long k = DX[d] ? (x - cx) * DX[d] : (y - cy) * DY[d];
                                bool on = DX[d] ? y == cy : x == cx;
                                if (on && k > reach) arm_end = true;
                            }
                            if (!arm_end) out.at(x, y) = swap[out.at(x, y)];
                        }
                }
                r.log.events.push_back(ev);
            }
    }
    return r;
}

// Cells lying in some macro-tile that was flippable at least once.
inline std::vector<std::uint8_t> ever_flippable(const FlipLog& log, int width, int height) {
    std::vector<std::uint8_t> m(std::size_t(width) * height, 0);
    for (auto& e : log.events) {
        if (!e.flippable) continue;
        int side = (1 << e.scale) - 1;
        for (int y = e.y; y < e.y + side; ++y)
            for (int x = e.x; x < e.x + side; ++x) m[std::size_t(y) * width + x] = 1;
    }
    return m;
}

struct ScaleStats {
    int scale = 0;
    long tiles = 0, flippable = 0, flipped = 0;
    double flippable_rate = 0, flip_rate = 0;
    std::optional<double> z_flippable, z_flip;  // empty when the variance vanishes
};

inline std::optional<double> z_score(long hits, long trials, double p) {
    double var = double(trials) * p * (1 - p);
    if (trials == 0 || var <= 0) return std::nullopt;
    return (double(hits) - double(trials) * p) / std::sqrt(var);
}

inline std::vector<ScaleStats> flip_statistics(const FlipLog& log, double eps) {
    std::map<int, ScaleStats> by;
    for (auto& e : log.events) {
        auto& s = by[e.scale];
        s.scale = e.scale;
        ++s.tiles;
        s.flippable += e.flippable;
        s.flipped += e.flipped;
    }
    std::vector<ScaleStats> out;
    for (auto& [k, s] : by) {
        s.flippable_rate = s.tiles ? double(s.flippable) / double(s.tiles) : 0;
        s.flip_rate = s.flippable ? double(s.flipped) / double(s.flippable) : 0;
        s.z_flippable = z_score(s.flippable, s.tiles, eps * eps);
        s.z_flip = z_score(s.flipped, s.flippable, 0.5);
        out.push_back(s);
    }
    return out;
}

namespace io {

inline void write_noise(std::ostream& os, const NoiseField& f) {
    os << "nsft-noise v1\nsize " << f.width << " " << f.height << "\n";
    os << "epsilon " << std::hexfloat << f.epsilon << std::defaultfloat << "\nseed " << f.seed << "\nbits\n";
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) os << (f.at(x, y) ? '1' : '0');
        os << "\n";
    }
    os << "end\n";
}

inline NoiseField read_noise(std::istream& is) {
    expect_word(is, "nsft-noise");
    expect_word(is, "v1");
    NoiseField f;
    expect_word(is, "size");
    f.width = read_val<int>(is);
    f.height = read_val<int>(is);
    expect_word(is, "epsilon");
    auto e = read_val<std::string>(is);
    f.epsilon = std::strtod(e.c_str(), nullptr);
    expect_word(is, "seed");
    f.seed = read_val<std::uint64_t>(is);
    expect_word(is, "bits");
    f.bits.assign(std::size_t(f.width) * f.height, 0);
    for (int y = 0; y < f.height; ++y) {
        auto row = read_val<std::string>(is);
        require(int(row.size()) == f.width, "bad noise row");
        for (int x = 0; x < f.width; ++x) {
            require(row[x] == '0' || row[x] == '1', "bad noise bit");
            f.bits[std::size_t(y) * f.width + x] = row[x] == '1';
        }
    }
    expect_word(is, "end");
    return f;
}

inline void write_fliplog(std::ostream& os, const FlipLog& log) {
    os << "nsft-fliplog v1\nstart " << log.start_scale << "\nscales " << log.scales_processed << "\nevents "
       << log.events.size() << "\n";
    for (auto& e : log.events) os << e.scale << ' ' << e.x << ' ' << e.y << ' ' << e.flippable << ' ' << e.flipped << '\n';
    os << "end\n";
}

inline FlipLog read_fliplog(std::istream& is) {
    expect_word(is, "nsft-fliplog");
    expect_word(is, "v1");
    FlipLog log;
    expect_word(is, "start");
    log.start_scale = read_val<int>(is);
    expect_word(is, "scales");
    log.scales_processed = read_val<int>(is);
    expect_word(is, "events");
    auto n = read_val<std::size_t>(is);
    for (std::size_t i = 0; i < n; ++i) {
        FlipEvent e;
        e.scale = read_val<int>(is);
        e.x = read_val<int>(is);
        e.y = read_val<int>(is);
        e.flippable = read_val<int>(is) != 0;
        e.flipped = read_val<int>(is) != 0;
        log.events.push_back(e);
    }
    expect_word(is, "end");
    return log;
}

}  // namespace io
}  // namespace nsft
