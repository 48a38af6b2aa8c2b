#pragma once

#include <numeric>

#include "grid.hpp"
#include "rational.hpp"
#include "robinson.hpp"

namespace nsft {

struct HammingResult {
    Q distance;
    long window_cells = 0;
    long mismatches = 0;
};

inline HammingResult hamming_distance(const Pattern& u, const Pattern& v) {
    if (!(u.window == v.window)) throw input_error("window mismatch");
    if (!same_alphabet(u.alphabet, v.alphabet)) throw input_error("alphabet mismatch");
    HammingResult r;
    r.window_cells = long(u.cells.size());
    for (std::size_t i = 0; i < u.cells.size(); ++i) r.mismatches += u.cells[i] != v.cells[i];
    r.distance = r.window_cells ? make_q(r.mismatches, r.window_cells) : Q(0);
    return r;
}

struct Alignment {
    Q distance;
    ShiftVector shift;
};

constexpr unsigned long long DEFAULT_SHIFT_BUDGET = 50'000'000ULL;

// Minimum over relative shifts s of the disagreement density between c1 and c2 shifted by s,
// both unrolled to the lcm torus. Ties go to the lexicographically smallest (k0, k1).
// step restricts the search to a sub-lattice of shifts.
inline Alignment best_alignment_distance(const Configuration& c1, const Configuration& c2,
                                         unsigned long long budget = DEFAULT_SHIFT_BUDGET, int step = 1) {
    if (c1.boundary != Boundary::periodic || c2.boundary != Boundary::periodic)
        throw input_error("alignment needs periodic configurations");
    if (!same_alphabet(c1.alphabet, c2.alphabet)) throw input_error("alphabet mismatch");
    const long L = std::lcm(long(c1.width), long(c2.width));
    const long H = std::lcm(long(c1.height), long(c2.height));
    const long sx_range = c2.width, sy_range = c2.height;
    // shifting c2 by its own period changes nothing, so shifts modulo c2's period suffice
    long double work = (long double)L * H * (long double)(sx_range / step + 1) * (sy_range / step + 1);
    if (work > (long double)budget) throw budget_error("alignment lcm torus");
    Alignment best{Q(2), {}};
    long best_mis = -1;
    for (long sx = 0; sx < sx_range; sx += step)
        for (long sy = 0; sy < sy_range; sy += step) {
            long mis = 0;
            for (long y = 0; y < H; ++y)
                for (long x = 0; x < L; ++x)
                    mis += c1.wrapped(int(x % c1.width), int(y % c1.height)) !=
                           c2.wrapped(int((x + sx) % c2.width), int((y + sy) % c2.height));
            if (best_mis < 0 || mis < best_mis) {
                best_mis = mis;
                best.shift.k = {sx, sy};
            }
        }
    best.distance = make_q(best_mis, L * H);
    return best;
}

// Besicovitch distance between the periodic orbit measures of two box patterns. Every
// ergodic joining of two finite orbits is carried by one relative-shift orbit, so the
// infimum over joinings is the minimum over relative shifts.
inline Q besicovitch_periodic(const Pattern& w1, const Pattern& w2,
                              unsigned long long budget = DEFAULT_SHIFT_BUDGET) {
    return best_alignment_distance(periodic_of(w1), periodic_of(w2), budget).distance;
}

// Density of cells that are bumpy corners in both configurations and carry different colours.
// Shifts (multiples of 2, preserving the bumpy lattice) up to max_shift are tried; each shift
// is normalised by the overlap area and the minimum is reported.
inline Q bumpy_mismatch_density(const Configuration& flipped, const Configuration& reference,
                                const robinson::Tileset& ts, int max_shift = 0) {
    if (flipped.width != reference.width || flipped.height != reference.height)
        throw input_error("dimension mismatch");
    if (!same_alphabet(flipped.alphabet, ts.alphabet) || !same_alphabet(reference.alphabet, ts.alphabet))
        throw input_error("structure detection failure: alphabet is not the tileset's");
    bool any = false;
    for (auto s : reference.cells) any = any || ts.info.at(s).tile.bumpy;
    if (!any) throw input_error("structure detection failure: no bumpy corners");
    Q best = -1;
    const int m = max_shift - max_shift % 2;
    for (int sy = -m; sy <= m; sy += 2)
        for (int sx = -m; sx <= m; sx += 2) {
            long area = 0, mis = 0;
            for (int y = 0; y < reference.height; ++y)
                for (int x = 0; x < reference.width; ++x) {
                    int fx = x + sx, fy = y + sy;
                    if (!flipped.inside(fx, fy)) continue;
                    ++area;
                    const auto& a = ts.info[flipped.at(fx, fy)];
                    const auto& b = ts.info[reference.at(x, y)];
                    if (a.tile.bumpy && b.tile.bumpy && !(a.line == b.line)) ++mis;
                }
            if (area == 0) continue;
            Q d = make_q(mis, area);
            if (best < 0 || d < best) best = d;
        }
    return best;
}

}  // namespace nsft
