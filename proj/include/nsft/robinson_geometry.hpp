#pragma once

// Frozen coordinate convention for Robinson macro-tiles.
//
// Cells are (x, y) with y growing north; directions N=0 E=1 S=2 W=3.
// An n-macro-tile has side 2^n - 1 and its central cross sits at (2^(n-1)-1, 2^(n-1)-1).
// A cross of orientation d1 has principal arms d1 and d2 = cw(d1); the other two arms are
// non-principal. Its arms run along the central row and column out to the tile boundary,
// 2^(n-1) - 1 cells each.
// The level-n square (side 2^(n-1)+1) is centred on the n-cross and crosses each of its arms
// at distance 2^(n-2): these are the crossing cells. The two crossing cells on the principal
// arms are the bi-coloured crosses used by the flip process. Principal-arm cells strictly
// beyond them form the arm ends that a flip leaves untouched.
// Quadrant sub-tiles face the centre: their principal arms point toward the central cross.

#include <cstdint>

namespace nsft::robinson {

enum Dir : int { N = 0, E = 1, S = 2, W = 3 };
constexpr int DX[4] = {0, 1, 0, -1};
constexpr int DY[4] = {1, 0, -1, 0};
constexpr int cw(int d) { return (d + 1) & 3; }
constexpr int ccw(int d) { return (d + 3) & 3; }
constexpr int opp(int d) { return (d + 2) & 3; }

inline long side_of(int n) { return (1L << n) - 1; }
inline long centre_of(int n) { return (1L << (n - 1)) - 1; }
inline long crossing_distance(int level) { return level >= 2 ? (1L << (level - 2)) : 0; }
inline long square_side(int level) { return (1L << (level - 1)) + 1; }

enum class Kind : std::uint8_t { cross, arm, crossing };

struct Geo {
    Kind kind = Kind::cross;
    bool bumpy = false;
    std::int8_t d1 = 0;        // orientation of the owning cross
    std::int8_t d = -1;        // arm direction, outward from the owning cross
    bool P = false;            // principal arm
    std::int8_t interior = -1; // for principal arms: the other principal direction
    int level = 1;             // level of the owning cross
    long k = 0;                // distance from the owning cross
    long cx = 0, cy = 0;       // owning cross position, tile coordinates
};

// Orientation of the quadrant sub-tile (qx, qy in {0,1}): principal arms face the centre.
constexpr int quadrant_d1(int qx, int qy) {
    int vert = qy == 0 ? N : S;
    int horz = qx == 0 ? E : W;
    return cw(vert) == horz ? vert : horz;
}

// Quadrant an n-tile with orientation d1 occupies inside its parent.
constexpr void quadrant_of(int d1, int& qx, int& qy) {
    int d2 = cw(d1);
    bool north = d1 == N || d2 == N;
    bool east = d1 == E || d2 == E;
    qy = north ? 0 : 1;
    qx = east ? 0 : 1;
}

inline Geo geo_at(int n, int d1, long x, long y) {
    long ox = 0, oy = 0;
    while (true) {
        if (n == 1) {
            Geo g;
            g.kind = Kind::cross;
            g.bumpy = true;
            g.d1 = std::int8_t(d1);
            g.level = 1;
            g.cx = ox + x;
            g.cy = oy + y;
            return g;
        }
        long c = centre_of(n);
        if (x == c && y == c) {
            Geo g;
            g.kind = Kind::cross;
            g.d1 = std::int8_t(d1);
            g.level = n;
            g.cx = ox + x;
            g.cy = oy + y;
            return g;
        }
        if (x == c || y == c) {
            Geo g;
            int d = x == c ? (y > c ? N : S) : (x > c ? E : W);
            int d2 = cw(d1);
            g.kind = Kind::arm;
            g.d1 = std::int8_t(d1);
            g.d = std::int8_t(d);
            g.P = d == d1 || d == d2;
            g.interior = g.P ? std::int8_t(d == d1 ? d2 : d1) : std::int8_t(-1);
            g.level = n;
            g.k = x == c ? (y > c ? y - c : c - y) : (x > c ? x - c : c - x);
            if (g.k == crossing_distance(n)) g.kind = Kind::crossing;
            g.cx = ox + c;
            g.cy = oy + c;
            return g;
        }
        int qx = x > c, qy = y > c;
        long off = c + 1;
        x -= qx * off;
        y -= qy * off;
        ox += qx * off;
        oy += qy * off;
        d1 = quadrant_d1(qx, qy);
        --n;
    }
}

}  // namespace nsft::robinson
