#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "grid.hpp"
#include "robinson_geometry.hpp"

namespace nsft::robinson {

// Colour codes on lines. K is Black, U is Blue; W is the third, non-alternating value of the
// auxiliary channel.
enum Colour : char { NONE = 0, RED = 'R', BLACK = 'K', BLUE = 'U', GREEN = 'G', THIRD = 'W' };

// A line carries a main colour and, for the two-channel structures, an auxiliary colour.
struct LineColour {
    char main = NONE;
    char aux = NONE;
    auto key() const { return std::tie(main, aux); }
    bool operator==(const LineColour& o) const { return key() == o.key(); }
    bool operator<(const LineColour& o) const { return key() < o.key(); }
};

enum class Structure {
    vanilla,
    red_black,
    enhanced,     // four colours, chiral alignment lines, transition tiles
    two_channel,  // Red-Black plus a free Blue-Green channel
    three_channel // Red-Black plus Blue-Green with a non-alternating third value
};

inline bool has_grey(Structure s) {
    return s == Structure::enhanced || s == Structure::two_channel || s == Structure::three_channel;
}

constexpr std::int8_t ANY_INTERIOR = -2;

struct Label {
    std::int8_t d = -1;
    bool P = false;
    std::int8_t interior = -1;
    std::int8_t grey = 0;  // 1 dotted, 2 dashed
    LineColour col;

    auto key() const { return std::tie(d, P, interior, grey, col); }
    bool operator==(const Label& o) const { return key() == o.key(); }
    bool operator<(const Label& o) const { return key() < o.key(); }
};

// Mismatch class between two edge labels; 0 means compatible.
enum Mismatch { OK = 0, GEOMETRY = 1, COLOUR = 2, ALIGNMENT = 3 };

inline Mismatch compare(const Label& a, const Label& b) {
    if (a.d != b.d || a.P != b.P) return GEOMETRY;
    if (a.interior != b.interior && a.interior != ANY_INTERIOR && b.interior != ANY_INTERIOR)
        return GEOMETRY;
    if (a.grey != b.grey) return ALIGNMENT;
    if (!(a.col == b.col)) return COLOUR;
    return OK;
}

struct Tile {
    std::array<Label, 4> e;  // N E S W
    bool bumpy = false;
    auto key() const { return std::tie(e, bumpy); }
    bool operator==(const Tile& o) const { return key() == o.key(); }
    bool operator<(const Tile& o) const { return key() < o.key(); }
};

inline int transform_dir(int d, int r, bool refl) {
    if (d < 0) return d;
    if (refl) d = (4 - d) & 3;
    return (d + r) & 3;
}

inline Label transform(Label l, int r, bool refl) {
    l.d = std::int8_t(transform_dir(l.d, r, refl));
    if (l.interior >= 0) l.interior = std::int8_t(transform_dir(l.interior, r, refl));
    return l;
}

inline Tile transform(const Tile& t, int r, bool refl) {
    Tile o;
    o.bumpy = t.bumpy;
    for (int d = 0; d < 4; ++d) o.e[transform_dir(d, r, refl)] = transform(t.e[d], r, refl);
    return o;
}

// Per-tile annotations exposed to other modules.
struct TileInfo {
    Tile tile;
    std::string family;  // bumpy, cross, p-arm, np-arm, p-crossing, np-crossing
    LineColour line;     // colour of the main line (cross arms, or the arm)
    LineColour square;   // crossings: colour of the square side crossing the arm
    bool transition = false;
    // The Red line through the tile, if any, seen as part of a Red square border.
    // side: 0 none; 1..4 = S,W,N,E side of the square (bottom, left, top, right);
    // 5..8 = corners BL, BR, TL, TR.
    int red_side = 0;
    LineColour red;
    int main_axis = -1;  // direction of the main line (cross: -1)
};

inline std::string family_of(const Tile& t) {
    if (t.bumpy) return "bumpy";
    bool all_out = true;
    for (int d = 0; d < 4; ++d) all_out = all_out && t.e[d].d == d;
    if (all_out) return "cross";
    for (int d = 0; d < 4; ++d)
        if (t.e[d].d == d && t.e[opp(d)].d == d) {
            const auto& side = t.e[cw(d)];
            std::string kind = t.e[d].P ? "p-" : "np-";
            return kind + (side.P ? "crossing" : "arm");
        }
    return "?";
}

enum RedSide { RS_NONE = 0, RS_BOTTOM, RS_LEFT, RS_TOP, RS_RIGHT, RS_BL, RS_BR, RS_TL, RS_TR };

inline int side_from_line(int axis_dir, int interior) {
    bool horizontal = axis_dir == E || axis_dir == W;
    if (horizontal) return interior == N ? RS_BOTTOM : RS_TOP;
    return interior == E ? RS_LEFT : RS_RIGHT;
}

inline TileInfo annotate(const Tile& t) {
    TileInfo in;
    in.tile = t;
    in.family = family_of(t);
    if (in.family == "bumpy" || in.family == "cross") {
        int d1 = -1;
        for (int d = 0; d < 4; ++d)
            if (t.e[d].P && t.e[cw(d)].P) d1 = d;
        for (int d = 0; d < 4; ++d)
            if (t.e[d].P) in.line = t.e[d].col;
        if (in.line.main == RED && d1 >= 0) {
            int d2 = cw(d1);
            bool n = d1 == N || d2 == N, e = d1 == E || d2 == E;
            in.red_side = n ? (e ? RS_BL : RS_BR) : (e ? RS_TL : RS_TR);
            in.red = in.line;
        }
        return in;
    }
    int axis = -1;
    for (int d = 0; d < 4; ++d)
        if (t.e[d].d == d && t.e[opp(d)].d == d) axis = d;
    in.main_axis = axis;
    const Label& main = t.e[axis];
    in.line = main.col;
    if (in.family == "p-crossing" || in.family == "np-crossing") {
        const Label& stub = t.e[cw(axis)];
        in.square = stub.col;
        if (in.family == "p-crossing" && main.col.main != RED && stub.col.main == RED &&
            (main.col.main == BLUE || main.col.main == GREEN))
            in.transition = true;
        if (stub.col.main == RED) {
            in.red_side = side_from_line(cw(axis), stub.interior);
            in.red = stub.col;
            return in;
        }
    }
    if (main.P && main.col.main == RED) {
        // transition tiles never have a Red arm, so the interior marker is present here
        in.red_side = side_from_line(axis, main.interior);
        in.red = main.col;
    }
    return in;
}

// Colour of every line level of one macro-tile hierarchy.
struct Colouring {
    std::vector<LineColour> by_level;  // index = line level
    LineColour at(int level) const {
        if (level < 0 || level >= int(by_level.size())) return {};
        return by_level[level];
    }
};

struct ColourChoice {
    char base = BLACK;        // red_black: colour at level 2; two/three-channel: aux at level 2
    int transition_level = 0; // enhanced: first Blue/Green level (even, >= 4); 0 = none
    char transition_colour = BLUE;
    int ignition_level = 0;   // three-channel: first alternating level; 0 = never
};

inline char other_rb(char c) { return c == RED ? BLACK : RED; }
inline char other_ug(char c) { return c == BLUE ? GREEN : BLUE; }

inline Colouring make_colouring(Structure s, const ColourChoice& ch, int max_level) {
    Colouring c;
    c.by_level.assign(std::size_t(max_level + 1), {});
    for (int k = 2; k <= max_level; ++k) {
        LineColour lc;
        switch (s) {
            case Structure::vanilla: break;
            case Structure::red_black:
                lc.main = (k % 2 == 0) ? ch.base : other_rb(ch.base);
                break;
            case Structure::enhanced:
                if (ch.transition_level && k >= ch.transition_level)
                    lc.main = ((k - ch.transition_level) % 2 == 0) ? ch.transition_colour
                                                                   : other_ug(ch.transition_colour);
                else
                    lc.main = k % 2 == 0 ? BLACK : RED;
                break;
            case Structure::two_channel:
                lc.main = k % 2 == 0 ? BLACK : RED;
                lc.aux = (k % 2 == 0) ? ch.base : other_ug(ch.base);
                break;
            case Structure::three_channel:
                lc.main = k % 2 == 0 ? BLACK : RED;
                if (ch.ignition_level && k >= ch.ignition_level)
                    lc.aux = (k % 2 == 0) ? ch.base : other_ug(ch.base);
                else
                    lc.aux = THIRD;
                break;
        }
        c.by_level[k] = lc;
    }
    return c;
}

// The n-tile of orientation d1 is placed inside an (n+2)-tile so that all four of its sides
// touch arms of larger crosses; the ring of cells around it then has a definite structure.
struct Embedded {
    int n = 1, d1 = 0;
    long ox = 0, oy = 0;  // origin of the n-tile inside the (n+2)-tile
    Geo at(long x, long y) const { return geo_at(n + 2, d1, ox + x, oy + y); }
};

inline Embedded embed(int n, int d1) {
    Embedded e;
    e.n = n;
    e.d1 = d1;
    int px, py, qx, qy;
    quadrant_of(opp(d1), px, py);
    quadrant_of(d1, qx, qy);
    long big = 1L << (n + 1), small = 1L << n;
    e.ox = px * big + qx * small;
    e.oy = py * big + qy * small;
    return e;
}

class LabelGrid {
public:
    LabelGrid(Structure s, int n, int d1, const Colouring& col) : s_(s), n_(n), col_(col) {
        auto e = embed(n, d1);
        side_ = side_of(n);
        long w = side_ + 2;
        geo_.resize(std::size_t(w * w));
        for (long y = -1; y <= side_; ++y)
            for (long x = -1; x <= side_; ++x) geo_[idx(x, y)] = e.at(x, y);
    }

    long side() const { return side_; }
    const Geo& geo(long x, long y) const { return geo_[idx(x, y)]; }

    Tile tile(long x, long y) const {
        Tile t;
        const Geo& g = geo(x, y);
        t.bumpy = g.kind == Kind::cross && g.bumpy;
        for (int d = 0; d < 4; ++d) t.e[d] = edge(x, y, d);
        return t;
    }

private:
    std::size_t idx(long x, long y) const { return std::size_t((y + 1) * (side_ + 2) + (x + 1)); }

    bool claims(const Geo& g, int d) const {
        if (g.kind == Kind::cross) return true;
        return g.d == d || g.d == opp(d);
    }

    Label label_of(const Geo& g, int d) const {
        Label l;
        if (g.kind == Kind::cross) {
            int d1 = g.d1, d2 = cw(d1);
            l.d = std::int8_t(d);
            l.P = d == d1 || d == d2;
            if (l.P) {
                l.interior = std::int8_t(d == d1 ? d2 : d1);
                l.col = col_.at(g.bumpy ? 2 : g.level + 1);
            } else if (has_grey(s_)) {
                l.grey = d == opp(d1) ? 1 : 2;
            }
            return l;
        }
        l.d = g.d;
        l.P = g.P;
        if (g.P) {
            l.interior = g.interior;
            l.col = col_.at(g.level + 1);
        } else if (has_grey(s_)) {
            l.grey = g.d == opp(g.d1) ? 1 : 2;
        }
        return l;
    }

    Label edge(long x, long y, int d) const {
        const Geo& a = geo(x, y);
        const Geo& b = geo(x + DX[d], y + DY[d]);
        if (claims(a, d)) return label_of(a, d);
        if (claims(b, opp(d))) return label_of(b, opp(d));
        throw inconsistency_error("unclaimed edge in macro-tile geometry");
    }

    Structure s_;
    int n_;
    Colouring col_;
    long side_;
    std::vector<Geo> geo_;
};

// Square colour seen at crossings equals col(level) of the crossing arm's owner.
inline LineColour crossing_square_colour(const Geo& g, const Colouring& c) { return c.at(g.level); }

inline Tile normalise(Structure s, Tile t) {
    if (s != Structure::enhanced) return t;
    auto in = annotate(t);
    if (in.transition) {
        for (int d = 0; d < 4; ++d)
            if (t.e[d].P && (t.e[d].d == d || t.e[d].d == opp(d)) && in.main_axis >= 0 &&
                (d == in.main_axis || d == opp(in.main_axis)))
                t.e[d].interior = ANY_INTERIOR;
    }
    return t;
}

inline std::vector<ColourChoice> colour_choices(Structure s, int max_level) {
    std::vector<ColourChoice> out;
    switch (s) {
        case Structure::vanilla: out.push_back({}); break;
        case Structure::red_black:
            out.push_back({RED});
            out.push_back({BLACK});
            break;
        case Structure::enhanced:
            out.push_back({});
            for (int L = 4; L <= max_level; L += 2)
                for (char c : {BLUE, GREEN}) {
                    ColourChoice ch;
                    ch.transition_level = L;
                    ch.transition_colour = c;
                    out.push_back(ch);
                }
            break;
        case Structure::two_channel:
            out.push_back({BLUE});
            out.push_back({GREEN});
            break;
        case Structure::three_channel:
            for (char b : {BLUE, GREEN}) {
                ColourChoice ch;
                ch.base = b;
                out.push_back(ch);
                for (int L = 3; L <= max_level; ++L) {
                    ch.ignition_level = L;
                    out.push_back(ch);
                }
            }
            break;
    }
    return out;
}


enum class Variant { vanilla, red_black, enhanced };

inline Structure structure_of(Variant v) {
    switch (v) {
        case Variant::vanilla: return Structure::vanilla;
        case Variant::red_black: return Structure::red_black;
        default: return Structure::enhanced;
    }
}

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::vanilla: return "vanilla";
        case Variant::red_black: return "red_black";
        default: return "enhanced_four_colour";
    }
}

inline Variant parse_variant(const std::string& s) {
    if (s == "vanilla") return Variant::vanilla;
    if (s == "red_black") return Variant::red_black;
    if (s == "enhanced_four_colour" || s == "enhanced") return Variant::enhanced;
    throw input_error("unknown variant '" + s + "'");
}

// Crosses (bumpy or not) are chiral and only rotate; every other tile also reflects.
inline std::set<Tile> orbit(const Tile& t) {
    std::set<Tile> o;
    bool chiral = family_of(t) == "bumpy" || family_of(t) == "cross";
    for (int r = 0; r < 4; ++r) {
        o.insert(transform(t, r, false));
        if (!chiral) o.insert(transform(t, r, true));
    }
    return o;
}

inline std::string short_family(const std::string& f) {
    if (f == "bumpy") return "b";
    if (f == "cross") return "x";
    if (f == "p-arm") return "pa";
    if (f == "np-arm") return "na";
    if (f == "p-crossing") return "pc";
    if (f == "np-crossing") return "nc";
    return "t";
}

struct Tileset {
    Structure structure = Structure::vanilla;
    std::string tag;
    AlphabetPtr alphabet;
    ForbiddenSet forbidden;
    std::vector<TileInfo> info;
    std::map<Tile, Sym> index;
    std::size_t base_tiles = 0;

    Sym symbol(const Tile& t) const {
        auto it = index.find(t);
        if (it == index.end()) throw inconsistency_error("tile outside the alphabet");
        return it->second;
    }
};

// Every tile that occurs in the macro-tiles of the structure, then closed under symmetry.
inline std::set<Tile> appearing_tiles(Structure s, int max_n = 6) {
    std::set<Tile> out;
    for (int n = 1; n <= max_n; ++n)
        for (auto& ch : colour_choices(s, n + 3))
            for (int d1 = 0; d1 < 4; ++d1) {
                LabelGrid g(s, n, d1, make_colouring(s, ch, n + 3));
                for (long y = 0; y < g.side(); ++y)
                    for (long x = 0; x < g.side(); ++x) out.insert(normalise(s, g.tile(x, y)));
            }
    return out;
}

inline std::vector<Rule> edge_rules(const std::vector<TileInfo>& info) {
    static const char* fam[] = {"", "edge-match", "colour-alternation", "alignment"};
    std::vector<Rule> out;
    const std::size_t q = info.size();
    for (int axis = 0; axis < 2; ++axis) {
        int d = axis == 0 ? E : N;
        for (std::size_t a = 0; a < q; ++a) {
            std::vector<Sym> bad[4];
            for (std::size_t b = 0; b < q; ++b) {
                auto m = compare(info[a].tile.e[d], info[b].tile.e[opp(d)]);
                if (m != OK) bad[m].push_back(Sym(b));
            }
            for (int m = 1; m < 4; ++m) {
                if (bad[m].empty()) continue;
                Rule r;
                r.window = U(1, 2);
                r.family = fam[m];
                r.cells.push_back(exact_cell(0, 0, 0, Sym(a)));
                r.cells.push_back(set_cell(DX[d], DY[d], 0, bad[m]));
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

// Exactly one bumpy corner in every 2x2 window: forbid none, and forbid each pair.
inline std::vector<Rule> corner_rules(const std::vector<TileInfo>& info) {
    std::vector<Sym> bumpy, plain;
    for (std::size_t i = 0; i < info.size(); ++i) (info[i].tile.bumpy ? bumpy : plain).push_back(Sym(i));
    std::vector<Rule> out;
    const int pos[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    Rule none;
    none.window = U(1, 2);
    none.family = "corner";
    for (auto& p : pos) none.cells.push_back(set_cell(p[0], p[1], 0, plain));
    out.push_back(none);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Rule r;
            r.window = U(1, 2);
            r.family = "corner";
            r.cells.push_back(set_cell(pos[i][0], pos[i][1], 0, bumpy));
            r.cells.push_back(set_cell(pos[j][0], pos[j][1], 0, bumpy));
            out.push_back(r);
        }
    return out;
}

inline Tileset tileset_for(Structure s, const std::string& tag) {
    auto seen = appearing_tiles(s);
    std::set<Tile> all;
    std::vector<Tile> reps;
    for (auto& t : seen) {
        if (all.count(t)) continue;
        reps.push_back(t);
        auto o = orbit(t);
        all.insert(o.begin(), o.end());
    }
    Tileset ts;
    ts.structure = s;
    ts.tag = tag;
    ts.base_tiles = reps.size();
    std::map<std::string, int> serial;
    std::vector<std::string> names;
    for (auto& t : all) {
        auto in = annotate(t);
        auto f = short_family(in.family);
        names.push_back(f + std::to_string(serial[f]++));
        ts.index[t] = Sym(ts.info.size());
        ts.info.push_back(in);
    }
    ts.alphabet = Alphabet::flat(names, "tile");
    ts.forbidden.alphabet = ts.alphabet;
    for (auto& r : edge_rules(ts.info)) ts.forbidden.add(r);
    for (auto& r : corner_rules(ts.info)) ts.forbidden.add(r);
    return ts;
}

inline const Tileset& build_tileset(Variant v) {
    static const Tileset cache[3] = {tileset_for(Structure::vanilla, "vanilla"),
                                     tileset_for(Structure::red_black, "red_black"),
                                     tileset_for(Structure::enhanced, "enhanced_four_colour")};
    return cache[int(v)];
}

constexpr int MAX_MACRO_SCALE = 11;

inline const Tileset& structure_tileset(Structure s) {
    switch (s) {
        case Structure::vanilla: return build_tileset(Variant::vanilla);
        case Structure::red_black: return build_tileset(Variant::red_black);
        case Structure::enhanced: return build_tileset(Variant::enhanced);
        case Structure::two_channel: {
            static const Tileset t = tileset_for(s, "two_channel");
            return t;
        }
        default: {
            static const Tileset t = tileset_for(s, "three_channel");
            return t;
        }
    }
}

// Macro-tile of any structure under an explicit colouring.
inline Configuration structural_macro_tile(Structure s, int scale, int d1, const Colouring& col) {
    if (scale < 1) throw input_error("scale must be >= 1");
    if (scale > MAX_MACRO_SCALE) throw budget_error("macro-tile memory");
    const auto& ts = structure_tileset(s);
    LabelGrid g(s, scale, d1, col);
    int side = int(g.side());
    Configuration c(side, side, ts.alphabet);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) c.at(x, y) = ts.symbol(normalise(s, g.tile(x, y)));
    return c;
}

enum class Orientation { NE, SE, SW, NW };

inline int orientation_d1(Orientation o) { return int(o); }

inline Orientation parse_orientation(const std::string& s) {
    if (s == "NE") return Orientation::NE;
    if (s == "SE") return Orientation::SE;
    if (s == "SW") return Orientation::SW;
    if (s == "NW") return Orientation::NW;
    throw input_error("unknown orientation '" + s + "'");
}

inline const char* orientation_name(Orientation o) {
    static const char* n[] = {"NE", "SE", "SW", "NW"};
    return n[int(o)];
}

struct MacroTileSpec {
    Variant variant = Variant::red_black;
    int scale = 1;
    Orientation orientation = Orientation::NE;
    ColourChoice colours;
};

inline Configuration build_macro_tile(const MacroTileSpec& spec) {
    if (spec.scale < 1) throw input_error("scale must be >= 1");
    if (spec.scale > MAX_MACRO_SCALE) throw budget_error("macro-tile memory");
    const auto& ts = build_tileset(spec.variant);
    auto s = structure_of(spec.variant);
    if (s == Structure::red_black)
        require(spec.colours.base == RED || spec.colours.base == BLACK, "red_black base colour must be R or K");
    if (s == Structure::enhanced && spec.colours.transition_level)
        require(spec.colours.transition_level >= 4 && spec.colours.transition_level % 2 == 0,
                "transition level must be even and >= 4");
    auto c = structural_macro_tile(s, spec.scale, orientation_d1(spec.orientation),
                                   make_colouring(s, spec.colours, spec.scale + 3));
    c.alphabet = ts.alphabet;
    return c;
}

struct Square {
    int x0, y0, x1, y1;
    int side() const { return x1 - x0 + 1; }
};

// Squares of one main colour: connected components of cells joined by edges carrying that
// colour, each reported by its bounding box.
inline std::vector<Square> coloured_squares(const Configuration& c, const Tileset& ts, char colour) {
    const int w = c.width, h = c.height;
    auto carries = [&](int x, int y, int d) {
        const auto& l = ts.info[c.at(x, y)].tile.e[d];
        return l.P && l.col.main == colour;
    };
    std::vector<int> comp(std::size_t(w) * h, -1);
    std::vector<Square> out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (comp[std::size_t(y) * w + x] >= 0) continue;
            bool any = false;
            for (int d = 0; d < 4; ++d) any = any || carries(x, y, d);
            if (!any) continue;
            int id = int(out.size());
            Square sq{x, y, x, y};
            std::vector<std::pair<int, int>> stack{{x, y}};
            comp[std::size_t(y) * w + x] = id;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                sq.x0 = std::min(sq.x0, cx);
                sq.x1 = std::max(sq.x1, cx);
                sq.y0 = std::min(sq.y0, cy);
                sq.y1 = std::max(sq.y1, cy);
                for (int d = 0; d < 4; ++d) {
                    if (!carries(cx, cy, d)) continue;
                    int nx = cx + DX[d], ny = cy + DY[d];
                    if (!c.inside(nx, ny)) continue;
                    auto& cc = comp[std::size_t(ny) * w + nx];
                    if (cc < 0) {
                        cc = id;
                        stack.push_back({nx, ny});
                    }
                }
            }
            out.push_back(sq);
        }
    return out;
}

// Closed Red squares: square outlines with the four Red corners in place.
inline std::vector<Square> red_squares(const Configuration& c, const Tileset& ts) {
    std::vector<Square> out;
    for (auto& sq : coloured_squares(c, ts, RED)) {
        if (sq.side() != sq.y1 - sq.y0 + 1 || sq.side() < 3) continue;
        auto corner = [&](int x, int y) { return ts.info[c.at(x, y)].red_side; };
        if (corner(sq.x0, sq.y0) != RS_BL || corner(sq.x1, sq.y0) != RS_BR ||
            corner(sq.x0, sq.y1) != RS_TL || corner(sq.x1, sq.y1) != RS_TR)
            continue;
        out.push_back(sq);
    }
    return out;
}

struct StructuralCensus {
    int size_side = 0;
    std::map<char, long> bumpy_count;  // by main colour; NONE for uncoloured
    long bumpy_total = 0;
    std::vector<int> red_square_sides;  // sorted, with repetition
    long outside_red_count = 0;
};

// Only complete squares (closed outlines inside the configuration) are counted.
inline StructuralCensus census(const Configuration& c, const Tileset& ts) {
    StructuralCensus out;
    out.size_side = c.width;
    for (auto s : c.cells) {
        const auto& in = ts.info.at(s);
        if (!in.tile.bumpy) continue;
        ++out.bumpy_total;
        ++out.bumpy_count[in.line.main];
    }
    std::vector<char> inside(c.cells.size(), 0);
    for (auto& sq : red_squares(c, ts)) {
        out.red_square_sides.push_back(sq.side());
        for (int y = sq.y0; y <= sq.y1; ++y)
            for (int x = sq.x0; x <= sq.x1; ++x) inside[std::size_t(y) * c.width + x] = 1;
    }
    std::sort(out.red_square_sides.begin(), out.red_square_sides.end());
    for (auto v : inside) out.outside_red_count += !v;
    return out;
}

}  // namespace nsft::robinson
