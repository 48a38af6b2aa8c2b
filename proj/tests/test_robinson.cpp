#include <doctest.h>

#include "nsft/robinson.hpp"

using namespace nsft;
using namespace nsft::robinson;

TEST_CASE("tileset sizes") {
    CHECK(build_tileset(Variant::vanilla).alphabet->size() == 32);
    CHECK(build_tileset(Variant::red_black).base_tiles == 11);
    CHECK(build_tileset(Variant::red_black).alphabet->size() == 60);
    CHECK(build_tileset(Variant::enhanced).alphabet->size() == 172);
    for (auto v : {Variant::vanilla, Variant::red_black, Variant::enhanced})
        for (auto& r : build_tileset(v).forbidden.rules) CHECK(r.window.n <= 1);
}

TEST_CASE("orbit closure reproduces the alphabet") {
    for (auto v : {Variant::vanilla, Variant::red_black, Variant::enhanced}) {
        const auto& ts = build_tileset(v);
        std::set<Tile> closed;
        for (auto& in : ts.info) {
            auto o = orbit(in.tile);
            closed.insert(o.begin(), o.end());
        }
        CHECK(closed.size() == ts.info.size());
    }
}

TEST_CASE("edge rules are stated once per unordered pair") {
    const auto& ts = build_tileset(Variant::red_black);
    std::set<std::tuple<int, int, Sym, Sym>> seen;
    for (auto& r : ts.forbidden.rules) {
        if (r.cells.size() != 2 || r.cells[0].values.size() != 1 || r.cells[1].values.size() != 1) continue;
        int dx = r.cells[1].dx - r.cells[0].dx, dy = r.cells[1].dy - r.cells[0].dy;
        auto key = std::make_tuple(dx, dy, r.cells[0].values[0], r.cells[1].values[0]);
        auto mirror = std::make_tuple(-dx, -dy, r.cells[1].values[0], r.cells[0].values[0]);
        CHECK(seen.count(mirror) == 0);
        seen.insert(key);
    }
}

TEST_CASE("scale-1 macro-tiles are the four bumpy corners") {
    std::set<Sym> seen;
    for (int o = 0; o < 4; ++o) {
        auto c = build_macro_tile({Variant::vanilla, 1, Orientation(o), {}});
        REQUIRE(c.cells.size() == 1);
        const auto& ts = build_tileset(Variant::vanilla);
        CHECK(ts.info[c.cells[0]].tile.bumpy);
        seen.insert(c.cells[0]);
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("macro-tiles: side, admissibility, bumpy corners") {
    for (auto v : {Variant::vanilla, Variant::red_black, Variant::enhanced}) {
        const auto& ts = build_tileset(v);
        for (int n = 1; n <= 5; ++n)
            for (int o = 0; o < 4; ++o) {
                auto c = build_macro_tile({v, n, Orientation(o), {}});
                CHECK(c.width == (1 << n) - 1);
                CHECK(check_local_admissibility(c, ts.forbidden).empty());
                auto cs = census(c, ts);
                CHECK(cs.bumpy_total == (1L << (2 * (n - 1))));
            }
    }
    const auto& ts = build_tileset(Variant::red_black);
    for (int n = 6; n <= 7; ++n) {
        auto c = build_macro_tile({Variant::red_black, n, Orientation::NE, {}});
        CHECK(census(c, ts).bumpy_total == (1L << (2 * (n - 1))));
    }
    CHECK_THROWS_AS(build_macro_tile({Variant::red_black, 0, Orientation::NE, {}}), input_error);
    CHECK_THROWS_AS(build_macro_tile({Variant::red_black, 40, Orientation::NE, {}}), budget_error);
}

static std::set<std::pair<int, int>> outline(const Square& s) {
    std::set<std::pair<int, int>> out;
    for (int x = s.x0; x <= s.x1; ++x) out.insert({x, s.y0}), out.insert({x, s.y1});
    for (int y = s.y0; y <= s.y1; ++y) out.insert({s.x0, y}), out.insert({s.x1, y});
    return out;
}

TEST_CASE("red_black squares alternate by level") {
    const auto& ts = build_tileset(Variant::red_black);
    for (char base : {BLACK, RED}) {
        ColourChoice ch;
        ch.base = base;
        auto c = build_macro_tile({Variant::red_black, 5, Orientation::NE, ch});
        std::map<int, char> colour_of_side;
        for (char col : {RED, BLACK}) {
            auto sq = coloured_squares(c, ts, col);
            std::set<std::pair<int, int>> cells;
            for (auto& s : sq) {
                if (s.side() < 3 || s.side() % 2 == 0 || s.side() != s.y1 - s.y0 + 1) continue;  // cross arms are not squares
                auto [it, fresh] = colour_of_side.emplace(s.side(), col);
                CHECK(it->second == col);
                for (auto& p : outline(s)) CHECK(cells.insert(p).second);  // no two outlines share a cell
                (void)fresh;
            }
        }
        // sides 3, 5, 9, 17 alternate in colour, starting from the base
        std::vector<char> seq;
        for (auto& [side, col] : colour_of_side) seq.push_back(col);
        REQUIRE(seq.size() == 4);
        CHECK(seq[0] == base);
        for (std::size_t i = 1; i < seq.size(); ++i) CHECK(seq[i] != seq[i - 1]);
    }
}

TEST_CASE("census") {
    const auto& ts = build_tileset(Variant::red_black);
    CHECK(census(build_macro_tile({Variant::red_black, 1, Orientation::NE, {}}), ts).bumpy_total == 1);
    auto cs = census(build_macro_tile({Variant::red_black, 5, Orientation::NE, {}}), ts);
    REQUIRE(!cs.red_square_sides.empty());
    CHECK(cs.red_square_sides.back() == 17);
    CHECK(cs.red_square_sides.size() == 17);
    for (int n = 1; n <= 7; ++n) {
        auto c = build_macro_tile({Variant::enhanced, n, Orientation::SE, {}});
        auto e = census(c, build_tileset(Variant::enhanced));
        int largest = e.red_square_sides.empty() ? 0 : e.red_square_sides.back();
        CHECK(largest == (n >= 3 ? (1 << (2 * ((n - 1) / 2))) + 1 : 0));
    }
}

TEST_CASE("enhanced transition tiles sit on Red borders at even levels") {
    const auto& ts = build_tileset(Variant::enhanced);
    ColourChoice ch;
    ch.transition_level = 4;
    auto c = build_macro_tile({Variant::enhanced, 5, Orientation::NE, ch});
    CHECK(check_local_admissibility(c, ts.forbidden).empty());
    long transitions = 0;
    for (auto s : c.cells) transitions += ts.info[s].transition;
    CHECK(transitions > 0);
    ch.transition_level = 5;
    CHECK_THROWS_AS(build_macro_tile({Variant::enhanced, 5, Orientation::NE, ch}), input_error);
}

TEST_CASE("parsers reject unknown names") {
    CHECK_THROWS_AS(parse_variant("penrose"), input_error);
    CHECK_THROWS_AS(parse_orientation("N"), input_error);
    CHECK(parse_orientation("SW") == Orientation::SW);
}
