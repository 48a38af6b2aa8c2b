#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "nsft/grid.hpp"
#include "nsft/robinson.hpp"

using namespace nsft;

static std::string as_word(const Configuration& c) {
    std::string s;
    for (auto v : c.cells) s += c.alphabet->name(v);
    return s;
}

TEST_CASE("window sizes and nesting") {
    for (int d : {1, 2})
        for (int n = 0; n < 6; ++n) {
            CHECK(U(n, d).cells() == std::size_t(d == 1 ? n + 1 : (n + 1) * (n + 1)));
            CHECK(B(n, d).cells() == std::size_t(d == 1 ? 2 * n + 1 : (2 * n + 1) * (2 * n + 1)));
            CHECK(U(n, d).side() < U(n + 1, d).side());
        }
}

TEST_CASE("shift_config") {
    auto c = config_from_word("011", Boundary::periodic);
    CHECK(shift_config(c, {}) == c);
    CHECK(as_word(shift_config(c, {{1, 0}})) == "110");
    CHECK_THROWS_AS(shift_config(config_from_word("01", Boundary::free), {{1, 0}}), input_error);

    std::mt19937_64 g(5);
    Configuration r(8, 8, Alphabet::digits(3), Boundary::periodic);
    for (auto& s : r.cells) s = Sym(g() % 3);
    for (int t = 0; t < 20; ++t) {
        ShiftVector k{{long(g() % 17), long(g() % 17)}}, l{{long(g() % 17), long(g() % 17)}};
        ShiftVector kl{{k.k[0] + l.k[0], k.k[1] + l.k[1]}};
        CHECK(shift_config(shift_config(r, k), l) == shift_config(r, kl));
        CHECK(shift_config(shift_config(r, l), k) == shift_config(r, kl));
    }
}

TEST_CASE("local admissibility") {
    auto a = Alphabet::digits(2);
    ForbiddenSet F{a, {}};
    auto c = config_from_word("0110", Boundary::free, a);
    CHECK(check_local_admissibility(c, F).empty());
    F.add(word("11", a));
    auto v = check_local_admissibility(c, F);
    REQUIRE(v.size() == 1);
    CHECK(v[0].x == 1);
    CHECK(v == naive_violations(c, F));

    // periodic boundary wraps: "101" has "11" across the seam
    auto p = config_from_word("101", Boundary::periodic, a);
    CHECK(check_local_admissibility(p, F).size() == 1);

    const auto& ts = robinson::build_tileset(robinson::Variant::red_black);
    for (int o = 0; o < 4; ++o) {
        robinson::MacroTileSpec sp{robinson::Variant::red_black, 3, robinson::Orientation(o), {}};
        auto m = robinson::build_macro_tile(sp);
        CHECK(check_local_admissibility(m, ts.forbidden).empty());
        CHECK(naive_violations(m, ts.forbidden).empty());
    }
}

TEST_CASE("indexed scan agrees with the naive scan on random configurations") {
    const auto& ts = robinson::build_tileset(robinson::Variant::enhanced);
    std::mt19937_64 g(11);
    for (int t = 0; t < 5; ++t) {
        Configuration c(9, 9, ts.alphabet);
        for (auto& s : c.cells) s = Sym(g() % ts.alphabet->size());
        auto a = check_local_admissibility(c, ts.forbidden), b = naive_violations(c, ts.forbidden);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK(!a.empty());
    }
}

TEST_CASE("count_occurrences") {
    auto a = Alphabet::digits(2);
    CHECK(count_occurrences(word("1", a), config_from_word("0110", Boundary::free, a)) == 2);
    CHECK(count_occurrences(word("11", a), config_from_word("110", Boundary::periodic, a)) == 1);

    const auto& ts = robinson::build_tileset(robinson::Variant::red_black);
    auto m = robinson::build_macro_tile({robinson::Variant::red_black, 3, robinson::Orientation::NE, {}});
    long bumpy_symbol_total = 0;
    for (std::size_t s = 0; s < ts.info.size(); ++s) {
        if (!ts.info[s].tile.bumpy) continue;
        Pattern p(U(0, 2), ts.alphabet, Sym(s));
        bumpy_symbol_total += count_occurrences(p, m);
    }
    CHECK(bumpy_symbol_total == 16);
    // a 2x2 window of four bumpy corners never occurs
    long all_bumpy = 0;
    for (int y = 0; y + 1 < m.height; ++y)
        for (int x = 0; x + 1 < m.width; ++x) {
            bool all = true;
            for (int j = 0; j < 2; ++j)
                for (int i = 0; i < 2; ++i) all = all && ts.info[m.at(x + i, y + j)].tile.bumpy;
            all_bumpy += all;
        }
    CHECK(all_bumpy == 0);
}

TEST_CASE("embed_forbidden_set") {
    auto a = Alphabet::digits(2);
    ForbiddenSet F{a, {}};
    F.add(word("11", a));
    auto same = embed_forbidden_set(F, 1, 100);
    REQUIRE(same.rules.size() == 1);
    auto up = embed_forbidden_set(F, 2, 100);
    std::set<std::string> got;
    for (auto& r : up.rules) {
        std::string w;
        for (auto& c : r.cells) w += std::to_string(c.values.at(0));
        got.insert(w);
    }
    CHECK(got == std::set<std::string>{"011", "110", "111"});
    ForbiddenSet F2{a, {}};
    F2.add(word("11", a));
    CHECK_THROWS_AS(embed_forbidden_set(F2, 3, 10), budget_error);
}

TEST_CASE("text formats round-trip") {
    auto m = robinson::build_macro_tile({robinson::Variant::enhanced, 3, robinson::Orientation::SW, {}});
    auto s = io::to_text(m, io::write_config);
    std::istringstream is(s);
    auto back = io::read_config(is);
    CHECK(back == m);
    CHECK(io::to_text(back, io::write_config) == s);

    const auto& ts = robinson::build_tileset(robinson::Variant::enhanced);
    auto f = io::to_text(ts.forbidden, io::write_forbidden);
    std::istringstream fs(f);
    auto F = io::read_forbidden(fs);
    CHECK(F.rules.size() == ts.forbidden.rules.size());
    CHECK(io::to_text(F, io::write_forbidden) == f);

    auto p = word("01*1");
    std::istringstream ps(io::to_text(p, io::write_pattern));
    CHECK(io::read_pattern(ps) == p);

    std::istringstream bad("nsft-configuration v1\ndim 2\nsize 1 1\nboundary free\nalphabet 1\nlayer s 1\na\ncells\n7\nend\n");
    CHECK_THROWS_AS(io::read_config(bad), input_error);
}
