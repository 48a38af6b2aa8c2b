#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nsft/metrics.hpp"
#include "nsft/noise.hpp"

using namespace nsft;
using namespace nsft::robinson;

static Configuration macro(int n, char base = BLACK) {
    ColourChoice ch;
    ch.base = base;
    return build_macro_tile({Variant::red_black, n, Orientation::NE, ch});
}

TEST_CASE("sample_noise") {
    CHECK(sample_noise(20, 10, 0, 1).popcount() == 0);
    CHECK(sample_noise(20, 10, 1, 1).popcount() == 200);
    auto f = sample_noise(256, 256, 0.3, 42);
    CHECK(f.bits.size() == 256u * 256u);
    double n = 256.0 * 256.0, sd = std::sqrt(n * 0.3 * 0.7);
    CHECK(std::abs(double(f.popcount()) - 0.3 * n) < 3 * sd);
    CHECK(sample_noise(16, 16, 0.5, 9).bits == sample_noise(16, 16, 0.5, 9).bits);
    CHECK(sample_noise(16, 16, 0.5, 9).bits != sample_noise(16, 16, 0.5, 10).bits);
    std::istringstream is(io::to_text(f, io::write_noise));
    CHECK(io::read_noise(is).bits == f.bits);
}

TEST_CASE("flip_process edge cases") {
    const auto& ts = build_tileset(Variant::red_black);
    auto c = macro(5);
    auto none = flip_process(c, ts, constant_noise(31, 31, false), 5, 2, 3);
    CHECK(none.config == c);
    for (auto& e : none.log.events) CHECK(!e.flippable);

    long flipped = 0, total = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto all = flip_process(c, ts, constant_noise(31, 31, true), 5, 2, s);
        for (auto& e : all.log.events) {
            CHECK(e.flippable);
            flipped += e.flipped;
            ++total;
        }
    }
    CHECK(total == 20 * (64 + 16 + 4 + 1));
    CHECK(std::abs(double(flipped) - total / 2.0) < 3 * std::sqrt(total / 4.0));
    CHECK_THROWS_AS(flip_process(c, ts, constant_noise(31, 31, true), 6, 2, 1), input_error);
    CHECK_THROWS_AS(flip_process(c, build_tileset(Variant::vanilla), constant_noise(31, 31, true), 5, 2, 1),
                    input_error);
}

TEST_CASE("flippable frequency is eps^2 at scale 2") {
    const auto& ts = build_tileset(Variant::red_black);
    auto c = macro(8);
    long tiles = 0, flippable = 0;
    for (std::uint64_t s = 0; s < 3; ++s) {
        auto r = flip_process(c, ts, sample_noise(c.width, c.height, 0.3, s), 2, 2, s);
        for (auto& e : r.log.events) {
            tiles += 1;
            flippable += e.flippable;
            if (e.flipped) CHECK(e.flippable);
        }
    }
    double sd = std::sqrt(tiles * 0.09 * 0.91);
    CHECK(std::abs(flippable - 0.09 * tiles) < 3 * sd);
}

TEST_CASE("flip_statistics") {
    FlipLog empty;
    for (int i = 0; i < 10; ++i) empty.events.push_back({2, 0, 0, false, false});
    auto s0 = flip_statistics(empty, 0);
    REQUIRE(s0.size() == 1);
    CHECK(s0[0].flippable_rate == 0);
    CHECK(s0[0].flip_rate == 0);
    CHECK(!s0[0].z_flippable.has_value());
    CHECK(!s0[0].z_flip.has_value());

    FlipLog syn;
    for (int i = 0; i < 400; ++i) syn.events.push_back({3, 0, 0, i < 100, i < 50});
    auto s1 = flip_statistics(syn, 0.5);
    CHECK(s1[0].flippable_rate == doctest::Approx(0.25));
    CHECK(*s1[0].z_flippable == doctest::Approx(0));
    CHECK(*s1[0].z_flip == doctest::Approx(0));

    const auto& ts = build_tileset(Variant::red_black);
    auto c = macro(8);
    FlipLog all;
    for (std::uint64_t s = 0; s < 3; ++s) {
        auto r = flip_process(c, ts, sample_noise(c.width, c.height, 0.2, 100 + s), 2, 2, s);
        all.events.insert(all.events.end(), r.log.events.begin(), r.log.events.end());
    }
    auto s2 = flip_statistics(all, 0.2);
    CHECK(s2[0].tiles >= 10000);
    CHECK(std::abs(*s2[0].z_flippable) < 3);

    std::istringstream is(io::to_text(all, io::write_fliplog));
    CHECK(io::read_fliplog(is).events.size() == all.events.size());
}

TEST_CASE("hamming_distance") {
    CHECK(hamming_distance(word("0110"), word("0110")).distance == 0);
    CHECK(hamming_distance(word("0110"), word("0100")).distance == Q(1, 4));
    std::mt19937_64 g(3);
    Pattern a(U(15, 2), Alphabet::digits(2)), b(U(15, 2), Alphabet::digits(2));
    for (auto& s : a.cells) s = g() & 1;
    for (auto& s : b.cells) s = g() & 1;
    double d = hamming_distance(a, b).distance.get_d();
    CHECK(std::abs(d - 0.5) < 3 * std::sqrt(0.25 / 256));
    CHECK_THROWS_AS(hamming_distance(word("01"), word("011")), input_error);
}

TEST_CASE("best_alignment_distance and besicovitch_periodic") {
    auto per = [](const char* w) { return config_from_word(w, Boundary::periodic); };
    auto self = best_alignment_distance(per("0110"), per("0110"));
    CHECK(self.distance == 0);
    CHECK(self.shift == ShiftVector{});
    auto a = best_alignment_distance(per("01"), per("10"));
    CHECK(a.distance == 0);
    CHECK(a.shift.k[0] == 1);
    auto b = best_alignment_distance(per("001"), per("011"));
    CHECK(b.distance == Q(1, 3));
    CHECK((b.shift.k[0] == 0 || b.shift.k[0] == 2));

    CHECK(besicovitch_periodic(word("0110"), word("0110")) == 0);
    CHECK(besicovitch_periodic(word("0"), word("1")) == 1);
    CHECK(besicovitch_periodic(word("001"), word("011")) == Q(1, 3));
    // different periods unroll to the lcm
    CHECK(besicovitch_periodic(word("01"), word("011")) == Q(1, 2));  // 010101 vs 011011: 3 of 6 at each shift
    CHECK_THROWS_AS(best_alignment_distance(per("01"), per("011"), 3), budget_error);
}

TEST_CASE("bumpy_mismatch_density") {
    const auto& ts = build_tileset(Variant::red_black);
    auto swap = colour_swap_table(ts);
    for (int n = 2; n <= 6; ++n) {
        auto c = macro(n);
        CHECK(bumpy_mismatch_density(c, c, ts) == 0);
        auto inv = c;
        for (auto& s : inv.cells) s = swap[s];
        long side = (1L << n) - 1;
        CHECK(bumpy_mismatch_density(inv, c, ts) == make_q(1L << (2 * (n - 1)), side * side));
    }
    auto v = build_macro_tile({Variant::vanilla, 3, Orientation::NE, {}});
    CHECK_THROWS_AS(bumpy_mismatch_density(v, v, ts), input_error);
}
