#include <doctest.h>

#include <map>

#include "nsft/tm.hpp"

using namespace nsft;
using namespace nsft::tm;

namespace {

// Second simulator over a hand-written rule table, two-way infinite tape.
struct Rule {
    char write;
    int move;
    char next;
};

long reference_steps(const std::map<std::pair<char, char>, Rule>& rules, char start, char halt, long cap) {
    std::map<long, char> tape;
    long head = 0, steps = 0;
    char q = start;
    while (q != halt && steps < cap) {
        char s = tape.count(head) ? tape[head] : '#';
        auto r = rules.at({q, s});
        tape[head] = r.write;
        head = std::max(0L, head + r.move);
        q = r.next;
        ++steps;
    }
    return steps;
}

}  // namespace

TEST_CASE("sample machines") {
    CHECK(simulate_tm(immediate_halter(), {}, 10).halted);
    CHECK(simulate_tm(immediate_halter(), {}, 10).steps == 0);
    CHECK(simulate_tm(two_step_halter(), {}, 10).steps == 2);
    auto rm = simulate_tm(right_mover(), {}, 500);
    CHECK_FALSE(rm.halted);
    CHECK(rm.final.head == 500);
    CHECK(simulate_tm(return_halter(), {}, 100).steps == 9);

    std::map<std::pair<char, char>, Rule> bb{
        {{'A', '#'}, {'1', 1, 'B'}}, {{'A', '1'}, {'1', 1, 'H'}}, {{'B', '#'}, {'#', 1, 'C'}},
        {{'B', '1'}, {'1', 1, 'B'}}, {{'C', '#'}, {'1', -1, 'C'}}, {{'C', '1'}, {'1', -1, 'A'}}};
    auto r = simulate_tm(busy_beaver3(), {}, 100);
    CHECK(r.halted);
    CHECK(r.steps == 6);
    CHECK(r.steps == reference_steps(bb, 'A', 'H', 100));

    auto m = seek_b();
    CHECK(simulate_tm(m, parse_input(m, "aab"), 100).halted);
    CHECK_FALSE(simulate_tm(m, parse_input(m, "aa"), 100).halted);
    CHECK(sample_names().size() == 6);
    CHECK_THROWS_AS(sample_machine("nope"), input_error);
}

TEST_CASE("machine text round trip") {
    for (auto& n : sample_names()) {
        auto m = sample_machine(n);
        CHECK(to_text(parse_machine(to_text(m))) == to_text(m));
    }
    CHECK_THROWS_AS(parse_machine("states A\ntape # 1\ninput 1\nstart B\nhalt\n"), input_error);
}

TEST_CASE("Toeplitz prefix") {
    std::vector<std::vector<std::string>> words{{}, {"a"}, {"a", "b"}, {"b", "a", "a"}, {"a", "b", "b", "a", "b", "a"}};
    for (auto& u : words)
        for (int n = 0; n <= 6; ++n) {
            auto w = toeplitz_prefix(u, n);
            REQUIRE(w.size() == (std::size_t(1) << n) - 1);
            // position i (1-based) carries u_{v2(i)+1}
            for (std::size_t i = 1; i <= w.size(); ++i) CHECK(w[i - 1] == letter_at(u, __builtin_ctzl(i) + 1));
            if (n >= 1) {
                auto v = readonly_tape_view(u, n);
                REQUIRE(v.size() == (std::size_t(1) << n) + 1);
                auto prev = toeplitz_prefix(u, n - 1);
                CHECK(std::equal(prev.begin(), prev.end(), v.begin()));
                CHECK(v[prev.size()] == dollar_for(letter_at(u, n + 1)));
                CHECK(v[prev.size() + 1] == dollar_for(letter_at(u, 1)));
                CHECK(v.back() == letter_at(u, n));
            }
        }
    CHECK(plain(readonly_tape_view({"a", "b"}, 3)) == "aba$$aba#");
}

TEST_CASE("decode-then-simulate wrapper") {
    auto M = seek_b();
    auto w = wrap_decode_then_simulate(M);
    auto run = [&](std::vector<std::string> u, int n) {
        return simulate_tm(w.machine, {}, 20000, readonly_track(w, readonly_tape_view(u, n)));
    };
    for (auto u : std::vector<std::vector<std::string>>{{"a", "b"}, {"b"}, {"a", "a"}, {"a", "a", "b"}, {}}) {
        bool accepts = simulate_tm(M, parse_input(M, plain(u)), 1000).halted;
        // the wrapper idles until the '#' after u is visible
        for (int n = 1; n <= int(u.size()) + 1; ++n) {
            auto r = run(u, n);
            if (!r.halted) continue;
            CHECK(r.final.state == w.idle);
        }
        for (int n = int(u.size()) + 2; n <= 6; ++n) {
            auto r = run(u, n);
            CHECK(r.halted == accepts);
            if (r.halted) CHECK(w.machine.states[std::size_t(r.final.state)] == "m_H");
        }
    }
    auto r = run({"a", "b"}, 5);
    REQUIRE(r.halted);
    CHECK(w.machine.tape[std::size_t(r.final.tape[0])] == "a");
    CHECK(w.machine.tape[std::size_t(r.final.tape[1])] == "b");
    CHECK_THROWS_AS(wrap_decode_then_simulate(w.machine), input_error);
}
