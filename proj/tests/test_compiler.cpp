#include <doctest.h>

#include <set>
#include <sstream>

#include "nsft/compiler.hpp"

using namespace nsft;
using namespace nsft::compiler;
namespace rb = nsft::robinson;

namespace {

tm::TuringMachine edited(const tm::TuringMachine& m, const std::string& from, const std::string& to) {
    auto t = tm::to_text(m);
    auto at = t.find(from);
    REQUIRE(at != std::string::npos);
    t.replace(at, from.size(), to);
    return tm::parse_machine(t);
}

std::set<std::string> families(const CompiledTileset& ct, const Configuration& c) {
    std::set<std::string> out;
    for (auto& v : check_local_admissibility(c, ct.forbidden)) out.insert(ct.forbidden.rules[v.rule].family);
    return out;
}

// replaces the machine component at (x, y)
void set_machine(const CompiledTileset& ct, Configuration& c, int x, int y, Sym m) {
    const auto& A = *ct.alphabet;
    std::vector<Sym> comps;
    for (std::size_t l = 0; l < A.layer_count(); ++l) comps.push_back(A.component(c.at(x, y), l));
    comps[CompiledTileset::MACHINE] = m;
    c.at(x, y) = A.compose(comps);
}

}  // namespace

TEST_CASE("p1 compile and projection") {
    auto ct = compile(Variant::p1, tm::busy_beaver3());
    CHECK(ct.structural_size() == 172);
    CHECK(ct.alphabet->size() == 31820);
    std::ostringstream cert;
    write_certificate(cert, ct);
    CHECK(cert.str().rfind("certificate p1 " + std::to_string(ct.forbidden.rules.size()), 0) == 0);

    for (int n = 1; n <= 3; ++n) {
        SimulationChoices ch;
        ch.transition = n == 3;
        auto c = build_simulation_macrotile(ct, n, ch);
        CHECK(c.width == (1 << (2 * n + 1)) - 1);
        auto proj = ct.project(c);
        CHECK(check_local_admissibility(proj, ct.structural().forbidden).empty());
    }
    SimulationChoices early;
    early.transition = true;
    CHECK_THROWS_AS(build_simulation_macrotile(ct, 2, early), input_error);
}

TEST_CASE("machine roles are pinned to rows and the port") {
    auto ct = compile(Variant::p1, tm::busy_beaver3());
    auto c = build_simulation_macrotile(ct, 2, {});
    REQUIRE(check_local_admissibility(c, ct.forbidden).empty());
    const auto& fab = ct.fabric;
    auto tile_at = [&](int x, int y) { return fab.tiles()[ct.alphabet->component(c.at(x, y), CompiledTileset::MACHINE)]; };

    int vx = -1, vy = -1, px = -1, py = -1;
    for (int y = 0; y < c.height; ++y)
        for (int x = 0; x < c.width; ++x) {
            auto t = tile_at(x, y);
            if (t.kind == CellKind::vchan && vx < 0) vx = x, vy = y;
            if (t.kind == CellKind::border && t.port && t.side == rb::RS_RIGHT) px = x, py = y;
        }
    REQUIRE(vx >= 0);
    REQUIRE(px >= 0);

    // a patch dropped into a blocked row
    auto patch = c;
    auto v = tile_at(vx, vy);
    set_machine(ct, patch, vx, vy, fab.find(fab.body_patch(0, -1, v.ro, -1, -1, v.leftmost, false)));
    CHECK(families(ct, patch).count("machine-row"));

    // the port moved one cell down the right border
    auto moved = c;
    auto port = tile_at(px, py), below = tile_at(px, py - 1);
    REQUIRE(below.kind == CellKind::border);
    port.port = false;
    port.e[3] = below.e[3];
    below.port = true;
    below.e[3] = tile_at(px, py).e[3];
    set_machine(ct, moved, px, py, fab.find(port));
    set_machine(ct, moved, px, py - 1, fab.find(below));
    CHECK(families(ct, moved).count("machine-port"));
}

TEST_CASE("p1 transition follows halting") {
    auto never = compile(Variant::p1, tm::right_mover());
    for (int n = 1; n <= 4; ++n) {
        auto b = verify_scale_behaviour(never, n);
        CHECK_FALSE(b.halted_within_horizon);
        CHECK_FALSE(b.transition_admissible);
    }
    // 9 steps: inside 2^4 but not 2^3
    auto late = compile(Variant::p1, tm::return_halter());
    CHECK_FALSE(verify_scale_behaviour(late, 3).transition_admissible);
    CHECK(verify_scale_behaviour(late, 4).transition_admissible);
    auto two = compile(Variant::p1, tm::two_step_halter());
    CHECK(verify_scale_behaviour(two, 1).transition_admissible);
    CHECK(verify_scale_behaviour(two, 1, {}, rb::Orientation::SW).transition_admissible);
}

TEST_CASE("s1 freeze") {
    auto ct = compile(Variant::s1, tm::immediate_halter());
    CHECK(verify_scale_behaviour(ct, 1).freeze_active);
    SimulationChoices green;
    green.red_aux = rb::GREEN;
    CHECK_THROWS_AS(build_simulation_macrotile(ct, 1, green), input_error);
    CHECK_NOTHROW(build_simulation_macrotile(ct, 1, {}));

    auto never = compile(Variant::s1, tm::right_mover());
    for (int n = 1; n <= 4; ++n) CHECK_FALSE(verify_scale_behaviour(never, n).freeze_active);
    CHECK_NOTHROW(build_simulation_macrotile(never, 2, green));
}

TEST_CASE("p2 input-dependent freeze") {
    auto ct = compile(Variant::p2, tm::seek_b());
    CHECK(ct.structural_size() == 268);
    CHECK_FALSE(verify_scale_behaviour(ct, 3, {"b"}).freeze_active);
    CHECK(verify_scale_behaviour(ct, 4, {"b"}).freeze_active);
    CHECK_FALSE(verify_scale_behaviour(ct, 4, {"a"}).freeze_active);
    CHECK_THROWS_AS(verify_scale_behaviour(ct, 2, {"c"}), input_error);

    // a machine that never accepts keeps the Red squares free
    auto loop = compile(Variant::p2, edited(tm::seek_b(), "S b -> H b R", "S b -> S b R"));
    CHECK_FALSE(verify_scale_behaviour(loop, 4, {"b"}).freeze_active);
}
