#pragma once

// Turing machine to tileset compiler. The alphabet is a product of layers: the Robinson
// structure (layer 0), the machine fabric (layer 1) and, for p2, the Toeplitz letters
// (layer 2).
//
// Machine fabric, per Red square of scale j (side 4^j + 1): the interior rows and columns not
// spanned by a smaller Red square are free; there are 2^j + 1 of each. Patch cells sit where a
// free row meets a free column and show tape cell k at time i. Vertical channels copy a tape
// cell between consecutive patch rows, horizontal channels carry the head. The top row ORs the
// head's flags to the right and hands them to the border, which carries them all round.
// Every value that crosses an edge is an integer; adjacent cells must agree on it.
// Non-border cells also carry two row bits: whether the row segment they lie on meets a
// smaller Red square to the west or to the east. Patches need a free row, vertical channels a
// blocked one, which pins the number of simulated steps to the number of free rows.

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <unordered_map>

#include "grid.hpp"
#include "robinson.hpp"
#include "tm.hpp"

namespace nsft::compiler {

namespace rb = robinson;

enum class Variant { p1, s1, p2 };

inline Variant parse_variant(const std::string& s) {
    if (s == "p1") return Variant::p1;
    if (s == "s1") return Variant::s1;
    if (s == "p2") return Variant::p2;
    throw input_error("unknown compiler variant '" + s + "'");
}

inline const char* variant_name(Variant v) {
    static const char* n[] = {"p1", "s1", "p2"};
    return n[int(v)];
}

inline rb::Structure structure_for(Variant v) {
    switch (v) {
        case Variant::p1: return rb::Structure::enhanced;
        case Variant::s1: return rb::Structure::two_channel;
        default: return rb::Structure::three_channel;
    }
}

enum class CellKind : std::uint8_t { idle, border, patch, vchan, hchan };

struct MachineTile {
    CellKind kind = CellKind::idle;
    int side = 0;       // border: RedSide code
    bool port = false;  // border cell receiving the top row's notice
    int bit = 0;        // border: notice value carried
    std::array<int, 4> e{0, 0, 0, 0};  // N E S W edge values
    int ro = -1;        // patches and vertical channels: read-only letter
    bool top = false, bottom = false, leftmost = false;
    int rowbits = 0;    // ROW_WEST | ROW_EAST: a smaller Red square lies on this row segment
};

constexpr int ROW_WEST = 1, ROW_EAST = 2;

// Edge values and the finite list of machine tiles for one machine.
class Fabric {
public:
    static constexpr int ZERO = 0, B0 = 1, L0 = 2;

    Fabric() = default;
    // flags[q]: notice bits raised by a head in state q at the top row
    Fabric(std::shared_ptr<const tm::TuringMachine> m, int notices, std::vector<int> flags)
        : m_(std::move(m)), nv_(notices), flags_(std::move(flags)) {
        G_ = int(m_->tape.size());
        Qn_ = int(m_->states.size());
        R_ = m_->ro_size();
        enumerate();
    }

    int bd(int v) const { return 3 + v; }
    int notice(int v) const { return 3 + nv_ + v; }
    int content(int s, int h, int ro) const { return 3 + 2 * nv_ + (s * (Qn_ + 1) + h + 1) * R_ + ro; }
    int rsig(int q) const { return content_end() + q; }
    int lsig(int q) const { return content_end() + Qn_ + q; }
    int value_count() const { return content_end() + 2 * Qn_; }
    int notices() const { return nv_; }
    int flags(int h) const { return h < 0 ? 0 : flags_[std::size_t(h)]; }

    const std::vector<MachineTile>& tiles() const { return tiles_; }
    Sym find(const MachineTile& t) const {
        auto it = lookup_.find(key(t));
        if (it == lookup_.end()) throw inconsistency_error("machine tile outside the enumerated alphabet");
        return it->second;
    }

    MachineTile idle(int rowbits = 0) const {
        MachineTile t;
        t.rowbits = rowbits;
        return t;
    }
    MachineTile with_rowbits(Sym s, int rowbits) const {
        MachineTile t = tiles_.at(s);
        t.rowbits = rowbits;
        return t;
    }

    MachineTile border(int side, bool port, int v) const {
        MachineTile t;
        t.kind = CellKind::border;
        t.side = side;
        t.port = port;
        t.bit = v;
        int b = bd(v);
        switch (side) {
            case rb::RS_BOTTOM: t.e = {B0, b, ZERO, b}; break;
            case rb::RS_TOP: t.e = {ZERO, b, ZERO, b}; break;
            case rb::RS_LEFT: t.e = {b, L0, b, ZERO}; break;
            case rb::RS_RIGHT: t.e = {b, ZERO, b, port ? notice(v) : ZERO}; break;
            case rb::RS_BL: t.e = {b, b, ZERO, ZERO}; break;
            case rb::RS_BR: t.e = {b, ZERO, ZERO, b}; break;
            case rb::RS_TL: t.e = {ZERO, b, b, ZERO}; break;
            case rb::RS_TR: t.e = {ZERO, ZERO, b, b}; break;
            default: throw inconsistency_error("bad border side");
        }
        return t;
    }

    MachineTile top_patch(int s, int h, int ro, int nin, bool leftmost) const {
        MachineTile t;
        t.kind = CellKind::patch;
        t.top = true;
        t.leftmost = leftmost;
        t.ro = ro;
        t.e = {ZERO, notice(nin | flags(h)), content(s, h, ro), leftmost ? L0 : notice(nin)};
        return t;
    }

    // inL / inR: state of a head arriving from the left / right neighbour (-1 none)
    MachineTile body_patch(int s, int h, int ro, int inL, int inR, bool leftmost, bool bottom) const {
        MachineTile t;
        t.kind = CellKind::patch;
        t.bottom = bottom;
        t.leftmost = leftmost;
        t.ro = ro;
        int ns = s, nh = -1, W = leftmost ? L0 : ZERO, E = ZERO;
        if (h >= 0 && m_->is_halting(h)) {
            nh = h;
        } else if (h >= 0) {
            const tm::Action& a = m_->act(h, s, ro);
            ns = a.symbol;
            if (a.move == tm::RIGHT) E = rsig(a.state);
            else if (leftmost) nh = a.state;
            else W = lsig(a.state);
        } else {
            nh = inL >= 0 ? inL : inR;
            if (inL >= 0) W = rsig(inL);
            if (inR >= 0) E = lsig(inR);
        }
        t.e = {content(ns, nh, ro), E, bottom ? B0 : content(s, h, ro), W};
        return t;
    }

    MachineTile vchan(int c, int ro, bool leftmost, int rowbits) const {
        MachineTile t;
        t.kind = CellKind::vchan;
        t.ro = ro;
        t.leftmost = leftmost;
        t.rowbits = rowbits;
        t.e = {c, ZERO, c, leftmost ? L0 : ZERO};
        return t;
    }

    MachineTile hchan(int sig, bool bottom, bool top) const {
        if (sig == ZERO && !bottom && !top) return idle();
        MachineTile t;
        t.kind = CellKind::hchan;
        t.bottom = bottom;
        t.top = top;
        t.e = {ZERO, sig, bottom ? B0 : ZERO, sig};
        return t;
    }

    std::string describe(Sym s) const {
        const auto& t = tiles_.at(s);
        static const char* k[] = {"idle", "border", "patch", "vchan", "hchan"};
        std::string out = k[int(t.kind)];
        if (t.kind == CellKind::border)
            out += " side=" + std::to_string(t.side) + (t.port ? " port" : "") + " bit=" + std::to_string(t.bit);
        if (t.ro >= 0 && !m_->readonly.empty()) out += " ro=" + m_->readonly[std::size_t(t.ro)];
        if (t.top) out += " top";
        if (t.bottom) out += " bottom";
        if (t.leftmost) out += " leftmost";
        if (t.rowbits) out += std::string(" blocked=") + (t.rowbits & ROW_WEST ? "W" : "") + (t.rowbits & ROW_EAST ? "E" : "");
        for (int d = 0; d < 4; ++d) out += " " + value_name(t.e[std::size_t(d)]);
        return out;
    }

    std::string value_name(int v) const {
        if (v == ZERO) return "0";
        if (v == B0) return "B";
        if (v == L0) return "L";
        if (v < notice(0)) return "bd" + std::to_string(v - bd(0));
        if (v < content(0, -1, 0)) return "n" + std::to_string(v - notice(0));
        if (v < content_end()) {
            int c = v - content(0, -1, 0);
            int ro = c % R_;
            c /= R_;
            int h = c % (Qn_ + 1) - 1, s = c / (Qn_ + 1);
            return "[" + m_->tape[std::size_t(s)] + (h >= 0 ? "," + m_->states[std::size_t(h)] : "") +
                   (R_ > 1 ? ";" + m_->readonly[std::size_t(ro)] : "") + "]";
        }
        int q = v - content_end();
        return q < Qn_ ? "R(" + m_->states[std::size_t(q)] + ")" : "L(" + m_->states[std::size_t(q - Qn_)] + ")";
    }

private:
    int content_end() const { return 3 + 2 * nv_ + G_ * (Qn_ + 1) * R_; }

    static std::array<int, 5> key(const MachineTile& t) {
        return {int(t.kind) * 16 + (t.port ? 8 : 0) + t.rowbits, t.e[0], t.e[1], t.e[2], t.e[3]};
    }

    struct KeyHash {
        std::size_t operator()(const std::array<int, 5>& a) const {
            std::size_t h = 0;
            for (int v : a) h = h * 1000003u + std::size_t(v);
            return h;
        }
    };

    void add(const MachineTile& t) {
        if (lookup_.emplace(key(t), Sym(tiles_.size())).second) tiles_.push_back(t);
    }

    void enumerate() {
        for (int rb = 0; rb < 4; ++rb) add(idle(rb));
        for (int v = 0; v < nv_; ++v) {
            for (int side = rb::RS_BOTTOM; side <= rb::RS_TR; ++side) add(border(side, false, v));
            add(border(rb::RS_RIGHT, true, v));
        }
        const int blank = 0;
        for (int ro = 0; ro < R_; ++ro)
            for (int lm = 0; lm < 2; ++lm) {
                for (int bottom = 0; bottom < 2; ++bottom)
                    for (int s = 0; s < G_; ++s)
                        for (int h = -1; h < Qn_; ++h) {
                            if (bottom && (s != blank || h != (lm ? m_->start : -1))) continue;
                            add(body_patch(s, h, ro, -1, -1, lm, bottom));
                            if (h >= 0) continue;
                            for (int q = 0; q < Qn_; ++q) {
                                if (!lm) add(body_patch(s, h, ro, q, -1, lm, bottom));
                                add(body_patch(s, h, ro, -1, q, lm, bottom));
                            }
                        }
                for (int s = 0; s < G_; ++s)
                    for (int h = -1; h < Qn_; ++h) {
                        for (int rb = 1; rb < 4; ++rb) add(vchan(content(s, h, ro), ro, lm, rb));
                        for (int nin = 0; nin < (lm ? 1 : nv_); ++nin) add(top_patch(s, h, ro, nin, lm));
                    }
            }
        for (int bottom = 0; bottom < 2; ++bottom) {
            add(hchan(ZERO, bottom, false));
            for (int q = 0; q < Qn_; ++q) {
                add(hchan(rsig(q), bottom, false));
                add(hchan(lsig(q), bottom, false));
            }
        }
        for (int v = 0; v < nv_; ++v) add(hchan(notice(v), false, true));
    }

    std::shared_ptr<const tm::TuringMachine> m_;
    int nv_ = 2;
    std::vector<int> flags_;
    int G_ = 0, Qn_ = 0, R_ = 1;
    std::vector<MachineTile> tiles_;
    std::unordered_map<std::array<int, 5>, Sym, KeyHash> lookup_;
};

// Toeplitz letters, p2 only: a cell holds the letter of its own line and, at crossings, the
// letter of the square side it crosses.
struct LetterLayer {
    std::vector<std::string> letters;  // Sigma, #, $S, $#
    int sigma = 0;
    int none() const { return int(letters.size()); }
    int hash() const { return sigma; }
    int dollar_s() const { return sigma + 1; }
    int dollar_h() const { return sigma + 2; }
    Sym symbol(int main, int sq) const { return Sym(main * (none() + 1) + sq); }
    int main_of(Sym s) const { return int(s) / (none() + 1); }
    int sq_of(Sym s) const { return int(s) % (none() + 1); }
    std::size_t size() const { return letters.size() * (letters.size() + 1); }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < size(); ++i) {
            int sq = sq_of(Sym(i));
            out.push_back(letters[std::size_t(main_of(Sym(i)))] + "/" + (sq == none() ? "-" : letters[std::size_t(sq)]));
        }
        return out;
    }
};

enum LetterSlot { NO_LETTER = 0, MAIN_LETTER = 1, SQUARE_LETTER = 2 };

// Which letter of the cell sits on edge d: the cell's own lines only.
inline int edge_slot(const rb::TileInfo& in, int d) {
    if (in.family == "bumpy" || in.family == "cross") return MAIN_LETTER;
    bool axis = d == in.main_axis || d == rb::opp(in.main_axis);
    if (axis) return MAIN_LETTER;
    if (in.family == "p-crossing" || in.family == "np-crossing") return SQUARE_LETTER;
    return NO_LETTER;
}

struct CompiledTileset {
    Variant variant = Variant::p1;
    rb::Structure structure = rb::Structure::enhanced;
    tm::TuringMachine source;   // the machine handed in
    tm::Wrapped wrapped;        // p2: decode-then-simulate wrapper
    Fabric fabric;
    LetterLayer letters;
    AlphabetPtr alphabet;
    ForbiddenSet forbidden;

    static constexpr std::uint32_t TILE = 0, MACHINE = 1, LETTER = 2;

    const tm::TuringMachine& machine() const { return variant == Variant::p2 ? wrapped.machine : source; }
    const rb::Tileset& structural() const { return rb::structure_tileset(structure); }
    bool has_letters() const { return variant == Variant::p2; }
    std::size_t structural_size() const { return alphabet->layer(TILE).symbols.size(); }

    // Projection to the structural layer.
    Configuration project(const Configuration& c) const {
        Configuration out(c.width, c.height, structural().alphabet, c.boundary);
        for (std::size_t i = 0; i < c.cells.size(); ++i) out.cells[i] = alphabet->component(c.cells[i], TILE);
        return out;
    }

    std::map<std::string, std::size_t> family_counts() const {
        std::map<std::string, std::size_t> out;
        for (auto& r : forbidden.rules) ++out[r.family];
        return out;
    }
};

// Certificate: every forbidden rule with the family that produced it.
inline void write_certificate(std::ostream& os, const CompiledTileset& ct) {
    os << "certificate " << variant_name(ct.variant) << ' ' << ct.forbidden.rules.size() << '\n';
    for (auto& [f, n] : ct.family_counts()) os << "family " << f << ' ' << n << '\n';
    for (std::size_t i = 0; i < ct.forbidden.rules.size(); ++i) os << i << ' ' << ct.forbidden.rules[i].family << '\n';
}

namespace detail {

inline std::vector<Sym> where(std::size_t n, const std::function<bool(std::size_t)>& p) {
    std::vector<Sym> out;
    for (std::size_t i = 0; i < n; ++i)
        if (p(i)) out.push_back(Sym(i));
    return out;
}

inline Rule rule(std::string family, std::vector<RuleCell> cells) {
    Rule r;
    r.window = U(1, 2);
    r.family = std::move(family);
    r.cells = std::move(cells);
    return r;
}

}  // namespace detail

constexpr std::size_t DEFAULT_ALPHABET_BUDGET = std::size_t(1) << 31;

inline CompiledTileset compile(Variant v, const tm::TuringMachine& M,
                               std::size_t alphabet_budget = DEFAULT_ALPHABET_BUDGET) {
    using detail::rule;
    using detail::where;
    tm::validate(M);
    require(M.readonly.empty(), "compiled machines must not use a read-only track");
    CompiledTileset ct;
    ct.variant = v;
    ct.structure = structure_for(v);
    ct.source = M;
    const auto& ts = ct.structural();
    const std::size_t T = ts.info.size();

    if (v == Variant::p2) {
        ct.wrapped = tm::wrap_decode_then_simulate(M);
        const auto& w = ct.wrapped;
        std::vector<int> flags(w.machine.states.size(), 0);
        for (int q = 0; q < int(flags.size()); ++q)
            if (w.is_inner(q)) flags[std::size_t(q)] = 2 | (w.machine.is_halting(q) ? 1 : 0);
        ct.fabric = Fabric(std::make_shared<const tm::TuringMachine>(w.machine), 4, flags);
        ct.letters.letters = w.machine.readonly;
        ct.letters.sigma = int(w.sigma.size());
    } else {
        std::vector<int> flags(M.states.size(), 0);
        for (int q = 0; q < int(flags.size()); ++q) flags[std::size_t(q)] = M.is_halting(q) ? 1 : 0;
        ct.fabric = Fabric(std::make_shared<const tm::TuringMachine>(M), 2, flags);
    }
    const auto& fab = ct.fabric;
    const auto& mt = fab.tiles();
    const std::size_t MT = mt.size();

    std::size_t total = T * MT * (ct.has_letters() ? ct.letters.size() : 1);
    if (total >= alphabet_budget || total >= std::size_t(WILDCARD)) throw budget_error("compiled alphabet size");

    std::vector<Layer> layers{{"tile", ts.alphabet->layer(0).symbols}, {"machine", {}}};
    for (std::size_t i = 0; i < MT; ++i) layers[1].symbols.push_back("m" + std::to_string(i));
    if (ct.has_letters()) layers.push_back({"letter", ct.letters.names()});
    ct.alphabet = std::make_shared<const Alphabet>(layers);
    auto& F = ct.forbidden;
    F.alphabet = ct.alphabet;

    for (auto r : ts.forbidden.rules) F.add(std::move(r));

    const std::uint32_t TL = CompiledTileset::TILE, ML = CompiledTileset::MACHINE, LL = CompiledTileset::LETTER;

    // machine edges must agree
    {
        std::vector<std::vector<Sym>> east(std::size_t(fab.value_count())), west = east, north = east, south = east;
        for (std::size_t i = 0; i < MT; ++i) {
            north[std::size_t(mt[i].e[0])].push_back(Sym(i));
            east[std::size_t(mt[i].e[1])].push_back(Sym(i));
            south[std::size_t(mt[i].e[2])].push_back(Sym(i));
            west[std::size_t(mt[i].e[3])].push_back(Sym(i));
        }
        for (int val = 0; val < fab.value_count(); ++val) {
            auto vi = std::size_t(val);
            if (!east[vi].empty())
                F.add(rule("machine-edge", {set_cell(0, 0, ML, east[vi]), not_in_cell(1, 0, ML, west[vi])}));
            if (!north[vi].empty())
                F.add(rule("machine-edge", {set_cell(0, 0, ML, north[vi]), not_in_cell(0, 1, ML, south[vi])}));
        }
    }

    // the machine's border sits exactly on the Red square outlines
    for (int side = rb::RS_NONE; side <= rb::RS_TR; ++side) {
        auto tiles = where(T, [&](std::size_t i) { return ts.info[i].red_side == side; });
        if (tiles.empty()) continue;
        auto ok = where(MT, [&](std::size_t i) {
            return side == 0 ? mt[i].kind != CellKind::border : mt[i].kind == CellKind::border && mt[i].side == side;
        });
        F.add(rule("machine-border", {set_cell(0, 0, TL, tiles), not_in_cell(0, 0, ML, ok)}));
    }

    // row bits: patches and horizontal channels only on free rows, vertical channels only on blocked ones
    {
        auto is_border = [&](std::size_t i, std::initializer_list<int> sides) {
            if (mt[i].kind != CellKind::border) return false;
            for (int sd : sides)
                if (mt[i].side == sd) return true;
            return false;
        };
        auto left_type = where(MT, [&](std::size_t i) { return is_border(i, {rb::RS_LEFT, rb::RS_BL, rb::RS_TL}); });
        auto right_type = where(MT, [&](std::size_t i) { return is_border(i, {rb::RS_RIGHT, rb::RS_BR, rb::RS_TR}); });
        auto row_bit = [&](int bit, bool set) {
            return where(MT, [&](std::size_t i) { return mt[i].kind != CellKind::border && bool(mt[i].rowbits & bit) == set; });
        };
        auto west_on = row_bit(ROW_WEST, true), west_off = row_bit(ROW_WEST, false);
        auto east_on = row_bit(ROW_EAST, true), east_off = row_bit(ROW_EAST, false);
        F.add(rule("machine-row", {set_cell(0, 0, ML, west_on), set_cell(1, 0, ML, west_off)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, west_off), set_cell(1, 0, ML, west_on)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, east_on), set_cell(1, 0, ML, east_off)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, east_off), set_cell(1, 0, ML, east_on)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, right_type), set_cell(1, 0, ML, west_off)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, left_type), set_cell(1, 0, ML, west_on)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, east_off), set_cell(1, 0, ML, left_type)}));
        F.add(rule("machine-row", {set_cell(0, 0, ML, east_on), set_cell(1, 0, ML, right_type)}));

        // the port sits right below the top-right corner
        auto corner = where(MT, [&](std::size_t i) { return is_border(i, {rb::RS_TR}); });
        auto port = where(MT, [&](std::size_t i) { return mt[i].kind == CellKind::border && mt[i].port; });
        auto plain = where(MT, [&](std::size_t i) { return is_border(i, {rb::RS_RIGHT}) && !mt[i].port; });
        F.add(rule("machine-port", {set_cell(0, 0, ML, port), not_in_cell(0, 1, ML, corner)}));
        F.add(rule("machine-port", {set_cell(0, 0, ML, plain), set_cell(0, 1, ML, corner)}));
    }

    auto border_with = [&](const std::function<bool(int)>& p) {
        return where(MT, [&](std::size_t i) { return mt[i].kind == CellKind::border && p(mt[i].bit); });
    };
    auto red_aux = [&](const std::function<bool(char)>& p) {
        return where(T, [&](std::size_t i) { return ts.info[i].red_side != 0 && p(ts.info[i].red.aux); });
    };

    if (v == Variant::p1) {
        auto trans = where(T, [&](std::size_t i) { return ts.info[i].transition; });
        F.add(rule("transition", {set_cell(0, 0, TL, trans), not_in_cell(0, 0, ML, border_with([](int b) { return b == 1; }))}));
    } else if (v == Variant::s1) {
        F.add(rule("freeze", {set_cell(0, 0, ML, border_with([](int b) { return b == 1; })),
                              not_in_cell(0, 0, TL, red_aux([](char c) { return c == rb::BLUE; }))}));
    } else {
        F.add(rule("ignition", {set_cell(0, 0, ML, border_with([](int b) { return !(b & 2); })),
                                not_in_cell(0, 0, TL, red_aux([](char c) { return c == rb::THIRD; }))}));
        F.add(rule("ignition", {set_cell(0, 0, ML, border_with([](int b) { return (b & 2) != 0; })),
                                not_in_cell(0, 0, TL, red_aux([](char c) { return c == rb::BLUE || c == rb::GREEN; }))}));
        F.add(rule("freeze", {set_cell(0, 0, ML, border_with([](int b) { return (b & 1) != 0; })),
                              not_in_cell(0, 0, TL, red_aux([](char c) { return c == rb::BLUE; }))}));
    }

    if (ct.has_letters()) {
        const auto& L = ct.letters;
        const std::size_t LN = L.size();
        auto letters_where = [&](const std::function<bool(int, int)>& p) {
            return where(LN, [&](std::size_t i) { return p(L.main_of(Sym(i)), L.sq_of(Sym(i))); });
        };
        auto is_word = [&](int l) { return l <= L.hash(); };
        auto is_dollar = [&](int l) { return l == L.dollar_s() || l == L.dollar_h(); };
        auto crossing = [&](std::size_t i) {
            return ts.info[i].family == "p-crossing" || ts.info[i].family == "np-crossing";
        };
        // a square letter exactly at crossings
        F.add(rule("toeplitz", {set_cell(0, 0, TL, where(T, crossing)),
                                set_cell(0, 0, LL, letters_where([&](int, int sq) { return sq == L.none(); }))}));
        F.add(rule("toeplitz", {set_cell(0, 0, TL, where(T, [&](std::size_t i) { return !crossing(i); })),
                                not_in_cell(0, 0, LL, letters_where([&](int, int sq) { return sq == L.none(); }))}));
        // Red lines carry word letters, Black lines carry $
        for (char col : {rb::RED, rb::BLACK}) {
            auto bad_main = letters_where([&](int m, int) { return col == rb::RED ? !is_word(m) : !is_dollar(m); });
            auto bad_sq = letters_where([&](int, int s) { return col == rb::RED ? !is_word(s) : !is_dollar(s); });
            F.add(rule("toeplitz", {set_cell(0, 0, TL, where(T, [&](std::size_t i) { return ts.info[i].line.main == col; })),
                                    set_cell(0, 0, LL, bad_main)}));
            F.add(rule("toeplitz", {set_cell(0, 0, TL, where(T, [&](std::size_t i) {
                                        return crossing(i) && ts.info[i].square.main == col;
                                    })),
                                    set_cell(0, 0, LL, bad_sq)}));
        }
        // chaining at principal crossings: # is followed by $#, $S by a letter, $# by #
        auto pcross = [&](char sq, char arm) {
            return where(T, [&](std::size_t i) {
                const auto& in = ts.info[i];
                return in.family == "p-crossing" && in.square.main == sq && in.line.main == arm;
            });
        };
        F.add(rule("toeplitz", {set_cell(0, 0, TL, pcross(rb::RED, rb::BLACK)),
                                set_cell(0, 0, LL, letters_where([&](int m, int s) {
                                    return s == L.hash() && m != L.dollar_h();
                                }))}));
        F.add(rule("toeplitz", {set_cell(0, 0, TL, pcross(rb::BLACK, rb::RED)),
                                set_cell(0, 0, LL, letters_where([&](int m, int s) {
                                    return (s == L.dollar_s() && m >= L.sigma) || (s == L.dollar_h() && m != L.hash());
                                }))}));
        // letters agree along lines
        for (int d : {rb::E, rb::N}) {
            int dx = rb::DX[d], dy = rb::DY[d];
            for (int a = MAIN_LETTER; a <= SQUARE_LETTER; ++a)
                for (int b = MAIN_LETTER; b <= SQUARE_LETTER; ++b) {
                    auto ta = where(T, [&](std::size_t i) { return edge_slot(ts.info[i], d) == a; });
                    auto tb = where(T, [&](std::size_t i) { return edge_slot(ts.info[i], rb::opp(d)) == b; });
                    for (int l = 0; l < L.none(); ++l) {
                        auto here = letters_where([&](int m, int s) { return (a == MAIN_LETTER ? m : s) == l; });
                        auto there = letters_where([&](int m, int s) { return (b == MAIN_LETTER ? m : s) == l; });
                        F.add(rule("toeplitz", {set_cell(0, 0, TL, ta), set_cell(0, 0, LL, here),
                                                set_cell(dx, dy, TL, tb), not_in_cell(dx, dy, LL, there)}));
                    }
                }
        }
        // the machine reads the letter of the vertical line one column to its right
        for (int slot = MAIN_LETTER; slot <= SQUARE_LETTER; ++slot) {
            auto vert = where(T, [&](std::size_t i) {
                return edge_slot(ts.info[i], rb::N) == slot && edge_slot(ts.info[i], rb::S) == slot;
            });
            for (int l = 0; l < L.none(); ++l) {
                auto readers = where(MT, [&](std::size_t i) { return mt[i].ro == l; });
                auto same = letters_where([&](int m, int s) { return (slot == MAIN_LETTER ? m : s) == l; });
                F.add(rule("toeplitz-read", {set_cell(0, 0, ML, readers), set_cell(1, 0, TL, vert),
                                             not_in_cell(1, 0, LL, same)}));
            }
        }
    }
    return ct;
}

// ---------------------------------------------------------------------------
// Constructive macro-tiles.

struct SimulationChoices {
    rb::Orientation orientation = rb::Orientation::NE;
    bool transition = false;             // p1: Black to Blue/Green at level 2n+2
    char transition_colour = rb::BLUE;
    std::optional<char> red_aux;         // s1/p2: colour of the Red squares' channel; derived if unset
    std::vector<std::string> input;      // p2: the word u
};

// Fully resolved structural choice.
struct Plan {
    int n = 1;
    int d1 = 0;
    rb::ColourChoice colours;
    std::vector<std::string> input;
};

struct ScaleRun {
    std::vector<tm::TMConfig> configs;  // times 0..2^j
    tm::ReadOnly ro;
    int flags = 0;                      // flags of the head at the top row
};

inline ScaleRun run_scale(const CompiledTileset& ct, int j, const std::vector<std::string>& u) {
    ScaleRun r;
    if (ct.variant == Variant::p2) r.ro = tm::readonly_track(ct.wrapped, tm::readonly_tape_view(u, j));
    r.configs = tm::trace(ct.machine(), {}, 1L << j, r.ro);
    r.flags = ct.fabric.flags(r.configs.back().state);
    return r;
}

struct FreeLines {
    std::vector<int> rows, cols;
};

inline FreeLines free_lines(const rb::Square& sq, const std::vector<rb::Square>& all) {
    const int n = sq.side();
    if (n < 3) return {};
    std::vector<char> row(std::size_t(n), 1), col = row;
    row[0] = row[std::size_t(n - 1)] = col[0] = col[std::size_t(n - 1)] = 0;
    for (auto& o : all) {
        if (o.side() >= sq.side() || o.x0 <= sq.x0 || o.x1 >= sq.x1 || o.y0 <= sq.y0 || o.y1 >= sq.y1) continue;
        for (int y = o.y0; y <= o.y1; ++y) row[std::size_t(y - sq.y0)] = 0;
        for (int x = o.x0; x <= o.x1; ++x) col[std::size_t(x - sq.x0)] = 0;
    }
    FreeLines f;
    for (int i = 0; i < n; ++i) {
        if (row[std::size_t(i)]) f.rows.push_back(sq.y0 + i);
        if (col[std::size_t(i)]) f.cols.push_back(sq.x0 + i);
    }
    return f;
}

inline int scale_of_side(int side) {
    for (int j = 1; j < 16; ++j)
        if ((1L << (2 * j)) + 1 == side) return j;
    throw inconsistency_error("Red square of unexpected side " + std::to_string(side));
}

inline int letter_index(const LetterLayer& L, const std::vector<std::string>& u, int level) {
    auto find = [&](const std::string& s) {
        for (int i = 0; i < L.none(); ++i)
            if (L.letters[std::size_t(i)] == s) return i;
        throw input_error("'" + s + "' is not an input letter");
    };
    if (level % 2) return find(tm::letter_at(u, (level - 1) / 2));
    return find(tm::dollar_for(tm::letter_at(u, level / 2)));
}

// Builds the (2n+1)-macro-tile for a resolved plan without judging it.
inline Configuration assemble(const CompiledTileset& ct, const Plan& plan) {
    const int scale = 2 * plan.n + 1;
    if (scale > rb::MAX_MACRO_SCALE) throw budget_error("macro-tile memory");
    const auto& ts = ct.structural();
    const auto& fab = ct.fabric;
    auto col = rb::make_colouring(ct.structure, plan.colours, scale + 3);
    rb::LabelGrid g(ct.structure, scale, plan.d1, col);
    const int side = int(g.side());
    Configuration structural(side, side, ts.alphabet);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) structural.at(x, y) = ts.symbol(rb::normalise(ct.structure, g.tile(x, y)));

    std::vector<Sym> machine(structural.cells.size(), fab.find(fab.idle()));
    auto put = [&](int x, int y, const MachineTile& t) { machine[std::size_t(y) * side + x] = fab.find(t); };
    auto squares = rb::red_squares(structural, ts);
    std::map<int, ScaleRun> runs;
    for (auto& sq : squares) {
        const int j = scale_of_side(sq.side());
        auto fl = free_lines(sq, squares);
        const int span = (1 << j) + 1;
        if (int(fl.rows.size()) != span || int(fl.cols.size()) != span || fl.rows.front() != sq.y0 + 1 ||
            fl.rows.back() != sq.y1 - 1 || fl.cols.front() != sq.x0 + 1 || fl.cols.back() != sq.x1 - 1)
            throw inconsistency_error("free rows and columns of a Red square do not match its scale");
        if (!runs.count(j)) runs[j] = run_scale(ct, j, plan.input);
        const ScaleRun& run = runs[j];
        const auto& M = ct.machine();
        const int T = span - 1;
        auto ro_at = [&](int k) { return run.ro.at(k); };
        // border
        for (int x = sq.x0; x <= sq.x1; ++x)
            for (int y : {sq.y0, sq.y1}) {
                int s = x == sq.x0 ? (y == sq.y0 ? rb::RS_BL : rb::RS_TL)
                      : x == sq.x1 ? (y == sq.y0 ? rb::RS_BR : rb::RS_TR)
                                   : (y == sq.y0 ? rb::RS_BOTTOM : rb::RS_TOP);
                put(x, y, fab.border(s, false, run.flags));
            }
        for (int y = sq.y0 + 1; y < sq.y1; ++y) {
            put(sq.x0, y, fab.border(rb::RS_LEFT, false, run.flags));
            put(sq.x1, y, fab.border(rb::RS_RIGHT, y == sq.y1 - 1, run.flags));
        }
        // head motion at time i: (column the head leaves, new state, move), or none
        auto motion = [&](int i, int& from, int& to_state, tm::Move& mv) {
            const auto& c = run.configs[std::size_t(i)];
            if (i >= T || M.is_halting(c.state)) return false;
            const auto& a = M.act(c.state, c.read(c.head), ro_at(int(c.head)));
            from = int(c.head);
            to_state = a.state;
            mv = a.move;
            return true;
        };
        for (int i = 0; i <= T; ++i) {
            const auto& c = run.configs[std::size_t(i)];
            const int y = fl.rows[std::size_t(i)];
            int from = -1, qn = -1;
            tm::Move mv = tm::RIGHT;
            bool moving = motion(i, from, qn, mv);
            for (int k = 0; k <= T; ++k) {
                const int x = fl.cols[std::size_t(k)];
                int s = c.read(k), h = c.head == k ? c.state : -1;
                if (i == T) {
                    int nin = c.head < k ? fab.flags(c.state) : 0;
                    put(x, y, fab.top_patch(s, h, ro_at(k), nin, k == 0));
                } else {
                    int inL = moving && mv == tm::RIGHT && from == k - 1 ? qn : -1;
                    int inR = moving && mv == tm::LEFT && from == k + 1 ? qn : -1;
                    put(x, y, fab.body_patch(s, h, ro_at(k), inL, inR, k == 0, i == 0));
                    // vertical channel up to the next patch row
                    const auto& nx = run.configs[std::size_t(i + 1)];
                    int cv = fab.content(nx.read(k), nx.head == k ? nx.state : -1, ro_at(k));
                    for (int yy = y + 1; yy < fl.rows[std::size_t(i + 1)]; ++yy) put(x, yy, fab.vchan(cv, ro_at(k), k == 0, ROW_WEST));
                }
                if (k == T) continue;
                int sig = Fabric::ZERO;
                if (i == T) sig = fab.notice(c.head <= k ? fab.flags(c.state) : 0);
                else if (moving && mv == tm::RIGHT && from == k) sig = fab.rsig(qn);
                else if (moving && mv == tm::LEFT && from == k + 1) sig = fab.lsig(qn);
                for (int xx = x + 1; xx < fl.cols[std::size_t(k + 1)]; ++xx) put(xx, y, fab.hchan(sig, i == 0, i == T));
            }
        }
    }

    // row bits from the nearest border cell on each side
    for (int y = 0; y < side; ++y) {
        std::vector<int> west(std::size_t(side), 0), east(std::size_t(side), 0);
        auto kind_at = [&](int x) -> const MachineTile& { return fab.tiles()[machine[std::size_t(y) * side + x]]; };
        auto left_type = [](int sd) { return sd == rb::RS_LEFT || sd == rb::RS_BL || sd == rb::RS_TL; };
        auto right_type = [](int sd) { return sd == rb::RS_RIGHT || sd == rb::RS_BR || sd == rb::RS_TR; };
        for (int x = 0, last = 0; x < side; ++x) {
            const auto& t = kind_at(x);
            if (t.kind == CellKind::border) last = right_type(t.side) ? ROW_WEST : 0;
            else west[std::size_t(x)] = last;
        }
        for (int x = side - 1, last = 0; x >= 0; --x) {
            const auto& t = kind_at(x);
            if (t.kind == CellKind::border) last = left_type(t.side) ? ROW_EAST : 0;
            else east[std::size_t(x)] = last;
        }
        for (int x = 0; x < side; ++x) {
            auto& m = machine[std::size_t(y) * side + x];
            const auto& t = fab.tiles()[m];
            if (t.kind == CellKind::border) continue;
            int rbits = west[std::size_t(x)] | east[std::size_t(x)];
            if (rbits == t.rowbits) continue;
            if (t.kind != CellKind::idle && (t.kind != CellKind::vchan || rbits == 0))
                throw inconsistency_error("machine cell on the wrong kind of row");
            m = fab.find(fab.with_rowbits(m, rbits));
        }
    }

    std::vector<Sym> letters;
    if (ct.has_letters()) {
        letters.resize(machine.size());
        const auto& L = ct.letters;
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                const auto& geo = g.geo(x, y);
                int main = letter_index(L, plan.input, geo.level + 1);
                int sq = geo.kind == rb::Kind::crossing ? letter_index(L, plan.input, geo.level) : L.none();
                letters[std::size_t(y) * side + x] = L.symbol(main, sq);
            }
    }

    Configuration out(side, side, ct.alphabet);
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
        std::vector<Sym> comps{structural.cells[i], machine[i]};
        if (ct.has_letters()) comps.push_back(letters[i]);
        out.cells[i] = ct.alphabet->compose(comps);
    }
    return out;
}

// First scale (>= 1, <= n) whose run raises the given flag bit, or 0.
inline int first_flag_scale(const CompiledTileset& ct, int n, int bit, const std::vector<std::string>& u) {
    for (int j = 1; j <= n; ++j)
        if (run_scale(ct, j, u).flags & bit) return j;
    return 0;
}

inline void check_input(const CompiledTileset& ct, const std::vector<std::string>& u) {
    if (ct.variant != Variant::p2) {
        require(u.empty(), "only p2 takes an input word");
        return;
    }
    for (auto& a : u)
        require(std::find(ct.wrapped.sigma.begin(), ct.wrapped.sigma.end(), a) != ct.wrapped.sigma.end(),
                "'" + a + "' is not an input letter of the machine");
}

// Structural plan consistent with the simulation; rejects choices the tiling forbids.
inline Plan resolve(const CompiledTileset& ct, int n, const SimulationChoices& ch) {
    require(n >= 1, "simulation scale must be >= 1");
    if (2 * n + 1 > rb::MAX_MACRO_SCALE) throw budget_error("macro-tile memory");
    check_input(ct, ch.input);
    Plan p;
    p.n = n;
    p.d1 = rb::orientation_d1(ch.orientation);
    p.input = ch.input;
    switch (ct.variant) {
        case Variant::p1: {
            if (ch.transition) {
                require(ch.transition_colour == rb::BLUE || ch.transition_colour == rb::GREEN,
                        "transition colour must be U or G");
                if (!(run_scale(ct, n, {}).flags & 1))
                    throw input_error("transition requested at scale " + std::to_string(n) +
                                      " but the machine has not halted within 2^n steps");
                p.colours.transition_level = 2 * n + 2;
                p.colours.transition_colour = ch.transition_colour;
            }
            require(!ch.red_aux.has_value(), "p1 has no Blue-Green channel on Red squares");
            break;
        }
        case Variant::s1:
        case Variant::p2: {
            bool frozen = first_flag_scale(ct, n, 1, ch.input) != 0;
            char aux = ch.red_aux.value_or(frozen ? rb::BLUE : rb::GREEN);
            require(aux == rb::BLUE || aux == rb::GREEN, "Red channel colour must be U or G");
            if (frozen && aux != rb::BLUE) throw input_error("the machine halts by scale " + std::to_string(n) +
                                                             ": Red squares are frozen Blue");
            p.colours.base = rb::other_ug(aux);
            if (ct.variant == Variant::p2) {
                int j = first_flag_scale(ct, n, 2, ch.input);
                p.colours.ignition_level = j ? 2 * j + 1 : 0;
            }
            require(!ch.transition, "transition tiles exist only in p1");
            break;
        }
    }
    return p;
}

inline Configuration build_simulation_macrotile(const CompiledTileset& ct, int n, const SimulationChoices& ch) {
    auto c = assemble(ct, resolve(ct, n, ch));
    auto bad = check_local_admissibility(c, ct.forbidden);
    if (!bad.empty()) {
        const auto& r = ct.forbidden.rules[bad[0].rule];
        throw inconsistency_error("constructive macro-tile violates a " + r.family + " rule at (" +
                                  std::to_string(bad[0].x) + "," + std::to_string(bad[0].y) + ")");
    }
    return c;
}

struct ScaleBehaviour {
    int n = 0;
    long horizon = 0;
    bool halted_within_horizon = false;
    bool transition_admissible = false;
    bool freeze_active = false;
};

inline bool admissible(const Configuration& c, const ForbiddenSet& F) { return check_local_admissibility(c, F).empty(); }

// Simulation against tiling: the tiling must allow exactly what the run shows.
inline ScaleBehaviour verify_scale_behaviour(const CompiledTileset& ct, int n,
                                             const std::vector<std::string>& u = {},
                                             rb::Orientation o = rb::Orientation::NE) {
    require(n >= 1, "simulation scale must be >= 1");
    check_input(ct, u);
    ScaleBehaviour b;
    b.n = n;
    b.horizon = (1L << n) + 1;
    auto run = run_scale(ct, n, u);
    b.halted_within_horizon = (run.flags & 1) != 0;
    auto fail = [&](const std::string& what) {
        throw inconsistency_error(std::string(variant_name(ct.variant)) + " scale " + std::to_string(n) + ": " + what);
    };
    Plan p;
    p.n = n;
    p.d1 = rb::orientation_d1(o);
    p.input = u;
    if (ct.variant == Variant::p1) {
        if (!admissible(assemble(ct, p), ct.forbidden)) fail("plain macro-tile is not admissible");
        bool any = false, all = true;
        for (char c : {rb::BLUE, rb::GREEN}) {
            p.colours.transition_level = 2 * n + 2;
            p.colours.transition_colour = c;
            bool ok = admissible(assemble(ct, p), ct.forbidden);
            any = any || ok;
            all = all && ok;
        }
        if (any != all) fail("Blue and Green transitions disagree");
        b.transition_admissible = any;
        if (b.transition_admissible != b.halted_within_horizon)
            fail(b.halted_within_horizon ? "machine halted but the transition is rejected"
                                         : "transition admitted without halting");
        return b;
    }
    if (ct.variant == Variant::p2) {
        int j = first_flag_scale(ct, n, 2, u);
        p.colours.ignition_level = j ? 2 * j + 1 : 0;
    }
    p.colours.base = rb::GREEN;  // Red squares Blue
    if (!admissible(assemble(ct, p), ct.forbidden)) fail("Blue Red squares rejected");
    p.colours.base = rb::BLUE;   // Red squares Green
    b.freeze_active = !admissible(assemble(ct, p), ct.forbidden);
    bool halted_somewhere = first_flag_scale(ct, n, 1, u) != 0;
    if (b.freeze_active != halted_somewhere)
        fail(halted_somewhere ? "machine halted but Green Red squares are admitted" : "freeze without halting");
    return b;
}

}  // namespace nsft::compiler
