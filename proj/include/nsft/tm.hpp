#pragma once

// Single-tape Turing machines on a semi-infinite ribbon, the text format for them, Toeplitz
// words, and the decode-then-simulate wrapper used by the Toeplitz reduction.
//
// Text format, one directive per line, "//" starts a comment:
//   states q0 q1 H
//   tape # 1            (# is the blank and is added if missing)
//   input 1
//   readonly a # $S $#  (optional; transitions then read "q s r -> ...")
//   start q0
//   halt H
//   q0 # -> q1 1 R
// Names starting with '$' are reserved for the Toeplitz channel and rejected in states,
// tape and input.

#include <algorithm>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nsft::tm {

enum Move : int { LEFT = 0, RIGHT = 1 };

struct Action {
    int state = -1;  // -1: undefined
    int symbol = 0;
    Move move = RIGHT;
    bool defined() const { return state >= 0; }
};

inline const std::string BLANK = "#";
inline const std::string DOLLAR_SIGMA = "$S";
inline const std::string DOLLAR_HASH = "$#";

struct TuringMachine {
    std::vector<std::string> states;
    std::vector<std::string> tape;      // tape[0] is the blank
    std::vector<int> input;             // indices into tape
    std::vector<std::string> readonly;  // empty: no read-only track
    int start = 0;
    std::vector<char> halting;
    std::vector<Action> delta;          // [(q * |tape| + s) * |ro| + r]

    int ro_size() const { return readonly.empty() ? 1 : int(readonly.size()); }
    std::size_t slot(int q, int s, int r) const {
        return (std::size_t(q) * tape.size() + std::size_t(s)) * std::size_t(ro_size()) + std::size_t(r);
    }
    const Action& act(int q, int s, int r = 0) const { return delta[slot(q, s, r)]; }
    Action& act(int q, int s, int r = 0) { return delta[slot(q, s, r)]; }
    bool is_halting(int q) const { return halting[std::size_t(q)] != 0; }

    int state_index(const std::string& nm) const { return index_in(states, nm, "state"); }
    int symbol_index(const std::string& nm) const { return index_in(tape, nm, "tape symbol"); }
    int ro_index(const std::string& nm) const { return index_in(readonly, nm, "read-only symbol"); }

    void resize_delta() { delta.assign(states.size() * tape.size() * std::size_t(ro_size()), Action{}); }

private:
    static int index_in(const std::vector<std::string>& v, const std::string& nm, const char* what) {
        auto it = std::find(v.begin(), v.end(), nm);
        if (it == v.end()) throw input_error(std::string("unknown ") + what + " '" + nm + "'");
        return int(it - v.begin());
    }
};

inline bool reserved(const std::string& nm) { return !nm.empty() && nm[0] == '$'; }

inline void validate(const TuringMachine& m) {
    if (m.states.empty()) throw input_error("machine has no states");
    if (m.tape.empty() || m.tape[0] != BLANK) throw input_error("tape alphabet must start with the blank #");
    if (m.start < 0 || m.start >= int(m.states.size())) throw input_error("bad start state");
    if (m.halting.size() != m.states.size()) throw input_error("halting flags do not match states");
    if (m.delta.size() != m.states.size() * m.tape.size() * std::size_t(m.ro_size()))
        throw input_error("transition table has the wrong shape");
    std::set<std::string> seen;
    for (auto& v : {m.states, m.tape})
        for (auto& s : v)
            if (s.empty() || s.find_first_of(" \t|*") != std::string::npos)
                throw input_error("bad name '" + s + "'");
    for (auto& s : m.states)
        if (!seen.insert(s).second) throw input_error("duplicate state '" + s + "'");
    seen.clear();
    for (auto& s : m.tape)
        if (!seen.insert(s).second) throw input_error("duplicate tape symbol '" + s + "'");
    for (int i : m.input)
        if (i <= 0 || i >= int(m.tape.size())) throw input_error("input letters must be non-blank tape symbols");
    for (int q = 0; q < int(m.states.size()); ++q)
        for (int s = 0; s < int(m.tape.size()); ++s)
            for (int r = 0; r < m.ro_size(); ++r) {
                const Action& a = m.act(q, s, r);
                if (m.is_halting(q)) {
                    if (a.defined()) throw input_error("transition out of halting state " + m.states[q]);
                    continue;
                }
                if (!a.defined())
                    throw input_error("missing transition for (" + m.states[q] + ", " + m.tape[s] + ")");
                if (a.state >= int(m.states.size()) || a.symbol < 0 || a.symbol >= int(m.tape.size()))
                    throw input_error("transition target out of range");
            }
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

inline TuringMachine parse_machine(std::istream& is) {
    TuringMachine m;
    std::vector<std::string> input_names, halt_names;
    std::string start_name;
    std::vector<std::vector<std::string>> rules;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto c = line.find("//"); c != std::string::npos) line.erase(c);
        auto w = split_ws(line);
        if (w.empty()) continue;
        auto rest = std::vector<std::string>(w.begin() + 1, w.end());
        if (w[0] == "states") m.states = rest;
        else if (w[0] == "tape") m.tape = rest;
        else if (w[0] == "input") input_names = rest;
        else if (w[0] == "readonly") m.readonly = rest;
        else if (w[0] == "start" && rest.size() == 1) start_name = rest[0];
        else if (w[0] == "halt") halt_names = rest;
        else if (std::find(w.begin(), w.end(), "->") != w.end()) rules.push_back(w);
        else throw input_error("line " + std::to_string(lineno) + ": cannot parse '" + line + "'");
    }
    for (auto& v : {m.states, m.tape, input_names})
        for (auto& s : v)
            if (reserved(s)) throw input_error("name '" + s + "' collides with reserved channel symbols");
    if (std::find(m.tape.begin(), m.tape.end(), BLANK) == m.tape.end()) m.tape.insert(m.tape.begin(), BLANK);
    std::stable_partition(m.tape.begin(), m.tape.end(), [](const std::string& s) { return s == BLANK; });
    if (start_name.empty()) throw input_error("missing start state");
    m.start = m.state_index(start_name);
    m.halting.assign(m.states.size(), 0);
    for (auto& h : halt_names) m.halting[std::size_t(m.state_index(h))] = 1;
    for (auto& s : input_names) m.input.push_back(m.symbol_index(s));
    m.resize_delta();
    const bool ro = !m.readonly.empty();
    for (auto& w : rules) {
        std::size_t lhs = ro ? 3 : 2;
        if (w.size() != lhs + 4 || w[lhs] != "->") throw input_error("malformed transition line");
        int q = m.state_index(w[0]), s = m.symbol_index(w[1]);
        int r = ro ? m.ro_index(w[2]) : 0;
        Action a;
        a.state = m.state_index(w[lhs + 1]);
        a.symbol = m.symbol_index(w[lhs + 2]);
        if (w[lhs + 3] == "L") a.move = LEFT;
        else if (w[lhs + 3] == "R") a.move = RIGHT;
        else throw input_error("move must be L or R");
        if (m.act(q, s, r).defined()) throw input_error("duplicate transition");
        m.act(q, s, r) = a;
    }
    validate(m);
    return m;
}

inline TuringMachine parse_machine(const std::string& text) {
    std::istringstream is(text);
    return parse_machine(is);
}

inline void write_machine(std::ostream& os, const TuringMachine& m) {
    auto list = [&](const char* key, const std::vector<std::string>& v) {
        os << key;
        for (auto& s : v) os << ' ' << s;
        os << '\n';
    };
    list("states", m.states);
    list("tape", m.tape);
    std::vector<std::string> in;
    for (int i : m.input) in.push_back(m.tape[std::size_t(i)]);
    list("input", in);
    if (!m.readonly.empty()) list("readonly", m.readonly);
    os << "start " << m.states[std::size_t(m.start)] << '\n';
    std::vector<std::string> h;
    for (std::size_t q = 0; q < m.states.size(); ++q)
        if (m.halting[q]) h.push_back(m.states[q]);
    list("halt", h);
    for (int q = 0; q < int(m.states.size()); ++q)
        for (int s = 0; s < int(m.tape.size()); ++s)
            for (int r = 0; r < m.ro_size(); ++r) {
                const Action& a = m.act(q, s, r);
                if (!a.defined()) continue;
                os << m.states[q] << ' ' << m.tape[s];
                if (!m.readonly.empty()) os << ' ' << m.readonly[r];
                os << " -> " << m.states[a.state] << ' ' << m.tape[a.symbol] << ' '
                   << (a.move == LEFT ? 'L' : 'R') << '\n';
            }
}

inline std::string to_text(const TuringMachine& m) {
    std::ostringstream os;
    write_machine(os, m);
    return os.str();
}

// Letters of a word: one character each when every name is one character, else whitespace
// separated names.
inline std::vector<std::string> tokens_of(const std::string& w, const std::vector<std::string>& names) {
    bool single = std::all_of(names.begin(), names.end(), [](const std::string& s) { return s.size() == 1; });
    if (!single || w.find(' ') != std::string::npos) return split_ws(w);
    std::vector<std::string> out;
    for (char c : w) out.emplace_back(1, c);
    return out;
}

inline std::vector<int> parse_input(const TuringMachine& m, const std::string& w) {
    std::vector<std::string> names;
    for (int i : m.input) names.push_back(m.tape[std::size_t(i)]);
    std::vector<int> out;
    for (auto& t : tokens_of(w, names)) {
        int s = m.symbol_index(t);
        if (std::find(m.input.begin(), m.input.end(), s) == m.input.end())
            throw input_error("'" + t + "' is not an input letter");
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct TMConfig {
    int state = 0;
    long head = 0;
    std::vector<int> tape;  // grows on demand; cells beyond are blank
    int read(long x) const { return x < long(tape.size()) ? tape[std::size_t(x)] : 0; }
};

struct SimResult {
    bool halted = false;
    long steps = 0;
    TMConfig final;
};

// Read-only track: ro[x] for x inside, the blank's index (or 0) beyond.
struct ReadOnly {
    std::vector<int> cells;
    int beyond = 0;
    int at(long x) const { return x < long(cells.size()) ? cells[std::size_t(x)] : beyond; }
};

inline void step(const TuringMachine& m, TMConfig& c, const ReadOnly& ro) {
    const Action& a = m.act(c.state, c.read(c.head), ro.at(c.head));
    if (c.head >= long(c.tape.size())) c.tape.resize(std::size_t(c.head) + 1, 0);
    c.tape[std::size_t(c.head)] = a.symbol;
    c.state = a.state;
    if (a.move == RIGHT) ++c.head;
    else if (c.head > 0) --c.head;
}

inline TMConfig initial_config(const TuringMachine& m, const std::vector<int>& input) {
    TMConfig c;
    c.state = m.start;
    c.tape = input;
    return c;
}

inline SimResult simulate_tm(const TuringMachine& m, const std::vector<int>& input, long max_steps,
                             const ReadOnly& ro = {}) {
    if (max_steps < 0) throw input_error("max_steps must be non-negative");
    SimResult r;
    r.final = initial_config(m, input);
    while (!m.is_halting(r.final.state)) {
        if (r.steps == max_steps) return r;
        step(m, r.final, ro);
        ++r.steps;
    }
    r.halted = true;
    return r;
}

// Configurations at times 0..steps; a halted machine stays put.
inline std::vector<TMConfig> trace(const TuringMachine& m, const std::vector<int>& input, long steps,
                                   const ReadOnly& ro = {}) {
    std::vector<TMConfig> out{initial_config(m, input)};
    for (long t = 0; t < steps; ++t) {
        TMConfig c = out.back();
        if (!m.is_halting(c.state)) step(m, c, ro);
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sample machines.

inline TuringMachine right_mover() {
    return parse_machine(
        "states A B\ntape # 1\ninput 1\nstart A\nhalt\n"
        "A # -> B # R\nA 1 -> B 1 R\nB # -> A # R\nB 1 -> A 1 R\n");
}

inline TuringMachine immediate_halter() {
    return parse_machine("states H\ntape # 1\ninput 1\nstart H\nhalt H\n");
}

inline TuringMachine two_step_halter() {
    return parse_machine(
        "states A B H\ntape # 1\ninput 1\nstart A\nhalt H\n"
        "A # -> B 1 R\nA 1 -> B 1 R\nB # -> H 1 R\nB 1 -> H 1 R\n");
}

// Three working states; bounces off the left end of the ribbon.
inline TuringMachine busy_beaver3() {
    return parse_machine(
        "states A B C H\ntape # 1\ninput 1\nstart A\nhalt H\n"
        "A # -> B 1 R\nA 1 -> H 1 R\n"
        "B # -> C # R\nB 1 -> B 1 R\n"
        "C # -> C 1 L\nC 1 -> A 1 L\n");
}

// Marks the left end, writes four 1s, walks back to the mark and halts there: 9 steps.
inline TuringMachine return_halter() {
    std::string t = "states A B C D E F H\ntape # 1 m\ninput 1\nstart A\nhalt H\n";
    const char* next[] = {"A B m R", "B C 1 R", "C D 1 R", "D E 1 R", "E F 1 L"};
    for (auto* r : next) {
        std::string q(1, r[0]), rest = std::string(r + 2);
        for (const char* s : {"#", "1", "m"}) t += q + " " + s + " -> " + rest + "\n";
    }
    t += "F # -> F # L\nF 1 -> F 1 L\nF m -> H m R\n";
    return parse_machine(t);
}

// Accepts words over {a,b} containing a b: scans right, halts on b, loops at the first blank.
inline TuringMachine seek_b() {
    return parse_machine(
        "states S H\ntape # a b\ninput a b\nstart S\nhalt H\n"
        "S # -> S # L\nS a -> S a R\nS b -> H b R\n");
}

inline const std::vector<std::string>& sample_names() {
    static const std::vector<std::string> n{"right_mover", "immediate_halter", "two_step_halter",
                                            "busy_beaver3", "return_halter", "seek_b"};
    return n;
}

inline TuringMachine sample_machine(const std::string& name) {
    if (name == "right_mover") return right_mover();
    if (name == "immediate_halter") return immediate_halter();
    if (name == "two_step_halter") return two_step_halter();
    if (name == "busy_beaver3") return busy_beaver3();
    if (name == "return_halter") return return_halter();
    if (name == "seek_b") return seek_b();
    throw input_error("unknown sample machine '" + name + "'");
}

// ---------------------------------------------------------------------------
// Toeplitz words. u is #-padded: letters past its end are '#'.

inline std::string letter_at(const std::vector<std::string>& u, int k) {
    return k >= 1 && k <= int(u.size()) ? u[std::size_t(k - 1)] : BLANK;
}

inline std::vector<std::string> toeplitz_prefix(const std::vector<std::string>& u, int n) {
    require(n >= 0 && n < 28, "Toeplitz level out of range");
    std::vector<std::string> w;
    for (int k = 1; k <= n; ++k) {
        std::vector<std::string> nx = w;
        nx.push_back(letter_at(u, k));
        nx.insert(nx.end(), w.begin(), w.end());
        w = std::move(nx);
    }
    return w;
}

inline std::string dollar_for(const std::string& letter) { return letter == BLANK ? DOLLAR_HASH : DOLLAR_SIGMA; }

// w_{n-1} $ $ w_{n-1} u_n; the first $ is typed by u_{n+1}, the second by u_1.
inline std::vector<std::string> readonly_tape_view(const std::vector<std::string>& u, int n) {
    require(n >= 1, "view needs n >= 1");
    auto w = toeplitz_prefix(u, n - 1);
    std::vector<std::string> v = w;
    v.push_back(dollar_for(letter_at(u, n + 1)));
    v.push_back(dollar_for(letter_at(u, 1)));
    v.insert(v.end(), w.begin(), w.end());
    v.push_back(letter_at(u, n));
    return v;
}

inline std::string plain(const std::vector<std::string>& v) {
    std::string s;
    for (auto& t : v) s += reserved(t) ? "$" : t;
    return s;
}

// ---------------------------------------------------------------------------
// Decode-then-simulate wrapper. Its tape cells are (letter, start flag, P flag, mark).
// From a pointer P at 2^(k-1)-1 it reads u_k off the read-only track, appends it to the
// decoded word at the left of the tape, moves P to 2P+1 with a unary counter, and repeats.
// On '#' it wipes the bookkeeping and starts M at the left end; on a $ it idles.

struct Wrapped {
    TuringMachine machine;
    int idle = 0;
    int first_inner = 0;  // states of M occupy [first_inner, first_inner + |Q_M|)
    int inner_states = 0;
    std::vector<std::string> sigma;  // read-only letters that are M's input letters

    int letter_of(int sym) const { return sym / 12; }
    bool start_flag(int sym) const { return (sym / 6) % 2; }
    bool p_flag(int sym) const { return (sym / 3) % 2; }
    int mark(int sym) const { return sym % 3; }
    bool is_inner(int q) const { return q >= first_inner && q < first_inner + inner_states; }
};

inline Wrapped wrap_decode_then_simulate(const TuringMachine& M) {
    validate(M);
    require(M.readonly.empty(), "the wrapped machine must not read a read-only track");
    Wrapped w;
    TuringMachine& W = w.machine;
    const int G = int(M.tape.size());
    static const char* marks[] = {".", "x", "c"};
    auto sym = [](int letter, bool st, bool p, int mk) { return letter * 12 + int(st) * 6 + int(p) * 3 + mk; };
    for (int l = 0; l < G; ++l)
        for (int st = 0; st < 2; ++st)
            for (int p = 0; p < 2; ++p)
                for (int mk = 0; mk < 3; ++mk) {
                    if (!st && !p && !mk) W.tape.push_back(M.tape[std::size_t(l)]);
                    else W.tape.push_back(M.tape[std::size_t(l)] + (st ? "^" : "") + (p ? "!" : "") + (mk ? marks[mk] : ""));
                }
    for (int i : M.input) {
        W.input.push_back(sym(i, 0, 0, 0));
        w.sigma.push_back(M.tape[std::size_t(i)]);
    }
    W.readonly = w.sigma;
    W.readonly.push_back(BLANK);
    W.readonly.push_back(DOLLAR_SIGMA);
    W.readonly.push_back(DOLLAR_HASH);
    const int RO_HASH = int(w.sigma.size()), S = int(w.sigma.size());

    enum { INIT, READ, G_L, G_R, D_L, D_MARK, D_R1, D_R2, D_BACK, F1, F2, F3, F4, C_L, IDLE, FIXED };
    W.states = {"init", "read", "gl", "gr", "dl", "dmark", "dr1", "dr2", "dback", "f1", "f2", "f3", "f4", "cl", "idle"};
    const int WL0 = FIXED, WR0 = FIXED + S;
    for (int i = 0; i < S; ++i) W.states.push_back("wl_" + w.sigma[std::size_t(i)]);
    for (int i = 0; i < S; ++i) W.states.push_back("wr_" + w.sigma[std::size_t(i)]);
    w.first_inner = int(W.states.size());
    w.inner_states = int(M.states.size());
    for (auto& q : M.states) W.states.push_back("m_" + q);
    w.idle = IDLE;
    W.start = INIT;
    W.halting.assign(W.states.size(), 0);
    W.halting[IDLE] = 1;
    for (int q = 0; q < int(M.states.size()); ++q) W.halting[std::size_t(w.first_inner + q)] = M.halting[std::size_t(q)];
    W.resize_delta();

    auto A = [](int q, int s, Move m) { return Action{q, s, m}; };
    auto idle = [&](int s) { return A(IDLE, s, RIGHT); };
    // Start of the doubling, at the cell currently holding P.
    std::function<Action(int, int)> dl = [&](int s, int) -> Action {
        int l = s / 12;
        bool st = (s / 6) % 2, p = (s / 3) % 2;
        int mk = s % 3;
        if (mk == 1) return A(D_MARK, s, RIGHT);
        if (mk == 2) return idle(s);
        if (st) return A(p ? D_R2 : D_R1, sym(l, st, p, 1), RIGHT);
        return A(D_L, s, LEFT);
    };
    auto read = [&](int s, int r) -> Action {
        int l = s / 12;
        bool st = (s / 6) % 2;
        if (r < S) return A(WL0 + r, s, LEFT);
        if (r == RO_HASH) return A(st ? w.first_inner + M.start : C_L, sym(l, 0, 0, 0), LEFT);
        return idle(s);
    };
    for (int q = 0; q < int(W.states.size()); ++q) {
        if (W.halting[std::size_t(q)]) continue;
        for (int s = 0; s < int(W.tape.size()); ++s)
            for (int r = 0; r < W.ro_size(); ++r) {
                int l = s / 12;
                bool st = (s / 6) % 2, p = (s / 3) % 2;
                int mk = s % 3;
                Action a;
                if (w.is_inner(q)) {
                    if (st || p || mk) a = idle(s);
                    else {
                        const Action& b = M.act(q - w.first_inner, l);
                        a = A(w.first_inner + b.state, sym(b.symbol, 0, 0, 0), b.move);
                    }
                } else if (q >= WL0 && q < WR0) {
                    int letter = M.input[std::size_t(q - WL0)];
                    if (!st) a = A(q, s, LEFT);
                    else if (l == 0) a = A(G_L, sym(letter, st, p, mk), LEFT);
                    else a = A(WR0 + (q - WL0), s, RIGHT);
                } else if (q >= WR0) {
                    int letter = M.input[std::size_t(q - WR0)];
                    a = l == 0 ? A(G_L, sym(letter, st, p, mk), LEFT) : A(q, s, RIGHT);
                } else switch (q) {
                    case INIT: a = A(READ, sym(l, 1, 1, mk), LEFT); break;
                    case READ: a = p ? read(s, r) : idle(s); break;
                    case G_L:
                        if (!st) a = A(G_L, s, LEFT);
                        else a = p ? dl(s, r) : A(G_R, s, RIGHT);
                        break;
                    case G_R: a = p ? dl(s, r) : A(G_R, s, RIGHT); break;
                    case D_L: a = dl(s, r); break;
                    case D_MARK:
                        a = mk == 0 ? A(p ? D_R2 : D_R1, sym(l, st, p, 1), RIGHT) : idle(s);
                        break;
                    case D_R1: a = A(p ? D_R2 : D_R1, s, RIGHT); break;
                    case D_R2: a = mk == 2 ? A(D_R2, s, RIGHT) : A(D_BACK, sym(l, st, p, 2), LEFT); break;
                    case D_BACK:
                        if (!p) a = A(D_BACK, s, LEFT);
                        else if (mk == 1) a = A(F1, sym(l, st, 0, 1), RIGHT);
                        else a = A(D_L, s, LEFT);
                        break;
                    case F1: a = mk == 2 ? A(F1, s, RIGHT) : A(F2, s, LEFT); break;
                    case F2: a = A(F3, sym(l, st, 1, 0), LEFT); break;
                    case F3: a = A(st ? F4 : F3, sym(l, st, p, 0), st ? RIGHT : LEFT); break;
                    case F4: a = p ? read(s, r) : A(F4, s, RIGHT); break;
                    case C_L: a = A(st ? w.first_inner + M.start : C_L, sym(l, 0, 0, 0), LEFT); break;
                }
                W.act(q, s, r) = a;
            }
    }
    validate(W);
    return w;
}

// Read-only track of the wrapper over a typed view.
inline ReadOnly readonly_track(const Wrapped& w, const std::vector<std::string>& view) {
    ReadOnly ro;
    for (auto& t : view) ro.cells.push_back(w.machine.ro_index(t));
    ro.beyond = w.machine.ro_index(BLANK);
    return ro;
}

}  // namespace nsft::tm
