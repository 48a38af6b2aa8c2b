#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace nsft {

using Sym = std::uint32_t;
constexpr Sym WILDCARD = 0xFFFFFFFFu;

// U(n) = [0,n]^d, B(n) = [-n,n]^d
struct Window {
    enum Kind { U, B };
    int dim = 2;
    Kind kind = U;
    int n = 0;

    int side() const { return kind == U ? n + 1 : 2 * n + 1; }
    int origin() const { return kind == U ? 0 : -n; }
    int width() const { return side(); }
    int height() const { return dim == 2 ? side() : 1; }
    std::size_t cells() const { return std::size_t(width()) * std::size_t(height()); }
    bool operator==(const Window& o) const { return dim == o.dim && kind == o.kind && n == o.n; }
};

inline Window U(int n, int dim = 2) { return Window{dim, Window::U, n}; }
inline Window B(int n, int dim = 2) { return Window{dim, Window::B, n}; }

struct Layer {
    std::string name;
    std::vector<std::string> symbols;
    bool operator==(const Layer& o) const { return name == o.name && symbols == o.symbols; }
};

// A flat alphabet has one layer. Product alphabets (layered tilesets) use mixed radix,
// layer 0 most significant.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<Layer> layers) : layers_(std::move(layers)) { init(); }

    static std::shared_ptr<const Alphabet> flat(std::vector<std::string> names,
                                                std::string layer = "sym") {
        return std::make_shared<const Alphabet>(std::vector<Layer>{{std::move(layer), std::move(names)}});
    }
    static std::shared_ptr<const Alphabet> digits(int k) {
        std::vector<std::string> v;
        for (int i = 0; i < k; ++i) v.push_back(std::to_string(i));
        return flat(v);
    }

    std::size_t size() const { return size_; }
    std::size_t layer_count() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    const std::vector<Layer>& layers() const { return layers_; }

    Sym component(Sym s, std::size_t layer) const {
        return Sym((s / stride_[layer]) % layers_[layer].symbols.size());
    }
    Sym compose(const std::vector<Sym>& comps) const {
        Sym s = 0;
        for (std::size_t i = 0; i < layers_.size(); ++i) s += comps.at(i) * stride_[i];
        return s;
    }
    std::string name(Sym s) const {
        if (s == WILDCARD) return "*";
        std::string out;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            if (i) out += '|';
            out += layers_[i].symbols[component(s, i)];
        }
        return out;
    }
    std::optional<Sym> find(const std::string& nm) const {
        std::vector<Sym> comps;
        std::size_t start = 0;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            std::size_t bar = i + 1 < layers_.size() ? nm.find('|', start) : nm.size();
            if (bar == std::string::npos) return std::nullopt;
            auto part = nm.substr(start, bar - start);
            auto it = index_[i].find(part);
            if (it == index_[i].end()) return std::nullopt;
            comps.push_back(it->second);
            start = bar + 1;
        }
        return compose(comps);
    }
    bool operator==(const Alphabet& o) const { return layers_ == o.layers_; }

private:
    void init() {
        size_ = 1;
        stride_.assign(layers_.size(), 1);
        index_.assign(layers_.size(), {});
        for (std::size_t i = layers_.size(); i-- > 0;) {
            stride_[i] = Sym(size_);
            size_ *= layers_[i].symbols.size();
            for (std::size_t j = 0; j < layers_[i].symbols.size(); ++j) {
                auto& nm = layers_[i].symbols[j];
                require(!nm.empty() && nm.find_first_of(" \t\n|*") == std::string::npos,
                        "bad symbol name '" + nm + "'");
                require(index_[i].emplace(nm, Sym(j)).second, "duplicate symbol '" + nm + "'");
            }
        }
        require(size_ < WILDCARD, "alphabet too large");
    }

    std::vector<Layer> layers_;
    std::vector<Sym> stride_;
    std::vector<std::unordered_map<std::string, Sym>> index_;
    std::size_t size_ = 0;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

inline bool same_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) {
    return a == b || (a && b && *a == *b);
}

struct Pattern {
    Window window;
    AlphabetPtr alphabet;
    std::vector<Sym> cells;  // row-major, row 0 first; WILDCARD allowed

    Pattern() = default;
    Pattern(Window w, AlphabetPtr a, Sym fill = 0)
        : window(w), alphabet(std::move(a)), cells(w.cells(), fill) {}

    int width() const { return window.width(); }
    int height() const { return window.height(); }
    Sym at(int x, int y = 0) const { return cells[std::size_t(y) * width() + x]; }
    Sym& at(int x, int y = 0) { return cells[std::size_t(y) * width() + x]; }
    bool operator==(const Pattern& o) const {
        return window == o.window && cells == o.cells && same_alphabet(alphabet, o.alphabet);
    }
};

// 1D patterns from a digit string, e.g. word("0110")
inline Pattern word(const std::string& s, AlphabetPtr a = nullptr) {
    if (!a) a = Alphabet::digits(2);
    Pattern p(U(int(s.size()) - 1, 1), a);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '*') {
            p.cells[i] = WILDCARD;
            continue;
        }
        auto f = a->find(std::string(1, s[i]));
        require(f.has_value(), "unknown letter in word");
        p.cells[i] = *f;
    }
    return p;
}

enum class Boundary { free, periodic };

struct Configuration {
    int dim = 2;
    int width = 0, height = 0;
    Boundary boundary = Boundary::free;
    AlphabetPtr alphabet;
    std::vector<Sym> cells;

    Configuration() = default;
    Configuration(int w, int h, AlphabetPtr a, Boundary b = Boundary::free, Sym fill = 0, int d = 2)
        : dim(d), width(w), height(h), boundary(b), alphabet(std::move(a)),
          cells(std::size_t(w) * std::size_t(h), fill) {}

    Sym at(int x, int y = 0) const { return cells[std::size_t(y) * width + x]; }
    Sym& at(int x, int y = 0) { return cells[std::size_t(y) * width + x]; }
    Sym wrapped(int x, int y = 0) const {
        x %= width;
        if (x < 0) x += width;
        y %= height;
        if (y < 0) y += height;
        return at(x, y);
    }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    bool operator==(const Configuration& o) const {
        return dim == o.dim && width == o.width && height == o.height && boundary == o.boundary &&
               cells == o.cells && same_alphabet(alphabet, o.alphabet);
    }
};

inline Configuration periodic_of(const Pattern& p) {
    Configuration c(p.width(), p.height(), p.alphabet, Boundary::periodic, 0, p.window.dim);
    c.cells = p.cells;
    return c;
}

inline Configuration config_from_word(const std::string& s, Boundary b, AlphabetPtr a = nullptr) {
    auto p = word(s, std::move(a));
    auto c = periodic_of(p);
    c.boundary = b;
    return c;
}

struct ShiftVector {
    std::array<long, 2> k{0, 0};
    bool operator==(const ShiftVector& o) const { return k == o.k; }
};

inline Configuration shift_config(const Configuration& c, ShiftVector s) {
    if (c.boundary != Boundary::periodic) throw input_error("shift requires periodic boundary");
    Configuration out = c;
    for (int y = 0; y < c.height; ++y)
        for (int x = 0; x < c.width; ++x)
            out.at(x, y) = c.wrapped(int((x + s.k[0]) % c.width), int((y + s.k[1]) % c.height));
    return out;
}

// ---------------------------------------------------------------------------
// Forbidden rules. A rule constrains some cells of its window; each constraint restricts
// one layer component of the symbol to a sorted value set. Unconstrained cells are wildcards.

struct RuleCell {
    int dx = 0, dy = 0;
    std::uint32_t layer = 0;
    std::vector<Sym> values;  // sorted
    bool negate = false;      // accept the complement of values

    bool exact() const { return !negate && values.size() == 1; }
    bool accepts(const Alphabet& a, Sym s) const {
        Sym v = a.component(s, layer);
        bool in = values.size() == 1 ? values[0] == v : std::binary_search(values.begin(), values.end(), v);
        return in != negate;
    }
};

struct Rule {
    Window window;
    std::vector<RuleCell> cells;
    std::string family;

    int min_dx() const { return fold([](const RuleCell& c) { return c.dx; }, true); }
    int max_dx() const { return fold([](const RuleCell& c) { return c.dx; }, false); }
    int min_dy() const { return fold([](const RuleCell& c) { return c.dy; }, true); }
    int max_dy() const { return fold([](const RuleCell& c) { return c.dy; }, false); }

    bool matches_at(const Configuration& c, int x, int y) const {
        const bool wrap = c.boundary == Boundary::periodic;
        for (auto& rc : cells) {
            int cx = x + rc.dx, cy = y + rc.dy;
            Sym s;
            if (wrap) {
                s = c.wrapped(cx, cy);
            } else {
                if (!c.inside(cx, cy)) return false;
                s = c.at(cx, cy);
            }
            if (!rc.accepts(*c.alphabet, s)) return false;
        }
        return true;
    }

private:
    template <class F>
    int fold(F f, bool lo) const {
        if (cells.empty()) return 0;
        int v = f(cells[0]);
        for (auto& c : cells) v = lo ? std::min(v, f(c)) : std::max(v, f(c));
        return v;
    }
};

// Rule builder over the window's own coordinates (dx, dy measured from the window origin).
inline RuleCell exact_cell(int dx, int dy, std::uint32_t layer, Sym v) {
    return RuleCell{dx, dy, layer, {v}};
}
inline RuleCell set_cell(int dx, int dy, std::uint32_t layer, std::vector<Sym> vals) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return RuleCell{dx, dy, layer, std::move(vals)};
}

inline RuleCell not_in_cell(int dx, int dy, std::uint32_t layer, std::vector<Sym> vals) {
    auto c = set_cell(dx, dy, layer, std::move(vals));
    c.negate = true;
    return c;
}

inline Rule rule_from_pattern(const Pattern& p, std::string family = "pattern") {
    Rule r;
    r.window = p.window;
    r.family = std::move(family);
    const auto& a = *p.alphabet;
    for (int y = 0; y < p.height(); ++y)
        for (int x = 0; x < p.width(); ++x) {
            Sym s = p.at(x, y);
            if (s == WILDCARD) continue;
            for (std::uint32_t l = 0; l < a.layer_count(); ++l)
                r.cells.push_back(exact_cell(x, y, l, a.component(s, l)));
        }
    return r;
}

struct ForbiddenSet {
    AlphabetPtr alphabet;
    std::vector<Rule> rules;

    int bounding_k() const {
        int k = 0;
        for (auto& r : rules)
            k = std::max({k, r.max_dx() - r.min_dx(), r.max_dy() - r.min_dy()});
        return k;
    }
    void add(Rule r) { rules.push_back(std::move(r)); }
    void add(const Pattern& p, std::string family = "pattern") {
        rules.push_back(rule_from_pattern(p, std::move(family)));
    }
};

struct Violation {
    int x = 0, y = 0;
    std::size_t rule = 0;
    bool operator==(const Violation& o) const { return x == o.x && y == o.y && rule == o.rule; }
    bool operator<(const Violation& o) const {
        return std::tie(y, x, rule) < std::tie(o.y, o.x, o.rule);
    }
};

// Groups rules by the positions of their single-valued constraints so that one hash probe
// per group and offset finds every candidate rule.
class RuleIndex {
public:
    explicit RuleIndex(const ForbiddenSet& F) : F_(&F) {
        std::unordered_map<std::string, std::size_t> by_sig;
        for (std::size_t i = 0; i < F.rules.size(); ++i) {
            const auto& r = F.rules[i];
            std::vector<Key> keys;
            for (auto& c : r.cells)
                if (c.exact()) keys.push_back({c.dx, c.dy, c.layer});
            std::sort(keys.begin(), keys.end());
            keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
            // no exact cell: key on the smallest positive set, one table entry per value
            const RuleCell* spread = nullptr;
            if (keys.empty())
                for (auto& c : r.cells)
                    if (!c.negate && !c.values.empty() && (!spread || c.values.size() < spread->values.size()))
                        spread = &c;
            if (spread) keys.push_back({spread->dx, spread->dy, spread->layer});
            if (keys.empty()) {
                scan_.push_back(i);
                continue;
            }
            std::string sig = spread ? "s;" : "";
            for (auto& k : keys)
                sig += std::to_string(k.dx) + "," + std::to_string(k.dy) + "," +
                       std::to_string(k.layer) + ";";
            auto [it, fresh] = by_sig.emplace(sig, groups_.size());
            if (fresh) groups_.push_back(Group{keys, {}});
            auto& g = groups_[it->second];
            if (spread) {
                for (auto v : spread->values) g.table[hash({v})].push_back(i);
                continue;
            }
            std::vector<Sym> vals;
            for (auto& k : keys)
                for (auto& c : r.cells)
                    if (c.exact() && c.dx == k.dx && c.dy == k.dy && c.layer == k.layer) {
                        vals.push_back(c.values[0]);
                        break;
                    }
            g.table[hash(vals)].push_back(i);
        }
        for (auto& g : groups_) {
            g.minx = g.maxx = g.keys[0].dx;
            g.miny = g.maxy = g.keys[0].dy;
            for (auto& k : g.keys) {
                g.minx = std::min(g.minx, k.dx);
                g.maxx = std::max(g.maxx, k.dx);
                g.miny = std::min(g.miny, k.dy);
                g.maxy = std::max(g.maxy, k.dy);
            }
        }
    }

    // Calls f(x, y, rule) for every match. Free boundary: only offsets where every
    // constrained cell lies inside. Periodic: every offset of one fundamental domain.
    template <class F>
    void for_each_match(const Configuration& c, F&& f) const {
        const bool wrap = c.boundary == Boundary::periodic;
        const auto& A = *c.alphabet;
        std::vector<Sym> vals;
        for (auto& g : groups_) {
            int x0 = wrap ? 0 : -g.minx, x1 = wrap ? c.width - 1 : c.width - 1 - g.maxx;
            int y0 = wrap ? 0 : -g.miny, y1 = wrap ? c.height - 1 : c.height - 1 - g.maxy;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    vals.clear();
                    for (auto& k : g.keys) {
                        Sym s = wrap ? c.wrapped(x + k.dx, y + k.dy) : c.at(x + k.dx, y + k.dy);
                        vals.push_back(A.component(s, k.layer));
                    }
                    auto it = g.table.find(hash(vals));
                    if (it == g.table.end()) continue;
                    for (auto ri : it->second)
                        if (F_->rules[ri].matches_at(c, x, y)) f(x, y, ri);
                }
        }
        for (auto ri : scan_) {
            const auto& r = F_->rules[ri];
            int x0 = wrap ? 0 : -r.min_dx(), x1 = wrap ? c.width - 1 : c.width - 1 - r.max_dx();
            int y0 = wrap ? 0 : -r.min_dy(), y1 = wrap ? c.height - 1 : c.height - 1 - r.max_dy();
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (r.matches_at(c, x, y)) f(x, y, ri);
        }
    }

private:
    struct Key {
        int dx, dy;
        std::uint32_t layer;
        bool operator<(const Key& o) const { return std::tie(dy, dx, layer) < std::tie(o.dy, o.dx, o.layer); }
        bool operator==(const Key& o) const { return dx == o.dx && dy == o.dy && layer == o.layer; }
    };
    struct Group {
        std::vector<Key> keys;
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> table;
        int minx = 0, maxx = 0, miny = 0, maxy = 0;
    };
    static std::uint64_t hash(const std::vector<Sym>& v) {
        std::uint64_t h = 1469598103934665603ull;
        for (auto s : v) {
            h ^= s + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 1099511628211ull;
        }
        return h;
    }

    const ForbiddenSet* F_;
    std::vector<Group> groups_;
    std::vector<std::size_t> scan_;
};

inline std::vector<Violation> check_local_admissibility(const Configuration& c, const ForbiddenSet& F) {
    if (!same_alphabet(c.alphabet, F.alphabet)) throw input_error("alphabet mismatch");
    std::vector<Violation> out;
    RuleIndex idx(F);
    idx.for_each_match(c, [&](int x, int y, std::size_t r) { out.push_back({x, y, r}); });
    std::sort(out.begin(), out.end());
    return out;
}

// Plain scan of one rule, used as an oracle against the indexed checker.
inline std::vector<Violation> naive_violations(const Configuration& c, const ForbiddenSet& F) {
    std::vector<Violation> out;
    const bool wrap = c.boundary == Boundary::periodic;
    for (std::size_t i = 0; i < F.rules.size(); ++i) {
        const auto& r = F.rules[i];
        int lo_x = wrap ? 0 : -r.min_dx() - 1, lo_y = wrap ? 0 : -r.min_dy() - 1;
        for (int y = lo_y; y < c.height; ++y)
            for (int x = lo_x; x < c.width; ++x)
                if (r.matches_at(c, x, y)) out.push_back({x, y, i});
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline bool pattern_matches_at(const Pattern& p, const Configuration& c, int x, int y) {
    for (int j = 0; j < p.height(); ++j)
        for (int i = 0; i < p.width(); ++i) {
            Sym s = p.at(i, j);
            if (s == WILDCARD) continue;
            if (c.wrapped(x + i, y + j) != s) return false;
        }
    return true;
}

inline long count_occurrences(const Pattern& p, const Configuration& c) {
    if (!same_alphabet(p.alphabet, c.alphabet)) throw input_error("alphabet mismatch");
    long n = 0;
    if (c.boundary == Boundary::periodic) {
        for (int y = 0; y < c.height; ++y)
            for (int x = 0; x < c.width; ++x) n += pattern_matches_at(p, c, x, y);
        return n;
    }
    if (p.width() > c.width || p.height() > c.height)
        throw input_error("pattern larger than configuration");
    for (int y = 0; y + p.height() <= c.height; ++y)
        for (int x = 0; x + p.width() <= c.width; ++x) n += pattern_matches_at(p, c, x, y);
    return n;
}

// Extracts the pattern at offset (x, y); wraps on periodic configurations.
inline Pattern extract(const Configuration& c, Window w, int x, int y) {
    Pattern p(w, c.alphabet);
    for (int j = 0; j < p.height(); ++j)
        for (int i = 0; i < p.width(); ++i) {
            if (c.boundary == Boundary::free && !c.inside(x + i, y + j))
                throw input_error("window leaves free configuration");
            p.at(i, j) = c.wrapped(x + i, y + j);
        }
    return p;
}

// Iterates every pattern of A^{U(k)} in lexicographic order (cell 0 most significant).
template <class F>
void for_each_pattern(const AlphabetPtr& a, Window w, unsigned long long budget, F&& f) {
    const std::size_t n = w.cells(), q = a->size();
    long double total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        total *= (long double)q;
        if (total > (long double)budget) throw budget_error("pattern enumeration");
    }
    Pattern p(w, a, 0);
    if (q == 0) return;
    while (true) {
        if (!f(static_cast<const Pattern&>(p))) return;
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++p.cells[i] < q) break;
            p.cells[i] = 0;
            if (i == 0) return;
        }
        if (n == 0) return;
    }
}

inline bool rule_occurs_inside(const Rule& r, const Configuration& c) {
    for (int y = -r.min_dy(); y + r.max_dy() < c.height; ++y)
        for (int x = -r.min_dx(); x + r.max_dx() < c.width; ++x)
            if (r.matches_at(c, x, y)) return true;
    return false;
}

inline ForbiddenSet embed_forbidden_set(const ForbiddenSet& F, int k, unsigned long long budget) {
    require(k >= F.bounding_k(), "k below bounding scale");
    int dim = 1;
    for (auto& r : F.rules) dim = std::max(dim, r.window.dim);
    ForbiddenSet out{F.alphabet, {}};
    Window w = U(k, dim);
    for_each_pattern(F.alphabet, w, budget, [&](const Pattern& p) {
        Configuration c(p.width(), p.height(), p.alphabet, Boundary::free, 0, dim);
        c.cells = p.cells;
        for (auto& r : F.rules)
            if (rule_occurs_inside(r, c)) {
                out.add(p, "embedded");
                break;
            }
        return true;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Text format. Every writer is deterministic, so parse-then-write is the identity.

namespace io {

inline void write_alphabet(std::ostream& os, const Alphabet& a) {
    os << "alphabet " << a.layer_count() << "\n";
    for (auto& l : a.layers()) {
        os << "layer " << l.name << " " << l.symbols.size() << "\n";
        for (auto& s : l.symbols) os << s << "\n";
    }
}

inline std::string expect_word(std::istream& is, const std::string& w) {
    std::string t;
    if (!(is >> t) || t != w) throw input_error("expected '" + w + "', got '" + t + "'");
    return t;
}

template <class T>
T read_val(std::istream& is) {
    T v;
    if (!(is >> v)) throw input_error("truncated input");
    return v;
}

inline AlphabetPtr read_alphabet(std::istream& is) {
    expect_word(is, "alphabet");
    auto nl = read_val<std::size_t>(is);
    std::vector<Layer> layers;
    for (std::size_t i = 0; i < nl; ++i) {
        expect_word(is, "layer");
        Layer l;
        l.name = read_val<std::string>(is);
        auto n = read_val<std::size_t>(is);
        for (std::size_t j = 0; j < n; ++j) l.symbols.push_back(read_val<std::string>(is));
        layers.push_back(std::move(l));
    }
    return std::make_shared<const Alphabet>(std::move(layers));
}

inline void write_config(std::ostream& os, const Configuration& c) {
    os << "nsft-configuration v1\n";
    os << "dim " << c.dim << "\nsize " << c.width << " " << c.height << "\n";
    os << "boundary " << (c.boundary == Boundary::free ? "free" : "periodic") << "\n";
    write_alphabet(os, *c.alphabet);
    os << "cells\n";
    for (int y = 0; y < c.height; ++y) {
        for (int x = 0; x < c.width; ++x) os << (x ? " " : "") << c.at(x, y);
        os << "\n";
    }
    os << "end\n";
}

inline Configuration read_config(std::istream& is) {
    expect_word(is, "nsft-configuration");
    expect_word(is, "v1");
    expect_word(is, "dim");
    int dim = read_val<int>(is);
    expect_word(is, "size");
    int w = read_val<int>(is), h = read_val<int>(is);
    expect_word(is, "boundary");
    auto b = read_val<std::string>(is);
    require(b == "free" || b == "periodic", "bad boundary");
    auto a = read_alphabet(is);
    Configuration c(w, h, a, b == "free" ? Boundary::free : Boundary::periodic, 0, dim);
    expect_word(is, "cells");
    for (auto& s : c.cells) {
        s = read_val<Sym>(is);
        require(s < a->size(), "symbol out of range");
    }
    expect_word(is, "end");
    return c;
}

inline void write_pattern(std::ostream& os, const Pattern& p) {
    os << "nsft-pattern v1\n";
    os << "window " << (p.window.kind == Window::U ? "U" : "B") << " " << p.window.n << " "
       << p.window.dim << "\n";
    write_alphabet(os, *p.alphabet);
    os << "cells\n";
    for (int y = 0; y < p.height(); ++y) {
        for (int x = 0; x < p.width(); ++x) {
            os << (x ? " " : "");
            if (p.at(x, y) == WILDCARD) os << "*";
            else os << p.at(x, y);
        }
        os << "\n";
    }
    os << "end\n";
}

inline Pattern read_pattern(std::istream& is) {
    expect_word(is, "nsft-pattern");
    expect_word(is, "v1");
    expect_word(is, "window");
    auto k = read_val<std::string>(is);
    int n = read_val<int>(is), dim = read_val<int>(is);
    require(k == "U" || k == "B", "bad window kind");
    auto a = read_alphabet(is);
    Pattern p(Window{dim, k == "U" ? Window::U : Window::B, n}, a);
    expect_word(is, "cells");
    for (auto& s : p.cells) {
        auto t = read_val<std::string>(is);
        s = t == "*" ? WILDCARD : Sym(std::stoul(t));
        require(s == WILDCARD || s < a->size(), "symbol out of range");
    }
    expect_word(is, "end");
    return p;
}

inline void write_rules(std::ostream& os, const ForbiddenSet& F) {
    os << "rules " << F.rules.size() << "\n";
    for (auto& r : F.rules) {
        os << "rule " << r.family << " " << (r.window.kind == Window::U ? "U" : "B") << " "
           << r.window.n << " " << r.window.dim << " " << r.cells.size() << "\n";
        for (auto& c : r.cells) {
            os << c.dx << " " << c.dy << " " << c.layer << (c.negate ? " ~" : " ") << c.values.size();
            for (auto v : c.values) os << " " << v;
            os << "\n";
        }
    }
}

inline void read_rules(std::istream& is, ForbiddenSet& F) {
    expect_word(is, "rules");
    auto n = read_val<std::size_t>(is);
    for (std::size_t i = 0; i < n; ++i) {
        expect_word(is, "rule");
        Rule r;
        r.family = read_val<std::string>(is);
        auto k = read_val<std::string>(is);
        r.window.kind = k == "U" ? Window::U : Window::B;
        r.window.n = read_val<int>(is);
        r.window.dim = read_val<int>(is);
        auto nc = read_val<std::size_t>(is);
        for (std::size_t j = 0; j < nc; ++j) {
            RuleCell c;
            c.dx = read_val<int>(is);
            c.dy = read_val<int>(is);
            c.layer = read_val<std::uint32_t>(is);
            require(c.layer < F.alphabet->layer_count(), "rule layer out of range");
            auto cnt = read_val<std::string>(is);
            if (!cnt.empty() && cnt[0] == '~') {
                c.negate = true;
                cnt.erase(0, 1);
            }
            require(!cnt.empty() && cnt.find_first_not_of("0123456789") == std::string::npos, "bad value count");
            auto nv = std::stoul(cnt);
            for (std::size_t t = 0; t < nv; ++t) c.values.push_back(read_val<Sym>(is));
            r.cells.push_back(std::move(c));
        }
        F.rules.push_back(std::move(r));
    }
}

inline void write_forbidden(std::ostream& os, const ForbiddenSet& F) {
    os << "nsft-forbidden v1\n";
    write_alphabet(os, *F.alphabet);
    write_rules(os, F);
    os << "end\n";
}

inline ForbiddenSet read_forbidden(std::istream& is) {
    expect_word(is, "nsft-forbidden");
    expect_word(is, "v1");
    ForbiddenSet F;
    F.alphabet = read_alphabet(is);
    read_rules(is, F);
    expect_word(is, "end");
    return F;
}

template <class T, class W>
std::string to_text(const T& v, W writer) {
    std::ostringstream os;
    writer(os, v);
    return os.str();
}

}  // namespace io
}  // namespace nsft
