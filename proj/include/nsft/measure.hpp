#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "grid.hpp"
#include "lp.hpp"
#include "metrics.hpp"
#include "noise.hpp"
#include "rational.hpp"

namespace nsft {

// <w>: uniform average of the shifts of the periodic extension of w.
struct PeriodicMeasure {
    Pattern base;
    int dim() const { return base.window.dim; }
    const AlphabetPtr& alphabet() const { return base.alphabet; }
};

// B(eps) product measure over {0,1}.
struct BernoulliProduct {
    Q eps;
    int dim = 1;
    AlphabetPtr alphabet = Alphabet::digits(2);
};

using Measure = std::variant<PeriodicMeasure, BernoulliProduct>;

inline const AlphabetPtr& alphabet_of(const Measure& m) {
    return std::visit([](const auto& x) -> const AlphabetPtr& {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, PeriodicMeasure>) return x.base.alphabet;
        else return x.alphabet;
    }, m);
}

inline int dim_of(const Measure& m) {
    return std::visit([](const auto& x) {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, PeriodicMeasure>) return x.base.window.dim;
        else return x.dim;
    }, m);
}

inline Q bernoulli_prob(const Q& eps, long ones, long zeros) {
    return qpow(eps, (unsigned long)ones) * qpow(Q(1 - eps), (unsigned long)zeros);
}

inline Q cylinder_prob(const Measure& mu, const Pattern& v) {
    if (!same_alphabet(alphabet_of(mu), v.alphabet)) throw input_error("alphabet mismatch");
    if (auto* p = std::get_if<PeriodicMeasure>(&mu)) {
        auto c = periodic_of(p->base);
        return make_q(count_occurrences(v, c), long(p->base.cells.size()));
    }
    const auto& b = std::get<BernoulliProduct>(mu);
    long ones = 0, zeros = 0;
    for (auto s : v.cells) {
        if (s == WILDCARD) continue;
        (s == 1 ? ones : zeros)++;
    }
    return bernoulli_prob(b.eps, ones, zeros);
}

using Marginal = std::map<std::vector<Sym>, Q>;

// Window law of a periodic measure: pattern -> probability, over one fundamental domain.
inline Marginal periodic_marginal(const PeriodicMeasure& mu, Window w) {
    auto c = periodic_of(mu.base);
    Marginal out;
    const Q unit_mass = make_q(1, long(mu.base.cells.size()));
    std::vector<Sym> buf(w.cells());
    for (int y = 0; y < c.height; ++y)
        for (int x = 0; x < c.width; ++x) {
            for (int j = 0; j < w.height(); ++j)
                for (int i = 0; i < w.width(); ++i) buf[std::size_t(j) * w.width() + i] = c.wrapped(x + i, y + j);
            out[buf] += unit_mass;
        }
    return out;
}

inline Q binomial(long n, long k) {
    Z r;
    mpz_bin_uiui(r.get_mpz_t(), (unsigned long)n, (unsigned long)k);
    return Q(r);
}

// sum over w in A^{U_k} of |mu[w] - nu[w]|
inline Q l1_on_window(const Measure& mu, const Measure& nu, Window w) {
    auto* pm = std::get_if<PeriodicMeasure>(&mu);
    auto* pn = std::get_if<PeriodicMeasure>(&nu);
    const long cells = long(w.cells());
    if (pm && pn) {
        auto a = periodic_marginal(*pm, w), b = periodic_marginal(*pn, w);
        Q s = 0;
        for (auto& [k, v] : a) {
            auto it = b.find(k);
            s += qabs(v - (it == b.end() ? Q(0) : it->second));
        }
        for (auto& [k, v] : b)
            if (!a.count(k)) s += v;
        return s;
    }
    if (pm || pn) {
        const auto& per = pm ? *pm : *pn;
        const auto& ber = std::get<BernoulliProduct>(pm ? nu : mu);
        Q s = 0, covered = 0;
        for (auto& [k, v] : periodic_marginal(per, w)) {
            long ones = std::count(k.begin(), k.end(), Sym(1));
            Q b = bernoulli_prob(ber.eps, ones, cells - ones);
            s += qabs(v - b);
            covered += b;
        }
        return s + (1 - covered);
    }
    const auto& a = std::get<BernoulliProduct>(mu);
    const auto& b = std::get<BernoulliProduct>(nu);
    Q s = 0;
    for (long j = 0; j <= cells; ++j)
        s += binomial(cells, j) * qabs(bernoulli_prob(a.eps, j, cells - j) - bernoulli_prob(b.eps, j, cells - j));
    return s;
}

struct DistanceBracket {
    Q lo, hi;
};

// k-th term of d_r^+ on the windows U_k.
inline Q dplus_term(const Measure& mu, const Measure& nu, const Q& r, int k) {
    const int dim = dim_of(mu);
    const Window w = U(k, dim);
    const long cells = long(w.cells());
    const long q = long(alphabet_of(mu)->size());
    Q norm = qpow(Q(2), (unsigned long)k) * qpow(r, (unsigned long)cells) * qpow(Q(q), (unsigned long)cells);
    return l1_on_window(mu, nu, w) / norm;
}

constexpr int MAX_RANK_DEFAULT = 16;

// s_n = terms 0..n; the tail beyond is at most 2^{1-n}.
inline DistanceBracket dplus_truncated(const Measure& mu, const Measure& nu, const Q& r, int rank,
                                long long budget_cells = 1LL << 26) {
    if (!same_alphabet(alphabet_of(mu), alphabet_of(nu))) throw input_error("alphabet mismatch");
    if (dim_of(mu) != dim_of(nu)) throw input_error("dimension mismatch");
    require(r >= 1, "normalisation factor must be >= 1");
    require(rank >= 0, "negative rank");
    long long work = 0;
    Q s = 0;
    for (int k = 0; k <= rank; ++k) {
        long long cells = (long long)U(k, dim_of(mu)).cells();
        for (auto* m : {&mu, &nu})
            if (auto* p = std::get_if<PeriodicMeasure>(m)) work += cells * (long long)p->base.cells.size();
        if (work > budget_cells) throw budget_error("d+ truncation rank");
        s += dplus_term(mu, nu, r, k);
    }
    Q tail = rank >= 1 ? Q(make_q(1, 1) / qpow(Q(2), (unsigned long)(rank - 1))) : Q(2);
    return {s, s + tail};
}

// n(delta) = 2 + ceil(log2(1/delta))
inline int rank_for(const Q& delta) {
    require(delta > 0, "radius must be positive");
    return 2 + int(ceil_log2(Q(1 / delta)));
}

inline Z phi_threshold(const Q& rho, int k, long alphabet, int d, const Z& window_cells) {
    Z cells_k;
    mpz_ui_pow_ui(cells_k.get_mpz_t(), (unsigned long)(k + 1), (unsigned long)d);
    Q v = Q(zpow(2, (unsigned long)k)) * Q(zpow(alphabet, cells_k.get_ui())) * rho * Q(window_cells);
    Z out;
    mpz_fdiv_q(out.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
    return out;
}

// Explicit scale function for the covering of all invariant measures. With n = n(delta) and
// tau = delta / (4 |A|^{|U_n|}), any invariant mu is matched within tau on every U_n-cylinder by
// the block pattern on U_M, M = (m+1) 2^k - 1, when
//   (d+1) n / (m+1) <= tau/2      (boundary effects of the U_m blocks and of the slices)
//   |A|^{|U_m|} / 2^k <= tau/2    (dyadic rounding of the U_m law)
// which then gives s_n <= delta/2 and the tail r_n <= delta/2.
struct CoveringParams {
    Q radius;
    int n_radius = 0;
    int alphabet = 2, dim = 1, forbidden_k = 0;
    Z m, k;                // the (m, k) pair used inside psi
    std::optional<Z> psi;  // (m+1) 2^k - 1, when it fits in memory
    Z psi_bits;            // bit length bound of psi
    std::optional<Z> phi;  // floor(2^kF |A^{U_kF}| rho |U_psi|)
    bool enumerable = false;
};

constexpr long MAX_EXPLICIT_PSI_BITS = 1L << 20;

inline CoveringParams covering_params(const Q& delta, int alphabet, int d, int forbidden_k = 0,
                                      unsigned long long enum_budget = 1ULL << 24) {
    require(delta > 0, "radius must be positive");
    require(alphabet >= 1 && d >= 1, "bad alphabet size or dimension");
    CoveringParams p;
    p.radius = delta;
    p.alphabet = alphabet;
    p.dim = d;
    p.forbidden_k = forbidden_k;
    p.n_radius = rank_for(delta);
    Z cells_n;
    mpz_ui_pow_ui(cells_n.get_mpz_t(), (unsigned long)(p.n_radius + 1), (unsigned long)d);
    Q tau = delta / (Q(4) * Q(zpow(alphabet, cells_n.get_ui())));
    Q need = Q(2 * (d + 1) * p.n_radius) / tau;
    Z m1;
    mpz_cdiv_q(m1.get_mpz_t(), need.get_num_mpz_t(), need.get_den_mpz_t());
    p.m = m1 - 1;
    Z cells_m;
    mpz_pow_ui(cells_m.get_mpz_t(), m1.get_mpz_t(), (unsigned long)d);
    long log_a = alphabet <= 1 ? 0 : long(ceil_log2(Q(alphabet)));
    p.k = cells_m * log_a + Z(ceil_log2(Q(2 / tau)));
    p.psi_bits = p.k + Z(long(mpz_sizeinbase(m1.get_mpz_t(), 2)));
    if (p.k < MAX_EXPLICIT_PSI_BITS) {
        Z two_k;
        mpz_mul_2exp(two_k.get_mpz_t(), Z(1).get_mpz_t(), p.k.get_ui());
        p.psi = m1 * two_k - 1;
        Z cells_psi;
        mpz_pow_ui(cells_psi.get_mpz_t(), Z(*p.psi + 1).get_mpz_t(), (unsigned long)d);
        p.phi = phi_threshold(delta, forbidden_k, alphabet, d, cells_psi);
        long double patterns = 1;
        bool small = mpz_sizeinbase(cells_psi.get_mpz_t(), 2) < 40;
        if (small) {
            unsigned long c = cells_psi.get_ui();
            for (unsigned long i = 0; i < c && patterns <= (long double)enum_budget; ++i) patterns *= alphabet;
        }
        p.enumerable = small && patterns <= (long double)enum_budget;
    }
    return p;
}

// Occurrences of forbidden rules inside w, without wrapping.
inline long forbidden_occurrences(const Pattern& w, const ForbiddenSet& F) {
    Configuration c(w.width(), w.height(), w.alphabet, Boundary::free, 0, w.window.dim);
    c.cells = w.cells;
    long n = 0;
    RuleIndex idx(F);
    idx.for_each_match(c, [&](int, int, std::size_t) { ++n; });
    return n;
}

// Occurrences whose constrained cells are all clear in b.
inline long clear_occurrences(const Pattern& w, const Pattern& b, const ForbiddenSet& F) {
    Configuration c(w.width(), w.height(), w.alphabet, Boundary::free, 0, w.window.dim);
    c.cells = w.cells;
    long n = 0;
    RuleIndex idx(F);
    idx.for_each_match(c, [&](int x, int y, std::size_t ri) {
        for (auto& rc : F.rules[ri].cells)
            if (b.at(x + rc.dx, y + rc.dy) != 0) return;
        ++n;
    });
    return n;
}

// s_rank(<b>, B(eps)) with normalisation r.
inline Q bernoulli_marginal_dist_at_rank(const Pattern& b, const Q& eps, int rank, const Q& r = 2) {
    require(b.alphabet->size() == 2, "noise patterns are binary");
    require(eps >= 0 && eps <= 1, "epsilon must lie in [0,1]");
    Pattern bb = b;
    bb.alphabet = Alphabet::digits(2);
    Measure mu = PeriodicMeasure{bb};
    Measure nu = BernoulliProduct{eps, b.window.dim, bb.alphabet};
    return dplus_truncated(mu, nu, r, rank).lo;
}

inline Q bernoulli_marginal_dist(const Pattern& b, const Q& eps, const Q& rho, const Q& r = 2) {
    return bernoulli_marginal_dist_at_rank(b, eps, rank_for(rho), r);
}

struct EnumerationOptions {
    unsigned long long budget = 1ULL << 20;
    bool noisy = false;  // enumerate (w, b) pairs for the noisy covering
    Q eps = 0;           // noisy: Bernoulli parameter of the marginal test
    Q r = 2;             // noisy: normalisation of the marginal distance
};

// Patterns on U(scale) with at most phi forbidden occurrences. In noisy mode each w comes with
// every b whose truncated marginal distance to B(eps) is at most rho, and only occurrences on
// clear cells count. The callback returns false to stop.
inline void enumerate_WF(const ForbiddenSet& F, const Q& rho, int scale, int dim, const Z& phi,
                         const EnumerationOptions& opt,
                         const std::function<bool(const Pattern&, const Pattern*)>& f) {
    Window win = U(scale, dim);
    if (!opt.noisy) {
        for_each_pattern(F.alphabet, win, opt.budget, [&](const Pattern& w) {
            if (Z(forbidden_occurrences(w, F)) > phi) return true;
            return f(w, nullptr);
        });
        return;
    }
    std::vector<Pattern> noises;
    const int rank = rank_for(rho);
    for_each_pattern(Alphabet::digits(2), win, opt.budget, [&](const Pattern& b) {
        if (bernoulli_marginal_dist_at_rank(b, opt.eps, rank, opt.r) <= rho) noises.push_back(b);
        return true;
    });
    long double total = (long double)noises.size();
    for (std::size_t i = 0; i < win.cells(); ++i) total *= (long double)F.alphabet->size();
    if (total > (long double)opt.budget) throw budget_error("noisy pattern enumeration");
    bool go = true;
    for_each_pattern(F.alphabet, win, opt.budget, [&](const Pattern& w) {
        for (auto& b : noises) {
            if (Z(clear_occurrences(w, b, F)) > phi) continue;
            if (!(go = f(w, &b))) return false;
        }
        return true;
    });
}

// Finite coupling of two window laws: a distribution on pattern pairs.
struct FiniteCoupling {
    Window window;
    std::vector<std::pair<std::vector<Sym>, std::vector<Sym>>> support;
    std::vector<Q> mass;
};

struct CouplingResult {
    Q value;
    std::optional<FiniteCoupling> coupling;
    lp::Problem problem;
};

// Transport LP between the U(scale) laws of <w1> and <w2> with the mean Hamming cost: a
// lower bound for d_B, since any invariant joining restricts to a feasible point with
// lambda(Delta) equal to that cost.
inline CouplingResult window_lp(const Pattern& w1, const Pattern& w2, int scale,
                                std::size_t max_vars = 1u << 14) {
    if (!same_alphabet(w1.alphabet, w2.alphabet)) throw input_error("alphabet mismatch");
    if (w1.window.dim != w2.window.dim) throw input_error("dimension mismatch");
    Window w = U(scale, w1.window.dim);
    auto a = periodic_marginal({w1}, w), b = periodic_marginal({w2}, w);
    std::vector<std::vector<Sym>> ka, kb;
    for (auto& [k, v] : a) ka.push_back(k);
    for (auto& [k, v] : b) kb.push_back(k);
    if (ka.size() * kb.size() > max_vars) throw budget_error("coupling LP size");
    lp::Problem p;
    const std::size_t nv = ka.size() * kb.size();
    p.c.resize(nv);
    for (std::size_t i = 0; i < ka.size(); ++i)
        for (std::size_t j = 0; j < kb.size(); ++j) {
            long h = 0;
            for (std::size_t t = 0; t < ka[i].size(); ++t) h += ka[i][t] != kb[j][t];
            p.c[i * kb.size() + j] = make_q(h, long(w.cells()));
            p.names.push_back("l_" + std::to_string(i) + "_" + std::to_string(j));
        }
    for (std::size_t i = 0; i < ka.size(); ++i) {
        std::vector<Q> row(nv, Q(0));
        for (std::size_t j = 0; j < kb.size(); ++j) row[i * kb.size() + j] = 1;
        p.A.push_back(row);
        p.b.push_back(a[ka[i]]);
    }
    for (std::size_t j = 0; j < kb.size(); ++j) {
        std::vector<Q> row(nv, Q(0));
        for (std::size_t i = 0; i < ka.size(); ++i) row[i * kb.size() + j] = 1;
        p.A.push_back(row);
        p.b.push_back(b[kb[j]]);
    }
    auto sol = lp::solve(p);
    if (sol.status != lp::Status::optimal) throw inconsistency_error("coupling LP infeasible");
    FiniteCoupling fc{w, {}, {}};
    for (std::size_t i = 0; i < ka.size(); ++i)
        for (std::size_t j = 0; j < kb.size(); ++j)
            if (sol.x[i * kb.size() + j] != 0) {
                fc.support.push_back({ka[i], kb[j]});
                fc.mass.push_back(sol.x[i * kb.size() + j]);
            }
    return {sol.objective, fc, p};
}

enum class CouplingMethod { shift_exact, window_lp };

inline Q coupling_delta_min(const Pattern& w1, const Pattern& w2, CouplingMethod m, int lp_scale = 1) {
    if (m == CouplingMethod::shift_exact) return besicovitch_periodic(w1, w2);
    return window_lp(w1, w2, lp_scale).value;
}

// Periodic measure on a product alphabet, read through one layer.
inline PeriodicMeasure project(const PeriodicMeasure& lambda, std::size_t layer) {
    const auto& A = *lambda.base.alphabet;
    auto al = Alphabet::flat(A.layer(layer).symbols, A.layer(layer).name);
    Pattern p(lambda.base.window, al);
    for (std::size_t i = 0; i < p.cells.size(); ++i) p.cells[i] = A.component(lambda.base.cells[i], layer);
    return {p};
}

inline AlphabetPtr pair_alphabet(const AlphabetPtr& a, const AlphabetPtr& b) {
    require(a->layer_count() == 1 && b->layer_count() == 1, "pair alphabet needs flat factors");
    Layer la = a->layer(0), lb = b->layer(0);
    la.name = "first";
    lb.name = "second";
    return std::make_shared<const Alphabet>(std::vector<Layer>{la, lb});
}

inline Pattern zip(const Pattern& w1, const Pattern& w2, const AlphabetPtr& pa) {
    require(w1.window == w2.window, "window mismatch");
    Pattern p(w1.window, pa);
    for (std::size_t i = 0; i < p.cells.size(); ++i) p.cells[i] = pa->compose({w1.cells[i], w2.cells[i]});
    return p;
}

// ---------------------------------------------------------------------------
// Inner block of the stability characterisation at fixed (delta, eps, rho, gamma).

struct WitnessConfig {
    int noisy_scale = 1;  // window of the (w, b) patterns
    int ref_scale = 1;    // window of w0
    int pair_scale = 1;   // window of (w1, w2)
    int dim = 1;
    int max_rank = 10;    // rank cap when certifying d+ < 3 rho
    unsigned long long budget = 1ULL << 20;
    std::uint64_t seed = 1;
};

enum class VerdictKind { holds, fails, inconclusive };

struct Verdict {
    VerdictKind kind = VerdictKind::inconclusive;
    std::string layer;  // inconclusive: the enumeration layer that ran out
    std::optional<Pattern> w, b;  // fails: the counterexample
    long noisy_patterns = 0, reference_patterns = 0, pair_candidates = 0;
    Z phi_gamma, phi_rho;
};

inline const char* verdict_name(VerdictKind k) {
    switch (k) {
        case VerdictKind::holds: return "holds";
        case VerdictKind::fails: return "fails";
        default: return "inconclusive";
    }
}

enum class Certified { yes, no, unknown };

// d_r^+ < bound, raising the rank until the interval decides it.
inline Certified certify_below(const Measure& a, const Measure& b, const Q& r, const Q& bound, int max_rank) {
    for (int n = 0; n <= max_rank; ++n) {
        auto iv = dplus_truncated(a, b, r, n);
        if (iv.hi < bound) return Certified::yes;
        if (iv.lo >= bound) return Certified::no;
    }
    return Certified::unknown;
}

inline Verdict stability_witness(const ForbiddenSet& F, const Q& delta, const Q& eps, const Q& rho,
                                 const Q& gamma, const WitnessConfig& cfg) {
    Verdict v;
    for (auto* q : {&delta, &eps, &rho, &gamma}) require(*q > 0, "parameters must be positive");
    require(gamma <= rho, "gamma must not exceed rho");
    if (cfg.budget == 0) {
        v.layer = "enumeration";
        return v;
    }
    const long A = long(F.alphabet->size());
    const int kF = F.bounding_k(), d = cfg.dim;
    const Q Ar = A;
    auto cells = [&](int s) { return Z(long(U(s, d).cells())); };
    v.phi_gamma = phi_threshold(gamma, kF, 2 * A, d, cells(cfg.noisy_scale));
    v.phi_rho = phi_threshold(rho, kF, A, d, cells(cfg.ref_scale));
    const Q three_rho = 3 * rho;
    const Q delta_bound = delta + Q(A * A) * rho;

    std::vector<Pattern> refs;
    try {
        enumerate_WF(F, rho, cfg.ref_scale, d, v.phi_rho, {cfg.budget}, [&](const Pattern& w, const Pattern*) {
            refs.push_back(w);
            return true;
        });
    } catch (const budget_error&) {
        v.layer = "reference patterns";
        return v;
    }
    v.reference_patterns = long(refs.size());
    auto rng = make_rng(cfg.seed, SAMPLE_STREAM);
    std::shuffle(refs.begin(), refs.end(), rng);

    std::vector<Pattern> pair_side;
    try {
        for_each_pattern(F.alphabet, U(cfg.pair_scale, d), cfg.budget, [&](const Pattern& p) {
            pair_side.push_back(p);
            return true;
        });
    } catch (const budget_error&) {
        v.layer = "pair patterns";
        return v;
    }
    // second components that are 3rho-close to some w0
    std::vector<char> close_to_ref(pair_side.size(), 0);
    bool unknown_seen = false;
    for (std::size_t j = 0; j < pair_side.size(); ++j)
        for (auto& w0 : refs) {
            auto c = certify_below(PeriodicMeasure{pair_side[j]}, PeriodicMeasure{w0}, Ar, three_rho, cfg.max_rank);
            if (c == Certified::unknown) unknown_seen = true;
            if (c == Certified::yes) {
                close_to_ref[j] = 1;
                break;
            }
        }
    const long pair_cells = long(U(cfg.pair_scale, d).cells());
    bool failed = false;
    EnumerationOptions opt{cfg.budget, true, eps, Ar};
    try {
        enumerate_WF(F, gamma, cfg.noisy_scale, d, v.phi_gamma, opt, [&](const Pattern& w, const Pattern* b) {
            ++v.noisy_patterns;
            bool found = false;
            for (std::size_t i = 0; i < pair_side.size() && !found; ++i) {
                auto c = certify_below(PeriodicMeasure{pair_side[i]}, PeriodicMeasure{w}, Ar, three_rho, cfg.max_rank);
                if (c == Certified::unknown) unknown_seen = true;
                if (c != Certified::yes) continue;
                for (std::size_t j = 0; j < pair_side.size() && !found; ++j) {
                    if (!close_to_ref[j]) continue;
                    ++v.pair_candidates;
                    long h = 0;
                    for (long t = 0; t < pair_cells; ++t) h += pair_side[i].cells[t] != pair_side[j].cells[t];
                    if (make_q(h, pair_cells) <= delta_bound) found = true;
                }
            }
            if (!found) {
                failed = true;
                v.w = w;
                v.b = *b;
                return false;
            }
            return true;
        });
    } catch (const budget_error&) {
        v.layer = "noisy patterns";
        return v;
    }
    if (failed) {
        v.kind = unknown_seen ? VerdictKind::inconclusive : VerdictKind::fails;
        if (unknown_seen) v.layer = "distance rank";
        return v;
    }
    v.kind = VerdictKind::holds;
    return v;
}

}  // namespace nsft
