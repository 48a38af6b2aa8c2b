// One line per acceptance criterion. Usage: acceptance [path-to-nsft]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "nsft/bounds.hpp"
#include "nsft/compiler.hpp"
#include "nsft/measure.hpp"
#include "nsft/metrics.hpp"
#include "nsft/noise.hpp"
#include "nsft/robinson.hpp"
#include "nsft/sft.hpp"
#include "nsft/tm.hpp"

using namespace nsft;
namespace rb = nsft::robinson;
namespace cc = nsft::compiler;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

std::string nsft_path;

// ---------------------------------------------------------------------------

Outcome tileset_counts() {
    Outcome r;
    auto v = rb::build_tileset(rb::Variant::vanilla).info.size();
    auto e = rb::build_tileset(rb::Variant::enhanced).info.size();
    if (v != 32) r.fail("vanilla has " + std::to_string(v));
    if (e != 172) r.fail("enhanced has " + std::to_string(e));
    r.detail = r.ok ? "vanilla 32, enhanced 172" : r.detail;
    return r;
}

Outcome macro_structure() {
    Outcome r;
    int built = 0;
    for (auto v : {rb::Variant::vanilla, rb::Variant::red_black, rb::Variant::enhanced}) {
        const auto& ts = rb::build_tileset(v);
        for (int n = 1; n <= 5; ++n)
            for (int o = 0; o < 4; ++o) {
                auto c = rb::build_macro_tile({v, n, rb::Orientation(o), {}});
                ++built;
                std::string at = rb::variant_name(v) + " n=" + std::to_string(n) + " " + rb::orientation_name(rb::Orientation(o));
                if (c.width != (1 << n) - 1 || c.height != c.width) r.fail(at + ": side");
                if (!check_local_admissibility(c, ts.forbidden).empty()) r.fail(at + ": violations");
                auto cs = rb::census(c, ts);
                if (cs.bumpy_total != (1L << (2 * (n - 1)))) r.fail(at + ": bumpy count");
                if (v != rb::Variant::vanilla && n >= 3) {
                    int want = (1 << (2 * ((n - 1) / 2))) + 1;
                    if (cs.red_square_sides.empty() || cs.red_square_sides.back() != want) r.fail(at + ": largest Red square");
                }
            }
    }
    if (r.ok) r.detail = std::to_string(built) + " macro-tiles";
    return r;
}

Outcome instability() {
    Outcome r;
    const double eps = 0.4;
    const int N = 5, trials = 100;
    rb::MacroTileSpec spec{rb::Variant::red_black, N, rb::Orientation::NE, {}};
    const auto& ts = rb::build_tileset(spec.variant);
    auto ref = rb::build_macro_tile(spec);
    std::vector<double> d;
    FlipLog all;
    for (int t = 0; t < trials; ++t) {
        std::uint64_t seed = 1000 + std::uint64_t(t);
        auto noise = sample_noise(ref.width, ref.height, eps, seed);
        auto res = flip_process(ref, ts, noise, N, 2, seed);
        d.push_back(bumpy_mismatch_density(res.config, ref, ts).get_d());
        all.events.insert(all.events.end(), res.log.events.begin(), res.log.events.end());
    }
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / trials, var = 0;
    for (double x : d) var += (x - mean) * (x - mean);
    double se = std::sqrt(var / (trials - 1) / trials);
    double predicted = (1 - std::pow(1 - eps * eps, 4)) / 8;
    if (mean < predicted - 3 * se) r.fail("mean mismatch below prediction");
    std::ostringstream os;
    os << "mean " << mean << " se " << se << " predicted " << predicted;
    for (auto& s : flip_statistics(all, eps)) {
        if (!s.z_flippable || std::abs(*s.z_flippable) > 3) r.fail("scale " + std::to_string(s.scale) + " flippable rate");
        if (!s.z_flip || std::abs(*s.z_flip) > 3) r.fail("scale " + std::to_string(s.scale) + " colour split");
        os << "; s" << s.scale << " z=" << (s.z_flippable ? *s.z_flippable : NAN) << "/" << (s.z_flip ? *s.z_flip : NAN);
    }
    if (r.ok) r.detail = os.str();
    return r;
}

Outcome dk_oracle() {
    Outcome r;
    std::mt19937_64 g(45);
    int draws = 0, attempts = 0;
    while (draws < 1000 && attempts < 100000) {
        ++attempts;
        Q alpha(long(11 + g() % 70), 10);          // (1, 8]
        Q beta(long(1 + g() % 99), 100);           // (0, 1)
        long K = long(g() % 5);
        auto rate = polynomial_rate(alpha, beta);
        double vb = rate.validity_bound(K).lo.to_double();
        if (!(vb > 1e-300)) continue;
        double scale = std::pow(10.0, -double(g() % 6)) * (0.05 + 0.95 * unit(g));
        Q eps(vb * scale);
        if (eps <= 0 || !rate.valid_at(eps, K)) continue;
        ++draws;
        auto m = min_Dk_bruteforce(alpha, beta, eps, K, K + 64);
        if (!certainly_le(Interval::of(m.value), rate.bound(eps)))
            r.fail("alpha " + alpha.get_str() + " beta " + beta.get_str() + " K " + std::to_string(K));
    }
    if (draws < 1000) r.fail("only " + std::to_string(draws) + " valid draws");
    if (r.ok) r.detail = std::to_string(draws) + " draws certified";
    return r;
}

Outcome rates() {
    Outcome r;
    auto a = polynomial_rate(4, Q(1, 2));
    double e1 = std::abs(a.exponent.mid() - 1.0 / 3);
    auto b = polynomial_rate(16, Q(3, 4));
    double l3 = std::log2(3.0), want = (2 - l3) / (6 - l3);
    double e2 = std::abs(b.exponent.mid() - want);
    if (!(e1 < 1e-12) || !a.exponent.contains(Q(1, 3))) r.fail("exponent at (4, 1/2)");
    if (!(e2 < 1e-12)) r.fail("exponent at (16, 3/4)");
    std::ostringstream os;
    os << "(4,1/2) err " << e1 << "; (16,3/4) " << b.exponent.mid() << " err " << e2;
    if (r.ok) r.detail = os.str();
    return r;
}

Outcome recurrence() {
    Outcome r;
    if (red_area(1) != 25 || red_area(2) != 589) r.fail("initial values");
    for (int n = 1; n <= 12; ++n) {
        Z rn = red_area(n);
        Z lower = zpow(4, n + 1) * (zpow(4, n) - zpow(3, n));
        Z side = zpow(2, 2 * n + 1) - 1;
        if (rn < lower) r.fail("lower bound at n=" + std::to_string(n));
        if (side * side - rn > 4 * zpow(12, n)) r.fail("outside bound at n=" + std::to_string(n));
    }
    if (r.ok) r.detail = "n <= 12, r_12 = " + red_area(12).get_str();
    return r;
}

Outcome weak_star() {
    Outcome r;
    Measure a = PeriodicMeasure{word("0")}, b = PeriodicMeasure{word("1")};
    for (int n = 1; n <= 12; ++n) {
        auto iv = dplus_truncated(a, b, 1, n);
        if (!(iv.lo <= Q(4, 3) && Q(4, 3) <= iv.hi)) r.fail("4/3 outside at rank " + std::to_string(n));
        if (iv.hi - iv.lo > Q(2) / qpow(Q(2), n)) r.fail("tail width at rank " + std::to_string(n));
    }
    std::mt19937_64 g(77);
    auto A1 = Alphabet::digits(2), A2 = Alphabet::digits(3);
    auto P = pair_alphabet(A1, A2);
    auto joining = [&] {
        int len = 1 + int(g() % 5);
        Pattern x(U(len - 1, 1), A1), y(U(len - 1, 1), A2);
        for (auto& s : x.cells) s = Sym(g() % 2);
        for (auto& s : y.cells) s = Sym(g() % 3);
        return PeriodicMeasure{zip(x, y, P)};
    };
    int checks = 0;
    for (int t = 0; t < 100; ++t) {
        auto l1 = joining(), l2 = joining();
        for (int n = 0; n <= 4; ++n) {
            auto joint = dplus_truncated(l1, l2, 1, n);
            auto marg = dplus_truncated(project(l1, 0), project(l2, 0), Q(3), n);
            ++checks;
            if (!(marg.lo <= joint.lo)) r.fail("projection inequality, coupling " + std::to_string(t));
        }
    }
    if (r.ok) r.detail = "ranks 1..12; " + std::to_string(checks) + " projection checks";
    return r;
}

std::vector<Pattern> all_words(int len) {
    std::vector<Pattern> out;
    for (long m = 0; m < (1L << len); ++m) {
        std::string s;
        for (int i = 0; i < len; ++i) s += char('0' + ((m >> i) & 1));
        out.push_back(word(s));
    }
    return out;
}

Outcome covering() {
    Outcome r;
    const Q delta(1, 2);
    auto p = covering_params(delta, 2, 1);
    const int rank = p.n_radius;
    // psi is far beyond enumeration; the sub-window is U_7 (all words of length <= 8).
    const int sub = 8;
    std::vector<Measure> centres;
    for (int len = 1; len <= sub; ++len)
        for (auto& w : all_words(len)) centres.push_back(PeriodicMeasure{w});

    std::vector<Measure> family;
    for (int j = 0; j <= 8; ++j) family.push_back(BernoulliProduct{Q(j, 8)});
    std::mt19937_64 g(8);
    for (int t = 0; t < 200; ++t) {
        int len = 1 + int(g() % 16);
        std::string s;
        for (int i = 0; i < len; ++i) s += char('0' + g() % 2);
        family.push_back(PeriodicMeasure{word(s)});
    }
    for (std::size_t i = 0; i < family.size(); ++i) {
        bool hit = false;
        for (auto& c : centres)
            if (dplus_truncated(family[i], c, 1, rank).hi <= delta) {
                hit = true;
                break;
            }
        if (!hit) r.fail("family member " + std::to_string(i) + " not covered");
    }

    // exclusion for the golden mean: w over the threshold is far from every sampled invariant measure of F
    auto F = golden_mean();
    const Q rho(1, 16);
    const int m = 7;
    Z phi = phi_threshold(rho, F.bounding_k(), 2, 1, Z(long(U(m, 1).cells())));
    std::vector<Measure> mf{PeriodicMeasure{word("0")}};
    while (mf.size() < 10) {
        int len = 2 + int(g() % 7);
        std::string s;
        for (int i = 0; i < len; ++i) s += char('0' + g() % 2);
        bool ok = true;
        for (int i = 0; i < len; ++i) ok = ok && !(s[i] == '1' && s[(i + 1) % len] == '1');
        if (ok) mf.push_back(PeriodicMeasure{word(s)});
    }
    long excluded = 0;
    for (auto& w : all_words(m + 1)) {
        if (Z(forbidden_occurrences(w, F)) <= phi) continue;
        ++excluded;
        for (auto& mu : mf)
            if (!(dplus_truncated(PeriodicMeasure{w}, mu, 1, 3).lo > rho)) r.fail("exclusion fails for " + std::to_string(excluded));
    }
    if (excluded == 0) r.fail("no pattern above the threshold");
    std::ostringstream os;
    os << family.size() << " measures within 1/2 of " << centres.size() << " centres (psi ~ 2^" << p.psi_bits.get_str()
       << "); " << excluded << " patterns above phi=" << phi.get_str() << " excluded";
    if (r.ok) r.detail = os.str();
    return r;
}

std::string verdict_text(const Verdict& v) {
    std::ostringstream os;
    os << verdict_name(v.kind) << ' ' << v.layer << ' ' << v.noisy_patterns << ' ' << v.reference_patterns << ' '
       << v.pair_candidates;
    return os.str();
}

int sh(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome witness() {
    Outcome r;
    WitnessConfig full;
    full.noisy_scale = 3;
    full.ref_scale = full.pair_scale = 2;
    auto v = stability_witness(full_shift(2), Q(1, 2), Q(1, 4), Q(1, 4), Q(1, 8), full);
    if (v.kind != VerdictKind::holds || v.noisy_patterns == 0) r.fail("full shift: " + verdict_text(v));

    WitnessConfig toy;
    toy.noisy_scale = toy.ref_scale = toy.pair_scale = 2;
    std::string first;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        toy.seed = s;
        auto a = verdict_text(stability_witness(golden_mean(), Q(1, 2), Q(1, 4), Q(1, 4), Q(1, 4), toy));
        auto b = verdict_text(stability_witness(golden_mean(), Q(1, 2), Q(1, 4), Q(1, 4), Q(1, 4), toy));
        if (a != b) r.fail("seed " + std::to_string(s) + " not deterministic");
        if (s == 1) first = a;
        else if (a.substr(0, a.find(' ')) != first.substr(0, first.find(' '))) r.fail("verdict differs across seeds");
    }
    std::string replay = "library only";
    if (!nsft_path.empty()) {
        auto dir = fs::temp_directory_path() / ("nsft-accept-" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        for (int s = 1; s <= 3; ++s) {
            auto a = dir / ("w" + std::to_string(s)), b = dir / ("r" + std::to_string(s));
            int rc = sh(nsft_path + " witness --sft golden-mean --delta 1/2 --eps 1/4 --rho 1/4 --gamma 1/4"
                                    " --noisy-scale 2 --ref-scale 2 --pair-scale 2 --seed " + std::to_string(s) +
                        " --out " + a.string());
            if (rc != 0) r.fail("nsft witness failed");
            rc = sh(nsft_path + " replay " + (a / "manifest.txt").string() + " --out " + b.string());
            if (rc != 0 || slurp(a / "verdict.txt") != slurp(b / "verdict.txt")) r.fail("replay differs for seed " + std::to_string(s));
        }
        fs::remove_all(dir);
        replay = "CLI replay identical";
    }
    if (r.ok) r.detail = "full shift holds; golden mean " + first.substr(0, first.find(' ')) + " for seeds 1-3; " + replay;
    return r;
}

Outcome compiler_battery() {
    Outcome r;
    const std::vector<std::string> names{"right_mover", "immediate_halter", "two_step_halter", "busy_beaver3",
                                         "return_halter", "seek_b"};
    int checks = 0;
    for (auto& nm : names) {
        auto M = tm::sample_machine(nm);
        for (auto v : {cc::Variant::p1, cc::Variant::s1}) {
            auto ct = cc::compile(v, M);
            bool frozen_before = false;
            for (int n = 1; n <= 4; ++n) {
                std::string at = nm + " " + cc::variant_name(v) + " n=" + std::to_string(n);
                bool halts = tm::simulate_tm(M, {}, 1L << n).halted;
                try {
                    auto b = cc::verify_scale_behaviour(ct, n);
                    ++checks;
                    if (v == cc::Variant::p1 && b.transition_admissible != halts) r.fail(at + ": transition");
                    if (v == cc::Variant::s1) {
                        if (b.freeze_active != halts) r.fail(at + ": freeze");
                        if (frozen_before && !b.freeze_active) r.fail(at + ": freeze not monotone");
                        frozen_before = b.freeze_active;
                    }
                } catch (const std::exception& e) {
                    r.fail(at + ": " + e.what());
                }
            }
        }
    }
    // Toeplitz laws for every u over {a,b} of length <= 6
    long words = 0;
    for (int len = 0; len <= 6; ++len)
        for (long m = 0; m < (1L << len); ++m) {
            std::vector<std::string> u;
            for (int i = 0; i < len; ++i) u.push_back((m >> i) & 1 ? "b" : "a");
            ++words;
            for (int n = 1; n <= 6; ++n) {
                auto w = tm::toeplitz_prefix(u, n);
                auto prev = tm::toeplitz_prefix(u, n - 1);
                if (w.size() != (std::size_t(1) << n) - 1) r.fail("|w_n|");
                std::vector<std::string> expect = prev;
                expect.push_back(tm::dollar_for(tm::letter_at(u, n + 1)));
                expect.push_back(tm::dollar_for(tm::letter_at(u, 1)));
                expect.insert(expect.end(), prev.begin(), prev.end());
                expect.push_back(tm::letter_at(u, n));
                if (tm::readonly_tape_view(u, n) != expect) r.fail("view law");
                std::vector<std::string> rec = prev;
                rec.push_back(tm::letter_at(u, n));
                rec.insert(rec.end(), prev.begin(), prev.end());
                if (w != rec) r.fail("w_n = w_{n-1} u_n w_{n-1}");
            }
        }
    if (r.ok) r.detail = std::to_string(checks) + " scale checks over " + std::to_string(names.size()) +
                         " machines; Toeplitz laws on " + std::to_string(words) + " words";
    return r;
}

// min over relative shifts of the disagreement density of the two periodic words
Q brute_besicovitch(const std::string& a, const std::string& b) {
    std::size_t L = std::lcm(a.size(), b.size());
    long best = long(L) + 1;
    for (std::size_t s = 0; s < L; ++s) {
        long mis = 0;
        for (std::size_t i = 0; i < L; ++i) mis += a[i % a.size()] != b[(i + s) % b.size()];
        best = std::min(best, mis);
    }
    return make_q(best, long(L));
}

Outcome besicovitch() {
    Outcome r;
    std::vector<std::string> ws;
    for (int len = 1; len <= 4; ++len)
        for (long m = 0; m < (1L << len); ++m) {
            std::string s;
            for (int i = 0; i < len; ++i) s += char('0' + ((m >> i) & 1));
            ws.push_back(s);
        }
    long pairs = 0;
    for (auto& a : ws)
        for (auto& b : ws) {
            ++pairs;
            if (besicovitch_periodic(word(a), word(b)) != brute_besicovitch(a, b)) r.fail(a + " vs " + b);
        }
    std::mt19937_64 g(11);
    for (int t = 0; t < 100; ++t) {
        std::string a, b;
        for (int i = 0, n = 1 + int(g() % 5); i < n; ++i) a += char('0' + g() % 2);
        for (int i = 0, n = 1 + int(g() % 5); i < n; ++i) b += char('0' + g() % 2);
        Q lp = coupling_delta_min(word(a), word(b), CouplingMethod::window_lp, 2);
        if (lp > brute_besicovitch(a, b)) r.fail("window-lp above d_B for " + a + " vs " + b);
    }
    if (r.ok) r.detail = std::to_string(pairs) + " exhaustive pairs; 100 LP pairs";
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) nsft_path = argv[1];
    struct Item {
        int id;
        double limit_s;
        std::function<Outcome()> run;
    };
    std::vector<Item> items{{1, 1, tileset_counts},   {2, 30, macro_structure}, {3, 300, instability},
                            {4, 30, dk_oracle},       {5, 1, rates},            {6, 1, recurrence},
                            {7, 60, weak_star},       {8, 300, covering},       {9, 300, witness},
                            {10, 600, compiler_battery}, {11, 120, besicovitch}};
    int failed = 0;
    for (auto& it : items) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s > it.limit_s) o.fail("runtime " + std::to_string(s) + " s over " + std::to_string(it.limit_s) + " s");
        failed += !o.ok;
        std::printf("criterion %2d: %s  %.2fs/%gs  %s\n", it.id, o.ok ? "PASS" : "FAIL", s, it.limit_s, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(items.size()) - failed, items.size());
    return failed ? 1 : 0;
}
