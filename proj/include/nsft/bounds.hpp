#pragma once

#include <mpfr.h>

#include <algorithm>
#include <string>
#include <utility>

#include "errors.hpp"
#include "rational.hpp"

namespace nsft {

constexpr mpfr_prec_t REAL_PREC = 256;

// Owning mpfr value.
class Real {
public:
    Real() { mpfr_init2(v_, REAL_PREC); mpfr_set_zero(v_, 1); }
    Real(const Real& o) { mpfr_init2(v_, REAL_PREC); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real& operator=(const Real& o) {
        if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    std::string str(int digits = 40) const {
        char buf[256];
        mpfr_snprintf(buf, sizeof buf, "%.*Rg", digits, v_);
        return buf;
    }

private:
    mpfr_t v_;
};

// Closed interval with outward rounding. Operations below assume the operand signs noted.
struct Interval {
    Real lo, hi;

    static Interval of(const Q& q) {
        Interval r;
        mpfr_set_q(r.lo.get(), q.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(r.hi.get(), q.get_mpq_t(), MPFR_RNDU);
        return r;
    }
    double mid() const { return (lo.to_double() + hi.to_double()) / 2; }
    double width() const {
        Real w;
        mpfr_sub(w.get(), hi.get(), lo.get(), MPFR_RNDU);
        return w.to_double();
    }
    bool positive() const { return mpfr_sgn(lo.get()) > 0; }
    bool contains(const Q& q) const {
        return mpfr_cmp_q(lo.get(), q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi.get(), q.get_mpq_t()) >= 0;
    }
};

inline Interval operator+(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_add(r.lo.get(), a.lo.get(), b.lo.get(), MPFR_RNDD);
    mpfr_add(r.hi.get(), a.hi.get(), b.hi.get(), MPFR_RNDU);
    return r;
}

inline Interval operator-(const Interval& a, const Interval& b) {
    Interval r;
    mpfr_sub(r.lo.get(), a.lo.get(), b.hi.get(), MPFR_RNDD);
    mpfr_sub(r.hi.get(), a.hi.get(), b.lo.get(), MPFR_RNDU);
    return r;
}

// positive operands
inline Interval operator*(const Interval& a, const Interval& b) {
    require(a.positive() && b.positive(), "interval product needs positive operands");
    Interval r;
    mpfr_mul(r.lo.get(), a.lo.get(), b.lo.get(), MPFR_RNDD);
    mpfr_mul(r.hi.get(), a.hi.get(), b.hi.get(), MPFR_RNDU);
    return r;
}

// positive divisor
inline Interval operator/(const Interval& a, const Interval& b) {
    require(b.positive(), "interval quotient needs a positive divisor");
    Interval r;
    mpfr_div(r.lo.get(), a.lo.get(), mpfr_sgn(a.lo.get()) >= 0 ? b.hi.get() : b.lo.get(), MPFR_RNDD);
    mpfr_div(r.hi.get(), a.hi.get(), mpfr_sgn(a.hi.get()) >= 0 ? b.lo.get() : b.hi.get(), MPFR_RNDU);
    return r;
}

inline Interval log(const Interval& a) {
    require(a.positive(), "log of a non-positive interval");
    Interval r;
    mpfr_log(r.lo.get(), a.lo.get(), MPFR_RNDD);
    mpfr_log(r.hi.get(), a.hi.get(), MPFR_RNDU);
    return r;
}

inline Interval sqrt(const Interval& a) {
    Interval r;
    mpfr_sqrt(r.lo.get(), a.lo.get(), MPFR_RNDD);
    mpfr_sqrt(r.hi.get(), a.hi.get(), MPFR_RNDU);
    return r;
}

inline Interval neg(const Interval& a) {
    Interval r;
    mpfr_neg(r.lo.get(), a.hi.get(), MPFR_RNDD);
    mpfr_neg(r.hi.get(), a.lo.get(), MPFR_RNDU);
    return r;
}

// x^y for x > 0: monotone in each argument, so the corners bound it.
inline Interval pow(const Interval& x, const Interval& y) {
    require(x.positive(), "pow needs a positive base");
    Interval r;
    bool first = true;
    for (auto* a : {&x.lo, &x.hi})
        for (auto* b : {&y.lo, &y.hi}) {
            Real lo, hi;
            mpfr_pow(lo.get(), a->get(), b->get(), MPFR_RNDD);
            mpfr_pow(hi.get(), a->get(), b->get(), MPFR_RNDU);
            if (first || mpfr_less_p(lo.get(), r.lo.get())) r.lo = lo;
            if (first || mpfr_greater_p(hi.get(), r.hi.get())) r.hi = hi;
            first = false;
        }
    return r;
}

inline Interval max(const Interval& a, const Interval& b) {
    Interval r;
    r.lo = mpfr_greater_p(a.lo.get(), b.lo.get()) ? a.lo : b.lo;
    r.hi = mpfr_greater_p(a.hi.get(), b.hi.get()) ? a.hi : b.hi;
    return r;
}

// Certified comparisons: true only when every point of a is below every point of b.
inline bool certainly_le(const Interval& a, const Interval& b) { return mpfr_lessequal_p(a.hi.get(), b.lo.get()); }
inline bool certainly_lt(const Interval& a, const Interval& b) { return mpfr_less_p(a.hi.get(), b.lo.get()); }

// ---------------------------------------------------------------------------

struct ConstructionProfile {
    Z p = 1;  // period
    Z C = 0;  // reconstruction radius
    Q rho = 0;
    int d = 2;
    std::string grid_note;
};

inline void validate(const ConstructionProfile& pr) {
    if (pr.p < 1 || pr.C < 0 || pr.rho < 0 || pr.rho > 1 || pr.d < 1) throw input_error("invalid construction profile");
}

// 48 (2 (C + ceil(p/2)) + 1)^d eps + rho
inline Q besicovitch_bound(const ConstructionProfile& pr, const Q& eps) {
    validate(pr);
    require(eps >= 0 && eps <= 1, "epsilon must lie in [0,1]");
    Z half;
    mpz_cdiv_q_ui(half.get_mpz_t(), pr.p.get_mpz_t(), 2);
    Z side = 2 * (pr.C + half) + 1, vol;
    mpz_pow_ui(vol.get_mpz_t(), side.get_mpz_t(), (unsigned long)pr.d);
    return Q(48 * vol) * eps + pr.rho;
}

struct RateReport {
    Q alpha, beta;
    Interval theta, exponent, constant;

    // eps <= theta / alpha^{K (1 + theta)}, certified; false when undecided
    bool valid_at(const Q& eps, long K) const { return certainly_le(Interval::of(eps), validity_bound(K)); }
    Interval validity_bound(long K) const {
        Interval one = Interval::of(1);
        if (K == 0) return theta;
        return theta / pow(Interval::of(alpha), Interval::of(Q(K)) * (one + theta));
    }
    // constant * eps^{exponent}
    Interval bound(const Q& eps) const { return constant * pow(Interval::of(eps), exponent); }
};

inline RateReport polynomial_rate(const Q& alpha, const Q& beta) {
    if (!(beta > 0 && beta < 1 && alpha > 1)) throw input_error("need 0 < beta < 1 < alpha");
    RateReport r;
    r.alpha = alpha;
    r.beta = beta;
    Interval a = Interval::of(alpha), b = Interval::of(beta), one = Interval::of(1);
    r.theta = neg(log(b)) / log(a);
    r.exponent = r.theta / (one + r.theta);
    Interval inv = one / r.theta;
    Interval s = pow(r.theta, one / (one + r.theta)) + pow(inv, one / (one + inv));
    r.constant = max(sqrt(a), sqrt(one / b)) * s;
    return r;
}

struct DkMin {
    Q value;
    long argmin = 0;
};

// exact min of eps alpha^k + beta^k over k in [K, k_max]; ties go to the smallest k
inline DkMin min_Dk_bruteforce(const Q& alpha, const Q& beta, const Q& eps, long K, long k_max) {
    require(k_max >= K, "k_max must be at least K");
    require(K >= 0, "negative K");
    DkMin best;
    bool first = true;
    Q ak = qpow(alpha, (unsigned long)K), bk = qpow(beta, (unsigned long)K);
    for (long k = K; k <= k_max; ++k) {
        Q v = eps * ak + bk;
        if (first || v < best.value) best = {v, k};
        first = false;
        ak *= alpha;
        bk *= beta;
    }
    return best;
}

// Real minimiser of eps alpha^x + beta^x: alpha^x = (theta/eps)^{1/(1+theta)}.
inline Interval real_argmin(const RateReport& r, const Q& eps) {
    require(eps > 0, "epsilon must be positive");
    Interval one = Interval::of(1);
    return log(r.theta / Interval::of(eps)) / ((one + r.theta) * log(Interval::of(r.alpha)));
}

enum class Construction { enhanced, p1 };

inline Construction parse_construction(const std::string& s) {
    if (s == "enhanced") return Construction::enhanced;
    if (s == "p1") return Construction::p1;
    throw input_error("unsupported construction: " + s);
}

// r_1 = 25, r_{n+1} = 12 r_n + (4^{n+1} + 1)^2
inline Z red_area(int n) {
    require(n >= 1, "scale must be >= 1");
    Z r = 25;
    for (int k = 1; k < n; ++k) {
        Z s = zpow(4, (unsigned long)(k + 1)) + 1;
        r = 12 * r + s * s;
    }
    return r;
}

inline ConstructionProfile construction_constants(Construction which, int n) {
    require(n >= 1, "scale must be >= 1");
    ConstructionProfile pr;
    pr.d = 2;
    if (which == Construction::enhanced) {
        Z s = zpow(2, (unsigned long)n) - 1;
        pr.p = zpow(2, (unsigned long)(n + 1));
        pr.C = s;
        pr.rho = 1 - Q(s * s) / Q(zpow(4, (unsigned long)n));
        pr.grid_note = "level-" + std::to_string(n) + " crosses of the enhanced Robinson structure";
    } else {
        Z side = zpow(2, (unsigned long)(2 * n + 1)) - 1;
        pr.p = zpow(4, (unsigned long)(n + 1));
        pr.C = side;
        pr.rho = 1 - Q(red_area(n)) / Q(side * side);
        pr.grid_note = "cells outside the Red squares of the " + std::to_string(2 * n + 1) + "-macro-tiles";
    }
    pr.rho.canonicalize();
    return pr;
}

inline ConstructionProfile structural_constants(const std::string& which, int n) {
    if (which == "enhanced" || which == "p1") return construction_constants(parse_construction(which), n);
    throw input_error("unsupported variant for structural constants: " + which);
}

}  // namespace nsft
