#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace nsft {

using Q = mpq_class;
using Z = mpz_class;

inline Q make_q(long num, long den = 1) {
    Q q(num, den);
    q.canonicalize();
    return q;
}

inline Q parse_q(const std::string& s) {
    Q q(s);
    q.canonicalize();
    return q;
}

inline std::string str(const Q& q) { return q.get_str(); }
inline std::string str(const Z& z) { return z.get_str(); }

inline Z zpow(long base, unsigned long e) {
    Z r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), e);
    return r;
}

inline Q qpow(const Q& b, unsigned long e) {
    Z num, den;
    mpz_pow_ui(num.get_mpz_t(), b.get_num_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), b.get_den_mpz_t(), e);
    Q r(num, den);
    r.canonicalize();
    return r;
}

inline Q qabs(const Q& q) { return q < 0 ? Q(-q) : q; }

// ceil(log2(x)) for a positive rational
inline long ceil_log2(const Q& x) {
    long k = 0;
    Q p = 1;
    if (x <= 1) {
        while (p / 2 >= x) {
            p /= 2;
            --k;
        }
        return k;
    }
    while (p < x) {
        p *= 2;
        ++k;
    }
    return k;
}

}  // namespace nsft
