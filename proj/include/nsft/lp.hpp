#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rational.hpp"

namespace nsft::lp {

// minimise c.x subject to A x = b, x >= 0
struct Problem {
    std::vector<std::vector<Q>> A;
    std::vector<Q> b;
    std::vector<Q> c;
    std::vector<std::string> names;
};

enum class Status { optimal, infeasible, unbounded };

struct Solution {
    Status status = Status::infeasible;
    Q objective;
    std::vector<Q> x;
};

// Dense two-phase simplex over exact rationals with Bland's rule, so it cannot cycle.
class Simplex {
public:
    explicit Simplex(const Problem& p) : m_(p.A.size()), n_(p.c.size()) {
        T_.assign(m_ + 1, std::vector<Q>(n_ + m_ + 1, Q(0)));
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            Q sign = p.b[i] < 0 ? -1 : 1;
            for (std::size_t j = 0; j < n_; ++j) T_[i][j] = sign * p.A[i][j];
            T_[i][n_ + i] = 1;
            T_[i][n_ + m_] = sign * p.b[i];
            basis_[i] = n_ + i;
        }
        c_ = p.c;
    }

    Solution solve() {
        Solution s;
        // phase 1: minimise the sum of artificials
        std::vector<Q> phase1(n_ + m_, Q(0));
        for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = 1;
        set_objective(phase1);
        run(n_ + m_);
        if (T_[m_][n_ + m_] != 0) return s;
        // drive remaining artificials out of the basis where possible
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            for (std::size_t j = 0; j < n_; ++j)
                if (T_[i][j] != 0) {
                    pivot(i, j);
                    break;
                }
        }
        std::vector<Q> c2(n_ + m_, Q(0));
        for (std::size_t j = 0; j < n_; ++j) c2[j] = c_[j];
        set_objective(c2);
        if (!run(n_)) {
            s.status = Status::unbounded;
            return s;
        }
        s.status = Status::optimal;
        s.x.assign(n_, Q(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) s.x[basis_[i]] = T_[i][n_ + m_];
        s.objective = 0;
        for (std::size_t j = 0; j < n_; ++j) s.objective += c_[j] * s.x[j];
        return s;
    }

private:
    void set_objective(const std::vector<Q>& c) {
        auto& z = T_[m_];
        std::fill(z.begin(), z.end(), Q(0));
        for (std::size_t j = 0; j < c.size(); ++j) z[j] = c[j];
        for (std::size_t i = 0; i < m_; ++i) {
            const Q cb = c[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t j = 0; j <= n_ + m_; ++j) z[j] -= cb * T_[i][j];
        }
    }

    // Columns >= limit never enter. Returns false when unbounded.
    bool run(std::size_t limit) {
        while (true) {
            std::size_t e = limit;
            for (std::size_t j = 0; j < limit; ++j)
                if (T_[m_][j] < 0) {
                    e = j;
                    break;
                }
            if (e == limit) return true;
            std::size_t leave = m_;
            Q best;
            for (std::size_t i = 0; i < m_; ++i) {
                if (T_[i][e] <= 0) continue;
                Q ratio = T_[i][n_ + m_] / T_[i][e];
                if (leave == m_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave == m_) return false;
            pivot(leave, e);
        }
    }

    void pivot(std::size_t r, std::size_t col) {
        const Q pv = T_[r][col];
        for (auto& v : T_[r]) v /= pv;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r || T_[i][col] == 0) continue;
            const Q f = T_[i][col];
            for (std::size_t j = 0; j <= n_ + m_; ++j)
                if (T_[r][j] != 0) T_[i][j] -= f * T_[r][j];
        }
        basis_[r] = col;
    }

    std::size_t m_, n_;
    std::vector<std::vector<Q>> T_;
    std::vector<std::size_t> basis_;
    std::vector<Q> c_;
};

inline Solution solve(const Problem& p) { return Simplex(p).solve(); }

// CPLEX LP text, for cross-checks with external solvers. Rationals are written as decimals
// only when exact; otherwise as a/b scaled into the row by the row's lcm of denominators.
inline void write_cplex_lp(std::ostream& os, const Problem& p) {
    auto name = [&](std::size_t j) { return j < p.names.size() ? p.names[j] : "x" + std::to_string(j); };
    auto lcm_row = [](const std::vector<Q>& row, const Q& extra) {
        Z l = extra.get_den();
        for (auto& v : row) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
        return l;
    };
    auto term = [&](std::ostream& o, const Q& v, const std::string& nm, bool first) {
        if (v == 0) return first;
        if (!first || v < 0) o << (v < 0 ? " - " : " + ");
        o << qabs(v).get_str() << " " << nm;
        return false;
    };
    os << "\\ nsft coupling LP\nMinimize\n obj:";
    Z l = lcm_row(p.c, Q(1));
    bool first = true;
    for (std::size_t j = 0; j < p.c.size(); ++j) first = term(os, Q(p.c[j] * l), name(j), first);
    if (first) os << " 0 " << name(0);
    os << "\n\\ objective scaled by " << l.get_str() << "\nSubject To\n";
    for (std::size_t i = 0; i < p.A.size(); ++i) {
        Z li = lcm_row(p.A[i], p.b[i]);
        os << " c" << i << ":";
        bool f = true;
        for (std::size_t j = 0; j < p.A[i].size(); ++j) f = term(os, Q(p.A[i][j] * li), name(j), f);
        if (f) os << " 0 " << name(0);
        os << " = " << Q(p.b[i] * li).get_str() << "\n";
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < p.c.size(); ++j) os << " " << name(j) << " >= 0\n";
    os << "End\n";
}

}  // namespace nsft::lp
