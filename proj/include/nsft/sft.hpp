#pragma once

// Named subshifts of finite type used by the experiments.

#include <string>

#include "grid.hpp"

namespace nsft {

inline ForbiddenSet full_shift(int q = 2) {
    ForbiddenSet F;
    F.alphabet = Alphabet::digits(q);
    return F;
}

// No two adjacent 1s (horizontally in 1D; also vertically in 2D).
inline ForbiddenSet golden_mean(int dim = 1) {
    require(dim == 1 || dim == 2, "golden mean shift is defined for d = 1, 2");
    ForbiddenSet F;
    F.alphabet = Alphabet::digits(2);
    Rule h;
    h.window = U(1, dim);
    h.family = "golden-mean";
    h.cells = {exact_cell(0, 0, 0, 1), exact_cell(1, 0, 0, 1)};
    F.add(h);
    if (dim == 2) {
        Rule v = h;
        v.cells = {exact_cell(0, 0, 0, 1), exact_cell(0, 1, 0, 1)};
        F.add(v);
    }
    return F;
}

// "full", "full:<q>", "golden-mean"
inline ForbiddenSet named_sft(const std::string& name, int dim = 1) {
    if (name == "golden-mean") return golden_mean(dim);
    if (name == "full") return full_shift(2);
    if (name.rfind("full:", 0) == 0) {
        int q = 0;
        try {
            q = std::stoi(name.substr(5));
        } catch (const std::exception&) {
            throw input_error("bad alphabet size in '" + name + "'");
        }
        require(q >= 1 && q <= 16, "full shift alphabet size must lie in [1,16]");
        return full_shift(q);
    }
    throw input_error("unknown SFT '" + name + "'");
}

}  // namespace nsft
