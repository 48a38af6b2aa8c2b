#pragma once

#include <stdexcept>
#include <string>

namespace nsft {

// Exit-code classes used by the CLI: invalid input, budget, internal inconsistency.
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& layer)
        : std::runtime_error("budget exceeded: " + layer), layer_(layer) {}
    const std::string& layer() const { return layer_; }

private:
    std::string layer_;
};

struct inconsistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw input_error(msg);
}

}  // namespace nsft
