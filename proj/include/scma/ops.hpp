#pragma once

#include <cstdint>

namespace scma {

// Tally of the arithmetic applied by the receiver stages, at the granularity
// of the message-level updates: kernel exponentials, message products,
// normalizations, Jacobian correction terms. Index arithmetic and residual
// bookkeeping are not tallied.
struct OpCounters {
    std::int64_t mul = 0;
    std::int64_t div = 0;
    std::int64_t exp = 0;
    std::int64_t log = 0;

    void reset() { *this = OpCounters{}; }

    OpCounters& operator+=(const OpCounters& o) {
        mul += o.mul;
        div += o.div;
        exp += o.exp;
        log += o.log;
        return *this;
    }

    std::int64_t total() const { return mul + div + exp + log; }
};

inline OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }

}  // namespace scma
