#ifndef REGIONS_BIG_COUNT_HPP
#define REGIONS_BIG_COUNT_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace regions {

/// Exact nonnegative integer used for every bound and every region count.
using BigCount = boost::multiprecision::cpp_int;

inline std::string to_string(const BigCount& value) { return value.str(); }

/// Binomial coefficient C(n, k), zero when k > n.
inline BigCount binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    if (k > n - k) {
        k = n - k;
    }
    BigCount result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        result *= n - k + i;
        result /= i;
    }
    return result;
}

/// Sum of C(n, j) for j = 0..d.
inline BigCount binomial_prefix_sum(std::uint64_t n, std::uint64_t d) {
    BigCount total = 0;
    BigCount term = 1;
    for (std::uint64_t j = 0; j <= d && j <= n; ++j) {
        total += term;
        term *= n - j;
        term /= j + 1;
    }
    return total;
}

inline BigCount power(const BigCount& base, std::uint64_t exponent) {
    BigCount result = 1;
    BigCount b = base;
    while (exponent > 0) {
        if (exponent & 1U) {
            result *= b;
        }
        b *= b;
        exponent >>= 1U;
    }
    return result;
}

} // namespace regions

#endif
