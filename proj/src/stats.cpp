#include "dpdsis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpdsis::stats {

double median(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of an empty sample");
    }
    std::vector<double> buf(values.begin(), values.end());
    const std::size_t mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
    const double upper = buf[mid];
    if (buf.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double median(VectorRef values) {
    return median(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

double mad(VectorRef values) {
    const double med = median(values);
    Vector dev = (values.array() - med).abs();
    return median(dev);
}

double robust_scale(VectorRef values) { return kMadScale * mad(values); }

double mean(VectorRef values) { return values.mean(); }

double sample_sd(VectorRef values) {
    const Index n = values.size();
    if (n < 2) {
        return 0.0;
    }
    const double m = values.mean();
    return std::sqrt((values.array() - m).square().sum() / static_cast<double>(n - 1));
}

bool all_finite(VectorRef values) { return values.allFinite(); }

bool all_finite(MatrixRef values) { return values.allFinite(); }

bool is_constant(VectorRef values) {
    if (values.size() == 0) {
        return true;
    }
    const double first = values[0];
    return (values.array() == first).all();
}

}  // namespace dpdsis::stats
