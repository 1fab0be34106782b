#pragma once

#include "dpdsis/types.hpp"

#include <span>

namespace dpdsis::stats {

/// Normal-consistency factor applied to the median absolute deviation.
inline constexpr double kMadScale = 1.4826;

double median(std::span<const double> values);
double median(VectorRef values);

/// Raw median absolute deviation about the median (no consistency factor).
double mad(VectorRef values);

/// kMadScale * MAD.
double robust_scale(VectorRef values);

double mean(VectorRef values);

/// Sample standard deviation with denominator n - 1.
double sample_sd(VectorRef values);

bool all_finite(VectorRef values);
bool all_finite(MatrixRef values);

/// True when every entry equals the first one.
bool is_constant(VectorRef values);

}  // namespace dpdsis::stats
