#pragma once

// Constants of the weighted Nash and Gagliardo-Nirenberg inequalities.

#include <cmath>

namespace cfp {

/// 27/32
inline constexpr double kNashConstant = 27.0 / 32.0;

/// (sqrt 2 / 2)(5/3)^{5/2}
inline double l4_nash_constant() { return 0.5 * std::sqrt(2.0) * std::pow(5.0 / 3.0, 2.5); }

/// (sqrt 2 / 2)(5/3)^{5/2}(3/2)^3
inline double nash2_constant() { return l4_nash_constant() * 3.375; }

/// (C D)^{(p-1)/3}.
inline double gn_constant(double p) { return std::pow(kNashConstant * nash2_constant(), (p - 1.0) / 3.0); }

/// 27 / (16 (2 - p)(1 - p))
inline double nash_p_constant(double p) { return 27.0 / (16.0 * (2.0 - p) * (1.0 - p)); }

}  // namespace cfp
