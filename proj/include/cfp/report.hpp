#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace cfp {

/// Relative slack for quadrature error in inequality checks.
inline constexpr double kRelativeSlack = 1e-10;

/// One evaluated inequality lhs <= rhs.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool holds = true;
  std::string regime;
  std::vector<std::pair<std::string, double>> constants;
  /// true when the inequality reads lhs >= rhs
  bool lower_bound = false;

  double constant(const std::string& key) const {
    for (const auto& [k, v] : constants) {
      if (k == key) return v;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

/// lhs / rhs, with 0 for lhs = 0 and +inf for rhs = 0 < lhs.
inline double safe_ratio(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

/// `abs_slack` absorbs rounding when both sides are zero in exact arithmetic.
inline InequalityReport make_report(std::string name, double lhs, double rhs, std::string regime,
                                    std::vector<std::pair<std::string, double>> constants = {},
                                    double abs_slack = 0.0, double rel_slack = kRelativeSlack) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.ratio = safe_ratio(lhs, rhs);
  r.holds = lhs <= rhs * (1.0 + rel_slack) + abs_slack;
  r.regime = std::move(regime);
  r.constants = std::move(constants);
  return r;
}

/// Report for lhs >= rhs; ratio stays lhs / rhs.
inline InequalityReport make_lower_bound_report(std::string name, double lhs, double rhs, std::string regime,
                                                std::vector<std::pair<std::string, double>> constants = {}) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.ratio = safe_ratio(lhs, rhs);
  r.holds = rhs <= lhs * (1.0 + kRelativeSlack);
  r.regime = std::move(regime);
  r.constants = std::move(constants);
  r.lower_bound = true;
  return r;
}

}  // namespace cfp
