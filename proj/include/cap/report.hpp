#pragma once

#include <string>

#include "cap/interp.hpp"

namespace cap {

enum class Verdict { Holds, Equality, Fails, Inapplicable };

const char* to_string(Verdict v);

/// Outcome of checking a computed curve (or single value) against a bound.
/// worst_slack is the signed margin in the direction that makes >= 0 mean
/// the claim holds.
struct ComparisonReport {
  SampledCurve bound_curve;
  SampledCurve computed_curve;
  double worst_slack = 0.0;
  Verdict verdict = Verdict::Holds;
  std::string context;
};

}  // namespace cap
