#pragma once

// Sequential removal analysis: repeatedly drop the smallest p-value and
// recombine the rest until the adjusted combined p-value loses significance.
// Thresholds are re-derived for the current K at every step.

#include <string>
#include <vector>

#include "pvmerge/combiners.hpp"
#include "pvmerge/thresholds.hpp"

namespace pvmerge {

enum class InputFormat { Auto, PlainColumn, Csv };

/// Read p-values from a one-column text file or a CSV with a named column
/// (default "p"; header row optional for plain files). Errors carry the
/// offending line number and value. File order is preserved.
PValueVector ingest_pvalues(const std::string& path,
                            InputFormat format = InputFormat::Auto,
                            const std::string& column = "p");

struct SequentialStep {
  int n_removed;     // entries removed before this step
  int k_remaining;
  double combined;   // F of the remaining values
  double adjusted;   // g_{K-n}^{-1}(combined), capped at 1
  bool significant;  // adjusted < epsilon
};

struct SequentialReport {
  std::vector<SequentialStep> steps;  // up to and including the stopping step
  int stop_index;                     // first non-significant step, or K
};

/// g_K^{-1}(combined) for the threshold function of (method, kind) at size K,
/// capped at 1; the VC threshold is the identity. `mode` selects the r<0 VI
/// form. The Cauchy VAD threshold is only defined on (0, 1/2); combined
/// values beyond its range are reported as 1.
double invert_threshold(const MergingMethod& method, ThresholdKind kind, int K,
                        double combined,
                        ThresholdMode mode = ThresholdMode::MinTailAsymptotic);

/// kind must be VAD or VI. `mode` selects the r<0 VI form
/// (MinTailAsymptotic default; MonteCarlo is rejected here).
/// A remaining p-value of exactly 0 under the Cauchy or an r<0 mean is
/// reported as combined = adjusted = 0 (lower boundary) rather than an error.
SequentialReport run_sequential(const PValueVector& p,
                                const MergingMethod& method,
                                ThresholdKind kind, double epsilon,
                                ThresholdMode mode = ThresholdMode::MinTailAsymptotic);

/// CSV columns: n_removed,K_remaining,combined,adjusted,significant
std::string sequential_csv(const SequentialReport& r, int significant_digits = 6);
std::string sequential_json(const SequentialReport& r);

}  // namespace pvmerge
