#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace abstain::verify {

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // smallest margin seen; negative beyond tolerance is a violation
  bool passed = true;
};

struct VerifyOptions {
  bool quick = false;
  double alpha = 2.0;
  std::vector<double> costs{0.05, 0.1};  // for the bound on synthetic tasks
  std::uint64_t seed = 0;
};

// Individual property grids. Sizes shrink when quick is set.
PropertyResult check_dominance(const VerifyOptions& options);
PropertyResult check_sign_agreement(const VerifyOptions& options);
PropertyResult check_bernoulli_grid(const VerifyOptions& options);
PropertyResult check_gap_minimum(const VerifyOptions& options);
PropertyResult check_infimum_at_zero(const VerifyOptions& options);
PropertyResult check_psi_domination(const VerifyOptions& options);
PropertyResult check_bound_on_tasks(const VerifyOptions& options);

std::vector<PropertyResult> run_property_suite(const VerifyOptions& options);

/// CSV with header property,cases,violations,worst,status.
void write_property_csv(std::ostream& out, const std::vector<PropertyResult>& results);

}  // namespace abstain::verify
