#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dhsqr {

// Verification harness behind `dhsqr verify` and the acceptance tests.
// Criteria 1-7 are fast property/oracle checks; 8-13 are desk-scale
// reproductions of the reference table regimes (medians over replicates).
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  int replicates = 10;       // desk-scale criteria use medians over these
  bool fast_only = false;    // run criteria 1-7 only
  bool repro_only = false;   // run criteria 8-13 only
  int threads = 0;           // 0 -> DHSQR_THREADS or hardware concurrency
  std::string scratch_dir = "acceptance_scratch";
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

// One "[PASS]/[FAIL] criterion N ..." line per result; returns true when
// everything passed.
bool print_acceptance_report(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace dhsqr
