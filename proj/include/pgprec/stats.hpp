#pragma once

#include <span>
#include <string>
#include <vector>

#include "pgprec/epoch_log.hpp"

namespace pgprec {

struct StatResult {
  std::string test;
  double statistic = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;  // callers overwrite after Holm adjustment
  bool significant = false;  // decision at alpha = 0.05 on p_adjusted
};

// Two-sided paired t-test over aligned per-user values. Zero-variance
// differences degenerate to p = 1 when the mean difference is 0 and p = 0
// otherwise.
StatResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Two one-sided tests against +-margin on the mean difference; the overall
// p is the larger one-sided p and equivalence is declared when p < 0.05.
StatResult tost_equivalence(std::span<const double> a, std::span<const double> b,
                            double margin = 0.05);

// Step-down adjustment: ascending p_(i) scaled by (m - rank + 1), running
// max enforced, capped at 1, returned in the input order.
std::vector<double> holm_bonferroni(const std::vector<double>& pvalues);

// Tuning-time comparison in the shape of the timing tables: seconds/epoch,
// epoch count and total per run, plus the a/b seconds-per-epoch ratio.
struct TimingReport {
  struct Run {
    std::string name;
    int epochs = 0;
    double mean_seconds_per_epoch = 0.0;
    double total_seconds = 0.0;
  };
  Run a, b;
  double seconds_per_epoch_ratio = 0.0;  // a over b
};

TimingReport timing_report(const std::string& a_name, const std::vector<EpochLog>& a,
                           const std::string& b_name, const std::vector<EpochLog>& b);
std::string format_timing_csv(const TimingReport& report);
TimingReport parse_timing_csv(const std::string& csv);

}  // namespace pgprec
