#include "pgprec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "pgprec/errors.hpp"

namespace pgprec {

namespace {

struct PairedMoments {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;  // 0 when the differences have zero variance
};

PairedMoments paired_moments(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("paired samples differ in length");
  if (a.size() < 2) throw ContractError("paired tests need at least two pairs");
  PairedMoments m;
  m.n = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw NumericError("non-finite paired difference");
    m.mean += d;
  }
  m.mean /= static_cast<double>(m.n);
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - m.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(m.n - 1);
  m.stderr_mean = std::sqrt(var / static_cast<double>(m.n));
  return m;
}

double t_upper_tail(double t, double df) {
  const boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

double t_lower_tail(double t, double df) {
  const boost::math::students_t dist(df);
  return boost::math::cdf(dist, t);
}

}  // namespace

StatResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  const PairedMoments m = paired_moments(a, b);
  StatResult result;
  result.test = "paired_t";
  if (m.stderr_mean == 0.0) {
    if (m.mean == 0.0) {
      result.statistic = 0.0;
      result.p_raw = 1.0;
    } else {
      result.statistic = m.mean > 0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
      result.p_raw = 0.0;
    }
  } else {
    result.statistic = m.mean / m.stderr_mean;
    const double df = static_cast<double>(m.n - 1);
    result.p_raw = 2.0 * t_upper_tail(std::abs(result.statistic), df);
    result.p_raw = std::min(result.p_raw, 1.0);
  }
  result.p_adjusted = result.p_raw;
  result.significant = result.p_adjusted < 0.05;
  return result;
}

StatResult tost_equivalence(std::span<const double> a, std::span<const double> b,
                            double margin) {
  if (margin < 0.0) throw ConfigError("equivalence margin must be >= 0");
  const PairedMoments m = paired_moments(a, b);
  StatResult result;
  result.test = "tost";
  double p_lower = 0.0, p_upper = 0.0;
  double t_lower = 0.0, t_upper = 0.0;
  if (m.stderr_mean == 0.0) {
    // Degenerate spread: each one-sided decision reduces to the sign of the
    // mean against its margin bound.
    const auto step = [](double x) { return x > 0 ? 0.0 : (x == 0.0 ? 0.5 : 1.0); };
    p_lower = step(m.mean + margin);   // H0: mean <= -margin
    p_upper = step(margin - m.mean);   // H0: mean >= +margin
    t_lower = t_upper = 0.0;
  } else {
    const double df = static_cast<double>(m.n - 1);
    t_lower = (m.mean + margin) / m.stderr_mean;
    t_upper = (m.mean - margin) / m.stderr_mean;
    p_lower = t_upper_tail(t_lower, df);
    p_upper = t_lower_tail(t_upper, df);
  }
  if (p_lower >= p_upper) {
    result.p_raw = p_lower;
    result.statistic = t_lower;
  } else {
    result.p_raw = p_upper;
    result.statistic = t_upper;
  }
  result.p_adjusted = result.p_raw;
  result.significant = result.p_adjusted < 0.05;
  return result;
}

std::vector<double> holm_bonferroni(const std::vector<double>& pvalues) {
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractError("p-values must lie in [0, 1]");
    }
  }
  const std::size_t m = pvalues.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pvalues[x] < pvalues[y]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    const double scaled = pvalues[order[rank]] * static_cast<double>(m - rank);
    running = std::max(running, scaled);
    adjusted[order[rank]] = std::min(running, 1.0);
  }
  return adjusted;
}

namespace {

TimingReport::Run summarize(const std::string& name, const std::vector<EpochLog>& logs) {
  if (logs.empty()) throw ContractError("timing report needs at least one epoch");
  TimingReport::Run run;
  run.name = name;
  run.epochs = static_cast<int>(logs.size());
  for (const auto& log : logs) run.total_seconds += log.seconds;
  run.mean_seconds_per_epoch = run.total_seconds / run.epochs;
  return run;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TimingReport timing_report(const std::string& a_name, const std::vector<EpochLog>& a,
                           const std::string& b_name, const std::vector<EpochLog>& b) {
  TimingReport report;
  report.a = summarize(a_name, a);
  report.b = summarize(b_name, b);
  report.seconds_per_epoch_ratio =
      report.a.mean_seconds_per_epoch / report.b.mean_seconds_per_epoch;
  return report;
}

std::string format_timing_csv(const TimingReport& report) {
  std::ostringstream out;
  out << "run,epochs,mean_seconds_per_epoch,total_seconds\n";
  for (const TimingReport::Run* run : {&report.a, &report.b}) {
    out << run->name << ',' << run->epochs << ',' << fmt(run->mean_seconds_per_epoch)
        << ',' << fmt(run->total_seconds) << "\n";
  }
  out << "ratio,," << fmt(report.seconds_per_epoch_ratio) << ",\n";
  return out.str();
}

TimingReport parse_timing_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  TimingReport report;
  int run_index = 0;
  bool have_ratio = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("run,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string name, epochs, mean, total;
    std::getline(ss, name, ',');
    std::getline(ss, epochs, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, total, ',');
    if (name == "ratio") {
      report.seconds_per_epoch_ratio = std::strtod(mean.c_str(), nullptr);
      have_ratio = true;
      continue;
    }
    TimingReport::Run run;
    run.name = name;
    run.epochs = std::atoi(epochs.c_str());
    run.mean_seconds_per_epoch = std::strtod(mean.c_str(), nullptr);
    run.total_seconds = std::strtod(total.c_str(), nullptr);
    if (run_index == 0) {
      report.a = run;
    } else if (run_index == 1) {
      report.b = run;
    } else {
      throw DataError("unexpected extra run row in timing csv");
    }
    ++run_index;
  }
  if (run_index != 2 || !have_ratio) {
    throw DataError("timing csv must contain two runs and a ratio row");
  }
  return report;
}

}  // namespace pgprec
