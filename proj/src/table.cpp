#include "fate/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fate::table {

namespace {

/// Column-aligned text grid: first column left-aligned, others right.
class Grid {
 public:
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  void rule() { rows_.emplace_back(); }

  std::string str() const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    std::ostringstream out;
    for (const auto& r : rows_) {
      if (r.empty()) {
        out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
        continue;
      }
      std::string line;
      for (std::size_t c = 0; c < r.size(); ++c) {
        const std::string pad(width[c] - r[c].size(), ' ');
        line += c == 0 ? r[c] + pad : pad + r[c];
        if (c + 1 < r.size()) line += "  ";
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

std::string se(double v) { return "(" + fixed(v) + ")"; }

std::string opt(const std::optional<double>& v) { return v ? fixed(*v) : "-"; }

std::string pvalue_line(double stat, int df, double p) {
  if (df == 0) return "J-statistic = " + fixed(stat) + " (df = 0, exactly identified)\n";
  return "J-statistic = " + fixed(stat) + " (df = " + std::to_string(df) + "), p-value = " + fixed(p) + "\n";
}

}  // namespace

std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string render(const iv::PiMatrix& pi, const iv::FirstStage& fs) {
  std::ostringstream out;
  out << "Just-identified IV estimates (instrument rows, outcome columns)\n";
  Grid g;
  std::vector<std::string> head{""};
  for (const auto& y : pi.outcome_names) head.push_back(y);
  g.row(head);
  g.rule();
  for (long k = 0; k < pi.estimates.rows(); ++k) {
    std::vector<std::string> est{pi.instrument_names[static_cast<std::size_t>(k)] +
                                 (pi.weak_instrument[static_cast<std::size_t>(k)] ? " (weak)" : "")};
    std::vector<std::string> err{""};
    for (long j = 0; j < pi.estimates.cols(); ++j) {
      est.push_back(fixed(pi.estimates(k, j)));
      err.push_back(se(pi.std_errors(k, j)));
    }
    g.row(est);
    g.row(err);
  }
  out << g.str() << '\n';
  out << "First stage\n";
  Grid f;
  f.row({"", "gamma", "se", "t", "F single"});
  f.rule();
  for (long k = 0; k < fs.gamma.size(); ++k) {
    f.row({pi.instrument_names[static_cast<std::size_t>(k)], fixed(fs.gamma(k)), se(fs.gamma_se(k)),
           fixed(fs.t_stats(k), 2), fixed(fs.f_single(k), 2)});
  }
  out << f.str();
  out << "F joint = " << fixed(fs.f_joint, 2) << ", N = " << pi.n_used << '\n';
  out << "Robust (HC0) standard errors in parentheses.\n";
  return out.str();
}

std::string render(const FateEstimate& e, double divisor) {
  std::ostringstream out;
  out << "FATE estimates, L = " << e.L << " (component effects Lambda)\n";
  Grid g;
  std::vector<std::string> head{""};
  for (long l = 0; l < e.L; ++l) {
    head.push_back("component " + std::to_string(l + 1) + " (" + e.instrument_names[static_cast<std::size_t>(l)] +
                   ")");
  }
  g.row(head);
  g.rule();
  for (long j = 0; j < e.lambda.cols(); ++j) {
    std::vector<std::string> est{e.outcome_names[static_cast<std::size_t>(j)]};
    std::vector<std::string> err{""};
    for (long l = 0; l < e.L; ++l) {
      est.push_back(fixed(e.lambda(l, j) / divisor));
      err.push_back(se(e.lambda_se(l, j) / divisor));
    }
    g.row(est);
    g.row(err);
  }
  out << g.str();
  if (divisor != 1.0) out << "Effects divided by " << fixed(divisor, 2) << ".\n";
  out << '\n' << "Instrument weights Theta\n";
  Grid t;
  head = {""};
  for (long l = 0; l < e.L; ++l) head.push_back("component " + std::to_string(l + 1));
  t.row(head);
  t.rule();
  for (long k = 0; k < e.theta.rows(); ++k) {
    std::vector<std::string> est{e.instrument_names[static_cast<std::size_t>(k)]};
    std::vector<std::string> err{""};
    for (long l = 0; l < e.L; ++l) {
      est.push_back(fixed(e.theta(k, l)));
      err.push_back(k < e.L ? "" : se(e.theta_se(k, l)));
    }
    t.row(est);
    if (k >= e.L) t.row(err);
  }
  out << t.str();
  out << "--\n" << pvalue_line(e.j_stat, e.j_df, e.j_pvalue);
  out << "N = " << e.n << ", " << (e.weighting == Weighting::TwoStep ? "two-step" : "identity-weighted")
      << " GMM, " << (e.converged ? "converged" : "NOT converged") << " after " << e.iterations
      << " iterations\n";
  for (const auto& w : e.warnings) out << "warning: " << w << '\n';
  out << "Robust standard errors in parentheses.\n";
  return out.str();
}

std::string render(const iv::IvGmmEstimate& e, const Dataset& data, double divisor) {
  std::ostringstream out;
  out << "Pooled IV-GMM estimates (one common effect per outcome)\n";
  Grid g;
  g.row({"", "effect", "se"});
  g.rule();
  for (long j = 0; j < e.lambda.size(); ++j) {
    g.row({data.outcome_names[static_cast<std::size_t>(j)], fixed(e.lambda(j) / divisor),
           se(e.lambda_se(j) / divisor)});
  }
  out << g.str();
  if (divisor != 1.0) out << "Effects divided by " << fixed(divisor, 2) << ".\n";
  out << "--\n" << pvalue_line(e.j_stat, e.j_df, e.j_pvalue);
  out << "N = " << data.n() << ", two-step GMM, " << (e.converged ? "converged" : "NOT converged") << '\n';
  return out.str();
}

std::string render(const ThreeStepResult& r, const iv::PiMatrix& pi) {
  std::ostringstream out;
  out << "Three-step estimates (anchor outcome " << pi.outcome_names[static_cast<std::size_t>(r.anchor)]
      << ")\n";
  out << "theta_31 = " << fixed(r.theta31) << ", theta_32 = " << fixed(1.0 - r.theta31) << "\n\n";
  Grid g;
  g.row({"", "lambda_1", "lambda_2", "resid " + pi.instrument_names[0], "resid " + pi.instrument_names[1],
         "resid " + pi.instrument_names[2]});
  g.rule();
  for (long j = 0; j < r.lambda.cols(); ++j) {
    g.row({pi.outcome_names[static_cast<std::size_t>(j)], fixed(r.lambda(0, j)), fixed(r.lambda(1, j)),
           fixed(r.residuals(0, j)), fixed(r.residuals(1, j)), fixed(r.residuals(2, j))});
  }
  out << g.str();
  return out.str();
}

std::string render(const mc::McReport& r) {
  std::ostringstream out;
  out << "Monte Carlo scenario '" << r.scenario << "': n = " << r.n << ", reps = " << r.reps
      << ", seed = " << r.seed << ", failed replications = " << r.failed_reps << '\n';
  for (const auto& e : r.estimators) {
    out << '\n' << e.label << ": " << e.successes << " ok, " << e.failures << " failed";
    if (e.nonconverged > 0) out << " (" << e.nonconverged << " not converged)";
    out << '\n';
    Grid g;
    g.row({"parameter", "truth", "mean", "bias", "rmse", "se mean", "sd", "coverage"});
    g.rule();
    for (const auto& p : e.parameters) {
      g.row({p.name, opt(p.truth_mean), fixed(p.mean), opt(p.bias), opt(p.rmse), opt(p.se_mean), fixed(p.sd),
             opt(p.coverage)});
    }
    out << g.str();
    if (e.j_rejection_rate) {
      out << "J-test rejection rate at " << fixed(r.nominal_level, 2) << ": " << fixed(*e.j_rejection_rate)
          << '\n';
    }
    if (e.timing) out << "time per replication: " << fixed(e.timing->mean_ms, 1) << " ms\n";
  }
  for (const auto& n : r.nesting) {
    out << '\n'
        << "nesting " << n.first << " vs " << n.second << ": max relative gap " << n.max_relative_gap << " over "
        << n.count << " replications\n";
  }
  if (r.conditions) {
    out << '\n'
        << "panels with uniform treatment responses: " << r.conditions->utr_holds << "/" << r.conditions->panels
        << ", with uniform unordered monotonicity: " << r.conditions->uum_holds << "/" << r.conditions->panels
        << '\n';
  }
  if (r.timing) out << "total wall time: " << fixed(r.timing->total_ms / 1000.0, 2) << " s\n";
  return out.str();
}

}  // namespace fate::table
