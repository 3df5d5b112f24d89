#include "fate/cli.hpp"

#include "fate/csv.hpp"
#include "fate/serialize.hpp"
#include "fate/table.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

namespace fate::cli {

using serialize::Json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::UnknownInstrument:
    case ErrorKind::UnknownGridPoint:
      return kUsage;
    case ErrorKind::InvalidData:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::RankDeficient:
    case ErrorKind::MissingColumn:
    case ErrorKind::ParseError:
    case ErrorKind::EmptyData:
      return kDataError;
    case ErrorKind::DegenerateComparison:
    case ErrorKind::DivisionByZeroFirstStage:
    case ErrorKind::NotIdentified:
    case ErrorKind::DegenerateAnchor:
    case ErrorKind::NegativeStatistic:
    case ErrorKind::ScenarioFailed:
      return kEstimationError;
  }
  return kEstimationError;
}

namespace {

/// Options shared by the subcommands that read a dataset.
struct DataOptions {
  std::string config;
  std::string csv;
  std::vector<std::string> outcomes;
  std::string treatment;
  std::vector<std::string> instruments;
  std::vector<std::string> controls;
};

struct OutputOptions {
  std::string json;  // "-" for standard output
  bool table = false;
};

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--config", d.config, "JSON configuration document");
  app->add_option("--data", d.csv, "CSV file with a header row");
  app->add_option("--outcomes", d.outcomes, "outcome columns")->delimiter(',');
  app->add_option("--treatment", d.treatment, "treatment column");
  app->add_option("--instruments", d.instruments, "excluded instrument columns")->delimiter(',');
  app->add_option("--controls", d.controls, "control columns (an intercept is always added)")->delimiter(',');
}

void add_output_options(CLI::App* app, OutputOptions& o) {
  app->add_option("--json", o.json, "write the JSON report here ('-' for standard output)");
  app->add_flag("--table", o.table, "print the text table even when JSON goes to standard output");
}

serialize::RunConfig config_of(const DataOptions& d) {
  serialize::RunConfig rc;
  if (!d.config.empty()) rc = serialize::load_run_config(d.config);
  if (!d.csv.empty()) rc.csv_path = d.csv;
  if (!d.outcomes.empty()) rc.roles.outcomes = d.outcomes;
  if (!d.treatment.empty()) rc.roles.treatment = d.treatment;
  if (!d.instruments.empty()) rc.roles.instruments = d.instruments;
  if (!d.controls.empty()) rc.roles.controls = d.controls;
  return rc;
}

Dataset load_data(const serialize::RunConfig& rc) {
  if (!rc.csv_path) throw Error(ErrorKind::InvalidConfig, "no data file given (--data or data.csv)");
  Dataset data = csv::read_file(*rc.csv_path, rc.roles);
  validate(data);
  return data;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidData, "cannot write '" + path + "'");
  f << text;
}

/// JSON to a file or stdout, table to stdout unless stdout carries JSON.
void emit(const Json& j, const std::string& table, const OutputOptions& o, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (o.json == "-") {
    out << text;
    if (o.table) out << '\n' << table;
    return;
  }
  if (!o.json.empty()) write_text(o.json, text);
  out << table;
}

int threads_default() {
  if (const char* env = std::getenv("FATE_THREADS")) {
    int v = 0;
    const std::string s = env;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && v >= 1) return v;
  }
  return 1;
}

serialize::Generator generator_for(const std::string& config, const std::string& scenario,
                                   std::optional<std::uint64_t>& seed) {
  if (!scenario.empty()) {
    const auto s = mc::find_scenario(scenario);
    auto g = s.generator;
    std::visit([&](auto& c) { c.n = s.n; }, g);
    return g;
  }
  if (config.empty()) throw Error(ErrorKind::InvalidConfig, "give --config or --scenario");
  const auto rc = serialize::load_run_config(config);
  if (!rc.simulate) throw Error(ErrorKind::InvalidConfig, "config has no 'simulate' block");
  if (!seed) seed = rc.seed;
  return *rc.simulate;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factor-augmented treatment effects: simulation, estimation and Monte Carlo", "fate"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a synthetic dataset (CSV) and its truth (JSON)");
  std::string sim_config;
  std::string sim_scenario;
  std::uint64_t sim_seed = 0;
  std::uint64_t sim_stream = 0;
  long sim_n = 0;
  std::string sim_out;
  std::string sim_truth;
  sim->add_option("--config", sim_config, "JSON document with a 'simulate' block");
  sim->add_option("--scenario", sim_scenario, "use the generator of a named scenario");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--stream", sim_stream, "random substream");
  sim->add_option("--n", sim_n, "override the sample size");
  sim->add_option("--out", sim_out, "CSV output path")->required();
  sim->add_option("--truth", sim_truth, "truth sidecar JSON path");

  // iv
  auto* ivc = app.add_subcommand("iv", "just-identified IV matrix and first-stage diagnostics");
  DataOptions iv_data;
  OutputOptions iv_out;
  add_data_options(ivc, iv_data);
  add_output_options(ivc, iv_out);

  // estimate
  auto* est = app.add_subcommand("estimate", "fit the FATE model (or a nested estimator)");
  DataOptions est_data;
  OutputOptions est_out;
  int est_l = 0;
  std::vector<std::string> est_defining;
  std::string est_weighting;
  bool est_ivgmm = false;
  bool est_three = false;
  long est_anchor = -1;
  double est_annualize = 0.0;
  int est_max_iter = 0;
  add_data_options(est, est_data);
  add_output_options(est, est_out);
  est->add_option("--L", est_l, "number of component treatments");
  est->add_option("--defining", est_defining, "instruments defining the components, in order")->delimiter(',');
  est->add_option("--weighting", est_weighting, "two_step or identity");
  auto* ivgmm_flag = est->add_flag("--ivgmm", est_ivgmm, "pooled IV-GMM with one common effect per outcome");
  est->add_flag("--three-step", est_three, "three-step estimator (K = 3, L = 2)")->excludes(ivgmm_flag);
  est->add_option("--anchor", est_anchor, "anchor outcome index for --three-step");
  est->add_option("--annualize", est_annualize, "divide reported treatment effects by this constant");
  est->add_option("--max-iterations", est_max_iter, "Gauss-Newton iteration limit per step");

  // montecarlo
  auto* mcc = app.add_subcommand("montecarlo", "run a Monte Carlo scenario");
  std::string mc_scenario;
  std::string mc_config;
  std::uint64_t mc_seed = 1;
  int mc_threads = threads_default();
  long mc_reps = 0;
  long mc_n = 0;
  std::string mc_csv;
  bool mc_timings = false;
  bool mc_list = false;
  OutputOptions mc_out;
  mcc->add_option("--scenario", mc_scenario, "named scenario");
  mcc->add_option("--config", mc_config, "JSON document with a 'montecarlo' block");
  auto* mc_seed_opt = mcc->add_option("--seed", mc_seed, "random seed");
  mcc->add_option("--threads", mc_threads, "worker threads (default $FATE_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  mcc->add_option("--reps", mc_reps, "override the replication count");
  mcc->add_option("--n", mc_n, "override the sample size");
  mcc->add_option("--csv", mc_csv, "dump every replication estimate to this CSV");
  mcc->add_flag("--timings", mc_timings, "include wall-clock timings (makes the JSON run-dependent)");
  mcc->add_flag("--list", mc_list, "list the named scenarios");
  add_output_options(mcc, mc_out);

  // check
  auto* chk = app.add_subcommand("check", "identification counting, or condition checks on a simulated panel");
  long chk_k = 0;
  long chk_j = 0;
  long chk_l = 0;
  long chk_r = 1;
  std::string chk_config;
  std::string chk_scenario;
  std::uint64_t chk_seed = 0;
  long chk_point = 1;
  long chk_point_prime = 0;
  OutputOptions chk_out;
  chk->add_option("--K", chk_k, "number of instruments");
  chk->add_option("--J", chk_j, "number of outcomes");
  chk->add_option("--L", chk_l, "number of components");
  chk->add_option("--R", chk_r, "number of controls including the intercept");
  chk->add_option("--config", chk_config, "JSON document with a discrete 'simulate' block");
  chk->add_option("--scenario", chk_scenario, "use the generator of a named discrete scenario");
  auto* chk_seed_opt = chk->add_option("--seed", chk_seed, "random seed for the panel");
  chk->add_option("--point", chk_point, "grid index of z for the oracle decomposition");
  chk->add_option("--point-prime", chk_point_prime, "grid index of z' for the oracle decomposition");
  add_output_options(chk, chk_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error[Usage]: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*sim) {
      std::optional<std::uint64_t> seed;
      if (*sim_seed_opt) seed = sim_seed;
      auto gen = generator_for(sim_config, sim_scenario, seed);
      if (sim_n > 0) std::visit([&](auto& c) { c.n = sim_n; }, gen);
      const RngSeed rs{seed.value_or(0), sim_stream};
      const auto sd = std::visit(
          [&](const auto& c) {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, dgp::ContinuousDgpConfig>) {
              return dgp::simulate_continuous(c, rs);
            } else {
              return dgp::simulate_discrete(c, rs);
            }
          },
          gen);
      csv::write_file(sim_out, sd.dataset);
      if (!sim_truth.empty()) {
        const auto roles = csv::roles_of(sd.dataset);
        const Json truth = {{"seed", rs.seed},
                            {"stream", rs.stream},
                            {"n", sd.dataset.n()},
                            {"columns",
                             {{"outcomes", roles.outcomes},
                              {"treatment", roles.treatment},
                              {"instruments", roles.instruments},
                              {"controls", roles.controls}}},
                            {"generator", serialize::generator_to_json(gen)},
                            {"truth", serialize::to_json(sd.truth)}};
        write_text(sim_truth, truth.dump(2) + "\n");
      }
      out << "wrote " << sd.dataset.n() << " rows to " << sim_out << '\n';
      return kOk;
    }

    if (*ivc) {
      const auto rc = config_of(iv_data);
      const Dataset data = load_data(rc);
      const auto pi = iv::pi_matrix(data);
      const auto fs = iv::first_stage(data);
      const Json j = {{"pi", serialize::to_json(pi)}, {"first_stage", serialize::to_json(fs, data)}};
      emit(j, table::render(pi, fs), iv_out, out);
      return kOk;
    }

    if (*est) {
      auto rc = config_of(est_data);
      if (est_l > 0) rc.fate.L = est_l;
      if (!est_defining.empty()) rc.fate.defining_instruments = est_defining;
      if (est_weighting == "identity") {
        rc.fate.weighting = Weighting::Identity;
      } else if (est_weighting == "two_step") {
        rc.fate.weighting = Weighting::TwoStep;
      } else if (!est_weighting.empty()) {
        throw Error(ErrorKind::InvalidConfig, "--weighting must be two_step or identity");
      }
      if (est_max_iter > 0) rc.fate.max_iterations = est_max_iter;
      if (est_ivgmm) rc.estimator_kind = "ivgmm";
      if (est_three) rc.estimator_kind = "three_step";
      if (est_anchor >= 0) rc.anchor = est_anchor;
      if (est_annualize != 0.0) {
        if (!(est_annualize > 0.0)) throw Error(ErrorKind::InvalidConfig, "--annualize must be positive");
        rc.annualize_divisor = est_annualize;
      }
      if (est_out.json.empty() && rc.json_path) est_out.json = *rc.json_path;
      const Dataset data = load_data(rc);
      if (rc.estimator_kind == "ivgmm") {
        const auto g = iv::iv_gmm(data);
        Json j = serialize::to_json(g, data);
        j["effect_divisor"] = rc.annualize_divisor;
        j["lambda"] = serialize::vector(g.lambda / rc.annualize_divisor);
        j["lambda_se"] = serialize::vector(g.lambda_se / rc.annualize_divisor);
        emit(j, table::render(g, data, rc.annualize_divisor), est_out, out);
        if (!g.converged) {
          err << "error[NonConvergence]: pooled IV-GMM did not converge\n";
          return kEstimationError;
        }
        return kOk;
      }
      if (rc.estimator_kind == "three_step" || rc.estimator_kind == "just_identified") {
        const auto pi = iv::pi_matrix(data);
        if (rc.estimator_kind == "just_identified") {
          const auto fs = iv::first_stage(data);
          emit({{"pi", serialize::to_json(pi)}, {"first_stage", serialize::to_json(fs, data)}},
               table::render(pi, fs), est_out, out);
          return kOk;
        }
        FateSpec spec = rc.fate;
        spec.L = 2;
        const auto ts = three_step_fit(pi, spec, rc.anchor);
        emit(serialize::to_json(ts, pi), table::render(ts, pi), est_out, out);
        return kOk;
      }
      const auto fit = fate_fit(data, rc.fate);
      emit(serialize::to_json(fit, rc.annualize_divisor), table::render(fit, rc.annualize_divisor), est_out, out);
      if (!fit.converged) {
        err << "error[NonConvergence]: " << (fit.warnings.empty() ? "not converged" : fit.warnings.back())
            << '\n';
        return kEstimationError;
      }
      return kOk;
    }

    if (*mcc) {
      if (mc_list) {
        for (const auto& name : mc::scenario_names()) out << name << '\n';
        return kOk;
      }
      mc::Scenario s;
      if (!mc_scenario.empty()) {
        s = mc::find_scenario(mc_scenario);
      } else if (!mc_config.empty()) {
        const auto rc = serialize::load_run_config(mc_config);
        if (!rc.montecarlo) throw Error(ErrorKind::InvalidConfig, "config has no 'montecarlo' block");
        s = *rc.montecarlo;
        if (!*mc_seed_opt && rc.seed) mc_seed = *rc.seed;
      } else {
        throw Error(ErrorKind::InvalidConfig, "give --scenario or --config");
      }
      if (mc_reps > 0) s.reps = mc_reps;
      if (mc_n > 0) s.n = mc_n;
      const auto report = mc::run_scenario(s, mc_seed, {mc_threads, mc_timings});
      if (!mc_csv.empty()) {
        std::ofstream f(mc_csv);
        if (!f) throw Error(ErrorKind::InvalidData, "cannot write '" + mc_csv + "'");
        f << "rep,estimator,parameter,estimate,se,truth\n";
        auto num = [](double v) {
          if (!std::isfinite(v)) return std::string();
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, v);
          return std::string(buf, res.ptr);
        };
        for (const auto& r : report.records) {
          f << r.rep << ',' << report.estimators[r.estimator].label << ',' << '"' << r.parameter << '"' << ','
            << num(r.estimate) << ',' << num(r.se) << ',' << (r.truth ? num(*r.truth) : std::string()) << '\n';
        }
      }
      emit(serialize::to_json(report), table::render(report), mc_out, out);
      return kOk;
    }

    if (*chk) {
      if (!chk_config.empty() || !chk_scenario.empty()) {
        std::optional<std::uint64_t> seed;
        if (*chk_seed_opt) seed = chk_seed;
        const auto gen = generator_for(chk_config, chk_scenario, seed);
        const auto* dc = std::get_if<dgp::DiscreteDgpConfig>(&gen);
        if (!dc) throw Error(ErrorKind::InvalidConfig, "condition checks need a discrete generator");
        const auto sd = dgp::simulate_discrete(*dc, {seed.value_or(0), 0});
        const auto& panel = *sd.latent;
        const auto utr = dgp::check_condition(panel, dgp::Condition::UniformTreatmentResponses);
        const auto uum = dgp::check_condition(panel, dgp::Condition::UniformUnorderedMonotonicity);
        const auto oracle = dgp::oracle_iv_decomposition(panel, chk_point, chk_point_prime);
        const auto evidence = dgp::net_monotonicity_evidence(panel, chk_point, chk_point_prime);
        Json j = {{"n", panel.n()},
                  {"utr", serialize::to_json(utr)},
                  {"uum", serialize::to_json(uum)},
                  {"net_uum_evidence",
                   {{"necessary_conditions_hold", evidence.necessary_conditions_hold},
                    {"verified", false},
                    {"note", "net uniform unordered monotonicity is existential and is not verified"}}},
                  {"oracle", serialize::to_json(oracle)}};
        std::string text = "UTR holds: " + std::string(utr.holds ? "true" : "false") + "\n" +
                           "UUM holds: " + std::string(uum.holds ? "true" : "false") + "\n" +
                           "net UUM necessary evidence: " +
                           std::string(evidence.necessary_conditions_hold ? "true" : "false") +
                           " (not a verification)\n" + "first stage P(z) - P(z') = " +
                           table::fixed(oracle.first_stage, 4) + "\n";
        emit(j, text, chk_out, out);
        return kOk;
      }
      if (chk_k < 1 || chk_j < 1 || chk_l < 1) {
        throw Error(ErrorKind::InvalidConfig, "check needs --K, --J and --L (all >= 1), or --config");
      }
      const auto r = check_identification(chk_k, chk_j, chk_l, chk_r);
      const std::string text = std::string("identified=") + (r.identified ? "true" : "false") +
                               "\ndf=" + std::to_string(r.j_df) + "\nmoments=" + std::to_string(r.moment_count) +
                               "\nparameters=" + std::to_string(r.parameter_count) + "\n";
      emit(serialize::to_json(r), text, chk_out, out);
      return kOk;
    }
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "error[InvalidConfig]: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace fate::cli
