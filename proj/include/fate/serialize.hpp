#pragma once

#include "fate/csv.hpp"
#include "fate/dgp.hpp"
#include "fate/fate.hpp"
#include "fate/iv.hpp"
#include "fate/mc.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <variant>

namespace fate::serialize {

using Json = nlohmann::ordered_json;

/// Row-major nested arrays; non-finite entries become null.
Json matrix(const Eigen::Ref<const Matrix>& m);
Json vector(const Eigen::Ref<const Vector>& v);
Matrix to_matrix(const Json& j, const std::string& what);
Vector to_vector(const Json& j, const std::string& what);

Json to_json(const IdentificationReport& r);
Json to_json(const iv::FirstStage& fs, const Dataset& data);
Json to_json(const iv::PiMatrix& pi);
Json to_json(const iv::IvGmmEstimate& e, const Dataset& data);
/// `effect_divisor` scales the reported treatment effects (lambda and
/// their standard errors) for presentation only.
Json to_json(const FateEstimate& e, double effect_divisor = 1.0);
Json to_json(const ThreeStepResult& r, const iv::PiMatrix& pi);
Json to_json(const dgp::Truth& t);
Json to_json(const mc::McReport& r);
Json to_json(const dgp::ConditionReport& r);
Json to_json(const dgp::OracleDecomposition& o);

using Generator = std::variant<dgp::ContinuousDgpConfig, dgp::DiscreteDgpConfig>;

/// {"kind": "continuous" | "discrete", ...fields}.
Generator generator_from_json(const Json& j);
Json generator_to_json(const Generator& g);

mc::Scenario scenario_from_json(const Json& j);
mc::EstimatorSpec estimator_from_json(const Json& j);
FateSpec fate_spec_from_json(const Json& j);
csv::RoleMap roles_from_json(const Json& j);

/// Parsed configuration document.
struct RunConfig {
  std::optional<std::string> csv_path;  // resolved against the config's directory
  csv::RoleMap roles;
  std::string estimator_kind = "fate";  // fate | ivgmm | three_step | just_identified
  FateSpec fate;
  long anchor = 0;
  double annualize_divisor = 1.0;
  std::optional<Generator> simulate;
  std::optional<std::uint64_t> seed;
  std::optional<mc::Scenario> montecarlo;
  std::optional<std::string> json_path;
  bool table = true;
};

RunConfig run_config_from_json(const Json& j, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

}  // namespace fate::serialize
