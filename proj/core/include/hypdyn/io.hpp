#pragma once

// Serialization: tower-spec JSON, orbit-trace CSV/JSON, verdict reports,
// region tables. Reports use ordered JSON so identical inputs produce
// byte-identical files.

#include <json.hpp>

#include "hypdyn/model_classify.hpp"

namespace hypdyn {

using Json = nlohmann::ordered_json;

struct LoadedSpec {
  enum class Kind { tower, blaschke_model };
  Kind kind = Kind::tower;
  TowerSpec tower;
  int model_levels = 6;
  std::string name;
};

LoadedSpec parse_tower_spec(const Json& j, const std::string& name);
LoadedSpec load_tower_spec(const std::string& path);

std::string format_double(double x);  // %.17g
std::string trace_csv(const OrbitTrace& tr);
Json trace_json(const OrbitTrace& tr);
Json tolerances_json(const Tolerances& tol);
Json verdict_json(const SixTypeVerdict& v, const Tolerances& tol);
Json model_verdict_json(const ModelVerdict& v, const Tolerances& tol);
Json regions_json(const ModelTower& s);
Json invariant_report_json(const InvariantReport& r);
Json foliation_json(const std::vector<FoliationDescriptor>& f);

}  // namespace hypdyn
