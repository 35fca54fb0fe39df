#include "hypdyn/io.hpp"

#include <cstdio>
#include <fstream>

namespace hypdyn {

namespace {

Complex parse_complex(const Json& j, const char* what) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2) return Complex(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument(std::string(what) + ": expected a number or [re, im]");
}

MapElement parse_simple_map(const Json& j) {
  std::string family = j.at("family").get<std::string>();
  if (family == "scaling") return MapElement::scaling(parse_complex(j.at("value"), "scaling.value"));
  if (family == "rotation") return MapElement::rotation(j.at("angle").get<double>());
  if (family == "blaschke2") return MapElement::blaschke2(j.at("a").get<double>());
  if (family == "power")
    return MapElement::power(j.at("exponent").get<int>(),
                             j.contains("post_scale")
                                 ? parse_complex(j.at("post_scale"), "power.post_scale")
                                 : Complex(1.0));
  if (family == "mobius")
    return MapElement::mobius(MobiusDisc(parse_complex(j.at("rotation"), "mobius.rotation"),
                                         parse_complex(j.at("center"), "mobius.center")));
  throw std::invalid_argument("unknown map family: " + family);
}

}  // namespace

LoadedSpec parse_tower_spec(const Json& j, const std::string& name) {
  LoadedSpec spec;
  spec.name = j.value("name", name);

  if (j.contains("model")) {
    if (j.at("model").get<std::string>() != "blaschke")
      throw std::invalid_argument("unknown model kind");
    spec.kind = LoadedSpec::Kind::blaschke_model;
    spec.model_levels = j.value("levels", 6);
    return spec;
  }

  const Json& sj = j.at("surfaces");
  const Json& mj = j.at("maps");
  int horizon = j.value("horizon", 64);
  std::string sfam = sj.at("family").get<std::string>();
  std::string mfam = mj.at("family").get<std::string>();

  TowerSpec t;
  if (sfam == "disc") {
    Complex base = j.contains("base") ? parse_complex(j.at("base"), "base") : Complex(0.0);
    if (mfam == "scaling" && mj.contains("schedule")) {
      if (mj.at("schedule").get<std::string>() != "one_minus_geometric")
        throw std::invalid_argument("unknown scaling schedule");
      t = towers::scaling_semi(mj.at("ratio").get<double>(), base, horizon);
    } else if (mfam == "switch") {
      MapElement before = parse_simple_map(mj.at("before"));
      MapElement after = parse_simple_map(mj.at("after"));
      t = towers::switch_tower(mj.at("at").get<int>(), before, after, base, horizon);
    } else {
      MapElement f = parse_simple_map(mj);
      t.surface_at = [](int) { return SurfaceModel::disc(); };
      t.map_at = [f](int) { return f; };
      t.base = base;
      t.horizon = horizon;
    }
  } else if (sfam == "round_annulus") {
    double L = sj.contains("log_inv_inner_radius")
                   ? sj.at("log_inv_inner_radius").get<double>()
                   : std::log(1.0 / sj.at("inner_radius").get<double>());
    int d = sj.value("exponent", mfam == "power" ? mj.at("exponent").get<int>() : 1);
    double tau0 = sj.value("tau0", 0.0);
    double tau_decay = sj.value("tau_decay", 1.0);
    if (mfam != "power" && mfam != "rotation")
      throw std::invalid_argument("round_annulus towers take power or rotation maps");
    Complex base = j.contains("base")
                       ? parse_complex(j.at("base"), "base")
                       : surface_rep(SurfaceModel::round_annulus_log(L), Complex(0.0, 0.5 * kPi));
    t = towers::power_annulus(L, d, tau0, tau_decay, base, horizon);
  } else if (sfam == "cyclic_quotient") {
    double ell0 = sj.at("ell0").get<double>();
    double ratio = sj.value("ratio", 0.5);
    Complex base = j.contains("base") ? parse_complex(j.at("base"), "base") : Complex(0.0);
    if (mfam != "deck_cover")
      throw std::invalid_argument("cyclic_quotient towers take deck_cover maps");
    t = towers::cyclic_refine(ell0, ratio, base, horizon);
  } else {
    throw std::invalid_argument("unknown surface family: " + sfam);
  }

  if (j.contains("pairs")) {
    for (const Json& pj : j.at("pairs")) {
      if (!pj.is_array() || pj.size() != 2)
        throw std::invalid_argument("pairs: expected [[re,im],[re,im]] entries");
      t.tracked_pairs.emplace_back(parse_complex(pj[0], "pair point"),
                                   parse_complex(pj[1], "pair point"));
    }
  }
  t.name = spec.name;
  spec.tower = std::move(t);
  return spec;
}

LoadedSpec load_tower_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tower spec: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
  return parse_tower_spec(j, name);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trace_csv(const OrbitTrace& tr) {
  std::string out = "n,base_re,base_im,lambda,delta";
  for (int i = 0; i < tr.pair_count; ++i) out += ",dist_pair_" + std::to_string(i);
  out += "\n";
  for (size_t n = 0; n < tr.levels.size(); ++n) {
    const auto& lv = tr.levels[n];
    out += std::to_string(n) + "," + format_double(lv.base_rep.real()) + "," +
           format_double(lv.base_rep.imag()) + "," + format_double(lv.lambda) + "," +
           format_double(lv.delta);
    for (double d : lv.pair_dist) out += "," + format_double(d);
    out += "\n";
  }
  return out;
}

Json trace_json(const OrbitTrace& tr) {
  Json j;
  j["schema"] = "hypdyn/1";
  j["kind"] = "trace";
  Json levels = Json::array();
  for (size_t n = 0; n < tr.levels.size(); ++n) {
    const auto& lv = tr.levels[n];
    Json e;
    e["n"] = int(n);
    e["base"] = {lv.base_rep.real(), lv.base_rep.imag()};
    e["lambda"] = lv.lambda;
    e["lambda_exact_one"] = lv.lambda_exact_one;
    e["delta"] = std::isinf(lv.delta) ? Json("inf") : Json(lv.delta);
    e["lambda_product"] = lv.lambda_product;
    e["pair_dist"] = lv.pair_dist;
    if (lv.collar) {
      e["collar"] = {{"core_length", lv.collar->core_length},
                     {"half_width", lv.collar->half_width},
                     {"modulus", lv.collar->modulus}};
    }
    levels.push_back(std::move(e));
  }
  j["levels"] = std::move(levels);
  j["truncated"] = tr.truncated;
  if (tr.truncated) {
    j["truncated_at"] = tr.truncated_at;
    j["truncation_reason"] = tr.truncation_reason;
  }
  return j;
}

Json tolerances_json(const Tolerances& tol) {
  Json j;
  j["tol_iso"] = tol.tol_iso;
  j["tol_zero"] = tol.tol_zero;
  j["tol_const"] = tol.tol_const;
  j["thin_threshold"] = tol.thin_threshold;
  j["margulis"] = tol.margulis;
  j["divergence_threshold"] = tol.divergence_threshold;
  return j;
}

namespace {

Json modality_json(const ModalityVerdict& m) {
  Json j;
  Json pairs = Json::array();
  for (const auto& p : m.pairs) {
    Json e;
    e["label"] = to_string(p.label);
    e["limit"] = p.limit;
    if (p.constant_from >= 0) e["constant_from"] = p.constant_from;
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  j["excluded_merging"] = m.excluded;
  Json labels = Json::array();
  for (PairLabel l : m.distinct_labels) labels.push_back(to_string(l));
  j["distinct_labels"] = std::move(labels);
  j["aggregate"] = to_string(m.aggregate);
  return j;
}

}  // namespace

Json verdict_json(const SixTypeVerdict& v, const Tolerances& tol) {
  Json j;
  j["schema"] = "hypdyn/1";
  j["kind"] = "classification";
  j["tower"] = v.tower_name;
  j["infinitesimal"] = to_string(v.infinitesimal.type);
  j["thinness"] = to_string(v.thin.type);
  j["row"] = v.row;
  j["modality"] = modality_json(v.modality);
  Json evidence;
  evidence["distortion_sum"] = v.infinitesimal.partial_sum;
  evidence["fitted_tail_ratio"] = v.infinitesimal.fitted_q;
  evidence["tail_estimate"] = v.infinitesimal.tail_estimate;
  evidence["exact_isometries"] = v.infinitesimal.exact;
  evidence["confidence"] = v.infinitesimal.confidence;
  evidence["min_delta"] =
      std::isinf(v.thin.min_delta) ? Json("inf") : Json(v.thin.min_delta);
  evidence["delta_tail_monotone"] = v.thin.monotone_tail_ok;
  evidence["second_point_agrees"] = v.thin.second_point_agrees;
  evidence["expected_modality"] = v.expected_modality;
  evidence["eventual_connectivity"] = v.eventual_connectivity;
  j["evidence"] = std::move(evidence);
  j["discrepancies"] = v.discrepancies;
  j["notes"] = v.notes;
  j["tolerances"] = tolerances_json(tol);
  return j;
}

Json model_verdict_json(const ModelVerdict& v, const Tolerances& tol) {
  Json j = verdict_json(v.six, tol);
  Json model;
  model["min_origin_clearance"] = v.min_origin_clearance;
  model["delta_lower_bound"] = v.delta_lower_bound;
  model["coverings_verified"] = v.coverings_verified;
  Json fp;
  fp["x0"] = {v.far_pair.x0.real(), v.far_pair.x0.imag()};
  fp["y0"] = {v.far_pair.y0.real(), v.far_pair.y0.imag()};
  fp["lower"] = v.far_pair.lower;
  Json uppers = Json::array();
  for (double u : v.far_pair.upper)
    uppers.push_back(std::isinf(u) ? Json("inf") : Json(u));
  fp["upper"] = std::move(uppers);
  fp["drop_at"] = v.far_pair.drop_at;
  fp["nonconstant_certified"] = v.far_pair.nonconstant_certified;
  model["far_pair"] = std::move(fp);
  Json brackets = Json::array();
  for (const Bracket& b : v.origin_brackets) brackets.push_back({{"lo", b.lo}, {"hi", b.hi}});
  model["origin_distortion_brackets"] = std::move(brackets);
  j["model_evidence"] = std::move(model);
  return j;
}

Json regions_json(const ModelTower& s) {
  Json j;
  j["schema"] = "hypdyn-regions/1";
  j["complete"] = s.complete;
  if (!s.complete) j["stop_reason"] = s.stop_reason;
  Json params = Json::array();
  for (const auto& lp : s.levels) {
    Json e;
    e["a"] = lp.a;
    e["r"] = lp.r;
    e["eps"] = lp.eps;
    e["critical_point"] = lp.c;
    e["critical_value"] = {lp.v.real(), lp.v.imag()};
    params.push_back(std::move(e));
  }
  j["levels"] = std::move(params);
  Json table = Json::array();
  for (int n = 0; n < int(s.table.size()); ++n) {
    for (int k = 0; k < int(s.table[n].size()); ++k) {
      const RegionSet& rs = s.table[n][k];
      Json e;
      e["sub"] = k;
      e["stage"] = n;
      Json comps = Json::array();
      for (const Region& r : rs.components) {
        Json c;
        c["born_stage"] = r.born_stage;
        Json pts = Json::array();
        for (Complex p : r.pts) pts.push_back({p.real(), p.imag()});
        c["polyline"] = std::move(pts);
        comps.push_back(std::move(c));
      }
      e["components"] = std::move(comps);
      table.push_back(std::move(e));
    }
  }
  j["regions"] = std::move(table);
  j["max_preimage_residual"] = s.max_preimage_residual;
  return j;
}

Json invariant_report_json(const InvariantReport& r) {
  Json j;
  j["schema"] = "hypdyn/1";
  j["kind"] = "model_invariants";
  j["all_pass"] = r.all_pass;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json e;
    e["name"] = c.name;
    e["level"] = c.level;
    e["pass"] = c.pass;
    e["measured"] = c.measured;
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  return j;
}

Json foliation_json(const std::vector<FoliationDescriptor>& fs) {
  Json j;
  j["schema"] = "hypdyn/1";
  j["kind"] = "foliations";
  Json arr = Json::array();
  for (const auto& f : fs) {
    Json e;
    e["kind"] = f.kind == FoliationDescriptor::Kind::contracting ? "contracting"
                                                                 : "eventually_isometric";
    e["verified"] = f.verified;
    e["leaf_check"] = f.leaf_check;
    Json leaves = Json::array();
    for (const auto& leaf : f.leaves) {
      Json pts = Json::array();
      for (Complex p : leaf.points) pts.push_back({p.real(), p.imag()});
      leaves.push_back(std::move(pts));
    }
    e["leaves"] = std::move(leaves);
    arr.push_back(std::move(e));
  }
  j["foliations"] = std::move(arr);
  return j;
}

}  // namespace hypdyn
