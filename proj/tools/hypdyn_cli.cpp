// Batch front door: load tower specs, run traces / classification / model
// builds / foliation extraction, and emit CSV, JSON, and SVG artifacts.
//
// Exit codes: 0 conclusive/pass, 2 usage or input error, 3 inconclusive or
// precondition violation, 4 invariant failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hypdyn/io.hpp"
#include "hypdyn/svg.hpp"

namespace fs = std::filesystem;
using namespace hypdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitInvariant = 4;

struct EmitFlags {
  bool csv = true, json = true, svg = false;
};

EmitFlags parse_emit(const std::string& s) {
  EmitFlags f{false, false, false};
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (cur == "csv") f.csv = true;
      else if (cur == "json") f.json = true;
      else if (cur == "svg") f.svg = true;
      else if (!cur.empty()) throw CLI::ValidationError("--emit", "unknown format: " + cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return f;
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path().empty() ? "." : p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

struct ToleranceArgs {
  double tol_iso = -1, tol_zero = -1, tol_const = -1, thin = -1, margulis = -1, divergence = -1;
  Tolerances resolve() const {
    Tolerances t;
    if (tol_iso > 0) t.tol_iso = tol_iso;
    if (tol_zero > 0) t.tol_zero = tol_zero;
    if (tol_const > 0) t.tol_const = tol_const;
    if (thin > 0) t.thin_threshold = thin;
    if (margulis > 0) t.margulis = margulis;
    if (divergence > 0) t.divergence_threshold = divergence;
    t.validate();
    return t;
  }
};

void add_tolerance_flags(CLI::App* cmd, ToleranceArgs& ta) {
  cmd->add_option("--tol-iso", ta.tol_iso, "per-step isometry tolerance");
  cmd->add_option("--tol-zero", ta.tol_zero, "zero-distance threshold at the horizon");
  cmd->add_option("--tol-const", ta.tol_const, "eventual-constancy plateau width");
  cmd->add_option("--tol-thin", ta.thin, "thin-part detection threshold");
  cmd->add_option("--tol-margulis", ta.margulis, "Margulis constant");
  cmd->add_option("--tol-divergence", ta.divergence, "distortion-sum divergence threshold");
}

int classify_one(const LoadedSpec& spec, const Tolerances& tol, int horizon_override,
                 const fs::path& outdir, const EmitFlags& emit, Json* summary_row) {
  Json report;
  int rc = kExitOk;
  if (spec.kind == LoadedSpec::Kind::blaschke_model) {
    ModelTower model = build_model_tower(spec.model_levels);
    if (!model.complete) {
      std::cerr << "model build incomplete: " << model.stop_reason << "\n";
      return kExitInconclusive;
    }
    ModelVerdict v = classify_model_tower(model, tol);
    report = model_verdict_json(v, tol);
    if (v.six.row == 0) rc = kExitInconclusive;
    else if (!v.six.discrepancies.empty()) rc = kExitInvariant;
  } else {
    TowerSpec t = spec.tower;
    if (horizon_override > 0) t.horizon = horizon_override;
    SixTypeVerdict v = main_type(t, tol);
    report = verdict_json(v, tol);
    if (v.row == 0) rc = kExitInconclusive;
    else if (!v.discrepancies.empty()) rc = kExitInvariant;
  }
  if (emit.json) write_file(outdir / (spec.name + ".classify.json"), report.dump(2) + "\n");
  std::cout << spec.name << ": row " << report["row"] << ", " << report["infinitesimal"]
            << ", " << report["thinness"] << ", modality "
            << report["modality"]["aggregate"] << "\n";
  if (summary_row) {
    (*summary_row)["tower"] = spec.name;
    (*summary_row)["row"] = report["row"];
    (*summary_row)["modality"] = report["modality"]["aggregate"];
    (*summary_row)["discrepancies"] = report["discrepancies"];
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic dynamics of map towers: traces, classification, model builds"};
  app.require_subcommand(1);

  std::string tower_path, out_dir = "out", emit_str = "csv,json", spec_dir = "specs";
  int horizon = -1, levels = 6;
  double eps = 0.1;
  ToleranceArgs ta;

  CLI::App* trace = app.add_subcommand("trace", "run an orbit trace and emit CSV/JSON");
  trace->add_option("--tower", tower_path, "tower spec JSON")->required();
  trace->add_option("--horizon", horizon, "override the spec horizon");
  trace->add_option("--out", out_dir, "output directory");
  trace->add_option("--emit", emit_str, "comma list of csv,json");

  CLI::App* classify = app.add_subcommand("classify", "classify a tower into the six types");
  classify->add_option("--tower", tower_path, "tower spec JSON")->required();
  classify->add_option("--horizon", horizon, "override the spec horizon");
  classify->add_option("--out", out_dir, "output directory");
  classify->add_option("--emit", emit_str, "comma list of json");
  add_tolerance_flags(classify, ta);

  CLI::App* blaschke = app.add_subcommand("blaschke", "explicit degree-2 model");
  CLI::App* build = blaschke->add_subcommand("build", "build and verify the region table");
  int build_levels_cap = 8;
  build->add_option("--levels", levels, "stages to build (default 6)");
  build->add_option("--levels-cap", build_levels_cap, "safety cap");
  build->add_option("--out", out_dir, "output directory");
  build->add_option("--emit", emit_str, "comma list of json,svg");

  CLI::App* foliation = app.add_subcommand("foliation", "extract singular foliations");
  foliation->add_option("--tower", tower_path, "tower spec JSON")->required();
  foliation->add_option("--horizon", horizon, "override the spec horizon");
  foliation->add_option("--out", out_dir, "output directory");
  foliation->add_option("--emit", emit_str, "comma list of json,svg");
  add_tolerance_flags(foliation, ta);

  CLI::App* report = app.add_subcommand("report", "classify every spec in a directory");
  report->add_option("--dir", spec_dir, "directory of tower specs");
  report->add_option("--out", out_dir, "output directory");
  report->add_option("--horizon", horizon, "override the spec horizon");
  add_tolerance_flags(report, ta);

  CLI11_PARSE(app, argc, argv);

  try {
    EmitFlags emit = parse_emit(emit_str);
    fs::path outp(out_dir);

    if (trace->parsed()) {
      LoadedSpec spec = load_tower_spec(tower_path);
      if (spec.kind != LoadedSpec::Kind::tower)
        throw std::invalid_argument("trace: spec describes a model build, not a tower");
      TowerSpec t = spec.tower;
      if (horizon >= 0) t.horizon = horizon;
      ValidationReport vr = tower_validate(t);
      if (!vr.ok) {
        std::cerr << "tower invalid at level " << vr.first_failure << ": "
                  << vr.levels[vr.first_failure].reason << "\n";
        return kExitInconclusive;
      }
      OrbitTrace tr = iterate_trace(t);
      if (emit.csv) write_file(outp / (spec.name + ".trace.csv"), trace_csv(tr));
      if (emit.json) write_file(outp / (spec.name + ".trace.json"), trace_json(tr).dump(2) + "\n");
      std::cout << spec.name << ": " << tr.levels.size() << " levels"
                << (tr.truncated ? " (truncated: " + tr.truncation_reason + ")" : "") << "\n";
      return kExitOk;
    }

    if (classify->parsed()) {
      LoadedSpec spec = load_tower_spec(tower_path);
      return classify_one(spec, ta.resolve(), horizon, outp, emit, nullptr);
    }

    if (build->parsed()) {
      if (levels < 0) {
        std::cerr << "usage error: --levels must be >= 0\n";
        return kExitUsage;
      }
      if (levels > build_levels_cap) {
        std::cerr << "usage error: --levels exceeds the cap (" << build_levels_cap << ")\n";
        return kExitUsage;
      }
      ModelTower model = build_model_tower(levels);
      if (emit.json) write_file(outp / "regions.json", regions_json(model).dump() + "\n");
      if (emit.svg)
        for (int n = 0; n <= model.built_stages(); ++n)
          write_file(outp / ("regions_level_" + std::to_string(n) + ".svg"),
                     svg_model_level(model, n));
      if (!model.complete) {
        std::cerr << "build stopped: " << model.stop_reason << "\n";
        return kExitInconclusive;
      }
      InvariantReport rep = verify_model_invariants(model);
      if (emit.json)
        write_file(outp / "invariants.json", invariant_report_json(rep).dump(2) + "\n");
      for (const auto& c : rep.checks)
        if (!c.pass)
          std::cout << "FAIL " << c.name << " (level " << c.level << ", measured " << c.measured
                    << ")\n";
      std::cout << "built " << levels + 1 << " stages; r_0 = " << model.levels[0].r
                << "; invariants " << (rep.all_pass ? "all pass" : "FAILED") << "\n";
      return rep.all_pass ? kExitOk : kExitInvariant;
    }

    if (foliation->parsed()) {
      LoadedSpec spec = load_tower_spec(tower_path);
      if (spec.kind != LoadedSpec::Kind::tower)
        throw std::invalid_argument("foliation: spec describes a model build, not a tower");
      TowerSpec t = spec.tower;
      if (horizon >= 0) t.horizon = horizon;
      Tolerances tol = ta.resolve();
      std::vector<FoliationDescriptor> fs_out;
      try {
        fs_out = foliation_extract(t, tol);
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return kExitInconclusive;
      }
      if (emit.json)
        write_file(outp / (spec.name + ".foliation.json"), foliation_json(fs_out).dump(2) + "\n");
      if (emit.svg)
        write_file(outp / (spec.name + ".foliation.svg"),
                   svg_foliation(t.surface_at(0), fs_out));
      for (const auto& f : fs_out)
        std::cout << (f.kind == FoliationDescriptor::Kind::contracting ? "contracting"
                                                                       : "eventually_isometric")
                  << " foliation: " << f.leaves.size() << " leaves, "
                  << (f.verified ? "verified" : "NOT verified") << "\n";
      for (const auto& f : fs_out)
        if (!f.verified) return kExitInvariant;
      return kExitOk;
    }

    if (report->parsed()) {
      Tolerances tol = ta.resolve();
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(spec_dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) {
        std::cerr << "no spec files in " << spec_dir << "\n";
        return kExitUsage;
      }
      Json summary;
      summary["schema"] = "hypdyn/1";
      summary["kind"] = "report";
      Json rows = Json::array();
      int rc = kExitOk;
      for (const auto& f : files) {
        LoadedSpec spec = load_tower_spec(f.string());
        Json row;
        EmitFlags ef{false, true, false};
        int one = classify_one(spec, tol, horizon, outp, ef, &row);
        rows.push_back(std::move(row));
        rc = std::max(rc, one);
      }
      summary["towers"] = std::move(rows);
      write_file(outp / "report.json", summary.dump(2) + "\n");
      return rc;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
