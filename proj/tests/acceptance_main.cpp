// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "hypdyn/io.hpp"

using namespace hypdyn;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
  std::string name;
  double time_limit_s;
  std::vector<std::string> problems;
  Clock::time_point start = Clock::now();

  Criterion(std::string n, double limit) : name(std::move(n)), time_limit_s(limit) {}
  void require(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
  void finish() {
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (secs > time_limit_s)
      problems.push_back("runtime " + std::to_string(secs) + "s exceeds " +
                         std::to_string(time_limit_s) + "s");
    if (problems.empty()) {
      std::printf("[PASS] %s (%.2fs)\n", name.c_str(), secs);
    } else {
      ++g_failures;
      std::printf("[FAIL] %s (%.2fs)\n", name.c_str(), secs);
      for (const auto& p : problems) std::printf("       - %s\n", p.c_str());
    }
    std::fflush(stdout);
  }
};

std::mt19937 rng_for(const char* tag) {
  std::seed_seq seq(tag, tag + std::strlen(tag));
  return std::mt19937(seq);
}

TowerSpec power_tower(int horizon) {
  double L0 = 2 * kPi;
  return towers::power_annulus(L0, 2, 0.0, 1.0,
                               surface_rep(SurfaceModel::round_annulus_log(L0),
                                           Complex(0.0, 0.5 * kPi)),
                               horizon);
}

void criterion1() {
  Criterion c("1 exact formulas: disc distance, collar width, Mod*ell = pi", 1.0);
  c.require(std::abs(disc_distance(DiscPoint(0.0, 0.0), DiscPoint(0.5, 0.0)) - std::log(3.0)) <
                1e-12,
            "d(0, 1/2) != ln 3");
  c.require(std::abs(collar_width(2.0 * std::acosh(2.0)) - 0.5 * std::log(3.0)) < 1e-12,
            "collar width at cosh(l/2) = 2 != ln(3)/2");
  auto rng = rng_for("c1");
  std::uniform_real_distribution<double> Ld(0.5, 60.0);
  for (int i = 0; i < 20; ++i) {
    SurfaceModel a = SurfaceModel::round_annulus_log(Ld(rng));
    double prod = annulus_modulus(a) * core_geodesic_length(a);
    c.require(std::abs(prod - kPi) < 1e-12, "Mod * ell != pi on a sampled annulus");
  }
  c.finish();
}

void criterion2() {
  Criterion c("2 Schwarz-Pick: 1000 random draws, coverings exactly isometric", 5.0);
  auto rng = rng_for("c2");
  std::uniform_real_distribution<double> u(-0.6, 0.6), a01(0.1, 0.9), ang(0.0, 2 * kPi);
  SurfaceModel d = SurfaceModel::disc();
  for (int i = 0; i < 1000; ++i) {
    double lambda = 0.0;
    bool covering = false;
    switch (i % 5) {
      case 0: {
        MapElement f = MapElement::scaling(std::polar(a01(rng), ang(rng)));
        lambda = hyperbolic_distortion(f, d, d, surface_point(d, Complex(u(rng), u(rng))));
        break;
      }
      case 1: {
        MapElement f = MapElement::rotation(ang(rng));
        covering = true;
        lambda = hyperbolic_distortion(f, d, d, surface_point(d, Complex(u(rng), u(rng))));
        break;
      }
      case 2: {
        MapElement f = MapElement::blaschke2(a01(rng));
        lambda = hyperbolic_distortion(f, d, d, surface_point(d, Complex(u(rng), u(rng))));
        break;
      }
      case 3: {
        MapElement f = MapElement::mobius(MobiusDisc(std::polar(1.0, ang(rng)),
                                                     Complex(0.5 * u(rng), 0.5 * u(rng))));
        covering = true;
        lambda = hyperbolic_distortion(f, d, d, surface_point(d, Complex(u(rng), u(rng))));
        break;
      }
      case 4: {
        double L = 2.0 + 4.0 * a01(rng);
        SurfaceModel a1 = SurfaceModel::round_annulus_log(L);
        SurfaceModel a2 = SurfaceModel::round_annulus_log(2 * L);
        covering = true;
        Complex z = surface_rep(a1, Complex(u(rng), kPi * (0.5 + 0.4 * u(rng))));
        lambda = hyperbolic_distortion(MapElement::power(2), a1, a2, surface_point(a1, z));
        break;
      }
    }
    c.require(lambda <= 1.0 + 1e-12, "lambda exceeded the Schwarz-Pick bound");
    if (covering) c.require(std::abs(lambda - 1.0) < 1e-10, "covering distortion differs from 1");
  }
  c.finish();
}

void criterion3() {
  Criterion c("3 distortion-difference bound on 1000 Blaschke pairs", 10.0);
  auto rng = rng_for("c3");
  std::uniform_real_distribution<double> u(-0.85, 0.85), a01(0.1, 0.9);
  SurfaceModel d = SurfaceModel::disc();
  for (int i = 0; i < 1000; ++i) {
    Complex z(u(rng), u(rng)), w(u(rng), u(rng));
    if (std::abs(z) > 0.85 || std::abs(w) > 0.85) {
      --i;
      continue;
    }
    MapElement b = MapElement::blaschke2(a01(rng));
    double lz = hyperbolic_distortion(b, d, d, surface_point(d, z));
    double lw = hyperbolic_distortion(b, d, d, surface_point(d, w));
    double dd = disc_distance(z, w);
    bool hi = 1 - lz <= std::exp(2 * dd) * (1 - lw) * (1 + 1e-9) + 1e-15;
    bool lo = 1 - lz >= std::exp(-2 * dd) * (1 - lw) * (1 - 1e-9) - 1e-15;
    c.require(hi && lo, "two-sided distortion bound violated");
  }
  c.finish();
}

void criterion4() {
  Criterion c("4 infinitesimal verdicts independent of the sample point", 60.0);
  auto rng = rng_for("c4");
  std::uniform_real_distribution<double> u(0.2, 0.8);
  for (int rep = 0; rep < 20; ++rep) {
    TowerSpec t;
    switch (rep % 4) {
      case 0: t = towers::scaling(Complex(u(rng), 0.05), Complex(0.0), 48); break;
      case 1: t = towers::scaling_semi(0.2 + 0.5 * u(rng), Complex(0.0), 48); break;
      case 2: t = towers::rotation(u(rng), Complex(0.0), 48); break;
      case 3: {
        double a = u(rng);
        t.surface_at = [](int) { return SurfaceModel::disc(); };
        t.map_at = [a](int) { return MapElement::blaschke2(a); };
        t.base = Complex(0.0);
        t.horizon = 48;
        break;
      }
    }
    std::set<InfinitesimalType> verdicts;
    for (int k = 0; k < 5; ++k)
      verdicts.insert(infinitesimal_type(t, Complex(0.12 * k - 0.3, 0.07 * k - 0.1)).type);
    c.require(verdicts.size() == 1, "verdicts differ across sample points");
    c.require(!verdicts.count(InfinitesimalType::inconclusive), "verdict inconclusive");
  }
  c.finish();
}

void criterion5() {
  Criterion c("5 trichotomy fixtures at horizon 64", 5.0);
  InfinitesimalVerdict a =
      infinitesimal_type(towers::scaling(Complex(0.5, 0.0), Complex(0.0), 64), Complex(0.0));
  c.require(a.type == InfinitesimalType::contracting, "scaling(1/2) not contracting");

  InfinitesimalVerdict b =
      infinitesimal_type(towers::scaling_semi(0.25, Complex(0.0), 64), Complex(0.0));
  c.require(b.type == InfinitesimalType::semi_contracting, "geometric schedule not semi-contracting");
  c.require(std::abs(b.partial_sum - 1.0 / 3.0) < 1e-9, "distortion sum != 1/3");

  TowerSpec sw = towers::switch_tower(8, MapElement::scaling(Complex(0.6, 0.0)),
                                      MapElement::rotation(0.9), Complex(0.0), 64);
  InfinitesimalVerdict e = infinitesimal_type(sw, Complex(0.0));
  c.require(e.type == InfinitesimalType::eventually_isometric, "switch tower not eventually isometric");
  c.require(e.exact, "eventual isometry not exact");
  c.finish();
}

void criterion6() {
  Criterion c("6 thin trimodal degree-2 tower: deltas, row, labels, leaves", 30.0);
  TowerSpec p = power_tower(64);
  OrbitTrace tr = iterate_trace(p, p.base, {}, 64);
  for (int n = 0; n < 20; ++n) {
    double ratio = tr.levels[n + 1].delta / tr.levels[n].delta;
    c.require(std::abs(ratio - 0.5) < 1e-9 * 0.5, "delta ratio differs from 1/2");
  }
  SixTypeVerdict v = main_type(p);
  c.require(v.row == 6, "classification row != 6");
  std::set<PairLabel> labels(v.modality.distinct_labels.begin(),
                             v.modality.distinct_labels.end());
  c.require(labels == std::set<PairLabel>{PairLabel::to_zero, PairLabel::positive_not_attained,
                                          PairLabel::eventually_constant},
            "sampled pair labels are not exactly the three behaviours");

  SurfaceModel s0 = p.surface_at(0);
  Complex core = surface_rep(s0, Complex(0.0, 0.5 * kPi));
  auto circle_seq = distance_sequence(p, core, core * std::polar(1.0, kPi / 3.0));
  c.require(circle_seq.back() < 1e-6, "circle-leaf pair distance not below 1e-6 at horizon 64");

  auto radial_seq = distance_sequence(p, surface_rep(s0, Complex(0.0, 0.4 * kPi)),
                                      surface_rep(s0, Complex(0.0, 0.6 * kPi)));
  for (double dn : radial_seq)
    c.require(std::abs(dn - radial_seq[0]) < 1e-9, "radial-leaf pair distance not constant");
  c.finish();
}

void criterion7() {
  Criterion c("7 absorbing annuli: entry level, invariance, growing moduli", 30.0);
  TowerSpec p = power_tower(40);
  AbsorbingAnnuli aa = absorbing_annuli(p, 0.1, 20, 512);
  int first_thin = -1;
  for (int n = 0;; ++n) {
    if (kPi / std::pow(2.0, n) < 0.2) {
      first_thin = n;
      break;
    }
  }
  c.require(aa.first_level == first_thin, "first nonempty level differs from the first ell < 0.2");
  c.require(int(aa.records.size()) >= 20, "fewer than 20 levels recorded");
  c.require(aa.forward_invariant_all, "forward invariance failed at a boundary sample");
  c.require(aa.moduli_strictly_increasing, "band moduli not strictly increasing");
  c.require(aa.tracked_absorbed, "tracked point not absorbed");
  c.finish();
}

void criterion8() {
  Criterion c("8 geometric limit of deck groups with ell_n = 2^-n", 10.0);
  TowerSpec t = towers::cyclic_refine(1.0, 0.5, Complex(0.0), 24);
  OneParameterLimit lim = geometric_limit(t);
  c.require(lim.kind == OneParameterLimit::Kind::hyperbolic_axis, "no hyperbolic flow detected");
  c.require(int(lim.defect.size()) > 20 && lim.defect[20] < 1e-6,
            "convergence defect at n = 20 not below 1e-6");
  for (double s1 : {0.3, -0.5, 0.7}) {
    for (double s2 : {0.2, 0.9}) {
      MobiusDisc ab = mobius_compose(lim.element_at(s1), lim.element_at(s2));
      MobiusDisc ba = mobius_compose(lim.element_at(s2), lim.element_at(s1));
      double gap = std::abs(ab.center() - ba.center()) + std::abs(ab.rotation() - ba.rotation());
      c.require(gap < 1e-8, "flow elements fail to commute within 1e-8");
    }
  }
  c.finish();
}

void criterion9() {
  Criterion c("9 explicit model build: stages 0-6, invariants, coverings, brackets", 120.0);
  ModelTower s = build_model_tower(6);
  c.require(s.complete, "build incomplete: " + s.stop_reason);
  if (!s.complete) {
    c.finish();
    return;
  }
  c.require(s.levels[0].r == 0.5, "r_0 != 1/2 exactly");
  InvariantReport rep = verify_model_invariants(s, 24, 200, 7u);
  for (const auto& chk : rep.checks)
    c.require(chk.pass, chk.name + " failed at level " + std::to_string(chk.level) +
                            " (measured " + std::to_string(chk.measured) + ")");
  c.require(s.max_preimage_residual < 1e-10, "quadratic preimage residual above 1e-10");
  for (int n = 0; n < 6; ++n) {
    double prev = std::numeric_limits<double>::infinity();
    for (int h = n + 1; h <= 6; ++h) {
      Bracket b = local_isometry_bracket(s, n, Complex(0.0), h);
      c.require(b.contains(1.0), "origin bracket excludes 1");
      c.require(b.width() <= prev + 1e-12, "origin bracket failed to narrow");
      prev = b.width();
    }
  }
  c.finish();
}

void criterion10() {
  Criterion c("10 six-type report: rows 1-6 from the shipped specs, no discrepancies", 300.0);
  std::string dir = HYPDYN_SPEC_DIR;
  const char* files[] = {"row1_scaling_half.json",      "row2_scaling_semi.json",
                         "row3_compressed_annulus.json", "row4_rotation.json",
                         "row5_blaschke_model.json",     "row6_power_annulus.json"};
  std::set<int> rows;
  Tolerances tol;
  for (const char* f : files) {
    LoadedSpec spec = load_tower_spec(dir + "/" + f);
    int row = 0;
    std::vector<std::string> disc;
    std::string modality;
    if (spec.kind == LoadedSpec::Kind::blaschke_model) {
      ModelTower model = build_model_tower(spec.model_levels);
      c.require(model.complete, "model build incomplete");
      if (model.complete) {
        ModelVerdict v = classify_model_tower(model, tol);
        row = v.six.row;
        disc = v.six.discrepancies;
        c.require(v.coverings_verified, "model coverings not verified");
        c.require(v.far_pair.nonconstant_certified, "no certified non-constant far pair");
        c.require(v.six.thin.type == ThinnessType::essentially_thick, "model not certified thick");
      }
    } else {
      SixTypeVerdict v = main_type(spec.tower, tol);
      row = v.row;
      disc = v.discrepancies;
      modality = to_string(v.modality.aggregate);
    }
    rows.insert(row);
    c.require(disc.empty(), std::string(f) + ": discrepancy list not empty" +
                                (disc.empty() ? "" : " (" + disc[0] + ")"));
    std::printf("       row %d from %s %s\n", row, f, modality.c_str());
  }
  c.require(rows == std::set<int>{1, 2, 3, 4, 5, 6}, "rows 1-6 not all realized");
  c.finish();
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
