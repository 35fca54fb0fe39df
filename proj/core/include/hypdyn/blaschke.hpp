#pragma once

// The explicit degree-2 Blaschke model: b_a(z) = z (z + a)/(1 + a z), quadratic
// preimages with continuity-based branch tracking, sampled Jordan-region
// bookkeeping for the excluded-region table A[k][n], and the inductive choice
// of the parameters a_n, r_n, eps_n with its verification harness.

#include <array>

#include "hypdyn/tower.hpp"

namespace hypdyn {

struct BlaschkeDeg2 {
  double a = 0.5;

  explicit BlaschkeDeg2(double a_) : a(a_) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("BlaschkeDeg2: a must lie in (0,1)");
  }

  Complex eval(Complex z) const { return z * (z + a) / (1.0 + a * z); }
  Complex deriv(Complex z) const {
    Complex den = 1.0 + a * z;
    return (a * z * z + 2.0 * z + a) / (den * den);
  }
  // the unique critical point in the disc, real in (-1, 0)
  double critical_point() const { return (-1.0 + std::sqrt(1.0 - a * a)) / a; }
  Complex critical_value() const { return eval(Complex(critical_point())); }
};

// Both solutions of b(z) = w, i.e. of z^2 + a(1-w)z - w = 0 (double root at the
// critical value, reported twice).
std::array<Complex, 2> preimage_points(const BlaschkeDeg2& b, Complex w);

// One closed Jordan region, stored as a positively oriented closed polyline.
struct Region {
  std::vector<Complex> pts;  // pts.front() == pts.back()
  int born_stage = 0;        // construction stage that created this component
  double min_re = 0, max_re = 0, min_im = 0, max_im = 0;

  void finalize();  // closure check, orientation fix, bounding box
  bool bbox_near(Complex z, double pad) const {
    return z.real() >= min_re - pad && z.real() <= max_re + pad && z.imag() >= min_im - pad &&
           z.imag() <= max_im + pad;
  }
  double max_modulus() const;
  double min_modulus() const;
};

struct RegionSet {
  std::vector<Region> components;
  int sub = 0;    // k of A_k^n
  int stage = 0;  // n of A_k^n
  double max_residual = 0.0;  // worst |b(z) - w| seen while tracking preimages
};

int winding_number(const std::vector<Complex>& closed_polyline, Complex z);
bool region_contains(const Region& r, Complex z);
bool set_contains(const RegionSet& rs, Complex z);
double distance_to_boundary(const Region& r, Complex z);  // to the polyline
Region circle_region(Complex center, double radius, int samples);

struct BuildPolicy {
  int samples = 512;
  double refine_gap = 1e-2;  // adjacent output samples further apart than this get refined
  int max_samples = 16384;
  double r_margin_frac = 0.25;  // r_m = maxmod + frac (1 - maxmod)
  double c_margin_frac = 0.35;  // require |c_a| >= r_m + frac (1 - r_m)
  double v_margin_frac = 0.02;  // require |v_a| <= r_m - frac (1 - r_m)
  double eps_gap_frac = 0.02;   // admissible eps window must be wider than frac (1 - r_m)
  double grid_start = 1.0 / 16.0;
  double grid_floor = 1.0 / double(1ll << 44);
  double v_branch_margin = 10.0;  // clearance from the critical value, in local sample spacings
};

// Image of R under b; R must sit in the injectivity disc D(0, |c_a|).
RegionSet region_pushforward(const BlaschkeDeg2& b, const RegionSet& r,
                             const BuildPolicy& policy = {});
// Preimage of R under b. Components whose interior contains the critical value
// come back as a single component (the two branch chains close up after two
// loops); boundaries passing too close to the critical value are refused.
RegionSet region_preimage(const BlaschkeDeg2& b, const RegionSet& r,
                          const BuildPolicy& policy = {});

struct LevelParams {
  double a = 0;
  double r = 0;
  double eps = 0;
  double c = 0;        // critical point
  Complex v;           // critical value
  double eps_lo = 0;   // admissible eps window measured during the build
  double eps_hi = 0;
};

class ModelTower {
 public:
  std::vector<LevelParams> levels;                // per stage m = 0..built
  std::vector<std::vector<RegionSet>> table;      // table[n][k] = A_k^n, 0 <= k <= n+1
  std::vector<std::string> log;
  bool complete = true;
  std::string stop_reason;
  double max_preimage_residual = 0.0;  // max |b(z) - w| over all tracked preimage samples

  int built_stages() const { return int(table.size()) - 1; }  // largest n with A_*^n built
  const RegionSet& region(int k, int n) const { return table.at(n).at(k); }
  BlaschkeDeg2 map(int m) const { return BlaschkeDeg2(levels.at(m).a); }
};

ModelTower build_model_tower(int levels, const BuildPolicy& policy = {});

// z in the truncated domain of level n: inside the disc and outside A_n^k for
// n <= k <= truncation. Over-approximates the true domain, monotone in the
// truncation level.
bool point_in_domain(const ModelTower& s, int n, Complex z, int truncation);

// Euclidean clearance of z within the truncated level-n domain: a lower bound
// for the distance to the true domain boundary (unsampled exclusions at stages
// beyond the truncation stay outside D(0, r_truncation)).
double domain_clearance(const ModelTower& s, int n, Complex z, int truncation);

struct InvariantCheck {
  std::string name;
  int level = -1;
  bool pass = false;
  double measured = 0.0;
  std::string detail;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  bool all_pass = true;
  void add(InvariantCheck c) {
    all_pass = all_pass && c.pass;
    checks.push_back(std::move(c));
  }
};

InvariantReport verify_model_invariants(const ModelTower& s, int injectivity_grid = 24,
                                        int covering_targets = 200, unsigned seed = 7u);

// Translated tower: level n lives around 4n, K_n = closure(T_n(domain_n)),
// connecting maps f_n = T_{n+1} . b_n . T_n^{-1}.
struct TranslatedTower {
  const ModelTower* model = nullptr;
  static Complex translate(int n, Complex z) { return z + 4.0 * n; }
  static Complex untranslate(int n, Complex z) { return z - 4.0 * n; }
  Complex apply_map(int n, Complex z) const {
    return translate(n + 1, model->map(n).eval(untranslate(n, z)));
  }
  bool in_compact(int n, Complex z, int truncation) const {
    return point_in_domain(*model, n, untranslate(n, z), truncation);
  }
};

TranslatedTower translate_tower(const ModelTower& s);

// Two-sided certificate for the hyperbolic distortion of b_n at z between the
// level-n and level-(n+1) truncated domains; always contains the true value.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  double width() const { return hi - lo; }
};

Bracket local_isometry_bracket(const ModelTower& s, int n, Complex z, int truncation);

}  // namespace hypdyn
