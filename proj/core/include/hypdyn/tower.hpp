#pragma once

// Towers of holomorphic maps between model surfaces, orbit traces of the
// distortion / injectivity-radius / pair-distance sequences, and normalized
// lifts to the disc.

#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "hypdyn/surface.hpp"

namespace hypdyn {

class MapElement {
 public:
  enum class Family { scaling, rotation, blaschke2, power, mobius, composite };

  static MapElement scaling(Complex factor);
  static MapElement rotation(double angle);
  static MapElement blaschke2(double a);
  static MapElement power(int exponent, Complex post_scale = Complex(1.0));
  static MapElement mobius(const MobiusDisc& m);
  static MapElement composite(std::vector<MapElement> parts);

  Family family() const { return family_; }
  Complex factor() const { return factor_; }      // scaling / power post-scale
  double angle() const { return angle_; }          // rotation
  double blaschke_param() const { return a_; }     // blaschke2
  int exponent() const { return exponent_; }       // power
  const MobiusDisc& mobius_map() const { return mob_; }
  const std::vector<MapElement>& parts() const { return *parts_; }

  // Action and exact analytic derivative in the public surface coordinate.
  Complex eval(Complex z) const;
  Complex deriv(Complex z) const;

 private:
  Family family_ = Family::scaling;
  Complex factor_{1.0};
  double angle_ = 0.0;
  double a_ = 0.5;
  int exponent_ = 1;
  MobiusDisc mob_;
  std::shared_ptr<const std::vector<MapElement>> parts_;
};

const char* to_string(MapElement::Family f);

struct TowerSpec {
  std::function<SurfaceModel(int)> surface_at;
  std::function<MapElement(int)> map_at;  // from surface n to surface n+1
  Complex base{0.0};                      // public rep on surface 0
  std::vector<std::pair<Complex, Complex>> tracked_pairs;
  int horizon = 64;
  std::string name = "tower";
};

constexpr int kHorizonCap = 4096;

// Compatibility of one map with its source/target surfaces.
struct StepCheck {
  bool ok = false;
  bool covering = false;  // unbranched covering between the two surfaces
  std::string reason;
};
StepCheck check_step(const MapElement& f, const SurfaceModel& src, const SurfaceModel& dst);

struct ValidationEntry {
  int level = 0;
  bool ok = false;
  bool covering = false;
  std::string reason;
};
struct ValidationReport {
  bool ok = true;
  int first_failure = -1;
  std::vector<ValidationEntry> levels;
};
ValidationReport tower_validate(const TowerSpec& t);

// Hyperbolic distortion of f : src -> dst at p, in [0, 1].
double hyperbolic_distortion(const MapElement& f, const SurfaceModel& src,
                             const SurfaceModel& dst, const SurfacePointRep& p);

struct OrbitTrace {
  struct Level {
    Complex base_rep;            // public rep coordinate of the base image
    double lambda = 1.0;         // distortion of map (n-1) at the level-(n-1) base image; 1 at n=0
    bool lambda_exact_one = false;  // the step into this level was a verified covering
    double delta = 0.0;          // injectivity radius at the base image (inf on the disc)
    std::vector<double> pair_dist;
    std::vector<double> pair_rep_gap;  // Euclidean separation of internal representatives
    std::optional<CollarBand> collar;
    double lambda_product = 1.0;  // prod_{k<=n} lambda_k
  };
  std::vector<Level> levels;
  bool truncated = false;
  int truncated_at = -1;
  std::string truncation_reason;
  int pair_count = 0;
};

OrbitTrace iterate_trace(const TowerSpec& t);
OrbitTrace iterate_trace(const TowerSpec& t, Complex base,
                         const std::vector<std::pair<Complex, Complex>>& pairs, int horizon);

std::vector<double> lambda_sequence(const TowerSpec& t, Complex p);
std::vector<double> delta_sequence(const TowerSpec& t, Complex p);
std::vector<double> distance_sequence(const TowerSpec& t, Complex p, Complex q);

// Internal-coordinate transport of a point through one map (stable at any depth).
Complex transport_point(const MapElement& f, const SurfaceModel& src, const SurfaceModel& dst,
                        Complex internal_src);

// Normalized lifts g_n : D -> D fixing 0 with |g_n'(0)| = lambda_{n+1}.
struct LiftMap {
  std::function<Complex(Complex)> eval;
  std::function<Complex(Complex)> deriv;
};
struct NormalizedLifts {
  std::vector<LiftMap> lifts;
  std::vector<double> lambda;  // |g_n'(0)|
  bool truncated = false;
  int truncated_at = -1;
  std::string reason;
};
NormalizedLifts lift_normalize(const TowerSpec& t);

// Product of power-map exponents over levels [0, n): the winding multiplicity
// of the image of the core circle. Throws for non-power families.
long long cumulative_core_winding(const TowerSpec& t, int n);

// --- built-in tower constructors ------------------------------------------

namespace towers {

// Discs with z -> c z at every level.
TowerSpec scaling(Complex c, Complex base, int horizon);
// Discs with factor 1 - ratio^(n+1) at level n (so lambda_n = 1 - ratio^n).
TowerSpec scaling_semi(double ratio, Complex base, int horizon);
// Discs with z -> e^{i angle} z.
TowerSpec rotation(double angle, Complex base, int horizon);
// "before" maps for levels < switch_at, "after" maps from switch_at on (discs).
TowerSpec switch_tower(int switch_at, const MapElement& before, const MapElement& after,
                       Complex base, int horizon);
// Round annuli L_{n+1} = (d + tau_n) L_n with tau_n = tau0 * tau_decay^n and
// maps z -> s_n z^d, s_n = exp(-(L_{n+1} - d L_n)); tau0 = 0 gives the pure
// degree-d covering tower.
TowerSpec power_annulus(double L0, int d, double tau0, double tau_decay, Complex base,
                        int horizon);
// Cyclic quotients with common axis (-1,1) and ell_n = ell0 * ratio^n, connected
// by identity-on-representatives coverings (valid when 1/ratio is an integer).
TowerSpec cyclic_refine(double ell0, double ratio, Complex base, int horizon);
// Discs with a fixed automorphism at every level.
TowerSpec mobius_tower(const MobiusDisc& m, Complex base, int horizon);

}  // namespace towers

}  // namespace hypdyn
