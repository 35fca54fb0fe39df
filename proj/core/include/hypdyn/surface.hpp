#pragma once

// Model hyperbolic surfaces: the disc, round annuli r < |z| < 1, and cyclic
// quotients of the disc by a fixed-point-free Mobius generator.
//
// Internal computational coordinates:
//   disc / cyclic_quotient : a disc representative u
//   round_annulus          : zeta = t + i*phi with |z| = exp(-L*phi/pi),
//                            arg z = L*t/pi, L = log(1/r). The quotient of the
//                            strip 0 < phi < pi by t -> t + ell (ell = 2*pi^2/L)
//                            is the annulus; e^zeta lies in the upper half-plane.
// Annuli are parameterized by L rather than r: inner radii underflow double
// precision after a few levels of a degree-2 tower.

#include <optional>

#include "hypdyn/disc.hpp"

namespace hypdyn {

constexpr double kPi = 3.14159265358979323846;

// General complex Mobius map (a z + b) / (c z + d); used for half-plane normalizers.
struct CMobius {
  Complex a{1}, b{0}, c{0}, d{1};
  Complex apply(Complex z) const { return (a * z + b) / (c * z + d); }
  CMobius inverse() const { return {d, -b, -c, a}; }
  static CMobius compose(const CMobius& f, const CMobius& g) {
    return {f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
            f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d};
  }
};

enum class SurfaceKind { disc, round_annulus, cyclic_quotient };

struct QuotientData {
  IsometryKind kind = IsometryKind::hyperbolic;  // hyperbolic or parabolic
  double period = 0.0;  // translation length ell (hyperbolic) / horocyclic period (parabolic)
  CMobius to_h;         // disc -> upper half-plane, generator becomes w -> e^ell w (resp. w -> w + period)
};

class SurfaceModel {
 public:
  static SurfaceModel disc();
  static SurfaceModel round_annulus(double inner_radius);
  static SurfaceModel round_annulus_log(double log_inv_inner_radius);
  static SurfaceModel cyclic_quotient(const MobiusDisc& generator);

  SurfaceKind kind() const { return kind_; }
  double log_inv_inner_radius() const { return L_; }          // annulus only
  double inner_radius() const { return std::exp(-L_); }        // annulus only; may underflow
  const MobiusDisc& generator() const { return generator_; }   // quotient only
  const QuotientData& quotient() const { return quot_; }       // quotient only
  bool is_annulus_type() const;  // round annulus or hyperbolic cyclic quotient

  bool same_as(const SurfaceModel& other, double tol = 1e-12) const;

 private:
  SurfaceModel() = default;
  SurfaceKind kind_ = SurfaceKind::disc;
  double L_ = 0.0;
  MobiusDisc generator_;
  QuotientData quot_;
};

struct SurfacePointRep {
  SurfaceModel surface;
  Complex rep;  // disc representative, or annulus coordinate r < |rep| < 1
};

SurfacePointRep surface_point(const SurfaceModel& s, Complex rep);

double surface_density(const SurfacePointRep& p);
double surface_distance(const SurfacePointRep& x, const SurfacePointRep& y);
double injectivity_radius(const SurfacePointRep& p);  // +infinity on the disc

double core_geodesic_length(const SurfaceModel& s);  // annulus-type only
double annulus_modulus(const SurfaceModel& s);       // = pi / core length

// The round annulus as a cyclic quotient: hyperbolic generator with axis the
// real diameter and translation length 2*pi^2 / log(1/r).
SurfaceModel to_cyclic_quotient(const SurfaceModel& round_annulus);

// Sub-annulus of points with injectivity radius <= eps around the core geodesic.
struct CollarBand {
  bool empty = true;
  double eps = 0.0;
  double core_length = 0.0;
  double half_width = 0.0;  // max distance to the core geodesic
  double phi_min = 0.0;     // band is phi in [phi_min, pi - phi_min] in strip coordinates
  double modulus = 0.0;     // (pi - 2 phi_min) / ell
};
CollarBand collar_annulus(const SurfaceModel& s, double eps, double margulis = 0.2);

// --- internal computational coordinates ---------------------------------

// public rep <-> internal coordinate (u for disc/quotient, zeta for annulus)
Complex surface_internal(const SurfaceModel& s, Complex rep);
Complex surface_rep(const SurfaceModel& s, Complex internal);

double internal_distance(const SurfaceModel& s, Complex a, Complex b);
double internal_injectivity(const SurfaceModel& s, Complex a);
double internal_density(const SurfaceModel& s, Complex a);

// (t, phi) strip/half-plane coordinates of a point, for annulus-type surfaces.
Complex quotient_strip_coords(const SurfaceModel& s, Complex internal);

// --- half-plane normalizers ----------------------------------------------

// Disc -> H normalizer sending the geodesic (repelling -> attracting) to the
// positive imaginary axis oriented so the translation w -> e^ell w moves
// toward the attracting endpoint.
CMobius halfplane_normalizer_for_axis(Complex repelling, Complex attracting);
// Disc -> H normalizer sending a boundary point to infinity.
CMobius halfplane_normalizer_parabolic(Complex fixed_point);
// Interpret a CMobius that maps the disc to itself as a MobiusDisc.
MobiusDisc mobius_from_cmobius(const CMobius& f);
// Boundary fixed-point data of a cyclic quotient, read off its normalizer.
std::pair<Complex, Complex> quotient_axis(const SurfaceModel& q);  // (repelling, attracting)
Complex quotient_parabolic_point(const SurfaceModel& q);

// --- universal covering of the round annulus -----------------------------

// zeta <-> disc coordinates through the upper half-plane (e^zeta in H).
Complex disc_from_zeta(Complex zeta);
Complex zeta_from_disc(Complex u);

// Covering map D -> A(r,1) and its derivative; lift of an annulus point.
Complex annulus_cover(Complex u, double L);
Complex annulus_cover_deriv(Complex u, double L);
Complex annulus_lift(Complex z, double L);

}  // namespace hypdyn
