#pragma once

// Hyperbolic geometry of the unit disc and its conformal automorphisms.
// Convention throughout: curvature -1, density 2/(1-|z|^2), so that
// d(0,x) = log((1+x)/(1-x)) for real x in [0,1).

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypdyn {

using Complex = std::complex<double>;

constexpr double kBoundaryTol = 1e-12;  // points with |z| > 1 - kBoundaryTol are rejected
constexpr double kUnitModTol = 1e-12;   // |rotation| must be 1 within this

// A point of the open unit disc. Construction rejects anything within
// kBoundaryTol of the unit circle: the distance formulas lose all precision there.
class DiscPoint {
 public:
  DiscPoint() : value_(0.0, 0.0) {}
  explicit DiscPoint(Complex value) : value_(value) {
    if (!(std::abs(value) <= 1.0 - kBoundaryTol))
      throw std::invalid_argument("DiscPoint: |z| = " + std::to_string(std::abs(value)) +
                                  " is not inside the unit disc (tolerance 1e-12)");
  }
  DiscPoint(double re, double im) : DiscPoint(Complex(re, im)) {}

  Complex value() const { return value_; }
  double abs() const { return std::abs(value_); }

 private:
  Complex value_;
};

// Conformal automorphism of the disc, z -> rotation * (z - center) / (1 - conj(center) z).
class MobiusDisc {
 public:
  MobiusDisc() : rotation_(1.0, 0.0), center_(0.0, 0.0) {}
  MobiusDisc(Complex rotation, Complex center) : rotation_(rotation), center_(center) {
    if (std::abs(std::abs(rotation) - 1.0) > kUnitModTol)
      throw std::invalid_argument("MobiusDisc: |rotation| must be 1");
    if (!(std::abs(center) < 1.0))
      throw std::invalid_argument("MobiusDisc: |center| must be < 1");
    rotation_ /= std::abs(rotation_);
  }

  static MobiusDisc identity() { return MobiusDisc(); }
  // The automorphism sending p to 0 with no extra rotation.
  static MobiusDisc center_at(Complex p) { return MobiusDisc(Complex(1.0, 0.0), p); }

  Complex rotation() const { return rotation_; }
  Complex center() const { return center_; }

  Complex apply(Complex z) const {
    return rotation_ * (z - center_) / (1.0 - std::conj(center_) * z);
  }
  // |f'(z)| for this automorphism.
  Complex deriv(Complex z) const {
    Complex den = 1.0 - std::conj(center_) * z;
    return rotation_ * (1.0 - std::norm(center_)) / (den * den);
  }

 private:
  Complex rotation_, center_;
};

enum class IsometryKind { identity, elliptic, parabolic, hyperbolic };

struct IsometryClass {
  IsometryKind kind = IsometryKind::identity;
  double translation_length = 0.0;     // > 0 iff hyperbolic
  std::vector<Complex> fixed_points;   // boundary points for hyperbolic/parabolic, interior for elliptic
  bool degenerate = false;             // set when the discriminant sits within tolerance of the parabolic boundary
};

const char* to_string(IsometryKind k);

// Hyperbolic distance between two disc points (curvature -1).
double disc_distance(const DiscPoint& z, const DiscPoint& w);
double disc_distance(Complex z, Complex w);  // unchecked fast path

// Density of the hyperbolic metric at z: 2/(1-|z|^2).
double disc_density(const DiscPoint& z);
double disc_density(Complex z);

DiscPoint mobius_apply(const MobiusDisc& m, const DiscPoint& z);
MobiusDisc mobius_compose(const MobiusDisc& m1, const MobiusDisc& m2);  // m1 after m2
MobiusDisc mobius_inverse(const MobiusDisc& m);
IsometryClass mobius_classify(const MobiusDisc& m);

// Half-width eta(l) of the standard collar about a closed geodesic of length l:
// eta(l) = (1/2) log((cosh(l/2)+1)/(cosh(l/2)-1)) = artanh(1/cosh(l/2)).
double collar_width(double l);

// log1p-based arccosh(1+x) for x >= 0; accurate for tiny x.
double acosh1p(double x);

}  // namespace hypdyn
