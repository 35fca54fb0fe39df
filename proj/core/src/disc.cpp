#include "hypdyn/disc.hpp"

#include <algorithm>
#include <cmath>

namespace hypdyn {

namespace {

// su(1,1)-style coefficient form (alpha z + beta) / (conj(beta) z + conj(alpha)),
// closed under composition; used internally for composing and classifying.
struct AutCoeffs {
  Complex alpha, beta;
};

AutCoeffs to_coeffs(const MobiusDisc& m) {
  // rotation*(z-a)/(1-conj(a)z) = (s z - s a)/(-conj(s a) z + conj(s)) with s = sqrt(rotation)
  Complex s = std::sqrt(m.rotation());
  return {s, -s * m.center()};
}

MobiusDisc from_coeffs(const AutCoeffs& c) {
  // f(z) = (alpha z + beta)/(conj(beta) z + conj(alpha)); center = f^{-1}(0) = -beta/alpha,
  // rotation = alpha/conj(alpha).
  Complex rot = c.alpha / std::conj(c.alpha);
  Complex center = -c.beta / c.alpha;
  // guard against roundoff pushing |rotation| off the circle
  rot /= std::abs(rot);
  return MobiusDisc(rot, center);
}

}  // namespace

const char* to_string(IsometryKind k) {
  switch (k) {
    case IsometryKind::identity: return "identity";
    case IsometryKind::elliptic: return "elliptic";
    case IsometryKind::parabolic: return "parabolic";
    case IsometryKind::hyperbolic: return "hyperbolic";
  }
  return "?";
}

double acosh1p(double x) {
  if (x < 0) x = 0;
  return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

double disc_distance(Complex z, Complex w) {
  double t = std::abs(z - w) / std::abs(1.0 - std::conj(z) * w);
  if (t >= 1.0) t = std::nextafter(1.0, 0.0);
  // 2 artanh(t), written to stay accurate for t near 0 and near 1
  return std::log1p(2.0 * t / (1.0 - t));
}

double disc_distance(const DiscPoint& z, const DiscPoint& w) {
  return disc_distance(z.value(), w.value());
}

double disc_density(Complex z) { return 2.0 / (1.0 - std::norm(z)); }

double disc_density(const DiscPoint& z) { return disc_density(z.value()); }

DiscPoint mobius_apply(const MobiusDisc& m, const DiscPoint& z) {
  return DiscPoint(m.apply(z.value()));
}

MobiusDisc mobius_compose(const MobiusDisc& m1, const MobiusDisc& m2) {
  AutCoeffs a = to_coeffs(m1), b = to_coeffs(m2);
  AutCoeffs c{a.alpha * b.alpha + a.beta * std::conj(b.beta),
              a.alpha * b.beta + a.beta * std::conj(b.alpha)};
  return from_coeffs(c);
}

MobiusDisc mobius_inverse(const MobiusDisc& m) {
  AutCoeffs a = to_coeffs(m);
  return from_coeffs({std::conj(a.alpha), -a.beta});
}

IsometryClass mobius_classify(const MobiusDisc& m) {
  IsometryClass out;
  if (std::abs(m.center()) <= kUnitModTol && std::abs(m.rotation() - 1.0) <= kUnitModTol) {
    out.kind = IsometryKind::identity;
    return out;
  }

  AutCoeffs c = to_coeffs(m);
  double det = std::norm(c.alpha) - std::norm(c.beta);  // = 1 - |center|^2 > 0
  double scale = std::sqrt(det);
  Complex alpha = c.alpha / scale, beta = c.beta / scale;
  double tr = 2.0 * alpha.real();  // real trace of the normalized matrix

  if (std::abs(beta) <= kUnitModTol) {  // rotation about the origin
    out.kind = IsometryKind::elliptic;
    out.fixed_points = {Complex(0.0, 0.0)};
    return out;
  }

  double disc = std::abs(tr) - 2.0;
  if (std::abs(disc) <= 1e-12) {
    out.kind = IsometryKind::parabolic;
    out.degenerate = true;
    // double root of conj(beta) z^2 + (conj(alpha)-alpha) z - beta = 0
    Complex fp = (alpha - std::conj(alpha)) / (2.0 * std::conj(beta));
    out.fixed_points = {fp / std::abs(fp)};
    return out;
  }

  // fixed points solve conj(beta) z^2 + (conj(alpha) - alpha) z - beta = 0
  Complex A = std::conj(beta), B = std::conj(alpha) - alpha, C = -beta;
  Complex sq = std::sqrt(B * B - 4.0 * A * C);
  Complex q = (std::norm(B + sq) >= std::norm(B - sq)) ? -(B + sq) / 2.0 : -(B - sq) / 2.0;
  Complex r1 = q / A;
  Complex r2 = C / q;

  if (disc > 0) {
    out.kind = IsometryKind::hyperbolic;
    // sinh^2(l/2) = (tr/2)^2 - 1 = |beta|^2 - (Im alpha)^2 for the normalized
    // matrix; this form stays accurate for near-identity elements
    double s2 = std::norm(beta) - alpha.imag() * alpha.imag();
    out.translation_length = 2.0 * std::asinh(std::sqrt(std::max(s2, 0.0)));
    out.fixed_points = {r1 / std::abs(r1), r2 / std::abs(r2)};
  } else {
    out.kind = IsometryKind::elliptic;
    out.fixed_points = {std::abs(r1) < std::abs(r2) ? r1 : r2};
  }
  return out;
}

double collar_width(double l) {
  if (!(l > 0)) throw std::invalid_argument("collar_width: geodesic length must be > 0");
  double h = 0.5 * l;
  if (h > 350.0) return 2.0 * std::exp(-h);  // cosh would overflow; asymptotic form
  return std::atanh(1.0 / std::cosh(h));
}

}  // namespace hypdyn
