#pragma once

// Classification of the explicit Blaschke model tower. The excluded-region
// domains carry no closed-form hyperbolic metric, so every metric statement is
// certified through two-sided bounds: the ambient disc metric from below,
// inscribed-disc densities over measured clearances from above.

#include "hypdyn/blaschke.hpp"
#include "hypdyn/classify.hpp"

namespace hypdyn {

struct ModelPairBrackets {
  Complex x0, y0;
  std::vector<Complex> x_orbit, y_orbit;
  std::vector<double> lower;  // certified lower bounds on the level-n distance
  std::vector<double> upper;  // certified upper bounds; +inf when no clear straight path
  int drop_at = -1;           // level with a certified strict decrease behind it
  bool nonconstant_certified = false;
  bool constant_consistent = false;  // bracket intervals admit a single constant value
};

// Certified distance brackets along the orbit of a pair.
ModelPairBrackets model_pair_brackets(const ModelTower& s, Complex x0, Complex y0);

// A pair whose distance provably drops at level target_level + 1: y is pulled
// back from a point adjacent to the second preimage of the image of x there.
ModelPairBrackets model_far_pair(const ModelTower& s, int target_level);

struct ModelVerdict {
  SixTypeVerdict six;
  double min_origin_clearance = 0.0;  // Euclidean clearance of the origin across levels
  double delta_lower_bound = 0.0;     // certified lower bound for every delta_n(0)
  bool coverings_verified = false;
  ModelPairBrackets far_pair;
  ModelPairBrackets local_pair;
  std::vector<Bracket> origin_brackets;  // distortion bracket at the origin per level
};

ModelVerdict classify_model_tower(const ModelTower& s, const Tolerances& tol = {});

}  // namespace hypdyn
