#pragma once

// Executable classification of tower dynamics: the infinitesimal trichotomy
// from the distortion sum, essential thin/thick from injectivity radii, pair
// modality of distance sequences, the six-row type table, absorbing annuli,
// geometric limits of deck groups, and singular foliations.

#include "hypdyn/tower.hpp"

namespace hypdyn {

struct Tolerances {
  double tol_iso = 1e-12;     // per-step isometry
  double tol_zero = 1e-6;     // distance considered zero at the horizon
  double tol_const = 1e-9;    // eventual-constancy plateau width
  double thin_threshold = 0.2;
  double margulis = 0.2;
  double divergence_threshold = 50.0;  // partial sums of (1 - lambda) above this diverge
  double fit_summable_q = 1.0 - 1e-3;  // fitted tail ratio below this is summable

  void validate() const {
    if (!(tol_zero > tol_const && tol_const > tol_iso))
      throw std::invalid_argument("tolerances must satisfy tol_zero > tol_const > tol_iso");
  }
};

enum class InfinitesimalType { contracting, semi_contracting, eventually_isometric, inconclusive };
enum class ThinnessType { essentially_thin, essentially_thick, inconclusive };
enum class PairLabel { to_zero, positive_not_attained, eventually_constant, excluded_merging, inconclusive };
enum class Modality { unimodal, bimodal, trimodal, none };

const char* to_string(InfinitesimalType t);
const char* to_string(ThinnessType t);
const char* to_string(PairLabel l);
const char* to_string(Modality m);

struct InfinitesimalVerdict {
  InfinitesimalType type = InfinitesimalType::inconclusive;
  double partial_sum = 0.0;  // sum of (1 - lambda_n), n >= 1, up to the horizon
  double fitted_q = 0.0;     // geometric fit of the trailing (1 - lambda_n)
  double fitted_c = 0.0;
  double tail_estimate = 0.0;  // extrapolated remainder of the sum
  bool exact = false;          // all steps past exact_from are verified coverings
  int exact_from = -1;
  std::string confidence;  // "exact" | "threshold" | "fitted"
};

struct ThinnessVerdict {
  ThinnessType type = ThinnessType::inconclusive;
  double min_delta = 0.0;
  double tail_min_delta = 0.0;
  bool monotone_tail_ok = true;  // eventually non-increasing deltas (non-contracting towers)
  bool second_point_agrees = true;
  std::string note;
};

struct PairVerdict {
  PairLabel label = PairLabel::inconclusive;
  double limit = 0.0;      // terminal / fitted value of the distance sequence
  int constant_from = -1;  // plateau start for eventually_constant
};

// Label a single monotone non-increasing distance sequence.
PairVerdict pair_modality(const std::vector<double>& seq, const Tolerances& tol = {});

struct ModalityVerdict {
  std::vector<PairVerdict> pairs;
  std::vector<int> excluded;  // indices of merging-orbit pairs
  std::vector<PairLabel> distinct_labels;
  Modality aggregate = Modality::none;
};

InfinitesimalVerdict infinitesimal_type(const TowerSpec& t, Complex p, const Tolerances& tol = {});
ThinnessVerdict thinness(const TowerSpec& t, const Tolerances& tol = {});
ModalityVerdict domain_modality(const TowerSpec& t, int sample_count = 12,
                                const Tolerances& tol = {});

struct SixTypeVerdict {
  int row = 0;  // 1..6, 0 when inconclusive
  InfinitesimalVerdict infinitesimal;
  ThinnessVerdict thin;
  ModalityVerdict modality;
  std::string expected_modality;
  std::string eventual_connectivity;
  std::vector<std::string> discrepancies;
  std::vector<std::string> notes;
  std::string tower_name;
};

SixTypeVerdict main_type(const TowerSpec& t, const Tolerances& tol = {}, int modality_samples = 12);

struct AnnulusRecord {
  int level = 0;
  CollarBand band;
  bool forward_invariant = false;
  double worst_image_inj = 0.0;  // max inj over image boundary samples (must stay <= eps)
  bool base_inside = false;
};

struct AbsorbingAnnuli {
  double eps = 0.0;
  int first_level = -1;
  std::vector<AnnulusRecord> records;
  bool moduli_strictly_increasing = false;
  bool forward_invariant_all = false;
  bool tracked_absorbed = false;  // a tracked off-core point enters and never leaves
  int tracked_enters_at = -1;
};

AbsorbingAnnuli absorbing_annuli(const TowerSpec& t, double eps, int levels = 20,
                                 int boundary_samples = 512, const Tolerances& tol = {});

struct OneParameterLimit {
  enum class Kind { hyperbolic_axis, parabolic_point, discrete, inconclusive };
  Kind kind = Kind::inconclusive;
  Complex axis_repelling, axis_attracting;  // hyperbolic flow axis endpoints
  Complex boundary_point;                   // parabolic case
  CMobius flow_normalizer;                  // disc -> H for the limit flow
  std::vector<double> defect;               // per-level convergence defect over the flow grid
  bool generator_drifts_to_identity = false;
  std::string note;

  MobiusDisc element_at(double s) const;  // time-s element of the limit flow
};

OneParameterLimit geometric_limit(const TowerSpec& t, const Tolerances& tol = {});

struct FoliationLeaf {
  std::vector<Complex> points;  // public rep coordinates on surface 0
};

struct FoliationDescriptor {
  enum class Kind { contracting, eventually_isometric };
  Kind kind = Kind::contracting;
  std::vector<FoliationLeaf> leaves;
  std::vector<double> leaf_check;  // horizon distance (contracting) / plateau variation (EI)
  bool verified = false;
};

// Contracting foliation for thin semi-contracting / eventually isometric towers;
// the orthogonal eventually-isometric foliation is returned as well in the EI case.
std::vector<FoliationDescriptor> foliation_extract(const TowerSpec& t, const Tolerances& tol = {},
                                                   int leaves_per_kind = 3);

}  // namespace hypdyn
