#pragma once

// Plain-text SVG emitters for region tables and foliation leaves.

#include "hypdyn/blaschke.hpp"
#include "hypdyn/classify.hpp"

namespace hypdyn {

// Unit disc, the injectivity circle D(0, r_n), the excluded regions of level n
// (all stages up to the built maximum), and the critical points.
std::string svg_model_level(const ModelTower& s, int level);

// Foliation leaves over the level-0 surface outline.
std::string svg_foliation(const SurfaceModel& s0, const std::vector<FoliationDescriptor>& fs);

}  // namespace hypdyn
