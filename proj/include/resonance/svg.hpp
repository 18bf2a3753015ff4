#pragma once

#include <iosfwd>

#include "resonance/model.hpp"
#include "resonance/sde.hpp"

namespace resonance {

/// Path over the two wells and the saddle: exactly four <polyline> elements,
/// classed "path", "well" (twice) and "saddle".
void write_figure_svg(std::ostream& out, const ModelSpec& spec, const SamplePath& path);

}  // namespace resonance
