#pragma once

#include "mlrem/dataset.hpp"
#include "mlrem/em.hpp"

namespace mlrem {

/// Alternating minimization: assign each sample to the component with the
/// smallest absolute residual (lowest index on ties), then refit every
/// component by least squares on its samples with the same ridge and
/// degenerate rules as m_step. config.sigma is ignored.
RunTrace run_alternating_minimization(const EMState& init, const Samples& data, const EMConfig& config);

}  // namespace mlrem
