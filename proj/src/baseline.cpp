#include "mlrem/baseline.hpp"

#include <algorithm>

#include "mlrem/errors.hpp"

namespace mlrem {

RunTrace run_alternating_minimization(const EMState& init, const Samples& data, const EMConfig& config) {
    if (data.n() < 1) {
        throw ConfigError("run_alternating_minimization: empty data");
    }
    const std::vector<const Samples*> order(static_cast<std::size_t>(std::max(config.max_iters, 0)), &data);
    return detail::iterate(init, order, config, &hard_assignments);
}

}  // namespace mlrem
