#include "fcsim/plant.hpp"

#include <algorithm>
#include <stdexcept>

namespace fcsim {

void validate_load_schedule(const std::vector<LoadChange>& schedule) {
    long prev = -1;
    for (const LoadChange& c : schedule) {
        if (c.step < 0) throw std::invalid_argument("load schedule: step must be non-negative");
        if (c.step <= prev)
            throw std::invalid_argument("load schedule: steps must be strictly increasing");
        if (!(c.factor > 0.0))
            throw std::invalid_argument("load schedule: factor must be positive");
        prev = c.step;
    }
}

SystemTopology apply_load_schedule(const SystemTopology& base,
                                   const std::vector<LoadChange>& schedule, long step) {
    validate_load_schedule(schedule);
    double factor = 1.0;
    for (const LoadChange& c : schedule) {
        if (c.step <= step) factor = c.factor;
    }
    if (factor == 1.0) return base;
    SystemTopology topo = base;
    for (TaskSpec& t : topo.tasks) t.exec_factor *= factor;
    return topo;
}

Measurement measure_utilization(const SystemTopology& topo, const AllocationMatrix& K,
                                const Eigen::VectorXd& rates, const PlantConfig& cfg,
                                std::mt19937_64& rng) {
    if (!(cfg.noise_band >= 0.0))
        throw std::invalid_argument("measurement noise band must be non-negative");

    Measurement m;
    m.y_raw = actual_utilization(topo, K, rates);
    m.y_meas.resize(m.y_raw.size());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Eigen::Index i = 0; i < m.y_raw.size(); ++i) {
        const double d = cfg.noise_band * unit(rng);
        m.y_meas[i] = std::clamp(std::min(m.y_raw[i], 1.0) + d, 0.0, 1.0);
    }
    return m;
}

}  // namespace fcsim
