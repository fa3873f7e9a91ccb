#include "seqclone/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqclone::opt {

double bb84_optimal_fe(double fb) {
    if (!in_fidelity_domain(Protocol::BB84, fb)) {
        throw std::domain_error("bb84_optimal_fe: F_B must lie in [1/2, 1]");
    }
    return fb / 2.0 + (1.0 - fb) / 2.0 + std::sqrt(fb * (1.0 - fb));
}

double sixstate_optimal_fe(double fb) {
    if (!in_fidelity_domain(Protocol::SixState, fb)) {
        throw std::domain_error("sixstate_optimal_fe: F_B must lie in [1/3, 1]");
    }
    return 1.0 - fb / 2.0 + 0.25 * std::sqrt(std::max(0.0, 6.0 * fb - 2.0)) * std::sqrt(2.0 - 2.0 * fb);
}

double optimal_fe(Protocol protocol, double fb) {
    return protocol == Protocol::BB84 ? bb84_optimal_fe(fb) : sixstate_optimal_fe(fb);
}

double min_bob_fidelity(Protocol protocol) { return protocol == Protocol::BB84 ? 0.5 : 1.0 / 3.0; }

bool in_fidelity_domain(Protocol protocol, double fb) {
    return fb >= min_bob_fidelity(protocol) && fb <= 1.0;
}

} // namespace seqclone::opt
