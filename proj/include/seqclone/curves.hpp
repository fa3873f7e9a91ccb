// Closed-form optimal Eve fidelity as a function of Bob's single-qubit
// fidelity.

#pragma once

#include "seqclone/types.hpp"

namespace seqclone::opt {

/// F_E = F_B/2 + (1-F_B)/2 + sqrt(F_B(1-F_B)) = 1/2 + sqrt(F_B(1-F_B)), F_B in [1/2, 1].
double bb84_optimal_fe(double fb);

/// F_E = 1 - F_B/2 + sqrt(6F_B-2) sqrt(2-2F_B) / 4, F_B in [1/3, 1].
double sixstate_optimal_fe(double fb);

double optimal_fe(Protocol protocol, double fb);

/// Lower end of the Bob fidelity domain: 1/2 for BB84, 1/3 for six-state.
double min_bob_fidelity(Protocol protocol);

bool in_fidelity_domain(Protocol protocol, double fb);

} // namespace seqclone::opt
