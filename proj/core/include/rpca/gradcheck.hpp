#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpca/net.hpp"

namespace rpca {

/// Smallest distance, over all layers of a recorded forward pass, from a
/// prox input to one of its breakpoints and from a singular value to the
/// SVT threshold. Finite differences are only meaningful when this exceeds
/// the perturbation scale.
double kink_margin(const Tape& tape, const NetworkParams& params);

struct GroupCheck {
    std::string group;      ///< "W1".."W6", "lambda1".."lambda3", "q", "P"
    std::size_t entries = 0;
    double analytic_norm = 0;
    double rel_error = 0;   ///< ||analytic - fd|| / max(||fd||, ||analytic||, 1e-12)
};

/// Central finite-difference check of network_backward for the functional
/// f = <R_L, Lhat> + <R_S, Shat>, aggregated per parameter group across layers.
std::vector<GroupCheck> finite_difference_check(const NetworkParams& params, const Matrix& M, const Matrix& R_L,
                                                const Matrix& R_S, double step = 1e-6,
                                                const BackwardOptions& options = {});

/// A random tiny refRPCA/CORONA instance whose forward pass stays at least
/// `margin` away from every kink; retries seeds deterministically.
struct GradcheckInstance {
    NetworkParams params;
    Matrix M, R_L, R_S;
    std::uint64_t seed_used = 0;
    double margin = 0;
};
GradcheckInstance make_gradcheck_instance(FrameShape frame, std::size_t frames, std::size_t depth,
                                          std::size_t kernel, Variant variant, std::uint64_t seed,
                                          double margin = 1e-5);

}  // namespace rpca
