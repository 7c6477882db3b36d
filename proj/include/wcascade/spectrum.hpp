#pragma once

#include <string>
#include <vector>

namespace wcascade {

// Scaling exponents tau(q) and their Legendre transform D(alpha).
// Entries of q, tau, tau_stderr, alpha and D are aligned index by index.
struct SingularSpectrum {
    std::vector<double> q;
    std::vector<double> tau;
    std::vector<double> tau_stderr;
    std::vector<double> alpha;
    std::vector<double> D;
    double support_min = 0.0;
    double support_max = 0.0;
    double peak_alpha = 0.0;
    // False when tau had to be replaced by its concave hull.
    bool concave = true;
    std::vector<std::string> warnings;

    double support_width() const { return support_max - support_min; }
};

}  // namespace wcascade
