#pragma once

#include <cmath>

#include "fbsec/errors.hpp"

namespace fbsec {

// Target secrecy rate R_s in nats and the outage threshold theta = e^R_s.
struct SecrecyConfig {
    double rate_rs = 0.0;
    double theta = 1.0;

    static SecrecyConfig from_rate(double rs) {
        detail::require_finite(rs, "rate_rs");
        if (rs < 0.0) throw parameter_error("rate_rs", "must be >= 0");
        return {rs, std::exp(rs)};
    }

    void validate() const {
        detail::require_finite(rate_rs, "rate_rs");
        if (rate_rs < 0.0) throw parameter_error("rate_rs", "must be >= 0");
        if (std::abs(theta - std::exp(rate_rs)) > 1e-15 * std::exp(rate_rs)) {
            throw parameter_error("theta", "must equal exp(rate_rs)");
        }
    }
};

} // namespace fbsec
