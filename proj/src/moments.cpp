#include "drnav/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace drnav {

InterpolatedPaths interpolate_ensemble_at(const ForecastEnsemble& ensemble, double t_start,
                                          double dt, int K) {
    if (K < 1) throw std::runtime_error("interpolation needs K >= 1");
    if (!(dt > 0.0)) throw std::runtime_error("dt must be positive");
    const double dtf = ensemble.dt_forecast;
    double ratio = dtf / dt;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9)
        throw std::runtime_error("dt must divide dt_forecast evenly");
    if (t_start < ensemble.t0 - 1e-9)
        throw std::runtime_error("interpolation window starts before the forecast anchor");

    const double horizon_end = ensemble.t0 + ensemble.num_steps * dtf;
    const double last_needed = t_start + K * dt;
    if (last_needed > horizon_end + 1e-9) {
        int required_H = static_cast<int>(std::ceil((last_needed - ensemble.t0) / dtf - 1e-9));
        throw std::runtime_error("forecast horizon overrun: need H >= " +
                                 std::to_string(required_H) + ", have H = " +
                                 std::to_string(ensemble.num_steps));
    }

    InterpolatedPaths out;
    out.num_samples = ensemble.num_samples;
    out.num_steps = K;
    out.data.resize(static_cast<std::size_t>(ensemble.num_samples) * K);

    for (int m = 0; m < ensemble.num_samples; ++m) {
        for (int k = 1; k <= K; ++k) {
            double t_rel = (t_start - ensemble.t0) + k * dt;  // time past the anchor
            double pos = t_rel / dtf;                          // in forecast-step units
            int lo = static_cast<int>(std::floor(pos + 1e-9));
            if (lo >= ensemble.num_steps) lo = ensemble.num_steps - 1;  // hits horizon end exactly
            double w = pos - lo;
            // Path vertex 0 is the anchor; vertex h+1 is forecast step h.
            const Vec2& a = (lo == 0) ? ensemble.origin : ensemble.at(m, lo - 1);
            const Vec2& b = ensemble.at(m, lo);
            if (std::abs(w) <= 1e-9)
                out.at(m, k - 1) = a;  // exactly on a forecast vertex
            else if (w >= 1.0 - 1e-9)
                out.at(m, k - 1) = b;  // horizon end after clamping
            else
                out.at(m, k - 1) = a + w * (b - a);
        }
    }
    return out;
}

std::vector<MomentStep> estimate_moments(const InterpolatedPaths& paths, double delta_reg) {
    if (paths.num_samples < 2) throw std::runtime_error("moment estimation needs M >= 2");
    if (delta_reg < 0.0) throw std::runtime_error("delta_reg must be >= 0");

    const int M = paths.num_samples;
    const int K = paths.num_steps;
    std::vector<MomentStep> steps(K);
    for (int k = 0; k < K; ++k) {
        Vec2 mu = Vec2::Zero();
        for (int m = 0; m < M; ++m) {
            const Vec2& x = paths.at(m, k);
            if (!x.allFinite()) throw std::runtime_error("non-finite forecast sample");
            mu += x;
        }
        mu /= M;

        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (int m = 0; m < M; ++m) {
            Vec2 d = paths.at(m, k) - mu;
            sxx += d.x() * d.x();
            sxy += d.x() * d.y();
            syy += d.y() * d.y();
        }
        Mat2 sigma;
        sigma << sxx / M + delta_reg, sxy / M,
                 sxy / M, syy / M + delta_reg;
        steps[k] = {mu, sigma};
    }
    return steps;
}

MomentField moment_field_at(const ForecastEnsemble& ensemble, double t_start, double dt, int K,
                            double delta_reg) {
    MomentField field;
    field.ped_id = ensemble.ped_id;
    field.steps = estimate_moments(interpolate_ensemble_at(ensemble, t_start, dt, K), delta_reg);
    return field;
}

}  // namespace drnav
