#include "drnav/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drnav {

double dr_cvar_bound(const SafeEllipsoid& ell, const Mat2& sigma, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::runtime_error("epsilon must lie in (0, 1)");
    if (!ell.feasible) return kInfeasibleBound;
    double trace = sigma(0, 0) * ell.E(0, 0) + sigma(0, 1) * ell.E(1, 0) +
                   sigma(1, 0) * ell.E(0, 1) + sigma(1, 1) * ell.E(1, 1);
    return ell.e + trace / epsilon;
}

std::pair<double, int> step_constraint(const std::vector<SafeEllipsoid>& ellipsoids,
                                       const std::vector<Mat2>& sigmas,
                                       const std::vector<int>& ped_ids, double epsilon) {
    if (ellipsoids.size() != sigmas.size() || ellipsoids.size() != ped_ids.size())
        throw std::runtime_error("step_constraint: per-pedestrian lists differ in length");
    double g = -1.0;  // vacuously safe with no pedestrians
    int worst = -1;
    for (std::size_t i = 0; i < ellipsoids.size(); ++i) {
        double bound = dr_cvar_bound(ellipsoids[i], sigmas[i], epsilon);
        if (worst < 0 || bound > g) {
            g = bound;
            worst = ped_ids[i];
        }
    }
    return {g, worst};
}

double risk_score(const std::vector<double>& per_step_g, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::runtime_error("gamma must lie in (0, 1]");
    double score = 0.0;
    double discount = 1.0;
    for (double g : per_step_g) {
        discount *= gamma;
        score += discount * g;
    }
    return score;
}

std::pair<double, double> empirical_var_cvar(std::vector<double> loss_samples, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::runtime_error("epsilon must lie in (0, 1)");
    const std::size_t n = loss_samples.size();
    if (n < static_cast<std::size_t>(std::ceil(1.0 / epsilon)))
        throw std::runtime_error("empirical_var_cvar: need at least ceil(1/epsilon) samples");

    // VaR: the ceil((1-eps)N)-th smallest sample. The 1e-9 slack keeps exact
    // integer products from tipping over to the next rank.
    std::size_t var_rank =
        static_cast<std::size_t>(std::ceil((1.0 - epsilon) * static_cast<double>(n) - 1e-9));
    var_rank = std::min(std::max<std::size_t>(var_rank, 1), n);
    std::nth_element(loss_samples.begin(), loss_samples.begin() + (var_rank - 1),
                     loss_samples.end());
    double var = loss_samples[var_rank - 1];

    // CVaR: mean of the ceil(eps*N) largest samples.
    std::size_t tail =
        static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(n) - 1e-9));
    tail = std::min(std::max<std::size_t>(tail, 1), n);
    std::nth_element(loss_samples.begin(), loss_samples.end() - tail, loss_samples.end());
    double cvar = std::accumulate(loss_samples.end() - tail, loss_samples.end(), 0.0) /
                  static_cast<double>(tail);
    return {var, cvar};
}

}  // namespace drnav
