#include "drnav/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "drnav/risk.hpp"
#include "drnav/safeset.hpp"

namespace drnav {

namespace {

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Mat2 rotation(double angle) {
    Mat2 rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return rot;
}

Mat2 random_spd(Rng& rng, double lambda_lo, double lambda_hi) {
    double l1 = uniform_in(rng, lambda_lo, lambda_hi);
    double l2 = uniform_in(rng, lambda_lo, lambda_hi);
    Mat2 rot = rotation(uniform_in(rng, 0.0, 2.0 * M_PI));
    Mat2 d = Mat2::Zero();
    d(0, 0) = l1;
    d(1, 1) = l2;
    Mat2 s = rot * d * rot.transpose();
    s(1, 0) = s(0, 1);  // exact symmetry
    return s;
}

struct SweepConfig {
    SafeEllipsoid ell;
    Mat2 sigma;
    double epsilon;
    double r;
};

// Random constraint geometry; every other config rescales Sigma so the bound
// lands strictly below zero, keeping the chance-constraint check non-vacuous.
SweepConfig random_config(Rng& rng, bool force_negative_bound) {
    SweepConfig cfg;
    cfg.r = uniform_in(rng, 0.2, 0.8);
    double d = uniform_in(rng, cfg.r + 0.1, 4.0);
    double theta = uniform_in(rng, 0.0, 2.0 * M_PI);
    Vec2 mu(uniform_in(rng, -5.0, 5.0), uniform_in(rng, -5.0, 5.0));
    Vec2 robot = mu + d * Vec2(std::cos(theta), std::sin(theta));
    cfg.ell = build_safe_ellipsoid(mu, robot, cfg.r, cfg.r + 1e-3);
    cfg.epsilon = uniform_in(rng, 0.03, 0.3);
    cfg.sigma = random_spd(rng, 1e-4, 0.25);
    if (force_negative_bound) {
        double trace = (cfg.sigma * cfg.ell.E).trace();
        // Rescale so Tr{Sigma E} = s * eps with s < 1, giving bound = -1 + s.
        double target = uniform_in(rng, 0.05, 0.95) * cfg.epsilon;
        cfg.sigma *= target / trace;
    }
    return cfg;
}

// z with zero mean and identity covariance, family-specific shape.
Vec2 draw_standardized(Family family, Rng& rng) {
    switch (family) {
        case Family::Gaussian:
            return gaussian2(rng);
        case Family::TwoPointAxes: {
            std::uint64_t bits = rng();
            return {(bits & 1) ? 1.0 : -1.0, (bits & 2) ? 1.0 : -1.0};
        }
        case Family::UniformEllipse: {
            double phi = 2.0 * M_PI * uniform01(rng);
            return {std::sqrt(2.0) * std::cos(phi), std::sqrt(2.0) * std::sin(phi)};
        }
        case Family::HeavyTailT5: {
            // Bivariate t with 5 dof, rescaled to unit covariance.
            Vec2 z = gaussian2(rng);
            double q = 0.0;
            for (int j = 0; j < 5; ++j) {
                double n = gaussian1(rng);
                q += n * n;
            }
            double scale = std::sqrt(3.0 / 5.0) / std::sqrt(q / 5.0);
            return z * scale;
        }
    }
    return Vec2::Zero();
}

struct FamilyTally {
    double worst_domination_margin = -1e300;  // max of emp_cvar - (bound + 3 SE)
    int domination_violations = 0;
    int var_order_violations = 0;
    int sufficiency_checked = 0;
    int sufficiency_violations = 0;
    double worst_violation_excess = -1e300;  // max of emp_prob - (eps + slack)
};

std::string format_g(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

}  // namespace

const char* family_name(Family family) {
    switch (family) {
        case Family::Gaussian: return "gaussian";
        case Family::TwoPointAxes: return "two-point";
        case Family::UniformEllipse: return "uniform-ellipse";
        case Family::HeavyTailT5: return "heavy-tail-t5";
    }
    return "?";
}

std::vector<PropertyResult> run_risk_verification(const VerifyOptions& options) {
    const Family families[] = {Family::Gaussian, Family::TwoPointAxes, Family::UniformEllipse,
                               Family::HeavyTailT5};
    FamilyTally tallies[4];
    const int N = options.samples_per_config;

    Rng rng = derive_rng(options.seed, 0x564552u);
    std::vector<double> losses(static_cast<std::size_t>(N));

    for (int c = 0; c < options.num_configs; ++c) {
        SweepConfig cfg = random_config(rng, c % 2 == 1);
        Eigen::LLT<Mat2> llt(cfg.sigma);
        Mat2 chol = llt.matrixL();
        double bound = dr_cvar_bound(cfg.ell, options.sigma_scale_hook * cfg.sigma, cfg.epsilon);

        for (int f = 0; f < 4; ++f) {
            FamilyTally& tally = tallies[f];
            int violation_count = 0;
            for (int i = 0; i < N; ++i) {
                Vec2 x = cfg.ell.mu + chol * draw_standardized(families[f], rng);
                double loss = cfg.ell.loss(x);
                losses[static_cast<std::size_t>(i)] = loss;
                if (loss > 0.0) ++violation_count;
            }

            auto [emp_var, emp_cvar] = empirical_var_cvar(losses, cfg.epsilon);
            if (emp_cvar < emp_var - 1e-12) ++tally.var_order_violations;

            // Standard error of the tail mean.
            std::size_t tail = static_cast<std::size_t>(
                std::ceil(cfg.epsilon * static_cast<double>(N) - 1e-9));
            std::vector<double> sorted(losses);
            std::nth_element(sorted.begin(), sorted.end() - tail, sorted.end());
            double tail_mean = 0.0;
            for (auto it = sorted.end() - tail; it != sorted.end(); ++it) tail_mean += *it;
            tail_mean /= static_cast<double>(tail);
            double tail_var = 0.0;
            for (auto it = sorted.end() - tail; it != sorted.end(); ++it)
                tail_var += (*it - tail_mean) * (*it - tail_mean);
            double se = std::sqrt(tail_var / tail) / std::sqrt(static_cast<double>(tail));

            double margin = emp_cvar - (bound + 3.0 * se);
            tally.worst_domination_margin = std::max(tally.worst_domination_margin, margin);
            if (margin > 0.0) ++tally.domination_violations;

            if (bound <= 0.0) {
                ++tally.sufficiency_checked;
                double emp_prob = static_cast<double>(violation_count) / N;
                double slack = 3.0 * std::sqrt(cfg.epsilon * (1.0 - cfg.epsilon) / N);
                double excess = emp_prob - (cfg.epsilon + slack);
                tally.worst_violation_excess = std::max(tally.worst_violation_excess, excess);
                if (excess > 0.0) ++tally.sufficiency_violations;
            }
        }
    }

    std::vector<PropertyResult> results;
    for (int f = 0; f < 4; ++f) {
        const FamilyTally& tally = tallies[f];
        PropertyResult dom;
        dom.name = std::string("cvar-domination/") + family_name(families[f]);
        dom.pass = tally.domination_violations == 0 && tally.var_order_violations == 0;
        dom.detail = "worst margin " + format_g(tally.worst_domination_margin) + " over " +
                     std::to_string(options.num_configs) + " configs";
        results.push_back(dom);
    }
    for (int f = 0; f < 4; ++f) {
        const FamilyTally& tally = tallies[f];
        PropertyResult suf;
        suf.name = std::string("chance-sufficiency/") + family_name(families[f]);
        suf.pass = tally.sufficiency_violations == 0 && tally.sufficiency_checked > 0;
        suf.detail = std::to_string(tally.sufficiency_checked) + " bound<=0 configs, worst excess " +
                     format_g(tally.worst_violation_excess);
        results.push_back(suf);
    }
    return results;
}

std::vector<PropertyResult> run_tangency_verification(std::uint64_t seed, int geometries) {
    Rng rng = derive_rng(seed, 0x54414eu);

    double worst_abs_err = 0.0;
    double worst_penetration = 0.0;  // max of r - dist over all sampled points
    for (int g = 0; g < geometries; ++g) {
        double r = uniform_in(rng, 0.1, 1.0);
        double d = uniform_in(rng, r + 0.02 + 1e-3, 6.0);
        double theta = uniform_in(rng, 0.0, 2.0 * M_PI);
        Vec2 mu(uniform_in(rng, -5.0, 5.0), uniform_in(rng, -5.0, 5.0));
        Vec2 robot = mu + d * Vec2(std::cos(theta), std::sin(theta));
        SafeEllipsoid ell = build_safe_ellipsoid(mu, robot, r, r + 1e-3);

        // Boundary reconstructed independently of the construction path.
        Eigen::SelfAdjointEigenSolver<Mat2> eig(ell.E);
        Vec2 axis0 = eig.eigenvectors().col(0) / std::sqrt(eig.eigenvalues()(0));
        Vec2 axis1 = eig.eigenvectors().col(1) / std::sqrt(eig.eigenvalues()(1));
        auto boundary_dist = [&](double t) {
            Vec2 p = mu + std::cos(t) * axis0 + std::sin(t) * axis1;
            return (p - robot).norm();
        };

        const int coarse = 1024;
        double best_t = 0.0, best_dist = 1e300;
        for (int i = 0; i < coarse; ++i) {
            double t = 2.0 * M_PI * i / coarse;
            double dist = boundary_dist(t);
            worst_penetration = std::max(worst_penetration, r - dist);
            if (dist < best_dist) {
                best_dist = dist;
                best_t = t;
            }
        }
        // Golden-section refinement in the bracketing window.
        double lo = best_t - 2.0 * M_PI / coarse, hi = best_t + 2.0 * M_PI / coarse;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
        double fa = boundary_dist(a), fb = boundary_dist(b);
        for (int it = 0; it < 80; ++it) {
            if (fa < fb) {
                hi = b; b = a; fb = fa;
                a = hi - gr * (hi - lo);
                fa = boundary_dist(a);
            } else {
                lo = a; a = b; fa = fb;
                b = lo + gr * (hi - lo);
                fb = boundary_dist(b);
            }
        }
        double min_dist = std::min(best_dist, std::min(fa, fb));
        worst_abs_err = std::max(worst_abs_err, std::abs(min_dist - r) / r);
        worst_penetration = std::max(worst_penetration, r - min_dist);

        // Interior samples; the free set must stay outside the disc.
        for (int i = 0; i < 16; ++i) {
            double t = 2.0 * M_PI * i / 16;
            for (double rho : {0.3, 0.7}) {
                Vec2 p = mu + rho * (std::cos(t) * axis0 + std::sin(t) * axis1);
                worst_penetration = std::max(worst_penetration, r - (p - robot).norm());
            }
        }
    }

    PropertyResult res;
    res.name = "tangency";
    res.pass = worst_abs_err <= 1e-6 && worst_penetration <= 1e-6;
    res.detail = "worst |min_dist - r|/r = " + format_g(worst_abs_err) + ", worst penetration " +
                 format_g(worst_penetration) + " over " + std::to_string(geometries) +
                 " geometries";
    return {res};
}

std::vector<PropertyResult> run_monotonicity_verification(std::uint64_t seed) {
    Rng rng = derive_rng(seed, 0x4d4f4eu);
    bool eps_ok = true, sigma_ok = true;
    for (int c = 0; c < 200; ++c) {
        SweepConfig cfg = random_config(rng, false);
        double prev = 1e300;
        for (double eps = 0.02; eps <= 0.5; eps += 0.02) {
            double b = dr_cvar_bound(cfg.ell, cfg.sigma, eps);
            if (b > prev + 1e-12) eps_ok = false;
            prev = b;
        }
        double base = dr_cvar_bound(cfg.ell, cfg.sigma, cfg.epsilon);
        Mat2 inflated = cfg.sigma + 0.01 * Mat2::Identity();
        if (dr_cvar_bound(cfg.ell, inflated, cfg.epsilon) <= base) sigma_ok = false;
    }
    return {{"epsilon-monotonicity", eps_ok, "bound non-increasing over eps grid"},
            {"sigma-monotonicity", sigma_ok, "bound strictly increases with Sigma + cI"}};
}

}  // namespace drnav
