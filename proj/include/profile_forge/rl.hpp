#pragma once

// Sequence-level rewards, REINFORCE-family advantages and a toy softmax
// policy for checking the estimators against an enumerable gradient.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "metrics.hpp"

namespace pforge {

struct GroupTooSmall : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RewardConfig {
    double w_no_self_intersection = 0.5;
    double w_no_short_edges = 0.5;
    double invalid_penalty = -1.0;
};

inline double composite_reward(const ValidityReport& v, const RewardConfig& cfg = {})
{
    if (!v.syntactic_valid) return cfg.invalid_penalty;
    return cfg.w_no_self_intersection * (v.self_intersection_free ? 1.0 : 0.0) +
           cfg.w_no_short_edges * (v.no_short_edges ? 1.0 : 0.0);
}

// r - r_greedy for each sample.
inline std::vector<double> remax_advantages(double greedy_reward, const std::vector<double>& rewards)
{
    std::vector<double> a(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) a[i] = rewards[i] - greedy_reward;
    return a;
}

inline constexpr double kStdGuard = 1e-8;

// (r - mean) / std with the population standard deviation. Groups whose std
// falls below 1e-8 carry no signal and get all-zero advantages.
inline std::vector<double> grpo_advantages(const std::vector<double>& r)
{
    if (r.size() < 2) throw GroupTooSmall("GRPO needs at least two samples per group");
    const double n = static_cast<double>(r.size());
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    std::vector<double> a(r.size(), 0.0);
    if (sd < kStdGuard) return a;
    for (std::size_t i = 0; i < r.size(); ++i) a[i] = (r[i] - mean) / sd;
    return a;
}

// r_g minus the mean reward of the other samples in the group.
inline std::vector<double> rloo_advantages(const std::vector<double>& r)
{
    if (r.size() < 2) throw GroupTooSmall("RLOO needs at least two samples per group");
    const double g = static_cast<double>(r.size());
    const double total = std::accumulate(r.begin(), r.end(), 0.0);
    std::vector<double> a(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) a[i] = r[i] - (total - r[i]) / (g - 1.0);
    return a;
}

// k3 estimator of KL(pi || pi_ref) with psi = pi_ref / pi.
inline double kl_k3(double psi)
{
    if (!(psi > 0.0)) throw std::domain_error("kl_k3 needs psi > 0");
    return 1.0 / psi + std::log(psi) - 1.0;
}

struct EstimatorConfig {
    double beta = 0.0;
    double epsilon = 0.2;
    int group_size = 16;
};

// min(psi A, clip(psi, 1 - eps, 1 + eps) A) - beta * kl_k3(psi).
inline double grpo_objective_term(double psi, double advantage, const EstimatorConfig& cfg)
{
    const double clipped = std::clamp(psi, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
    return std::min(psi * advantage, clipped * advantage) - cfg.beta * kl_k3(psi);
}

// ---------------------------------------------------------------------------
// Toy policy
// ---------------------------------------------------------------------------

enum class Estimator { Reinforce, ReMax, Rloo, Grpo };

inline std::string_view estimator_name(Estimator e)
{
    switch (e) {
    case Estimator::Reinforce: return "reinforce";
    case Estimator::ReMax: return "remax";
    case Estimator::Rloo: return "rloo";
    case Estimator::Grpo: return "grpo";
    }
    return "?";
}

// Softmax policy over K whole sequences, each with a fixed reward.
struct ToyPolicy {
    std::vector<double> logits;
    std::vector<double> rewards;

    std::vector<double> probs() const
    {
        const double m = *std::max_element(logits.begin(), logits.end());
        std::vector<double> p(logits.size());
        double z = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(logits[i] - m);
        for (double& x : p) x /= z;
        return p;
    }

    double expected_reward() const
    {
        const auto p = probs();
        double j = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) j += p[i] * rewards[i];
        return j;
    }

    // d/d theta_j of sum_k pi_k r_k = pi_j (r_j - J).
    std::vector<double> analytic_gradient() const
    {
        const auto p = probs();
        const double j = expected_reward();
        std::vector<double> g(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] * (rewards[i] - j);
        return g;
    }

    std::size_t greedy() const
    {
        return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
};

struct GradientCheck {
    std::vector<double> estimate;
    std::vector<double> analytic;
    double relative_error = 0.0;
};

inline double l2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Monte-Carlo policy gradient from `samples` draws (grouped for RLOO/GRPO).
inline std::vector<double> estimate_gradient(const ToyPolicy& pol, Estimator est, std::size_t samples, int group,
                                             std::uint64_t seed)
{
    if (pol.logits.size() > 16 || pol.logits.size() != pol.rewards.size())
        throw std::invalid_argument("toy policy needs K <= 16 logits with matching rewards");
    const auto p = pol.probs();
    const std::size_t k = p.size();
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> draw(p.begin(), p.end());
    std::vector<double> g(k, 0.0);

    // grad log pi_a = e_a - pi
    auto accumulate = [&](std::size_t a, double w) {
        for (std::size_t i = 0; i < k; ++i) g[i] += w * ((i == a ? 1.0 : 0.0) - p[i]);
    };

    if (est == Estimator::Reinforce || est == Estimator::ReMax) {
        const double b = est == Estimator::ReMax ? pol.rewards[pol.greedy()] : 0.0;
        for (std::size_t n = 0; n < samples; ++n) {
            const std::size_t a = draw(rng);
            accumulate(a, pol.rewards[a] - b);
        }
        for (double& x : g) x /= static_cast<double>(samples);
        return g;
    }
    if (group < 2) throw GroupTooSmall("group estimators need G >= 2");
    const std::size_t groups = samples / static_cast<std::size_t>(group);
    std::vector<std::size_t> acts(static_cast<std::size_t>(group));
    std::vector<double> rs(static_cast<std::size_t>(group));
    for (std::size_t n = 0; n < groups; ++n) {
        for (std::size_t i = 0; i < acts.size(); ++i) {
            acts[i] = draw(rng);
            rs[i] = pol.rewards[acts[i]];
        }
        const auto adv = est == Estimator::Rloo ? rloo_advantages(rs) : grpo_advantages(rs);
        for (std::size_t i = 0; i < acts.size(); ++i) accumulate(acts[i], adv[i] / static_cast<double>(group));
    }
    for (double& x : g) x /= static_cast<double>(std::max<std::size_t>(groups, 1));
    return g;
}

inline GradientCheck toy_policy_gradient_check(const ToyPolicy& pol, Estimator est, std::size_t samples, int group,
                                               std::uint64_t seed)
{
    GradientCheck c;
    c.analytic = pol.analytic_gradient();
    c.estimate = estimate_gradient(pol, est, samples, group, seed);
    std::vector<double> diff(c.analytic.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = c.estimate[i] - c.analytic[i];
    const double ref = l2(c.analytic);
    c.relative_error = ref > 0.0 ? l2(diff) / ref : l2(diff);
    return c;
}

// Largest |mean - analytic| / standard error over gradient components, using
// independent runs with seeds first_seed, first_seed + 1, ...
inline double unbiasedness_z(const ToyPolicy& pol, Estimator est, std::size_t samples, int group, int runs,
                             std::uint64_t first_seed)
{
    const auto truth = pol.analytic_gradient();
    const std::size_t k = truth.size();
    std::vector<double> sum(k, 0.0), sq(k, 0.0);
    for (int r = 0; r < runs; ++r) {
        const auto g = estimate_gradient(pol, est, samples, group, first_seed + static_cast<std::uint64_t>(r));
        for (std::size_t i = 0; i < k; ++i) {
            sum[i] += g[i];
            sq[i] += g[i] * g[i];
        }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double mean = sum[i] / runs;
        const double var = std::max(0.0, (sq[i] - runs * mean * mean) / (runs - 1));
        const double se = std::sqrt(var / runs);
        const double dev = std::abs(mean - truth[i]);
        worst = std::max(worst, se > 0.0 ? dev / se : (dev > 1e-15 ? INFINITY : 0.0));
    }
    return worst;
}

}  // namespace pforge
