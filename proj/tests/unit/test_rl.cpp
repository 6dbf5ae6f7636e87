#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "profile_forge/json_io.hpp"
#include "profile_forge/rl.hpp"

using namespace pforge;

namespace {

// K = 3 softmax policy shared with the acceptance run.
ToyPolicy toy() { return {{0.3, -0.2, 0.1}, {1.0, 0.0, 0.5}}; }

std::vector<double> random_group(std::mt19937_64& rng, int g)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> r(static_cast<std::size_t>(g));
    for (double& x : r) x = u(rng);
    return r;
}

}  // namespace

TEST(Grpo, StandardizesEachGroup)
{
    std::mt19937_64 rng(71);
    for (int t = 0; t < 500; ++t) {
        const int g = 2 + static_cast<int>(rng() % 31);
        const auto a = grpo_advantages(random_group(rng, g));
        double mean = std::accumulate(a.begin(), a.end(), 0.0) / g;
        double var = 0.0;
        for (double x : a) var += (x - mean) * (x - mean);
        EXPECT_NEAR(mean, 0.0, 1e-12);
        EXPECT_NEAR(std::sqrt(var / g), 1.0, 1e-12);
    }
}

TEST(Grpo, FlatGroupHasNoSignal)
{
    for (double v : {0.0, 0.5, -1.0}) {
        const auto a = grpo_advantages(std::vector<double>(16, v));
        for (double x : a) EXPECT_EQ(x, 0.0);
    }
    EXPECT_THROW(grpo_advantages({1.0}), GroupTooSmall);
}

TEST(Grpo, ClippedObjective)
{
    const EstimatorConfig cfg{0.0, 0.2, 16};
    EXPECT_DOUBLE_EQ(grpo_objective_term(1.5, 1.0, cfg), 1.2);   // ratio clipped for positive advantage
    EXPECT_DOUBLE_EQ(grpo_objective_term(0.5, 1.0, cfg), 0.5);   // pessimistic side kept
    EXPECT_DOUBLE_EQ(grpo_objective_term(0.5, -1.0, cfg), -0.8);
    EXPECT_DOUBLE_EQ(grpo_objective_term(1.5, -1.0, cfg), -1.5);
    const EstimatorConfig kl{0.01, 0.2, 16};
    EXPECT_DOUBLE_EQ(grpo_objective_term(1.0, 1.0, kl), 1.0);
    EXPECT_LT(grpo_objective_term(1.1, 1.0, kl), 1.1);
}

TEST(Rloo, LeavesOneOut)
{
    const std::vector<double> r = {1.0, 0.0, 0.5, 0.5};
    const auto a = rloo_advantages(r);
    EXPECT_DOUBLE_EQ(a[0], 1.0 - 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(a[1], 0.0 - 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(a[2], 0.5 - 1.5 / 3.0);
    EXPECT_THROW(rloo_advantages({0.3}), GroupTooSmall);
}

TEST(Rloo, AdvantagesSumToZero)
{
    // rewards on the composite reward's grid with G - 1 a power of two: every
    // operation is exact, so is the sum
    std::mt19937_64 rng(72);
    const double grid[] = {-1.0, 0.0, 0.5, 1.0};
    for (int g : {2, 3, 5, 9, 17}) {
        for (int t = 0; t < 200; ++t) {
            std::vector<double> r(static_cast<std::size_t>(g));
            for (double& x : r) x = grid[rng() % 4];
            const auto a = rloo_advantages(r);
            EXPECT_EQ(std::accumulate(a.begin(), a.end(), 0.0), 0.0);
        }
    }
    // arbitrary rewards: zero up to the rounding of the division by G - 1
    for (int t = 0; t < 500; ++t) {
        const int g = 2 + static_cast<int>(rng() % 31);
        const auto a = rloo_advantages(random_group(rng, g));
        EXPECT_LE(std::abs(std::accumulate(a.begin(), a.end(), 0.0)), 4.0 * g * 1e-16);
    }
}

TEST(Rloo, ScaledDeviationFromMean)
{
    std::mt19937_64 rng(73);
    for (int t = 0; t < 200; ++t) {
        const int g = 2 + static_cast<int>(rng() % 31);
        const auto r = random_group(rng, g);
        const auto a = rloo_advantages(r);
        const double mean = std::accumulate(r.begin(), r.end(), 0.0) / g;
        for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(a[i], g / (g - 1.0) * (r[i] - mean), 1e-12);
    }
}

TEST(ReMax, GreedyBaseline)
{
    const auto a = remax_advantages(0.5, {1.0, 0.5, -1.0});
    EXPECT_EQ(a, (std::vector<double>{0.5, 0.0, -1.5}));
}

TEST(KlK3, NonNegativeAndZeroOnlyAtOne)
{
    int zeros = 0;
    for (int i = 0; i <= 1000; ++i) {
        const double psi = std::pow(10.0, -3.0 + 6.0 * i / 1000.0);
        const double k = kl_k3(psi);
        EXPECT_GE(k, 0.0) << psi;
        if (k == 0.0) {
            ++zeros;
            EXPECT_EQ(psi, 1.0);
        }
    }
    EXPECT_EQ(zeros, 1);
    EXPECT_THROW(kl_k3(0.0), std::domain_error);
}

TEST(Reward, CompositeValues)
{
    ValidityReport v;
    EXPECT_EQ(composite_reward(v), -1.0);
    v.syntactic_valid = true;
    EXPECT_EQ(composite_reward(v), 0.0);
    v.self_intersection_free = true;
    EXPECT_EQ(composite_reward(v), 0.5);
    v.no_short_edges = true;
    EXPECT_EQ(composite_reward(v), 1.0);
}

TEST(Toy, AnalyticGradientMatchesFiniteDifferences)
{
    auto pol = toy();
    const auto g = pol.analytic_gradient();
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto up = pol, dn = pol;
        up.logits[i] += 1e-6;
        dn.logits[i] -= 1e-6;
        EXPECT_NEAR(g[i], (up.expected_reward() - dn.expected_reward()) / 2e-6, 1e-8);
    }
}

TEST(Toy, RlooAndReMaxWithinTwoPercent)
{
    for (Estimator e : {Estimator::Rloo, Estimator::ReMax}) {
        const auto c = toy_policy_gradient_check(toy(), e, 100000, 16, 2024);
        EXPECT_LT(c.relative_error, 0.02) << estimator_name(e);
    }
}

TEST(Toy, BaselineEstimatorsAreUnbiased)
{
    // the mean of 40 independent small runs sits within 4 standard errors
    for (Estimator e : {Estimator::Reinforce, Estimator::ReMax, Estimator::Rloo})
        EXPECT_LT(unbiasedness_z(toy(), e, 2000, 8, 40, 500), 4.0) << estimator_name(e);
}

TEST(Toy, SeededRunsRepeat)
{
    const auto a = estimate_gradient(toy(), Estimator::Grpo, 4096, 16, 9);
    const auto b = estimate_gradient(toy(), Estimator::Grpo, 4096, 16, 9);
    EXPECT_EQ(a, b);
    EXPECT_THROW(estimate_gradient(toy(), Estimator::Rloo, 100, 1, 0), GroupTooSmall);
}

TEST(Presets, ShippedFileHasAllEstimators)
{
    const auto j = read_json_file(std::string(PF_DATA_DIR) + "/rl_presets.json");
    for (const char* k : {"remax", "grpo", "rloo"}) {
        ASSERT_TRUE(j.contains(k)) << k;
        EXPECT_GT(j[k]["effective_batch_size"].get<int>(), 0);
    }
    EXPECT_EQ(j["grpo"]["group_size"].get<int>(), 16);
    EXPECT_EQ(j["rloo"]["group_size"].get<int>(), 16);
    EXPECT_DOUBLE_EQ(j["grpo"]["clip_ratio"].get<double>(), 0.2);
}
