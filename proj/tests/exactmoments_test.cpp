#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "momcert/exactmoments.hpp"
#include "support.hpp"

using namespace momcert;
using testsupport::near_rel;

namespace {

std::vector<MomentProfile> iid(const VariableSpec& s, int n, int order) {
    return std::vector<MomentProfile>(static_cast<std::size_t>(n), moments_of(s, order));
}

}  // namespace

TEST(GaussianNorm, ClosedForms) {
    EXPECT_NEAR(gaussian_lp_norm(2.0), 1.0, 1e-15);
    EXPECT_NEAR(gaussian_lp_norm(4.0), std::pow(3.0, 0.25), 1e-15);
    EXPECT_NEAR(gaussian_lp_norm(3.0), std::cbrt(2.0 * std::sqrt(2.0 / std::numbers::pi)), 1e-15);
    EXPECT_NEAR(gaussian_lp_norm(3.0), 1.168575, 1e-6);
    for (int r = 1; r <= 8; ++r) {
        double dfact = 1.0;
        for (int j = 2 * r - 1; j > 1; j -= 2) dfact *= j;
        EXPECT_NEAR(gaussian_lp_norm(2.0 * r), std::pow(dfact, 1.0 / (2 * r)), 1e-14);
    }
    EXPECT_THROW(gaussian_lp_norm(0.0), std::invalid_argument);
}

TEST(GaussianNorm, MonteCarloCrossCheck) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    constexpr int kCount = 10'000'000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < kCount; ++i) {
        const double y = std::pow(std::abs(g(rng)), 3.0);
        acc += y;
        acc2 += y * y;
    }
    const double mean = acc / kCount;
    const double se = std::sqrt((acc2 / kCount - mean * mean) / kCount);
    EXPECT_NEAR(mean, std::pow(gaussian_lp_norm(3.0), 3.0), 5.0 * se);
}

TEST(RademacherEven, Examples) {
    EXPECT_DOUBLE_EQ(rademacher_even_moment(WeightVector({1, 1}), 2), 8.0);
    EXPECT_DOUBLE_EQ(rademacher_even_moment(WeightVector({1, 1, 1}), 2), 21.0);
    EXPECT_DOUBLE_EQ(rademacher_even_moment(WeightVector({0.3, 2.0}), 0), 1.0);
    EXPECT_DOUBLE_EQ(rademacher_even_moment(WeightVector({0.0, 0.0}), 2), 0.0);
}

TEST(RademacherEven, MatchesSignEnumeration) {
    testsupport::Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = testsupport::integer(rng, 1, 10);
        const int r = testsupport::integer(rng, 1, 5);
        std::vector<double> s(n);
        for (auto& x : s) x = testsupport::uniform(rng, -2.0, 2.0);
        const double ref = testsupport::all_signs_abs_moment(s, 2.0 * r);
        EXPECT_TRUE(near_rel(rademacher_even_moment(WeightVector(s), r), ref, 1e-11)) << n << " " << r;
    }
}

TEST(RademacherAbs, Examples) {
    EXPECT_NEAR(rademacher_abs_moment(WeightVector({1.0}), 2.7), 1.0, 1e-15);
    EXPECT_NEAR(rademacher_abs_moment(WeightVector({1.0, 1.0}), 3.0), 4.0, 1e-14);
    EXPECT_NEAR(rademacher_abs_moment(WeightVector({1.0, 1.0, 1.0}), 4.0), 21.0, 1e-13);
    EXPECT_NEAR(rademacher_abs_moment(WeightVector({1.0, 1.0, 1.0}), 4.0),
                rademacher_even_moment(WeightVector({1.0, 1.0, 1.0}), 2), 1e-13);
}

TEST(RademacherAbs, MatchesFullEnumeration) {
    testsupport::Rng rng(4);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = testsupport::integer(rng, 1, 12);
        const double p = testsupport::uniform(rng, 0.5, 9.0);
        std::vector<double> s(n);
        for (auto& x : s) x = testsupport::uniform(rng, 0.05, 2.0);
        EXPECT_TRUE(near_rel(rademacher_abs_moment(WeightVector(s), p), testsupport::all_signs_abs_moment(s, p), 1e-12));
    }
}

TEST(RademacherAbs, RefusesAboveCap) {
    EXPECT_THROW(rademacher_abs_moment(WeightVector(std::vector<double>(25, 1.0)), 3.0), Refusal);
    EXPECT_THROW(rademacher_abs_moment(WeightVector({1.0}), 0.0), std::invalid_argument);
}

TEST(RademacherAbs, GaussianDominatesEvenMoments) {
    testsupport::Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = testsupport::integer(rng, 1, 10);
        const int r = testsupport::integer(rng, 1, 5);
        std::vector<double> s(n);
        double var = 0.0;
        for (auto& x : s) {
            x = testsupport::uniform(rng, 0.05, 2.0);
            var += x * x;
        }
        const double rad = std::pow(rademacher_abs_moment(WeightVector(s), 2.0 * r), 1.0 / (2 * r));
        EXPECT_LE(rad, gaussian_lp_norm(2.0 * r) * std::sqrt(var) * (1.0 + 1e-13));
    }
}

TEST(SumEvenMoment, TenLaplaceFourthMoment) {
    const auto profiles = iid(VariableSpec::symmetric_exponential(1.0), 10, 4);
    EXPECT_NEAR(sum_even_moment(profiles, 2), 330.0, 1e-12);
}

TEST(SumEvenMoment, SingleProfile) {
    const auto m = moments_of(VariableSpec::uniform(1.4), 12);
    for (int r = 1; r <= 6; ++r) EXPECT_NEAR(sum_even_moment(std::vector<MomentProfile>{m}, r), m[2 * r], 1e-15 * m[2 * r]);
}

TEST(SumEvenMoment, AgreesWithRademacherEngine) {
    EXPECT_DOUBLE_EQ(sum_even_moment(iid(VariableSpec::rademacher(1.0), 3, 4), 2), 21.0);
}

TEST(SumEvenMoment, Preconditions) {
    const auto short_profiles = iid(VariableSpec::gaussian(1.0), 3, 4);
    EXPECT_THROW(sum_even_moment(short_profiles, 3), std::invalid_argument);
    const std::vector<double> v{0.0, 1.0}, p{0.5, 0.5};
    const std::vector<MomentProfile> skewed{profile_from_atoms(v, p, 4)};
    EXPECT_THROW(sum_even_moment(skewed, 2), std::invalid_argument);
    const std::vector<MomentProfile> wide{moments_of(VariableSpec::gaussian(1.0), 4),
                                          moments_of(VariableSpec::gaussian(1e-5), 4)};
    EXPECT_THROW(sum_even_moment(wide, 2), std::invalid_argument);
}

TEST(SumEvenMoment, SymmetricMatchesMultiIndexFormula) {
    testsupport::Rng rng(31);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = testsupport::integer(rng, 1, 8);
        const int r = testsupport::integer(rng, 1, 4);
        std::vector<MomentProfile> profiles;
        for (int k = 0; k < n; ++k) profiles.push_back(moments_of(testsupport::random_family(rng), 2 * r));
        const double ref = testsupport::symmetric_multi_index_moment(profiles, r);
        EXPECT_TRUE(near_rel(sum_even_moment(profiles, r), ref, 1e-10)) << "n=" << n << " r=" << r;
    }
}

TEST(SumEvenMoment, CenteredMatchesNoSingletonFormula) {
    testsupport::Rng rng(32);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = testsupport::integer(rng, 1, 8);
        const int r = testsupport::integer(rng, 1, 4);
        std::vector<MomentProfile> profiles;
        for (int k = 0; k < n; ++k)
            profiles.push_back(moments_of(testsupport::raw_from_atoms(testsupport::random_centered_atoms(rng), 2 * r), 2 * r));
        const double ref = testsupport::centered_multi_index_moment(profiles, r);
        EXPECT_TRUE(near_rel(sum_even_moment(profiles, r), ref, 1e-10)) << "n=" << n << " r=" << r;
    }
}

TEST(SumEvenMoment, Homogeneity) {
    testsupport::Rng rng(12);
    std::vector<VariableSpec> specs;
    for (int k = 0; k < 6; ++k) specs.push_back(testsupport::random_family(rng));
    const double c = 1.7;
    std::vector<MomentProfile> base, scaled;
    for (const auto& s : specs) {
        base.push_back(moments_of(s, 8));
        scaled.push_back(moments_of(s.with_variance(s.variance() * c * c), 8));
    }
    for (int r = 1; r <= 4; ++r)
        EXPECT_TRUE(near_rel(sum_even_moment(scaled, r), std::pow(c, 2 * r) * sum_even_moment(base, r), 1e-12));
}

TEST(TailSumEvenMoment, Examples) {
    const auto profiles = iid(VariableSpec::symmetric_exponential(1.0), 5, 4);
    EXPECT_NEAR(tail_sum_even_moment(profiles, 3, 2), 36.0, 1e-12);
    EXPECT_DOUBLE_EQ(tail_sum_even_moment(profiles, 5, 2), 6.0);
    EXPECT_DOUBLE_EQ(tail_sum_even_moment(profiles, 1, 2), sum_even_moment(profiles, 2));
    EXPECT_THROW(tail_sum_even_moment(profiles, 0, 2), std::invalid_argument);
    EXPECT_THROW(tail_sum_even_moment(profiles, 6, 2), std::invalid_argument);
}
