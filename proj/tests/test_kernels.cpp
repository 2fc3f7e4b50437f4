#include <gtest/gtest.h>

#include <omp.h>

#include <cstring>
#include <random>

#include "rawnight/kernels.hpp"

using namespace rawnight;

namespace {

std::vector<double> random_plane(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-5.0, 3000.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(gen);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class KernelParity : public ::testing::TestWithParam<int> {
protected:
    void SetUp() override {
        saved_ = omp_get_max_threads();
        omp_set_num_threads(GetParam());
    }
    void TearDown() override { omp_set_num_threads(saved_); }

    static constexpr std::size_t kWidth = 257;
    static constexpr std::size_t kHeight = 131;

private:
    int saved_ = 1;
};

}  // namespace

TEST_P(KernelParity, DnToElectrons) {
    std::vector<std::uint16_t> dn(kWidth * kHeight);
    for (std::size_t i = 0; i < dn.size(); ++i) dn[i] = static_cast<std::uint16_t>((i * 37) % 16384);
    std::vector<double> a(dn.size()), b(dn.size());
    kernels::serial::dn_to_electrons(dn, 1.7, 512.0, a);
    kernels::omp::dn_to_electrons(dn, 1.7, 512.0, b);
    EXPECT_TRUE(bitwise_equal(a, b));
}

TEST_P(KernelParity, ElectronsToDn) {
    const auto e = random_plane(kWidth * kHeight, 1);
    std::vector<std::uint16_t> a(e.size()), b(e.size());
    kernels::serial::electrons_to_dn(e, 3.1, 200.0, 16383, a);
    kernels::omp::electrons_to_dn(e, 3.1, 200.0, 16383, b);
    EXPECT_EQ(a, b);
}

TEST_P(KernelParity, Scale) {
    const auto e = random_plane(kWidth * kHeight, 2);
    std::vector<double> a(e.size()), b(e.size());
    kernels::serial::scale(e, 0.013, a);
    kernels::omp::scale(e, 0.013, b);
    EXPECT_TRUE(bitwise_equal(a, b));
}

TEST_P(KernelParity, ThinGaussian) {
    const auto e = random_plane(kWidth * kHeight, 3);
    std::vector<double> a(e.size()), b(e.size());
    kernels::serial::thin_gaussian(e, 0.2, 3.5, 99, a);
    kernels::omp::thin_gaussian(e, 0.2, 3.5, 99, b);
    EXPECT_TRUE(bitwise_equal(a, b));
}

TEST_P(KernelParity, ThinBinomial) {
    const auto e = random_plane(kWidth * kHeight, 4);
    std::vector<double> a(e.size()), b(e.size());
    kernels::serial::thin_binomial(e, 0.05, 1.0, 123, a);
    kernels::omp::thin_binomial(e, 0.05, 1.0, 123, b);
    EXPECT_TRUE(bitwise_equal(a, b));
}

TEST_P(KernelParity, BoxReductions) {
    const auto e = random_plane(kWidth * kHeight, 5);
    for (const PixelRect r : {PixelRect{0, 0, kWidth, kHeight}, PixelRect{3, 7, 200, 100},
                              PixelRect{10, 10, 11, 11}}) {
        const double s1 = kernels::serial::box_sum(e, kWidth, r);
        const double s2 = kernels::omp::box_sum(e, kWidth, r);
        EXPECT_EQ(std::memcmp(&s1, &s2, sizeof(double)), 0);
        const auto m1 = kernels::serial::box_moments(e, kWidth, r);
        const auto m2 = kernels::omp::box_moments(e, kWidth, r);
        EXPECT_EQ(std::memcmp(&m1.mean, &m2.mean, sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(&m1.variance, &m2.variance, sizeof(double)), 0);
        EXPECT_EQ(m1.count, r.count());
    }
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelParity, ::testing::Values(1, 2, 3, 4, 7));

TEST(Quantize, HalfAwayFromZeroAndClamp) {
    EXPECT_EQ(kernels::detail::quantize(2.5, 100), 3);
    EXPECT_EQ(kernels::detail::quantize(2.49, 100), 2);
    EXPECT_EQ(kernels::detail::quantize(-0.4, 100), 0);
    EXPECT_EQ(kernels::detail::quantize(-7.0, 100), 0);
    EXPECT_EQ(kernels::detail::quantize(100.6, 100), 100);
}

TEST(ThinPixel, ZeroVarianceIsExactScaling) {
    EXPECT_EQ(kernels::detail::thin_gaussian_pixel(40.0, 1.0, 0.0, 1, 2), 40.0);
    EXPECT_EQ(kernels::detail::thin_gaussian_pixel(-3.0, 0.5, 0.0, 1, 2), -1.5);
}

TEST(BoxMoments, KnownValues) {
    const std::vector<double> plane = {-1.0, 1.0, 3.0, 5.0};
    const auto m = kernels::serial::box_moments(plane, 2, PixelRect{0, 0, 2, 2});
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.variance, 5.0);
}
