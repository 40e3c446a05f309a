#include <gtest/gtest.h>

#include <cmath>

#include "halfwave/hankel.hpp"
#include "test_util.hpp"

using namespace halfwave;
using halfwave::testing::random_analytic;

TEST(BuildHankel, Examples) {
  const GridSpec g = make_grid(1);
  const HankelTruncation h1 = build_hankel(TorusField::single_mode(g, 1), 2);
  EXPECT_EQ(h1.gamma(0, 0), complex(0.0));
  EXPECT_EQ(h1.gamma(0, 1), complex(1.0));
  EXPECT_EQ(h1.gamma(1, 0), complex(1.0));
  EXPECT_EQ(h1.gamma(1, 1), complex(0.0));

  const complex c(0.4, -0.2);
  const HankelTruncation h2 = build_hankel(TorusField::single_mode(g, 0, c), 2);
  EXPECT_EQ(h2.gamma(0, 0), c);
  EXPECT_EQ(h2.gamma(0, 1), complex(0.0));
  EXPECT_EQ(h2.gamma(1, 1), complex(0.0));

  TorusField w(g);
  w[0] = 0.5;
  w[1] = 1.0;
  const HankelTruncation h3 = build_hankel(w, 2);
  EXPECT_EQ(h3.gamma(0, 0), complex(0.5));
  EXPECT_EQ(h3.gamma(0, 1), complex(1.0));
  EXPECT_EQ(h3.gamma(1, 0), complex(1.0));
  EXPECT_EQ(h3.gamma(1, 1), complex(0.0));
  EXPECT_FALSE(h3.ignored_negative_modes);

  EXPECT_THROW(build_hankel(w, 0), std::invalid_argument);
  w[-1] = 0.1;
  EXPECT_TRUE(build_hankel(w, 2).ignored_negative_modes);
}

TEST(BuildHankel, SymmetricAndZeroBeyondBand) {
  const GridSpec g = make_grid(12);
  const HankelTruncation h = build_hankel(random_analytic(g, 12, 1), 20);
  for (int j = 0; j < 20; ++j)
    for (int k = 0; k < 20; ++k) {
      EXPECT_EQ(h.gamma(j, k), h.gamma(k, j));
      if (j + k > 12) EXPECT_EQ(h.gamma(j, k), complex(0.0));
    }
}

TEST(SpectralSummary, Examples) {
  const GridSpec g = make_grid(1);
  const SpectralSummary s = spectral_summary(TorusField::single_mode(g, 1));
  ASSERT_EQ(s.singular_values.size(), 2u);
  EXPECT_NEAR(s.singular_values[0], 1.0, 1e-14);
  EXPECT_NEAR(s.singular_values[1], 1.0, 1e-14);
  EXPECT_NEAR(s.trace_norm, 2.0, 1e-14);
  EXPECT_NEAR(s.hw2_eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(s.hw2_eigenvalues[1], 1.0, 1e-14);

  TorusField w(g);
  w[0] = 0.5;
  w[1] = 1.0;
  EXPECT_NEAR(spectral_summary(w).trace_norm, std::sqrt(17.0) / 2.0, 1e-14);

  const SpectralSummary z = spectral_summary(TorusField(make_grid(5)));
  EXPECT_EQ(z.trace_norm, 0.0);
  for (double v : z.singular_values) EXPECT_EQ(v, 0.0);
  for (double v : z.hw2_eigenvalues) EXPECT_EQ(v, 0.0);
}

TEST(SpectralSummary, OrderingAndCrossCheck) {
  const GridSpec g = make_grid(24);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpectralSummary s = spectral_summary(random_analytic(g, 24, seed));
    double sum = 0.0;
    for (std::size_t i = 0; i < s.singular_values.size(); ++i) {
      sum += s.singular_values[i];
      if (i > 0) {
        EXPECT_LE(s.singular_values[i], s.singular_values[i - 1]);
        EXPECT_LE(s.hw2_eigenvalues[i], s.hw2_eigenvalues[i - 1]);
      }
      EXPECT_GE(s.hw2_eigenvalues[i], 0.0);
    }
    EXPECT_NEAR(sum, s.trace_norm, 1e-13);
    const double top = s.hw2_eigenvalues[0];
    for (std::size_t i = 0; i < s.singular_values.size(); ++i) {
      const double sq = s.singular_values[i] * s.singular_values[i];
      if (sq > 1e-3 * top) EXPECT_NEAR(s.hw2_eigenvalues[i] / sq, 1.0, 1e-10);
    }
  }
}

TEST(SpectralSummary, StableUnderLargerTruncation) {
  const GridSpec g = make_grid(16);
  const TorusField w = random_analytic(g, 16, 7);
  const SpectralSummary base = spectral_summary(build_hankel(w));
  for (int extra : {1, 5, 20}) {
    const SpectralSummary big = spectral_summary(build_hankel(w, 17 + extra));
    for (std::size_t i = 0; i < base.singular_values.size(); ++i)
      EXPECT_NEAR(big.singular_values[i], base.singular_values[i], 1e-12);
    for (std::size_t i = base.singular_values.size(); i < big.singular_values.size(); ++i)
      EXPECT_LT(big.singular_values[i], 1e-12);
  }
}

TEST(SpectralSummary, TraceNormHomogeneous) {
  const GridSpec g = make_grid(16);
  const TorusField w = random_analytic(g, 16, 8);
  const double t = spectral_summary(w).trace_norm;
  for (complex lam : {complex(2.0), complex(-0.3, 0.4), complex(0.0, 5.0)})
    EXPECT_NEAR(spectral_summary(lam * w).trace_norm, std::abs(lam) * t, 1e-12 * std::abs(lam) * t);
}

TEST(SpectralSummary, TranslationInvariant) {
  const GridSpec g = make_grid(16);
  const TorusField w = random_analytic(g, 16, 9);
  const SpectralSummary s0 = spectral_summary(w);
  for (double t : {0.3, 1.0, 2.7, -5.0}) {
    TorusField wt = w;
    for (int k = 0; k <= 16; ++k) wt[k] *= std::polar(1.0, -k * t);
    const SpectralSummary st = spectral_summary(wt);
    for (std::size_t i = 0; i < s0.singular_values.size(); ++i)
      EXPECT_NEAR(st.singular_values[i], s0.singular_values[i], 1e-10);
  }
}

TEST(PellerRatio, Examples) {
  const GridSpec g = make_grid(4);
  // ||e^{ix}||_B111 = 1 because S_0 keeps |k| <= 1, so the ratio is 2.
  EXPECT_NEAR(peller_ratio(TorusField::single_mode(g, 1)), 2.0, 1e-12);
  EXPECT_NEAR(peller_ratio(TorusField::single_mode(g, 0, complex(0.3, 0.7))), 1.0, 1e-12);
  EXPECT_THROW(peller_ratio(TorusField(g)), std::invalid_argument);
}

TEST(PellerRatio, ScaleInvariantAndBounded) {
  const GridSpec g = make_grid(32);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TorusField w = random_analytic(g, 32, seed);
    const double r = peller_ratio(w);
    EXPECT_NEAR(peller_ratio(complex(-3.0, 1.0) * w), r, 1e-12 * r);
    EXPECT_GT(r, 0.1);
    EXPECT_LT(r, 10.0);
  }
}
