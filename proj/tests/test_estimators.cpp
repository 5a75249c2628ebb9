#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fpsample/estimators.hpp"
#include "oracle.hpp"

using namespace fpsample;
using Catch::Approx;

namespace {

using Tuple = std::vector<std::size_t>;

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

// Moments of f over equally likely tuples, or tuples weighted by `weight`.
Moments over(const std::function<void(const std::function<void(const Tuple&)>&)>& each,
             const std::function<double(const Tuple&)>& f,
             const std::function<double(const Tuple&)>& weight = nullptr) {
  double w = 0, s = 0, ss = 0;
  each([&](const Tuple& t) {
    const double p = weight ? weight(t) : 1.0;
    const double x = f(t);
    w += p;
    s += p * x;
    ss += p * x * x;
  });
  const double m = s / w;
  return {m, ss / w - m * m};
}

auto wor(std::size_t N, std::size_t n) {
  return [=](const std::function<void(const Tuple&)>& f) { oracle::ordered_tuples(N, n, f); };
}
auto wr(std::size_t N, std::size_t n) {
  return [=](const std::function<void(const Tuple&)>& f) { oracle::tuples_with_repetition(N, n, f); };
}

double mean_of(const std::vector<double>& y, const Tuple& t) {
  double s = 0;
  for (auto i : t) s += y[i];
  return s / static_cast<double>(t.size());
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)); }

std::vector<double> random_values(std::mt19937_64& rng, std::size_t N) {
  std::uniform_int_distribution<int> d(-20, 20);
  std::vector<double> y(N);
  for (auto& v : y) v = d(rng) / 4.0;
  return y;
}

}  // namespace

TEST_CASE("sample mean examples", "[estimators]") {
  Population pop({1, 2, 3, 4, 5});
  CHECK(sample_mean(pop, DrawSequence::of_units({1, 4}, Replacement::without, DesignKind::srs)) == 3.5);
  CHECK(sample_mean(pop, DrawSequence::of_units({4, 2, 0, 3, 1}, Replacement::without, DesignKind::srs)) == 3.0);
  Population flat({7, 7, 7});
  CHECK(sample_mean(flat, DrawSequence::of_units({2, 2}, Replacement::with, DesignKind::srs_wr)) == 7.0);
  CHECK_THROWS_AS(sample_mean(pop, DrawSequence::of_units({}, Replacement::with, DesignKind::srs_wr)),
                  PreconditionError);
  CHECK_THROWS_AS(sample_mean(pop, DrawSequence::of_units({5}, Replacement::with, DesignKind::srs_wr)),
                  PreconditionError);
}

TEST_CASE("srs variance examples against enumeration", "[estimators]") {
  const std::vector<double> y{1, 2, 3, 4, 5};
  Population pop(y);
  auto e_wor = over(wor(5, 2), [&](const Tuple& t) { return mean_of(y, t); });
  auto e_wr = over(wr(5, 2), [&](const Tuple& t) { return mean_of(y, t); });
  CHECK(e_wor.var == Approx(0.75));
  CHECK(e_wr.var == Approx(1.0));
  CHECK(srs_mean_variance(pop, 2, Replacement::without) == Approx(0.75).epsilon(1e-15));
  CHECK(srs_mean_variance(pop, 2, Replacement::with) == Approx(1.0).epsilon(1e-15));
  CHECK(srs_mean_variance(pop, 5, Replacement::without) == 0.0);
  CHECK_THROWS_AS(srs_mean_variance(pop, 6, Replacement::without), PreconditionError);
  CHECK_THROWS_AS(srs_mean_variance(pop, 0, Replacement::with), PreconditionError);
}

TEST_CASE("Hansen-Hurvitz examples against enumeration", "[estimators]") {
  SECTION("values proportional to sizes") {
    Population pop({1, 2, 3});
    SizeWeights w({1, 2, 3});
    for (std::size_t u = 0; u < 3; ++u) {
      const std::vector<std::size_t> one{u};
      CHECK(hansen_hurvitz(pop, w, one) == Approx(6.0).epsilon(1e-15));
    }
    CHECK(hh_variance(pop, w, 2, Replacement::with) == Approx(0.0).margin(1e-24));
  }
  SECTION("Y=(2,2,3), M=(1,2,3)") {
    const std::vector<double> y{2, 2, 3};
    const std::vector<double> m{1, 2, 3};
    Population pop(y);
    SizeWeights w({1, 2, 3});
    CHECK(hansen_hurvitz(pop, w, DrawSequence::of_units({0}, Replacement::with, DesignKind::pps_wr)) ==
          Approx(12.0).epsilon(1e-15));
    // WR: 9 ordered pairs weighted by Z_i Z_j.
    auto e_wr = over(
        wr(3, 2), [&](const Tuple& t) { return (y[t[0]] * 6 / m[t[0]] + y[t[1]] * 6 / m[t[1]]) / 2; },
        [&](const Tuple& t) { return m[t[0]] * m[t[1]] / 36; });
    CHECK(e_wr.mean == Approx(7.0));
    CHECK(e_wr.var == Approx(2.5));
    CHECK(hh_variance(pop, w, 2, Replacement::with) == Approx(2.5).epsilon(1e-14));
    // WOR: 30 ordered pairs of extended positions.
    const std::vector<double> ext{12, 6, 6, 6, 6, 6};
    auto e_wor = over(wor(6, 2), [&](const Tuple& t) { return mean_of(ext, t); });
    CHECK(e_wor.mean == Approx(7.0));
    CHECK(e_wor.var == Approx(2.0));
    CHECK(hh_variance(pop, w, 2, Replacement::without) == Approx(2.0).epsilon(1e-14));
  }
  SECTION("extended census returns the total") {
    Population pop({2, 2, 3});
    SizeWeights w({1, 2, 3});
    RandomStream gen(8);
    auto s = pps_wor_extended(pop, w, 6, gen);
    CHECK(hansen_hurvitz(pop, w, s) == Approx(7.0).epsilon(1e-14));
    CHECK(hh_variance(pop, w, 6, Replacement::without) == 0.0);
  }
  SECTION("errors") {
    Population pop({2, 2, 3});
    CHECK_THROWS_AS(hansen_hurvitz(pop, SizeWeights({1, 2}),
                                   DrawSequence::of_units({0}, Replacement::with, DesignKind::pps_wr)),
                    PreconditionError);
    CHECK_THROWS_AS(hh_variance(pop, SizeWeights({1, 2, 3}), 7, Replacement::without), PreconditionError);
  }
}

TEST_CASE("ACS examples against enumeration", "[estimators]") {
  const std::vector<double> y{1, 3, 5};
  Population pop(y);
  auto np = NetworkPartition::from_groups(pop, {{0, 1}, {2}});
  const std::vector<double> nm{2, 2, 5};  // network mean seen from each unit
  SECTION("point estimate") {
    const std::vector<std::size_t> first{0};
    CHECK(acs_mean(np, first) == 2.0);
    AcsSample s{DrawSequence::of_units({0}, Replacement::without, DesignKind::acs), {0, 1}};
    CHECK(acs_mean(pop, np, s) == 2.0);
    AcsSample bad{DrawSequence::of_units({2}, Replacement::without, DesignKind::acs), {0, 1}};
    CHECK_THROWS_AS(acs_mean(pop, np, bad), PreconditionError);
  }
  SECTION("variances") {
    auto e_wr = over(wr(3, 2), [&](const Tuple& t) { return mean_of(nm, t); });
    auto e_wor = over(wor(3, 2), [&](const Tuple& t) { return mean_of(nm, t); });
    CHECK(e_wr.var == Approx(1.0));
    CHECK(e_wor.var == Approx(0.5));
    CHECK(acs_variance(pop, np, 2, Replacement::with) == Approx(1.0).epsilon(1e-14));
    CHECK(acs_variance(pop, np, 2, Replacement::without) == Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(acs_variance(pop, np, 4, Replacement::without), PreconditionError);
  }
  SECTION("singleton networks agree with the sample mean") {
    auto single = NetworkPartition::from_groups(pop, {{0}, {1}, {2}});
    const std::vector<std::size_t> draw{2, 0};
    CHECK(acs_mean(single, draw) == sample_mean(pop, draw));
  }
  SECTION("census returns the population mean") {
    const std::vector<std::size_t> all{0, 1, 2};
    CHECK(acs_mean(np, all) == Approx(3.0));
  }
  SECTION("constant population") {
    Population c({4, 4, 4, 4});
    auto cnp = NetworkPartition::from_groups(c, {{0, 1}, {2, 3}});
    CHECK(acs_variance(c, cnp, 2, Replacement::with) == 0.0);
  }
}

TEST_CASE("random group examples against enumeration", "[estimators]") {
  const std::vector<double> y{1, 2, 3, 4};
  Population pop(y);
  CHECK(pop.adjusted_variance() == Approx(5.0 / 3));
  const std::vector<std::size_t> sizes{2, 2};
  auto e = over(wor(4, 4), [&](const Tuple& t) {
    auto g = random_group_split(DrawSequence::of_units(t, Replacement::without, DesignKind::srs), sizes);
    return random_group_variance_estimate(pop, g);
  });
  CHECK(e.mean == Approx(5.0 / 3).epsilon(1e-14));

  auto d2 = over(wor(4, 4), [&](const Tuple& t) {
    const double a = (y[t[0]] + y[t[1]]) / 2, b = (y[t[2]] + y[t[3]]) / 2;
    return (a - b) * (a - b);
  });
  CHECK(d2.mean == Approx(5.0 / 3));
  CHECK(rg_pair_expectation(pop, 2, 2) == Approx(5.0 / 3).epsilon(1e-14));

  auto d1 = over(wor(4, 2), [&](const Tuple& t) { return (y[t[0]] - y[t[1]]) * (y[t[0]] - y[t[1]]); });
  CHECK(d1.mean == Approx(10.0 / 3));
  CHECK(rg_pair_expectation(pop, 1, 1) == Approx(10.0 / 3).epsilon(1e-14));

  CHECK_THROWS_AS(rg_pair_expectation(pop, 3, 2), PreconditionError);
  CHECK_THROWS_AS(random_group_variance_estimate(pop, GroupedSample({{0, 1}})), PreconditionError);
  Population c({2, 2, 2, 2});
  CHECK(random_group_variance_estimate(c, GroupedSample({{0, 1}, {2, 3}})) == 0.0);
  CHECK(rg_pair_expectation(c, 1, 2) == 0.0);
}

TEST_CASE("equal-size shortcut agrees with the pairwise estimate", "[estimators][property]") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t K = 2 + rng() % 4, m = 1 + rng() % 3;
    auto y = random_values(rng, K * m + rng() % 3);
    Population pop(y);
    std::vector<std::size_t> perm(y.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> groups(K);
    for (std::size_t k = 0; k < K; ++k) groups[k].assign(perm.begin() + k * m, perm.begin() + (k + 1) * m);
    GroupedSample g(groups);
    CHECK(random_group_variance_equal_size(pop, g) ==
          Approx(random_group_variance_estimate(pop, g)).epsilon(1e-12).margin(1e-12));
  }
  Population pop({1, 2, 3, 4, 5});
  CHECK_THROWS_AS(random_group_variance_equal_size(pop, GroupedSample({{0, 1}, {2}})), PreconditionError);
}

TEST_CASE("unbiasedness and variance identities over small populations", "[estimators][property]") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t N = 1 + rep % 6;
    auto y = random_values(rng, N);
    Population pop(y);

    {  // srs
      for (std::size_t n = 1; n <= N; ++n) {
        auto f = [&](const Tuple& t) { return mean_of(y, t); };
        auto a = over(wor(N, n), f);
        CHECK(close(a.mean, pop.mean()));
        CHECK(close(a.var, srs_mean_variance(pop, n, Replacement::with) * fpc(n, N)));
        CHECK(close(a.var, srs_mean_variance(pop, n, Replacement::without)));
        if (n <= 3) {
          auto b = over(wr(N, n), f);
          CHECK(close(b.mean, pop.mean()));
          CHECK(close(b.var, srs_mean_variance(pop, n, Replacement::with)));
        }
      }
    }
    {  // pps
      std::vector<std::uint64_t> m(N);
      for (auto& x : m) x = 1 + rng() % 3;
      SizeWeights w(m);
      const double tM = static_cast<double>(w.total());
      std::vector<double> ext;
      for (std::size_t i = 0; i < N; ++i)
        for (std::uint64_t r = 0; r < m[i]; ++r) ext.push_back(y[i] * tM / static_cast<double>(m[i]));
      for (std::size_t n = 1; n <= std::min<std::size_t>(w.total(), 4); ++n) {
        auto a = over(wor(ext.size(), n), [&](const Tuple& t) { return mean_of(ext, t); });
        CHECK(close(a.mean, pop.total()));
        CHECK(close(a.var, hh_variance(pop, w, n, Replacement::with) * fpc(n, w.total())));
        CHECK(close(a.var, hh_variance(pop, w, n, Replacement::without)));
        if (n <= 3) {
          auto b = over(
              wr(N, n), [&](const Tuple& t) {
                std::vector<std::size_t> u(t.begin(), t.end());
                return hansen_hurvitz(pop, w, u);
              },
              [&](const Tuple& t) {
                double p = 1;
                for (auto i : t) p *= static_cast<double>(m[i]) / tM;
                return p;
              });
          CHECK(close(b.mean, pop.total()));
          CHECK(close(b.var, hh_variance(pop, w, n, Replacement::with)));
        }
      }
    }
    {  // acs
      std::vector<std::size_t> label(N);
      for (auto& l : label) l = rng() % N;
      auto np = NetworkPartition::from_assignment(pop, label);
      std::vector<double> nm(N);
      for (std::size_t i = 0; i < N; ++i) {
        double s = 0;
        int c = 0;
        for (std::size_t j = 0; j < N; ++j)
          if (label[j] == label[i]) {
            s += y[j];
            ++c;
          }
        nm[i] = s / c;
      }
      for (std::size_t n1 = 1; n1 <= N; ++n1) {
        auto a = over(wor(N, n1), [&](const Tuple& t) { return acs_mean(np, t); });
        CHECK(close(a.mean, pop.mean()));
        CHECK(close(a.var, acs_variance(pop, np, n1, Replacement::with) * fpc(n1, N)));
        CHECK(close(a.var, acs_variance(pop, np, n1, Replacement::without)));
        auto direct = over(wor(N, n1), [&](const Tuple& t) { return mean_of(nm, t); });
        CHECK(close(a.var, direct.var));
        if (n1 <= 3) {
          auto b = over(wr(N, n1), [&](const Tuple& t) { return acs_mean(np, t); });
          CHECK(close(b.mean, pop.mean()));
          CHECK(close(b.var, acs_variance(pop, np, n1, Replacement::with)));
        }
      }
    }
    {  // random groups
      if (N < 2) continue;
      for (std::size_t n = 2; n <= N; ++n) {
        for (std::uint32_t cuts = 1; cuts < (1u << (n - 1)); ++cuts) {
          std::vector<std::size_t> sizes{1};
          for (std::size_t j = 0; j + 1 < n; ++j) {
            if (cuts & (1u << j)) sizes.push_back(1);
            else ++sizes.back();
          }
          auto a = over(wor(N, n), [&](const Tuple& t) {
            auto g = random_group_split(DrawSequence::of_units(t, Replacement::without, DesignKind::srs), sizes);
            return random_group_variance_estimate(pop, g);
          });
          CHECK(close(a.mean, pop.adjusted_variance()));
        }
      }
    }
  }
}

TEST_CASE("without replacement beats with replacement for n >= 2", "[estimators][property]") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t N = 2 + rng() % 8;
    auto y = random_values(rng, N);
    y[0] = 100.0;  // nondegenerate
    Population pop(y);
    for (std::size_t n = 2; n <= N; ++n)
      CHECK(srs_mean_variance(pop, n, Replacement::without) < srs_mean_variance(pop, n, Replacement::with));
    std::vector<std::uint64_t> m(N);
    for (auto& x : m) x = 1 + rng() % 4;
    m[0] = 1;
    SizeWeights w(m);
    for (std::size_t n = 2; n <= w.total(); ++n)
      CHECK(hh_variance(pop, w, n, Replacement::without) < hh_variance(pop, w, n, Replacement::with));
    auto np = NetworkPartition::from_groups(pop, [&] {
      std::vector<std::vector<std::size_t>> g;
      for (std::size_t i = 0; i < N; ++i) g.push_back({i});
      return g;
    }());
    for (std::size_t n = 2; n <= N; ++n)
      CHECK(acs_variance(pop, np, n, Replacement::without) < acs_variance(pop, np, n, Replacement::with));
  }
}

TEST_CASE("estimate reports", "[estimators]") {
  Population pop({1, 2, 3, 4, 5});
  auto r = srs_estimate(pop, DrawSequence::of_units({1, 4}, Replacement::without, DesignKind::srs));
  CHECK(r.point == 3.5);
  CHECK(r.theoretical_variance == Approx(0.75));
  CHECK(r.estimand == Estimand::mean);
  auto h = hh_estimate(Population({2, 2, 3}), SizeWeights({1, 2, 3}),
                       DrawSequence::of_units({0, 2}, Replacement::with, DesignKind::pps_wr));
  CHECK(h.point == Approx(9.0));
  CHECK(h.theoretical_variance == Approx(2.5));
  CHECK(h.estimand == Estimand::total);
}
