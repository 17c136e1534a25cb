#include <doctest.h>

#include <cmath>
#include <numeric>

#include "edgecache/catalog.hpp"
#include "edgecache/errors.hpp"

using namespace edgecache;

TEST_SUITE("catalog") {

TEST_CASE("uniform popularity when eta is zero") {
  const auto p = zipf_probabilities(4, 0.0);
  for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("two-file Zipf with eta one") {
  const FileCatalog c = build_catalog(2, 1.0, {}, 3);
  CHECK(c.normalizer() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(c.probabilities()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(c.probabilities()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("fifty-file head probability against a direct harmonic sum") {
  double h = 0.0;
  for (int f = 50; f >= 1; --f) h += 1.0 / f;
  const auto p = zipf_probabilities(50, 1.0);
  CHECK(p[0] == doctest::Approx(1.0 / h).epsilon(1e-13));
  CHECK(p[0] == doctest::Approx(0.2223).epsilon(1e-3));
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 1; k < p.size(); ++k) CHECK(p[k] <= p[k - 1]);
}

TEST_CASE("invalid catalog parameters are configuration errors") {
  CHECK_THROWS_AS(build_catalog(1, 1.0, {}, 1), ConfigError);
  CHECK_THROWS_AS(build_catalog(5, 1.5, {}, 1), ConfigError);
  CHECK_THROWS_AS(build_catalog(5, -0.1, {}, 1), ConfigError);
  AttributeRanges bad;
  bad.size = {500.0, 500.0};
  CHECK_THROWS_AS(build_catalog(5, 1.0, bad, 1), ConfigError);
}

TEST_CASE("attributes are drawn inside their ranges and fixed by the seed") {
  const FileCatalog a = build_catalog(50, 0.8, {}, 11);
  const FileCatalog b = build_catalog(50, 0.8, {}, 11);
  const FileCatalog c = build_catalog(50, 0.8, {}, 12);
  bool differs = false;
  for (int f = 0; f < a.size(); ++f) {
    const FileType& x = a.file(f);
    CHECK(x.id == f);
    CHECK(x.lifetime >= 10.0);
    CHECK(x.lifetime <= 30.0);
    CHECK(x.importance >= 0.1);
    CHECK(x.importance <= 0.9);
    CHECK(x.size >= 100.0);
    CHECK(x.size <= 1000.0);
    CHECK(x.lifetime == b.file(f).lifetime);
    CHECK(x.size == b.file(f).size);
    differs = differs || x.size != c.file(f).size;
  }
  CHECK(differs);
}

TEST_CASE("request sampler matches the analytic distribution") {
  for (double eta : {0.0, 0.6, 1.0}) {
    const FileCatalog c = build_catalog(10, eta, {}, 1);
    Rng rng(42);
    std::vector<double> freq(10, 0.0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) freq[static_cast<std::size_t>(sample_request(c, rng))] += 1.0;
    double linf = 0.0;
    for (std::size_t f = 0; f < 10; ++f) {
      linf = std::max(linf, std::abs(freq[f] / draws - c.probabilities()[f]));
    }
    CHECK(linf < 0.01);
  }

  const FileCatalog two = build_catalog(2, 1.0, {}, 1);
  Rng rng(7);
  int first = 0;
  for (int k = 0; k < 100000; ++k) first += sample_request(two, rng) == 0;
  CHECK(std::abs(first / 1e5 - 2.0 / 3.0) < 0.01);
}

TEST_CASE("request sequence repeats for a fixed seed") {
  const FileCatalog c = build_catalog(20, 1.0, {}, 1);
  Rng a(99), b(99);
  for (int k = 0; k < 1000; ++k) CHECK(sample_request(c, a) == sample_request(c, b));
}

TEST_CASE("exponential interarrivals have the right mean and unit CV") {
  for (double rate : {5.0, 3.3}) {
    Rng rng(5);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    bool positive = true;
    for (int k = 0; k < n; ++k) {
      const double t = sample_interarrival(rate, rng);
      positive = positive && t > 0.0;
      sum += t;
      sq += t * t;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(positive);
    CHECK(std::abs(mean - 1.0 / rate) < 0.01 / rate);
    CHECK(std::abs(sd / mean - 1.0) < 0.05);
  }
  CHECK(std::abs(1.0 / 3.3 - 0.303) < 0.01);
  Rng rng(1);
  CHECK_THROWS_AS(sample_interarrival(0.0, rng), ConfigError);
  CHECK_THROWS_AS(sample_interarrival(-2.0, rng), ConfigError);
}

TEST_CASE("probability replacement is validated") {
  FileCatalog c = build_catalog(3, 1.0, {}, 1);
  CHECK_THROWS_AS(c.set_probabilities({0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(c.set_probabilities({0.5, 0.6, -0.1}), ConfigError);
  CHECK_THROWS_AS(c.set_probabilities({0.5, 0.2, 0.2}), ConfigError);
  c.set_probabilities({0.0, 0.0, 1.0});
  Rng rng(1);
  for (int k = 0; k < 100; ++k) CHECK(c.sample(rng) == 2);
}

}
