#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "aqua/rng.hpp"

using aqua::Rng;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next() == b.next()) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform stays inside the half-open unit interval") {
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform mean and variance are close to theory") {
    Rng rng(99);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("below covers its full range") {
    Rng rng(5);
    std::vector<int> hits(10, 0);
    for (int i = 0; i < 10000; ++i) ++hits[rng.below(10)];
    for (int h : hits) CHECK(h > 800);
}

TEST_CASE("normal matches moments within sampling error") {
    Rng rng(12345);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal(3.0, 2.0);
        sum += x;
        sq += (x - 3.0) * (x - 3.0);
    }
    CHECK(sum / n == doctest::Approx(3.0).epsilon(0.01));
    CHECK(sq / n == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i;
    Rng rng(3);
    rng.shuffle(v);
    std::vector<int> w = v;
    std::sort(w.begin(), w.end());
    for (int i = 0; i < 100; ++i) CHECK(w[i] == i);

    std::vector<int> v2(100);
    for (int i = 0; i < 100; ++i) v2[i] = i;
    Rng rng2(3);
    rng2.shuffle(v2);
    CHECK(v == v2);
}

TEST_CASE("coin is roughly fair") {
    Rng rng(2024);
    int heads = 0;
    for (int i = 0; i < 100000; ++i)
        if (rng.coin()) ++heads;
    CHECK(heads > 48500);
    CHECK(heads < 51500);
}

TEST_CASE("fork yields a stream independent of later parent draws") {
    Rng parent(11);
    Rng child = parent.fork(1);
    const uint64_t c0 = child.next();
    Rng parent2(11);
    Rng child2 = parent2.fork(1);
    (void)parent2.next();
    CHECK(child2.next() == c0);
}
