#include <doctest.h>

#include <cmath>

#include "xtree/metrics.hpp"
#include "xtree/rng.hpp"

using namespace xtree;

TEST_CASE("precision_at_k") {
    std::vector<std::uint32_t> truth{1, 4, 7};
    std::vector<std::uint32_t> ranked{1, 4, 7, 9, 0};
    CHECK(precision_at_k(truth, ranked, 3) == 1.0);
    CHECK(precision_at_k(truth, ranked, 5) == doctest::Approx(0.6));

    std::vector<std::uint32_t> one_hit{9, 0, 2, 3, 1};
    CHECK(precision_at_k(truth, one_hit, 5) == doctest::Approx(0.2));

    std::vector<std::uint32_t> two_of_three{1, 4, 9};
    CHECK(precision_at_k(truth, two_of_three, 3) == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(precision_at_k(truth, two_of_three, 4), std::invalid_argument);
    CHECK(precision_at_k({}, ranked, 3) == 0.0);
    CHECK(precision_at_k(truth, ranked, 3) == 1.0);
}

TEST_CASE("mean_precision_at_k") {
    Dataset ds;
    ds.num_features = 1;
    ds.num_labels = 4;
    Example a;
    a.features = SparseVector({}, 1);
    a.labels = {0};
    Example b = a;
    b.labels = {1};
    ds.examples = {a, b};
    std::vector<std::vector<std::uint32_t>> predictions{{0}, {3}};
    CHECK(mean_precision_at_k(ds, predictions, 1) == doctest::Approx(0.5));

    std::vector<std::vector<std::uint32_t>> both{{0}, {1}};
    CHECK(mean_precision_at_k(ds, both, 1) == 1.0);

    CHECK_THROWS_AS(mean_precision_at_k(Dataset{}, {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(mean_precision_at_k(ds, {{0}}, 1), std::invalid_argument);
}

TEST_CASE("sign test is the exact binomial") {
    std::vector<double> a(10, 1.0), b(10, 0.0);
    auto r = paired_tests(a, b);
    CHECK(r.sign_p == doctest::Approx(0.001953125).epsilon(1e-9));

    // all-zero differences: no informative pairs
    auto same = paired_tests(b, b);
    CHECK(same.sign_p == 1.0);
    CHECK(same.wilcoxon_p == 1.0);
    CHECK(same.t_test_p == 1.0);

    CHECK_THROWS_AS(paired_tests(std::vector<double>{1.0}, std::vector<double>{2.0}),
                    std::invalid_argument);
}

TEST_CASE("sign test p decreases as the win count grows") {
    double prev = 1.1;
    for (int wins = 5; wins <= 10; ++wins) {
        std::vector<double> a(10, 0.0), b(10, 0.0);
        for (int i = 0; i < wins; ++i) a[i] = 1.0;
        for (int i = wins; i < 10; ++i) a[i] = -1.0;
        auto r = paired_tests(a, b);
        CHECK(r.sign_p <= prev + 1e-12);
        prev = r.sign_p;
    }
}

TEST_CASE("paired tests are symmetric in their arguments") {
    std::vector<double> a{1.1, 2.3, 3.1, 4.2, 5.0, 6.3, 7.1, 8.4};
    std::vector<double> b{1.0, 2.0, 3.3, 4.0, 5.2, 6.0, 7.0, 8.0};
    auto ab = paired_tests(a, b);
    auto ba = paired_tests(b, a);
    CHECK(ab.t_test_p == doctest::Approx(ba.t_test_p).epsilon(1e-12));
    CHECK(ab.sign_p == doctest::Approx(ba.sign_p).epsilon(1e-12));
    CHECK(ab.wilcoxon_p == doctest::Approx(ba.wilcoxon_p).epsilon(1e-12));
}

TEST_CASE("student t tail matches published critical values") {
    // two-sided alpha = 0.05 rows of the t table
    CHECK(student_t_two_sided_p(2.228, 10.0) == doctest::Approx(0.05).epsilon(5e-3));
    CHECK(student_t_two_sided_p(12.706, 1.0) == doctest::Approx(0.05).epsilon(5e-3));
    CHECK(student_t_two_sided_p(2.042, 30.0) == doctest::Approx(0.05).epsilon(5e-3));
    // reference values computed with an independent implementation
    CHECK(student_t_two_sided_p(2.228, 10.0) ==
          doctest::Approx(0.050011771817111327).epsilon(1e-9));
}

TEST_CASE("paired t and wilcoxon match frozen reference values") {
    std::vector<double> a{1.1, 2.3, 3.1, 4.2, 5.0, 6.3, 7.1, 8.4};
    std::vector<double> b{1.0, 2.0, 3.3, 4.0, 5.2, 6.0, 7.0, 8.0};
    auto r = paired_tests(a, b);
    CHECK(r.t_test_p == doctest::Approx(0.16041454690929693).epsilon(1e-9));
    CHECK(r.wilcoxon_p == doctest::Approx(0.14050554128479997).epsilon(1e-9));

    // tied magnitudes and one zero difference
    std::vector<double> a2{10, 12, 9, 14, 8, 7, 13, 11, 10, 15};
    std::vector<double> b2{9, 12, 7, 10, 6, 9, 12, 10, 8, 11};
    auto r2 = paired_tests(a2, b2);
    CHECK(r2.wilcoxon_p == doctest::Approx(0.04124876309490529).epsilon(1e-9));
}

TEST_CASE("null data yields large p-values on average") {
    auto engine = make_engine(61, Stream::Test);
    std::normal_distribution<double> noise(0.0, 1.0);
    double t_sum = 0.0, sign_sum = 0.0, wilcoxon_sum = 0.0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> a(30), b(30);
        for (int i = 0; i < 30; ++i) {
            b[i] = noise(engine);
            a[i] = b[i] + noise(engine) * 0.1;
        }
        auto r = paired_tests(a, b);
        t_sum += r.t_test_p;
        sign_sum += r.sign_p;
        wilcoxon_sum += r.wilcoxon_p;
    }
    CHECK(t_sum / reps > 0.44);
    CHECK(sign_sum / reps > 0.5);  // discrete two-sided p is super-uniform
    CHECK(wilcoxon_sum / reps > 0.44);
}

TEST_CASE("normal survival function") {
    CHECK(normal_sf(0.0) == doctest::Approx(0.5));
    CHECK(normal_sf(1.959963985) == doctest::Approx(0.025).epsilon(1e-6));
    CHECK(normal_sf(-1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
}

TEST_CASE("regularized incomplete beta basics") {
    CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x
    CHECK(regularized_incomplete_beta(1.0, 1.0, 0.42) == doctest::Approx(0.42).epsilon(1e-12));
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    double lhs = regularized_incomplete_beta(2.5, 4.0, 0.3);
    double rhs = 1.0 - regularized_incomplete_beta(4.0, 2.5, 0.7);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
