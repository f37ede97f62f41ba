#include <doctest.h>

#include <cmath>
#include <sstream>

#include "xtree/oracle.hpp"
#include "xtree/rng.hpp"
#include "xtree/verify.hpp"

using namespace xtree;

namespace {

ExactDistribution from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_distribution(in);
}

ExactDistribution random_distribution(std::mt19937_64& engine, std::uint32_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ExactDistribution dist;
    dist.m = m;
    std::vector<double> w(1u << m);
    double total = 0.0;
    for (double& v : w) total += (v = u(engine));
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask + 1 < w.size(); ++mask) {
        double p = w[mask] / total;
        dist.table.emplace_back(mask, p);
        sum += p;
    }
    dist.table.emplace_back(static_cast<std::uint32_t>(w.size() - 1), 1.0 - sum);
    dist.validate();
    return dist;
}

const char* kProp1 = fixtures::kPickOneCounterexample;

}  // namespace

TEST_CASE("marginals of the counterexample distribution") {
    auto dist = from_text(kProp1);
    auto eta = marginals(dist);
    CHECK(eta[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(eta[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eta[2] == doctest::Approx(0.4).epsilon(1e-12));

    auto zero = from_text("000 1.0\n");
    CHECK(marginals(zero) == std::vector<double>{0.0, 0.0, 0.0});

    auto uniform = from_text("10 0.5\n01 0.5\n");
    auto eu = marginals(uniform);
    CHECK(eu[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eu[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pickone_map reproduces the counterexample mapping") {
    auto dist = from_text(kProp1);
    auto mapped = pickone_map(dist);
    CHECK(mapped[0] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(mapped[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mapped[2] == doctest::Approx(0.40).epsilon(1e-12));

    // a multiclass distribution maps to itself
    auto multiclass = from_text("100 0.5\n010 0.3\n001 0.2\n");
    CHECK(pickone_map(multiclass) == marginals(multiclass));

    // independent m=2 with eta = (0.5, 0.5)
    auto indep = make_independent(std::vector<double>{0.5, 0.5});
    auto mapped2 = pickone_map(indep);
    CHECK(mapped2[0] == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(mapped2[1] == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(mapped2[0] + mapped2[1] == doctest::Approx(1.0 - indep.prob_of(0)).epsilon(1e-12));
}

TEST_CASE("pickone_map yields a sub-distribution missing exactly P(empty)") {
    auto engine = make_engine(51, Stream::Test);
    std::uniform_int_distribution<std::uint32_t> pick_m(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        auto dist = random_distribution(engine, pick_m(engine));
        auto mapped = pickone_map(dist);
        double sum = 0.0;
        for (double v : mapped) sum += v;
        CHECK(sum == doctest::Approx(1.0 - dist.prob_of(0)).epsilon(1e-12));
    }
}

TEST_CASE("pk_regret and optimal_topk") {
    auto dist = from_text(kProp1);
    std::vector<std::uint32_t> predicted{2};
    CHECK(pk_regret(dist, predicted, 1) == doctest::Approx(0.2).epsilon(1e-12));

    auto optimal = optimal_topk(dist, 1);
    CHECK(optimal == std::vector<std::uint32_t>{0});
    CHECK(pk_regret(dist, optimal, 1) == 0.0);

    // k = m: every permutation has zero regret
    std::vector<std::uint32_t> all{2, 0, 1};
    CHECK(pk_regret(dist, all, 3) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(pk_regret(dist, all, 2), std::invalid_argument);

    // regret is nonnegative on random predictions
    auto engine = make_engine(52, Stream::Test);
    for (int trial = 0; trial < 100; ++trial) {
        auto d = random_distribution(engine, 4);
        std::vector<std::uint32_t> labels{0, 1, 2, 3};
        std::shuffle(labels.begin(), labels.end(), engine);
        labels.resize(2);
        CHECK(pk_regret(d, labels, 2) >= -1e-15);
    }
}

TEST_CASE("order preservation under the pick-one-label map") {
    CHECK(is_order_preserved(make_independent(std::vector<double>{0.9, 0.3, 0.1})));
    CHECK(!is_order_preserved(from_text(kProp1)));
    CHECK(is_order_preserved(make_independent(std::vector<double>{0.4, 0.4, 0.4})));
}

TEST_CASE("the counterexample violates order and costs at least 0.2 regret") {
    auto dist = from_text(kProp1);
    auto mapped = pickone_map(dist);
    auto top = top_k_indices(mapped, 1);
    CHECK(pk_regret(dist, top, 1) >= 0.2 - 1e-9);
}

TEST_CASE("theorem2_check bound") {
    std::vector<double> etas{0.6, 0.5, 0.4};
    auto same = theorem2_check(etas, etas, 2);
    CHECK(same.regret == 0.0);
    CHECK(same.holds);

    std::vector<double> estimates{0.35, 0.25, 0.40};
    auto r = theorem2_check(etas, estimates, 1);
    CHECK(r.regret == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r.bound == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.holds);
}

TEST_CASE("logistic regret is the KL divergence") {
    CHECK(logistic_regret(0.5, 0.5) == 0.0);
    CHECK(logistic_regret(0.5, 0.6) == doctest::Approx(0.020410997260127586).epsilon(1e-12));
    CHECK(logistic_regret(0.3, 0.7) > 0.0);
}

TEST_CASE("theorem1_check on a single-node path") {
    LabelTree t = build_complete(1, 2);
    auto r = theorem1_check(t, std::vector<double>{0.5}, std::vector<double>{0.6}, 0, {4.0});
    CHECK(r.lhs == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.rhs ==
          doctest::Approx(std::sqrt(0.5) * std::sqrt(0.020410997260127586)).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(0.10102226799109093).epsilon(1e-9));
    CHECK(r.holds);
    CHECK(!r.clamped);

    auto equal = theorem1_check(t, std::vector<double>{0.5}, std::vector<double>{0.5}, 0, {4.0});
    CHECK(equal.lhs == 0.0);
    CHECK(equal.rhs == 0.0);
    CHECK(equal.holds);

    auto clamped =
        theorem1_check(t, std::vector<double>{1.2}, std::vector<double>{0.5}, 0, {4.0});
    CHECK(clamped.clamped);
}

TEST_CASE("theorem1 bound holds on random trees") {
    auto engine = make_engine(53, Stream::Test);
    std::uniform_real_distribution<double> value(0.02, 0.98);
    for (int trial = 0; trial < 300; ++trial) {
        std::uniform_int_distribution<std::uint32_t> pick_m(1, 8);
        std::uint32_t m = pick_m(engine);
        LabelTree tree = random_label_tree(engine, m, 3, 4);
        std::vector<double> truths(tree.node_count()), estimates(tree.node_count());
        for (double& v : truths) v = value(engine);
        for (double& v : estimates) v = value(engine);
        std::uniform_int_distribution<std::uint32_t> pick_label(0, m - 1);
        CHECK(theorem1_check(tree, truths, estimates, pick_label(engine), {4.0}).holds);
    }
}

TEST_CASE("distribution fixtures parse, validate and round-trip") {
    auto dist = from_text(kProp1);
    CHECK(dist.m == 3);
    std::ostringstream out;
    serialize_distribution(dist, out);
    auto back = from_text(out.str());
    CHECK(back.table == dist.table);

    CHECK_THROWS_AS(from_text("10 0.5\n01 0.6\n"), std::invalid_argument);  // sums to 1.1
    CHECK_THROWS_AS(from_text("1x 1.0\n"), ParseError);
    CHECK_THROWS_AS(from_text("10 0.5\n011 0.5\n"), ParseError);  // width change
}

TEST_CASE("union probabilities and masses") {
    auto dist = from_text(kProp1);
    CHECK(union_probability(dist, {0, 1, 2}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(union_probability(dist, {1}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(union_probability(dist, {1, 2}) == doctest::Approx(0.9).epsilon(1e-12));

    LabelTree t = build_complete(3, 2);
    auto mass = union_node_masses(t, dist);
    CHECK(mass[static_cast<std::size_t>(t.root())] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::uint32_t j = 0; j < 3; ++j) {
        auto eta = marginals(dist);
        CHECK(mass[static_cast<std::size_t>(t.leaf_of(j))] ==
              doctest::Approx(eta[j]).epsilon(1e-12));
    }
}
