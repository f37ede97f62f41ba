#include <doctest.h>

#include <cmath>

#include "xtree/learner.hpp"
#include "xtree/rng.hpp"

using namespace xtree;

namespace {

// constant learning rate eta0
LrSchedule constant_rate(double eta0) { return LrSchedule::inverse_power(eta0, 0.0); }

NodeModel random_sparse_node(std::mt19937_64& engine, std::uint32_t d) {
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    NodeModel node = NodeModel::make_sparse();
    std::uniform_int_distribution<std::uint32_t> idx(0, d - 1);
    for (std::uint32_t i = 0; i < d / 2; ++i) node.w_sparse[idx(engine)] = value(engine);
    node.bias = value(engine);
    return node;
}

SparseVector random_input(std::mt19937_64& engine, std::uint32_t d) {
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    std::uniform_int_distribution<std::uint32_t> idx(0, d - 1);
    std::uniform_int_distribution<int> nnz(1, 8);
    std::vector<FeatureEntry> entries;
    for (int i = nnz(engine); i > 0; --i) entries.push_back({idx(engine), value(engine)});
    return SparseVector::from_unsorted(std::move(entries), d);
}

}  // namespace

TEST_CASE("predict_prob is the logistic of the margin") {
    NodeModel node = NodeModel::make_sparse();
    SparseVector v({{0, 1.0}}, 2);
    CHECK(predict_prob(node, v) == 0.5);

    node.bias = std::log(3.0);
    SparseVector empty({}, 2);
    CHECK(predict_prob(node, empty) == doctest::Approx(0.75).epsilon(1e-12));

    node.constant_positive = true;
    CHECK(predict_prob(node, v) == 1.0);
}

TEST_CASE("single update from zeros matches the hand computation") {
    NodeModel node = NodeModel::make_sparse();
    SparseVector v({{0, 1.0}}, 2);
    double g = update(node, v, 1.0, 1.0, constant_rate(1.0), 0.0);
    CHECK(g == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(node.weight_at(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(node.weight_at(1) == 0.0);
    CHECK(node.bias == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(node.updates == 1);
}

TEST_CASE("updates on constant-positive nodes are no-ops") {
    NodeModel node = NodeModel::make_sparse();
    node.constant_positive = true;
    SparseVector v({{0, 1.0}}, 2);
    CHECK(update(node, v, 0.0, 1.0, constant_rate(1.0), 0.0) == 0.0);
    CHECK(node.updates == 0);
    CHECK(node.weight_at(0) == 0.0);
}

TEST_CASE("zero input direction leaves only the L2 decay") {
    NodeModel node = NodeModel::make_sparse();
    node.w_sparse[0] = 2.0;
    node.w_sparse[3] = -1.0;
    SparseVector zero({}, 4);
    update(node, zero, 0.0, 1.0, constant_rate(1.0), 0.1);
    CHECK(node.weight_at(0) == doctest::Approx(1.8).epsilon(1e-12));
    CHECK(node.weight_at(3) == doctest::Approx(-0.9).epsilon(1e-12));
}

TEST_CASE("gradient magnitude vanishes at a saturated margin") {
    NodeModel node = NodeModel::make_sparse();
    node.bias = -40.0;  // sigma -> 0
    SparseVector v({{0, 1.0}}, 1);
    double g = update(node, v, 0.0, 1.0, constant_rate(1.0), 0.0);
    CHECK(std::abs(g) < 1e-15);
    CHECK(std::abs(node.weight_at(0)) < 1e-15);
}

TEST_CASE("learning-rate schedules") {
    LrSchedule linear = LrSchedule::linear(0.4, 100);
    CHECK(linear.rate(0) == doctest::Approx(0.4));
    CHECK(linear.rate(50) == doctest::Approx(0.2));
    CHECK(linear.rate(100) == 0.0);
    CHECK(linear.rate(150) == 0.0);

    LrSchedule inv = LrSchedule::inverse_power(0.4, 0.5);
    CHECK(inv.rate(0) == doctest::Approx(0.4));  // first update, t+1 = 1
    double prev = 1e300;
    for (std::uint64_t t : {0, 1, 2, 5, 10, 100, 10000}) {
        double r = inv.rate(t);
        CHECK(r <= prev);
        prev = r;
    }
    CHECK(inv.rate(3) == doctest::Approx(0.4 * std::pow(0.25, 0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(LrSchedule::linear(0.4, 0), std::invalid_argument);
}

TEST_CASE("gradient check against central finite differences") {
    auto engine = make_engine(21, Stream::Test);
    std::uniform_int_distribution<int> target(0, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        NodeModel node = random_sparse_node(engine, 16);
        SparseVector v = random_input(engine, 16);
        worst = std::max(worst, gradient_check(node, v, target(engine), 1e-5));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("gradient check edge cases") {
    NodeModel node = NodeModel::make_sparse();
    node.bias = 0.3;
    SparseVector zero({}, 4);
    CHECK(gradient_check(node, zero, 0.0, 1e-5) < 1e-4);  // weight grads all zero

    // saturated positive margin: gradient below the absolute criterion
    NodeModel sat = NodeModel::make_sparse();
    sat.w_sparse[0] = 40.0;
    SparseVector v({{0, 1.0}}, 1);
    CHECK(gradient_check(sat, v, 1.0, 1e-5) == 0.0);

    CHECK_THROWS_AS(gradient_check(node, zero, 0.0, 1e-2), std::invalid_argument);
}

TEST_CASE("identical update streams are bit-identical in deterministic mode") {
    auto run = [] {
        NodeModel node = NodeModel::make_sparse();
        auto engine = make_engine(22, Stream::Test);
        LrSchedule sched = LrSchedule::inverse_power(0.3, 0.4);
        std::uniform_int_distribution<int> target(0, 1);
        for (int i = 0; i < 200; ++i)
            update(node, random_input(engine, 8), target(engine), 1.0, sched, 0.0);
        return node;
    };
    NodeModel a = run(), b = run();
    CHECK(a.bias == b.bias);
    for (const auto& [idx, w] : a.w_sparse) CHECK(b.w_sparse.at(idx) == w);
}

TEST_CASE("predictions stay inside (0,1) for moderate models") {
    auto engine = make_engine(23, Stream::Test);
    for (int trial = 0; trial < 200; ++trial) {
        NodeModel node = random_sparse_node(engine, 8);
        double p = predict_prob(node, random_input(engine, 8));
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("dense update accumulates the eta-free input gradient") {
    NodeModel node = NodeModel::make_dense(3);
    node.w_dense = {0.5, -1.0, 2.0};
    std::vector<double> v{1.0, 0.0, -1.0};
    std::vector<double> grad(3, 0.0);
    std::vector<double> w_old = node.w_dense;
    double g = update(node, v, 1.0, 1.0, constant_rate(0.5), 0.0, &grad);
    for (std::size_t i = 0; i < 3; ++i) CHECK(grad[i] == doctest::Approx(g * w_old[i]));
}

TEST_CASE("embedding averaging and backprop") {
    Representation repr = Representation::dense_embedding(4, 2, FeatureWeighting::Uniform, 3);
    for (double v : repr.embedding) CHECK(std::abs(v) <= 0.5);

    // v(x) = sum w_i E_i / sum w_i with w_i = 1
    SparseVector x({{1, 5.0}, {3, 2.0}}, 4);
    std::vector<double> out;
    repr.embed(x, out);
    for (std::uint32_t j = 0; j < 2; ++j)
        CHECK(out[j] ==
              doctest::Approx((repr.embedding[1 * 2 + j] + repr.embedding[3 * 2 + j]) / 2.0));

    // zero gradient leaves E unchanged
    std::vector<double> before = repr.embedding;
    repr.backprop(x, std::vector<double>{0.0, 0.0}, constant_rate(1.0));
    CHECK(repr.embedding == before);

    // single feature, uniform: the row moves by exactly -eta * grad
    SparseVector single({{2, 1.0}}, 4);
    std::vector<double> grad{0.25, -0.5};
    std::vector<double> row_before{repr.embedding[4], repr.embedding[5]};
    repr.backprop(single, grad, constant_rate(0.5));
    CHECK(repr.embedding[4] == doctest::Approx(row_before[0] - 0.5 * 0.25));
    CHECK(repr.embedding[5] == doctest::Approx(row_before[1] + 0.5 * 0.5));

    // two equal-weight features: each row moves by half the single step
    std::vector<double> r1{repr.embedding[2], repr.embedding[3]};
    std::vector<double> r3{repr.embedding[6], repr.embedding[7]};
    repr.backprop(x, grad, constant_rate(0.5));
    CHECK(repr.embedding[2] == doctest::Approx(r1[0] - 0.5 * 0.5 * 0.25));
    CHECK(repr.embedding[6] == doctest::Approx(r3[0] - 0.5 * 0.5 * 0.25));
}

TEST_CASE("tfidf weighting drives the averaging weights") {
    std::vector<double> idf{1.0, 2.0};
    Representation repr =
        Representation::dense_embedding(2, 1, FeatureWeighting::Tfidf, 5, idf);
    SparseVector x({{0, 1.0}, {1, 3.0}}, 2);
    // weights are value * idf: 1 and 6
    std::vector<double> out;
    repr.embed(x, out);
    CHECK(out[0] ==
          doctest::Approx((1.0 * repr.embedding[0] + 6.0 * repr.embedding[1]) / 7.0));
}

TEST_CASE("batch solver fits a separable problem deterministically") {
    SparseVector pos({{0, 1.0}}, 1), neg({{0, -1.0}}, 1);
    std::vector<BatchItem> items{{&pos, 1.0, 1.0}, {&neg, 0.0, 1.0}, {&pos, 1.0, 1.0}};
    NodeModel a = NodeModel::make_sparse();
    fit_batch(a, items, 500, 2.0, 0.0);
    CHECK(predict_prob(a, pos) > 0.9);
    CHECK(predict_prob(a, neg) < 0.1);

    NodeModel b = NodeModel::make_sparse();
    fit_batch(b, items, 500, 2.0, 0.0);
    CHECK(a.weight_at(0) == b.weight_at(0));
    CHECK(a.bias == b.bias);

    // with L2 the optimum is pulled toward zero
    NodeModel c = NodeModel::make_sparse();
    fit_batch(c, items, 500, 2.0, 0.05);
    CHECK(std::abs(c.weight_at(0)) < std::abs(a.weight_at(0)));
}
