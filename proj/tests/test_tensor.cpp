#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aclite/tensor.hpp"
#include "gradcheck.hpp"

using namespace aclite;

namespace {

TensorPtr random_param(ParamStore& store, const std::string& name,
                       std::vector<std::size_t> shape, std::mt19937_64& rng) {
    auto t = Tensor::zeros(std::move(shape));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : t->data) v = dist(rng);
    store.add(name, t);
    return t;
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
    Tape tape;
    auto eye = Tensor::from_matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    auto x = Tensor::from_matrix(3, 1, {2.5, -1.0, 7.0});
    auto y = ops::matmul(tape, eye, x);
    CHECK(y->data == x->data);

    auto a = Tensor::from_matrix(2, 2, {1, 2, 3, 4});
    auto b = Tensor::from_matrix(2, 1, {1, 1});
    auto c = ops::matmul(tape, a, b);
    CHECK(c->data[0] == 3.0);
    CHECK(c->data[1] == 7.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
    Tape tape;
    auto a = Tensor::zeros({4, 5});
    auto b = Tensor::zeros({3, 2});
    CHECK_THROWS_WITH_AS(ops::matmul(tape, a, b), doctest::Contains("[4x5]"), DimensionError);
}

TEST_CASE("matmul gradient vs finite differences") {
    std::mt19937_64 rng(42);
    ParamStore store;
    auto a = random_param(store, "a", {4, 5}, rng);
    auto b = random_param(store, "b", {5, 2}, rng);

    auto forward = [&] {
        Tape t;
        t.grad_enabled = false;
        auto out = ops::sum(t, ops::matmul(t, a, b));
        return out->data[0];
    };
    auto taped = [&](Tape& t) { return ops::sum(t, ops::matmul(t, a, b)); };
    CHECK(gradcheck::max_rel_error(store, forward, taped) < 1e-6);
}

TEST_CASE("softmax basics") {
    Tape tape;
    auto x = Tensor::from_vector({0, 0, 0});
    auto y = ops::softmax(tape, x);
    for (double v : y->data) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

    auto big = Tensor::from_vector({1000, 1000});
    auto z = ops::softmax(tape, big);
    CHECK(z->data[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::isfinite(z->data[0]));

    auto bad = Tensor::from_vector({1.0, std::nan("")});
    CHECK_THROWS_AS(ops::softmax(tape, bad), NumericError);
}

TEST_CASE("softmax rows sum to one") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-50, 50);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = Tensor::zeros({5});
        for (double& v : x->data) v = dist(rng);
        Tape tape;
        auto y = ops::softmax(tape, x);
        double total = 0.0;
        for (double v : y->data) total += v;
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("softmax gradient vs finite differences") {
    std::mt19937_64 rng(3);
    ParamStore store;
    auto x = random_param(store, "x", {7}, rng);
    // weighted sum makes the Jacobian-vector product non-trivial
    std::vector<double> w = {0.3, -1.2, 0.7, 2.0, -0.5, 0.1, 1.5};
    auto make_loss = [&](Tape& t) {
        auto s = ops::softmax(t, x);
        auto wt = Tensor::from_vector(w);
        return ops::sum(t, ops::hadamard(t, s, wt));
    };
    auto forward = [&] {
        Tape t;
        t.grad_enabled = false;
        return make_loss(t)->data[0];
    };
    CHECK(gradcheck::max_rel_error(store, forward, make_loss) < 1e-5);
}

TEST_CASE("elementwise basics") {
    Tape tape;
    auto zero = Tensor::from_vector({0.0});
    CHECK(ops::sigmoid(tape, zero)->data[0] == 0.5);
    CHECK(ops::tanh(tape, zero)->data[0] == 0.0);

    auto m = Tensor::from_matrix(2, 3, {4, 4, 4, -1, -1, -1});
    auto mean = ops::mean_over_columns(tape, m);
    CHECK(mean->data[0] == 4.0);
    CHECK(mean->data[1] == -1.0);

    auto a = Tensor::from_vector({1, 2});
    auto b = Tensor::from_vector({1, 2, 3});
    CHECK_THROWS_AS(ops::add(tape, a, b), DimensionError);
    CHECK_THROWS_AS(ops::hadamard(tape, a, b), DimensionError);
}

TEST_CASE("gather_row gradient lands only on the looked-up row") {
    ParamStore store;
    std::mt19937_64 rng(11);
    auto table = random_param(store, "table", {4, 3}, rng);
    Tape tape;
    auto row = ops::gather_row(tape, table, 2);
    auto loss = ops::sum(tape, row);
    tape.backward(loss);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(table->grad[r * 3 + c] == (r == 2 ? 1.0 : 0.0));

    auto forward = [&] {
        Tape t;
        t.grad_enabled = false;
        return ops::sum(t, ops::gather_row(t, table, 2))->data[0];
    };
    auto taped = [&](Tape& t) { return ops::sum(t, ops::gather_row(t, table, 2)); };
    CHECK(gradcheck::max_rel_error(store, forward, taped) < 1e-6);
}

TEST_CASE("cross_entropy analytic cases") {
    Tape tape;
    // probability ~1 on targets -> loss ~0
    auto confident = Tensor::from_matrix(2, 3, {100, 0, 0, 0, 100, 0});
    auto loss = ops::cross_entropy(tape, confident, {0, 1}, {1, 1});
    CHECK(loss->data[0] == doctest::Approx(0.0).epsilon(1e-9));

    // uniform logits, |V|=4 -> ln 4
    auto uniform = Tensor::from_matrix(1, 4, {0, 0, 0, 0});
    auto l2 = ops::cross_entropy(tape, uniform, {2}, {1});
    CHECK(l2->data[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    auto bad = Tensor::from_matrix(1, 4, {0, 0, 0, 0});
    CHECK_THROWS_AS(ops::cross_entropy(tape, bad, {9}, {1}), VocabularyError);
}

TEST_CASE("cross_entropy gradient vs finite differences") {
    ParamStore store;
    std::mt19937_64 rng(5);
    auto logits = random_param(store, "logits", {3, 6}, rng);
    const std::vector<int> targets = {1, 4, 0};
    const std::vector<std::uint8_t> mask = {1, 1, 0};
    auto taped = [&](Tape& t) { return ops::cross_entropy(t, logits, targets, mask); };
    auto forward = [&] {
        Tape t;
        t.grad_enabled = false;
        return taped(t)->data[0];
    };
    CHECK(gradcheck::max_rel_error(store, forward, taped) < 1e-5);
}

TEST_CASE("backward basics and double-backward guard") {
    ParamStore store;
    auto x = Tensor::from_vector({1.0, -2.0, 3.0});
    store.add("x", x);

    Tape tape;
    auto loss = ops::sum(tape, x);
    tape.backward(loss);
    for (double g : x->grad) CHECK(g == 1.0);
    CHECK_THROWS_AS(tape.backward(loss), NumericError);

    // loss = x.x -> grad 2x
    store.zero_grads();
    Tape tape2;
    auto dot = ops::sum(tape2, ops::hadamard(tape2, x, x));
    tape2.backward(dot);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x->grad[i] == doctest::Approx(2.0 * x->data[i]));

    Tape tape3;
    auto vec = ops::scale(tape3, x, 2.0);
    CHECK_THROWS_AS(tape3.backward(vec), NumericError);  // non-scalar
}

TEST_CASE("adam hand-executed first step and no-op on zero grad") {
    ParamStore store;
    auto w = Tensor::from_vector({1.0});
    store.add("w", w);
    AdamState adam;
    adam.learning_rate = 0.1;

    // zero gradient for all steps: parameter unchanged
    for (int i = 0; i < 10; ++i) adam_step(store, adam);
    CHECK(w->data[0] == 1.0);

    // fresh state, constant gradient 1: first step is ~ -lr
    ParamStore store2;
    auto w2 = Tensor::from_vector({1.0});
    store2.add("w", w2);
    AdamState adam2;
    adam2.learning_rate = 0.1;
    w2->grad[0] = 1.0;
    adam_step(store2, adam2);
    // mhat = 1, vhat = 1 -> step = -lr / (1 + eps)
    CHECK(w2->data[0] - 1.0 == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam converges on (w-3)^2") {
    ParamStore store;
    auto w = Tensor::from_vector({0.0});
    store.add("w", w);
    AdamState adam;  // lr 5e-4 default is too slow for 2000 steps at distance 3
    adam.learning_rate = 5e-3;
    for (int step = 0; step < 2000; ++step) {
        Tape tape;
        auto diff = ops::add_scalar(tape, w, -3.0);
        auto loss = ops::sum(tape, ops::hadamard(tape, diff, diff));
        tape.backward(loss);
        adam_step(store, adam);
        if (std::abs(w->data[0] - 3.0) < 1e-2) break;
    }
    CHECK(std::abs(w->data[0] - 3.0) < 1e-2);
}

TEST_CASE("adam rejects missing grads") {
    ParamStore store;
    auto w = Tensor::from_vector({1.0});
    store.add("w", w);
    w->grad.clear();
    AdamState adam;
    CHECK_THROWS_WITH_AS(adam_step(store, adam), doctest::Contains("w"), OptimizerError);
}

TEST_CASE("training step determinism") {
    auto run = [] {
        ParamStore store;
        std::mt19937_64 rng(123);
        auto w = Tensor::zeros({4, 4});
        init_uniform(*w, 4, 4, rng);
        store.add("w", w);
        AdamState adam;
        for (int step = 0; step < 50; ++step) {
            Tape tape;
            auto x = Tensor::from_vector({1.0, 2.0, 3.0, 4.0});
            auto xc = ops::reshape(tape, x, {4, 1});
            auto y = ops::matmul(tape, w, xc);
            auto loss = ops::sum(tape, ops::hadamard(tape, y, y));
            tape.backward(loss);
            adam_step(store, adam);
        }
        return w->data;
    };
    CHECK(run() == run());
}
