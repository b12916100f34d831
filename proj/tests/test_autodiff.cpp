#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cleannet/autodiff.hpp"

#include "oracle.hpp"

using namespace cleannet;

namespace {

/// Checks one op's gradients against the forward-only central-difference
/// oracle: loss = || op(params...) - C ||^2 with a fixed random C, which
/// makes the upstream gradient dense.
double op_fd_error(ParamStore& store, const std::function<NodeId(Graph&)>& build, double step = 1e-5) {
    Tensor probe;
    {
        Graph g;
        NodeId out = build(g);
        Rng rng(99);
        probe = oracle::random_tensor(g.value(out).shape, rng);
    }
    auto eval = [&]() {
        Graph g;
        NodeId out = build(g);
        return g.value(g.squared_distance(out, g.constant(probe))).item();
    };
    const auto numeric = oracle::numeric_gradient(store, eval, step);
    Graph g;
    NodeId out = build(g);
    g.backward(g.squared_distance(out, g.constant(probe)), store);
    return oracle::max_rel_err(oracle::flatten_grads(store), numeric);
}

}  // namespace

TEST_CASE("affine identity and direct arithmetic") {
    Graph g;
    NodeId x = g.constant(Tensor::matrix(1, 2, {1, 2}));
    NodeId w = g.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    NodeId b = g.constant(Tensor::vector({0, 0}));
    const Tensor& out = g.value(g.affine(x, w, b));
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(0, 1) == 2.0);

    NodeId x2 = g.constant(Tensor::matrix(1, 2, {1, 1}));
    NodeId w2 = g.constant(Tensor::matrix(2, 1, {2, 3}));
    NodeId b2 = g.constant(Tensor::vector({1}));
    CHECK(g.value(g.affine(x2, w2, b2)).at(0, 0) == 6.0);
}

TEST_CASE("affine rejects mismatched inner dimensions") {
    Graph g;
    NodeId x = g.constant(Tensor::matrix(1, 3, {1, 2, 3}));
    NodeId w = g.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    NodeId b = g.constant(Tensor::vector({0, 0}));
    CHECK_THROWS_AS(g.affine(x, w, b), DimensionError);
}

TEST_CASE("affine gradients match central differences on a random 3x4 * 4x2") {
    Rng rng(7);
    ParamStore store;
    store.add("x", oracle::random_tensor({3, 4}, rng));
    store.add("w", oracle::random_tensor({4, 2}, rng));
    store.add("b", oracle::random_tensor({2}, rng));
    const double err = op_fd_error(store, [&](Graph& g) {
        return g.affine(g.param(store, "x"), g.param(store, "w"), g.param(store, "b"));
    });
    CHECK(err < 1e-6);
}

TEST_CASE("tanh saturates and passes the finite-difference check") {
    Graph g;
    CHECK(g.value(g.tanh_act(g.constant(Tensor::vector({0.0})))).at(0) == 0.0);
    CHECK(g.value(g.tanh_act(g.constant(Tensor::vector({1e9})))).at(0) == Catch::Approx(1.0).margin(1e-12));

    Rng rng(8);
    ParamStore store;
    store.add("x", oracle::random_tensor({6}, rng));
    const double err = op_fd_error(store, [&](Graph& g2) { return g2.tanh_act(g2.param(store, "x")); });
    CHECK(err < 1e-6);
}

TEST_CASE("softmax analytic cases") {
    Graph g;
    const Tensor& u = g.value(g.softmax(g.constant(Tensor::vector({0, 0, 0}))));
    for (std::size_t i = 0; i < 3; ++i) CHECK(u.at(i) == Catch::Approx(1.0 / 3).margin(1e-15));

    const Tensor& v = g.value(g.softmax(g.constant(Tensor::vector({std::log(2.0), 0.0}))));
    CHECK(v.at(0) == Catch::Approx(2.0 / 3).margin(1e-15));
    CHECK(v.at(1) == Catch::Approx(1.0 / 3).margin(1e-15));

    // max subtraction keeps huge logits finite
    const Tensor& w = g.value(g.softmax(g.constant(Tensor::vector({1000.0, 0.0}))));
    CHECK(w.at(0) == 1.0);
    CHECK(w.at(1) == 0.0);
}

TEST_CASE("softmax output is a probability simplex point for random inputs") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        Graph g;
        const std::size_t n = 1 + rng.below(8);
        const Tensor& p = g.value(g.softmax(g.constant(oracle::random_tensor({n}, rng, -50.0, 50.0))));
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(p.at(i) >= 0.0);
            sum += p.at(i);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("softmax gradients match central differences") {
    Rng rng(14);
    ParamStore store;
    store.add("x", oracle::random_tensor({5}, rng));
    const double err = op_fd_error(store, [&](Graph& g) { return g.softmax(g.param(store, "x")); });
    CHECK(err < 1e-6);
}

TEST_CASE("cosine node values and errors") {
    Graph g;
    CHECK(g.value(g.cosine(g.constant(Tensor::vector({3, 4})), g.constant(Tensor::vector({3, 4})))).item() == 1.0);
    CHECK(g.value(g.cosine(g.constant(Tensor::vector({1, 0})), g.constant(Tensor::vector({0, 1})))).item() == 0.0);
    CHECK(g.value(g.cosine(g.constant(Tensor::vector({1, 1})), g.constant(Tensor::vector({-1, -1})))).item() ==
          -1.0);
    CHECK_THROWS_AS(g.cosine(g.constant(Tensor::vector({0, 0})), g.constant(Tensor::vector({1, 0}))), NumericError);
}

TEST_CASE("cosine gradients match central differences away from singular points") {
    Rng rng(15);
    for (int trial = 0; trial < 5; ++trial) {
        ParamStore store;
        store.add("a", oracle::random_tensor({6}, rng, 0.2, 1.0));
        store.add("b", oracle::random_tensor({6}, rng, 0.2, 1.0));
        const double err =
            op_fd_error(store, [&](Graph& g) { return g.cosine(g.param(store, "a"), g.param(store, "b")); });
        CHECK(err < 1e-6);
    }
}

TEST_CASE("squared distance values and gradients") {
    Graph g;
    CHECK(g.value(g.squared_distance(g.constant(Tensor::vector({1, 2})), g.constant(Tensor::vector({1, 2}))))
              .item() == 0.0);
    CHECK(g.value(g.squared_distance(g.constant(Tensor::vector({1, 2})), g.constant(Tensor::vector({0, 0}))))
              .item() == 5.0);
    CHECK_THROWS_AS(
        g.squared_distance(g.constant(Tensor::vector({1, 2})), g.constant(Tensor::vector({1, 2, 3}))),
        DimensionError);

    Rng rng(16);
    ParamStore store;
    store.add("a", oracle::random_tensor({7}, rng));
    store.add("b", oracle::random_tensor({7}, rng));
    const double err = op_fd_error(
        store, [&](Graph& g2) { return g2.squared_distance(g2.param(store, "a"), g2.param(store, "b")); });
    CHECK(err < 1e-6);
}

TEST_CASE("matvec and tmatvec gradients match central differences") {
    Rng rng(17);
    ParamStore store;
    store.add("a", oracle::random_tensor({4, 3}, rng));
    store.add("x", oracle::random_tensor({3}, rng));
    store.add("y", oracle::random_tensor({4}, rng));
    const double e1 = op_fd_error(store, [&](Graph& g) {
        return g.add(g.matvec(g.param(store, "a"), g.param(store, "x")), g.param(store, "y"));
    });
    CHECK(e1 < 1e-6);
    const double e2 = op_fd_error(store, [&](Graph& g) {
        return g.add(g.tmatvec(g.param(store, "a"), g.param(store, "y")), g.param(store, "x"));
    });
    CHECK(e2 < 1e-6);
}

TEST_CASE("hinge, scale, shift, add_n compose and differentiate") {
    Rng rng(18);
    ParamStore store;
    store.add("x", Tensor::vector({0.7}));
    auto build = [&](Graph& g) {
        NodeId x = g.reshape(g.param(store, "x"), {});
        return g.add_n({g.scale(g.hinge(x, 0.1), 2.0), g.shift(g.scale(x, -1.0), 1.0)});
    };
    Graph g;
    CHECK(g.value(build(g)).item() == Catch::Approx(2.0 * 0.6 + 0.3).margin(1e-15));
    const double err = op_fd_error(store, build);
    CHECK(err < 1e-6);

    // below the threshold the hinge contributes nothing
    store.get("x").value.at(0) = -0.5;
    Graph g2;
    CHECK(g2.value(build(g2)).item() == Catch::Approx(1.5).margin(1e-15));
}

TEST_CASE("nll_softmax gradient equals probabilities minus one-hot") {
    Rng rng(19);
    ParamStore store;
    store.add("z", oracle::random_tensor({5}, rng, -2.0, 2.0));
    Graph g;
    NodeId z = g.param(store, "z");
    NodeId loss = g.nll_softmax(z, 2);
    g.backward(loss, store);
    const Tensor probs = g.value(g.softmax(z));
    for (std::size_t i = 0; i < 5; ++i) {
        const double expected = probs.at(i) - (i == 2 ? 1.0 : 0.0);
        CHECK(store.get("z").grad.at(i) == Catch::Approx(expected).margin(1e-12));
    }
    const double err = op_fd_error(store, [&](Graph& g2) { return g2.nll_softmax(g2.param(store, "z"), 2); });
    CHECK(err < 1e-6);
}

TEST_CASE("backward: constant loss yields zero gradients everywhere") {
    Rng rng(20);
    ParamStore store;
    store.add("w", oracle::random_tensor({3, 3}, rng));
    Graph g;
    g.param(store, "w");  // registered but unreached
    NodeId loss = g.constant(Tensor::scalar(42.0));
    g.backward(loss, store);
    for (double v : store.get("w").grad.data) CHECK(v == 0.0);
}

TEST_CASE("backward: loss = 0.5 * ||W||^2 gives grad(W) = W") {
    Rng rng(21);
    ParamStore store;
    store.add("w", oracle::random_tensor({2, 4}, rng));
    Graph g;
    NodeId w = g.param(store, "w");
    NodeId loss = g.scale(g.squared_distance(w, g.constant(Tensor::zeros({2, 4}))), 0.5);
    g.backward(loss, store);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(store.get("w").grad.at(i) == Catch::Approx(store.get("w").value.at(i)).margin(1e-14));
}

TEST_CASE("backward rejects non-scalar losses") {
    ParamStore store;
    Graph g;
    NodeId v = g.constant(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(g.backward(v, store), ContractError);
}

TEST_CASE("backward of a sum of losses equals the sum of individual backwards") {
    Rng rng(22);
    ParamStore store;
    store.add("a", oracle::random_tensor({4}, rng));
    store.add("b", oracle::random_tensor({4}, rng));
    auto loss1 = [&](Graph& g) {
        return g.squared_distance(g.param(store, "a"), g.constant(Tensor::zeros({4})));
    };
    auto loss2 = [&](Graph& g) { return g.cosine(g.param(store, "a"), g.param(store, "b")); };

    Graph g1;
    g1.backward(loss1(g1), store);
    const auto grads1 = oracle::flatten_grads(store);
    Graph g2;
    g2.backward(loss2(g2), store);
    const auto grads2 = oracle::flatten_grads(store);
    Graph g3;
    g3.backward(g3.add(loss1(g3), loss2(g3)), store);
    const auto grads_sum = oracle::flatten_grads(store);

    for (std::size_t i = 0; i < grads_sum.size(); ++i)
        CHECK(std::abs(grads_sum[i] - (grads1[i] + grads2[i])) <= 1e-10);
}

TEST_CASE("ops reject non-finite values") {
    Graph g;
    CHECK_THROWS_AS(g.constant(Tensor::vector({std::numeric_limits<double>::quiet_NaN()})), NumericError);
    CHECK_THROWS_AS(g.constant(Tensor::vector({std::numeric_limits<double>::infinity()})), NumericError);
}

TEST_CASE("grad_check on a simple quadratic is tight") {
    ParamStore store;
    store.add("theta", Tensor::vector({3.0}));
    auto f = [&](bool with_grad) {
        Graph g;
        NodeId t = g.param(store, "theta");
        NodeId loss = g.squared_distance(t, g.constant(Tensor::vector({0.0})));
        if (with_grad) g.backward(loss, store);
        return g.value(loss).item();
    };
    const auto res = grad_check(store, f, 1e-5);
    CHECK(res.max_rel_err < 1e-9);
    CHECK_THROWS_AS(grad_check(store, f, 0.0), ValidationError);
}

TEST_CASE("sgd_step basics") {
    ParamStore store;
    store.add("t", Tensor::vector({1.0}));

    SECTION("zero gradient with zero velocity leaves parameters unchanged") {
        sgd_step(store, 0.1, 0.9);
        CHECK(store.get("t").value.at(0) == 1.0);
    }

    SECTION("plain step without momentum") {
        store.get("t").grad.at(0) = 1.0;
        sgd_step(store, 0.1, 0.0);
        CHECK(store.get("t").value.at(0) == Catch::Approx(0.9).margin(1e-15));
    }

    SECTION("momentum accumulates velocity across steps") {
        store.get("t").grad.at(0) = 1.0;
        sgd_step(store, 0.1, 0.5);  // v = 1.0,  t = 1 - 0.1
        store.get("t").grad.at(0) = 1.0;
        sgd_step(store, 0.1, 0.5);  // v = 1.5,  t = 0.9 - 0.15
        CHECK(store.get("t").value.at(0) == Catch::Approx(0.75).margin(1e-15));
    }

    SECTION("validation") {
        CHECK_THROWS_AS(sgd_step(store, 0.0, 0.5), ValidationError);
        CHECK_THROWS_AS(sgd_step(store, 0.1, 1.0), ValidationError);
        store.get("t").grad.at(0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(sgd_step(store, 0.1, 0.0), TrainingError);
    }
}

TEST_CASE("sgd descends a quadratic bowl monotonically after the first step") {
    ParamStore store;
    store.add("t", Tensor::vector({5.0, -3.0}));
    auto loss_value = [&]() {
        Graph g;
        NodeId t = g.param(store, "t");
        return g.value(g.squared_distance(t, g.constant(Tensor::vector({0.0, 0.0})))).item();
    };
    double prev = loss_value();
    for (int step = 0; step < 100; ++step) {
        Graph g;
        NodeId t = g.param(store, "t");
        NodeId loss = g.squared_distance(t, g.constant(Tensor::vector({0.0, 0.0})));
        g.backward(loss, store);
        sgd_step(store, 0.05, 0.0);
        const double now = loss_value();
        if (step > 0) CHECK(now < prev);
        prev = now;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("parameter registry enforces unique names and keeps insertion order") {
    ParamStore store;
    store.add("a", Tensor::scalar(1.0));
    store.add("b", Tensor::scalar(2.0));
    CHECK_THROWS_AS(store.add("a", Tensor::scalar(3.0)), ContractError);
    CHECK_THROWS_AS(store.get("missing"), LookupError);
    CHECK(store[0].name == "a");
    CHECK(store[1].name == "b");
    CHECK(store.coordinate_count() == 2);
}
