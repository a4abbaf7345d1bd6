#include <cmath>
#include <vector>

#include "cqg/param_store.hpp"
#include "cqg/tensor.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cqg;

TEST_CASE("backward: d(sum x^2) = 2x") {
  Tape tape;
  Tensor x = tape.leaf(Tensor({2}, {1, 2}));
  Tensor loss = reduce_sum(hadamard(x, x));
  tape.backward(loss);
  Tensor g = tape.grad(x);
  CHECK(g.at(0) == 2.0);
  CHECK(g.at(1) == 4.0);
}

TEST_CASE("backward rejects non-scalar losses") {
  Tape tape;
  Tensor x = tape.leaf(Tensor({2}, {1, 2}));
  CHECK_THROWS_AS(tape.backward(x), ShapeError);
}

TEST_CASE("parameters off the loss path get zero gradients") {
  ParameterStore store(5);
  store.create("used", {2}, Init::xavier());
  store.create("unused", {3}, Init::xavier());
  Tape tape;
  Tensor u = store.use(tape, "used");
  Tensor loss = reduce_sum(sigmoid(u));
  tape.backward(loss);
  GradientMap grads = collect_param_grads(tape, store);
  const auto* gu = grads.find("unused");
  REQUIRE(gu != nullptr);
  for (double v : *gu) CHECK(v == 0.0);
  const auto* gd = grads.find("used");
  for (double v : *gd) CHECK(v != 0.0);
}

TEST_CASE("a loss with no parameters leaves every parameter at zero grad") {
  ParameterStore store(6);
  store.create("p", {2, 2}, Init::xavier());
  Tape tape;
  Tensor loss = sigmoid(tape.leaf(Tensor::scalar(0.0)));
  tape.backward(loss);
  GradientMap grads = collect_param_grads(tape, store);
  for (double v : *grads.find("p")) CHECK(v == 0.0);
}

TEST_CASE("reusing a parameter on one tape accumulates into one slot") {
  ParameterStore store(9);
  store.create("w", {2}, Init::xavier());
  Tape tape;
  Tensor a = store.use(tape, "w");
  Tensor b = store.use(tape, "w");
  CHECK(a.node() == b.node());
  Tensor loss = reduce_sum(add(a, b));
  tape.backward(loss);
  GradientMap grads = collect_param_grads(tape, store);
  for (double v : *grads.find("w")) CHECK(v == 2.0);
}

TEST_CASE("check_gradients on a quadratic is near machine precision") {
  ParameterStore store(17);
  store.create("theta", {4}, Init::xavier());
  auto loss = [&](Tape& t) {
    Tensor x = store.use(t, "theta");
    return reduce_sum(hadamard(x, x));
  };
  CHECK(check_gradients(store, loss) <= 1e-9);
}

TEST_CASE("check_gradients through a tanh chain of depth 5") {
  ParameterStore store(23);
  store.create("w", {3, 3}, Init::xavier());
  store.create("x", {3}, Init::xavier());
  store.create("b", {3}, Init::zeros());
  auto loss = [&](Tape& t) {
    Tensor w = store.use(t, "w");
    Tensor b = store.use(t, "b");
    Tensor h = store.use(t, "x");
    for (int i = 0; i < 5; ++i) h = tanh(affine(w, h, b));
    return reduce_sum(h);
  };
  CHECK(check_gradients(store, loss) <= 1e-7);
}

TEST_CASE("check_gradients with an empty store returns zero") {
  ParameterStore store(1);
  auto loss = [&](Tape& t) { return reduce_sum(t.leaf(Tensor({2}, {1, 2}))); };
  CHECK(check_gradients(store, loss) == 0.0);
}

TEST_CASE("every primitive kind passes 100 random gradient checks at 1e-6") {
  testutil::Rng rng(2024);

  auto run = [&](auto&& build) {
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      ParameterStore store(rng.next_u64());
      auto loss_fn = build(store, rng);
      worst = std::max(worst, check_gradients(store, loss_fn));
    }
    return worst;
  };

  SUBCASE("matmul") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t m = 1 + r.below(3), k = 1 + r.below(3), n = 1 + r.below(3);
      s.create("a", {m, k}, Init::xavier());
      s.create("b", {k, n}, Init::xavier());
      return std::function<Tensor(Tape&)>([&s](Tape& t) {
        return reduce_sum(matmul(s.use(t, "a"), s.use(t, "b")));
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("affine") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t m = 1 + r.below(4), n = 1 + r.below(4);
      s.create("w", {m, n}, Init::xavier());
      s.create("x", {n}, Init::xavier());
      s.create("b", {m}, Init::xavier());
      return std::function<Tensor(Tape&)>([&s](Tape& t) {
        return reduce_sum(tanh(affine(s.use(t, "w"), s.use(t, "x"), s.use(t, "b"))));
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("concat + add + hadamard") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t n = 1 + r.below(4);
      s.create("a", {n}, Init::xavier());
      s.create("b", {n}, Init::xavier());
      s.create("s", {1}, Init::xavier());
      return std::function<Tensor(Tape&)>([&s](Tape& t) {
        Tensor a = s.use(t, "a"), b = s.use(t, "b"), sc = s.use(t, "s");
        Tensor joined = concat({hadamard(a, b), add(a, sc), hadamard(sc, b)});
        return reduce_sum(joined);
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("tanh and sigmoid") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t n = 1 + r.below(5);
      s.create("x", {n}, Init::xavier());
      return std::function<Tensor(Tape&)>([&s](Tape& t) {
        Tensor x = s.use(t, "x");
        return reduce_sum(hadamard(tanh(x), sigmoid(x)));
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("embedding_lookup") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t rows = 2 + r.below(3), cols = 1 + r.below(3);
      s.create("table", {rows, cols}, Init::xavier());
      const std::size_t row = r.below(rows);
      return std::function<Tensor(Tape&)>([&s, row](Tape& t) {
        return reduce_sum(tanh(embedding_lookup(s.use(t, "table"), row)));
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("neg_log_pick through a softmax") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t n = 2 + r.below(4);
      s.create("logits", {n}, Init::xavier());
      const std::size_t idx = r.below(n);
      return std::function<Tensor(Tape&)>([&s, idx, n](Tape& t) {
        Tensor p = masked_softmax(s.use(t, "logits"), std::vector<bool>(n, true));
        return neg_log_pick(p, idx);
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("masked_softmax with partial masks") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t n = 2 + r.below(4);
      s.create("logits", {n}, Init::xavier());
      std::vector<bool> mask(n, false);
      for (std::size_t i = 0; i < n; ++i) mask[i] = r.unit() < 0.6;
      mask[r.below(n)] = true;
      return std::function<Tensor(Tape&)>([&s, mask, n](Tape& t) {
        Tensor p = masked_softmax(s.use(t, "logits"), mask);
        Tensor weights = Tensor({n}, std::vector<double>(n, 0.5));
        return reduce_sum(hadamard(p, weights));
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("reduce_sum and reshape") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t n = 1 + r.below(3);
      s.create("x", {2 * n}, Init::xavier());
      return std::function<Tensor(Tape&)>([&s, n](Tape& t) {
        Tensor m = reshape(s.use(t, "x"), {2, n});
        return reduce_sum(matmul(m, Tensor::full({n, 1}, 0.7)));
      });
    });
    CHECK(w <= 1e-6);
  }
  SUBCASE("emin composite") {
    double w = run([](ParameterStore& s, testutil::Rng& r) {
      const std::size_t n = 1 + r.below(4);
      s.create("a", {n}, Init::xavier());
      s.create("b", {n}, Init::xavier());
      return std::function<Tensor(Tape&)>([&s](Tape& t) {
        return reduce_sum(emin(s.use(t, "a"), s.use(t, "b")));
      });
    });
    CHECK(w <= 1e-6);
  }
}

TEST_CASE("same seed and creation order give bit-identical parameters") {
  auto build = []() {
    ParameterStore s(42);
    s.create("w", {4, 3}, Init::xavier());
    s.create("b", {4}, Init::zeros());
    s.create("e", {5, 2}, Init::xavier());
    return s;
  };
  ParameterStore a = build();
  ParameterStore b = build();
  for (const std::string& name : a.names()) {
    const auto& va = a.get(name).data();
    const auto& vb = b.get(name).data();
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) CHECK(va[i] == vb[i]);
  }
  // Bias initialized to zero; weights within the xavier bound.
  for (double v : a.get("b").data()) CHECK(v == 0.0);
  const double bound = std::sqrt(6.0 / (4 + 3));
  for (double v : a.get("w").data()) CHECK(std::abs(v) <= bound);
}

TEST_CASE("parameter names are unique and shapes immutable") {
  ParameterStore s(1);
  s.create("w", {2}, Init::xavier());
  CHECK_THROWS_AS(s.create("w", {3}, Init::xavier()), ConfigError);
  CHECK_THROWS_AS(s.set_values("w", {1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(s.get("nope"), ConfigError);
}

TEST_CASE("adam: zero gradients from a fresh state leave parameters unchanged") {
  ParameterStore s(3);
  s.create("w", {3}, Init::xavier());
  const std::vector<double> before = s.get("w").data();
  GradientMap grads;
  grads.add("w", {0, 0, 0});
  adam_step(s, grads, 1e-4);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(s.get("w").at(i) == before[i]);
}

TEST_CASE("adam: first step with unit gradient moves by ~lr") {
  // Hand evaluation: m=0.1, v=1e-3, mhat=1, vhat=1, delta = lr/(1+eps).
  ParameterStore s(3);
  s.create("w", {1}, Init::zeros());
  GradientMap grads;
  grads.add("w", {1.0});
  adam_step(s, grads, 1e-4);
  CHECK(s.get("w").value() == doctest::Approx(-1e-4).epsilon(1e-6));
  CHECK(s.adam("w").step == 1);
}

TEST_CASE("adam trajectories are deterministic") {
  auto run = []() {
    ParameterStore s(77);
    s.create("w", {4}, Init::xavier());
    testutil::Rng rng(5);
    for (int i = 0; i < 20; ++i) {
      GradientMap g;
      std::vector<double> gv(4);
      for (double& v : gv) v = rng.uniform(-1, 1);
      g.add("w", gv);
      adam_step(s, g, 1e-3);
    }
    return s.get("w").data();
  };
  auto a = run();
  auto b = run();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
