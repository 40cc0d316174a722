#include <cmath>
#include <vector>

#include <doctest.h>

#include "danet/rng.hpp"
#include "danet/tape.hpp"
#include "oracle.hpp"

using namespace danet;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, RngStream& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.symmetric(2.0);
  return t;
}

oracle::Mat to_mat(const Tensor& t) {
  oracle::Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  }
  return m;
}

}  // namespace

TEST_CASE("matmul hand-checked 1x2 * 2x1") {
  Tape tape;
  ValueId a = tape.leaf(Tensor(1, 2, {1, 2}));
  ValueId b = tape.leaf(Tensor(2, 1, {3, 4}));
  ValueId c = tape.matmul(a, b);
  CHECK(tape.scalar(c) == doctest::Approx(11.0).epsilon(0));
}

TEST_CASE("matmul by identity is the identity map") {
  RngStream rng(7);
  Tensor a = random_tensor(3, 4, rng);
  Tensor eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
  Tape tape;
  ValueId c = tape.matmul(tape.leaf(a), tape.leaf(eye));
  auto got = tape.value(c);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(got[i] == a[i]);
}

TEST_CASE("matmul matches the triple-loop oracle") {
  RngStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a = random_tensor(3, 4, rng);
    Tensor b = random_tensor(4, 2, rng);
    Tape tape;
    ValueId c = tape.matmul(tape.leaf(a), tape.leaf(b));
    const oracle::Mat expect = oracle::triple_loop_matmul(to_mat(a), to_mat(b));
    auto got = tape.value(c);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::fabs(got[i * 2 + j] - expect[i][j]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("matmul rejects mismatched inner dimensions naming both shapes") {
  Tape tape;
  ValueId a = tape.leaf(Tensor(3, 4));
  ValueId b = tape.leaf(Tensor(5, 2));
  CHECK_THROWS_WITH_AS(tape.matmul(a, b),
                       "matmul: inner dimensions disagree: [3x4] · [5x2]",
                       ShapeError);
}

TEST_CASE("tanh fixes zero and is odd") {
  Tape tape;
  ValueId z = tape.tanh(tape.leaf(Tensor(1, 1, {0.0})));
  CHECK(tape.scalar(z) == 0.0);

  RngStream rng(3);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.symmetric(4.0);
    Tape t2;
    const double pos = t2.scalar(t2.tanh(t2.leaf(Tensor(1, 1, {x}))));
    const double neg = t2.scalar(t2.tanh(t2.leaf(Tensor(1, 1, {-x}))));
    CHECK(pos == -neg);
  }
}

TEST_CASE("tanh(1) matches the reference value") {
  Tape tape;
  ValueId y = tape.tanh(tape.leaf(Tensor(1, 1, {1.0})));
  CHECK(std::fabs(tape.scalar(y) - 0.7615941559557649) <= 1e-12);
}

TEST_CASE("slice returns contiguous sub-vectors") {
  Tape tape;
  ValueId v = tape.leaf(Tensor(1, 4, {1, 2, 3, 4}));
  auto full = tape.value(tape.slice_cols(v, 0, 4));
  CHECK(std::vector<double>(full.begin(), full.end()) ==
        std::vector<double>{1, 2, 3, 4});
  auto tail = tape.value(tape.slice_cols(v, 2, 2));
  CHECK(std::vector<double>(tail.begin(), tail.end()) ==
        std::vector<double>{3, 4});
}

TEST_CASE("slice gradient scatters back into the parent") {
  Tape tape;
  ValueId v = tape.leaf(Tensor(1, 4, {1, 2, 3, 4}));
  ValueId loss = tape.sum(tape.slice_cols(v, 2, 2));
  tape.backward(loss);
  auto g = tape.grad(v);
  CHECK(std::vector<double>(g.begin(), g.end()) ==
        std::vector<double>{0, 0, 1, 1});
}

TEST_CASE("slice out of range throws") {
  Tape tape;
  ValueId v = tape.leaf(Tensor(1, 4, {1, 2, 3, 4}));
  CHECK_THROWS_AS(tape.slice_cols(v, 3, 2), BoundsError);
}

TEST_CASE("concat joins vectors in order") {
  Tape tape;
  const ValueId parts[] = {tape.leaf(Tensor(1, 1, {1})),
                           tape.leaf(Tensor(1, 1, {2})),
                           tape.leaf(Tensor(1, 1, {3}))};
  auto got = tape.value(tape.concat_cols(parts));
  CHECK(std::vector<double>(got.begin(), got.end()) ==
        std::vector<double>{1, 2, 3});
}

TEST_CASE("concat of a single part is the identity") {
  Tape tape;
  ValueId v = tape.leaf(Tensor(1, 3, {5, 6, 7}));
  const ValueId parts[] = {v};
  auto got = tape.value(tape.concat_cols(parts));
  auto orig = tape.value(v);
  CHECK(std::vector<double>(got.begin(), got.end()) ==
        std::vector<double>(orig.begin(), orig.end()));
}

TEST_CASE("concat length is additive and empty lists are rejected") {
  RngStream rng(5);
  Tape tape;
  std::vector<ValueId> parts;
  std::size_t total = 0;
  for (int i = 0; i < 6; ++i) {
    const std::size_t len = 1 + (rng.next_u64() % 5);
    parts.push_back(tape.leaf(random_tensor(1, len, rng)));
    total += len;
  }
  CHECK(tape.cols(tape.concat_cols(parts)) == total);
  CHECK_THROWS_AS(tape.concat_cols({}), ArgumentError);
}

TEST_CASE("concat of all slices round-trips the vector exactly") {
  RngStream rng(13);
  Tensor v = random_tensor(1, 12, rng);
  Tape tape;
  ValueId leaf = tape.leaf(v);
  std::vector<ValueId> slices;
  for (std::size_t start = 0; start < 12; start += 3) {
    slices.push_back(tape.slice_cols(leaf, start, 3));
  }
  auto got = tape.value(tape.concat_cols(slices));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(got[i] == v[i]);
}

TEST_CASE("mse examples") {
  Tape tape;
  ValueId a = tape.leaf(Tensor(1, 2, {1, 2}));
  CHECK(tape.scalar(tape.mse(a, a)) == 0.0);

  ValueId p = tape.leaf(Tensor(1, 1, {0.0}));
  ValueId t = tape.leaf(Tensor(1, 1, {2.0}));
  CHECK(tape.scalar(tape.mse(p, t)) == 4.0);

  ValueId p2 = tape.leaf(Tensor(1, 2, {1, 2}));
  ValueId t2 = tape.leaf(Tensor(1, 2, {0, 0}));
  CHECK(tape.scalar(tape.mse(p2, t2)) == 2.5);

  ValueId t3 = tape.leaf(Tensor(1, 3, {0, 0, 0}));
  CHECK_THROWS_AS(tape.mse(p2, t3), ShapeError);
}

TEST_CASE("backward of a plain sum yields all ones") {
  RngStream rng(17);
  Tape tape;
  ValueId p = tape.leaf(random_tensor(1, 9, rng));
  tape.backward(tape.sum(p));
  for (double g : tape.grad(p)) CHECK(g == 1.0);
}

TEST_CASE("parameters the loss does not depend on get zero gradient") {
  Tape tape;
  ValueId used = tape.leaf(Tensor(1, 2, {1, 2}));
  ValueId unused = tape.leaf(Tensor(1, 2, {3, 4}));
  const ValueId wrt[] = {used, unused};
  auto grads = tape.gradients(tape.sum(used), wrt);
  CHECK(grads[0].values()[0] == 1.0);
  CHECK(grads[1].values()[0] == 0.0);
  CHECK(grads[1].values()[1] == 0.0);
}

TEST_CASE("backward requires a scalar loss") {
  Tape tape;
  ValueId v = tape.leaf(Tensor(1, 3, {1, 2, 3}));
  CHECK_THROWS_AS(tape.backward(v), ContractError);
}

TEST_CASE("backward is linear in the loss") {
  RngStream rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = rng.symmetric(3.0), b = rng.symmetric(3.0);
    Tensor w = random_tensor(2, 3, rng);
    Tensor x = random_tensor(1, 2, rng);
    Tensor y1 = random_tensor(1, 3, rng);
    Tensor y2 = random_tensor(1, 3, rng);

    const auto grad_of = [&](bool first, bool combined) {
      Tape tape;
      ValueId wl = tape.leaf(w);
      ValueId pred = tape.tanh(tape.matmul(tape.leaf(x), wl));
      ValueId l1 = tape.mse(pred, tape.leaf(y1));
      ValueId l2 = tape.mse(pred, tape.leaf(y2));
      ValueId loss = combined ? tape.add(tape.scale(l1, a), tape.scale(l2, b))
                              : (first ? l1 : l2);
      tape.backward(loss);
      auto g = tape.grad(wl);
      return std::vector<double>(g.begin(), g.end());
    };

    const auto g1 = grad_of(true, false);
    const auto g2 = grad_of(false, false);
    const auto gc = grad_of(false, true);
    for (std::size_t i = 0; i < gc.size(); ++i) {
      CHECK(std::fabs(gc[i] - (a * g1[i] + b * g2[i])) <= 1e-12);
    }
  }
}

TEST_CASE("identical seeds give bit-identical outputs and gradients") {
  const auto run = [](std::uint64_t seed) {
    RngStream rng(seed);
    Tape tape;
    ValueId w = tape.leaf(random_tensor(3, 4, rng));
    ValueId x = tape.leaf(random_tensor(2, 3, rng));
    ValueId y = tape.leaf(random_tensor(2, 4, rng));
    ValueId loss = tape.mse(tape.tanh(tape.matmul(x, w)), y);
    tape.backward(loss);
    auto g = tape.grad(w);
    std::vector<double> out{tape.scalar(loss)};
    out.insert(out.end(), g.begin(), g.end());
    return out;
  };
  CHECK(run(99) == run(99));
}

TEST_CASE("replaying the tape reproduces recorded values bit-for-bit") {
  RngStream rng(31);
  Tape tape;
  ValueId w = tape.leaf(random_tensor(4, 5, rng));
  ValueId x = tape.leaf(random_tensor(1, 4, rng));
  ValueId h = tape.tanh(tape.matmul(x, w));
  ValueId s = tape.slice_cols(h, 1, 3);
  const ValueId parts[] = {s, h};
  ValueId cat = tape.concat_cols(parts);
  ValueId loss = tape.sum(cat);

  std::vector<double> before;
  for (ValueId v : {h, s, cat, loss}) {
    auto vals = tape.value(v);
    before.insert(before.end(), vals.begin(), vals.end());
  }
  tape.replay_forward();
  std::vector<double> after;
  for (ValueId v : {h, s, cat, loss}) {
    auto vals = tape.value(v);
    after.insert(after.end(), vals.begin(), vals.end());
  }
  CHECK(before == after);
}

TEST_CASE("row-broadcast add matches explicit expansion") {
  RngStream rng(37);
  Tensor m = random_tensor(3, 4, rng);
  Tensor row = random_tensor(1, 4, rng);
  Tape tape;
  ValueId sum = tape.add(tape.leaf(m), tape.leaf(row));
  auto got = tape.value(sum);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(got[i * 4 + j] == m(i, j) + row(0, j));
    }
  }

  // Gradient of the broadcast operand accumulates over rows.
  Tape t2;
  ValueId rl = t2.leaf(row);
  ValueId s2 = t2.add(t2.leaf(m), rl);
  t2.backward(t2.sum(s2));
  for (double g : t2.grad(rl)) CHECK(g == 3.0);
}
