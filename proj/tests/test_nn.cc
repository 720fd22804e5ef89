#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gradcheck.h"
#include "scramble/nn.h"

using namespace scramble;
using namespace scramble::nn;

namespace {

Matrix random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

void randomize(ParameterSet& ps, Rng& rng, double scale = 0.5) {
  for (auto* p : ps.all()) uniform_init(*p, scale, rng);
}

double weighted(const Matrix& out, const Matrix& w) { return (out.array() * w.array()).sum(); }

}  // namespace

TEST_CASE("gradient check: linear") {
  Rng rng(1);
  ParameterSet ps;
  Linear lin(ps, "lin", 5, 3);
  randomize(ps, rng);
  Matrix x = random_matrix(5, 4, rng);
  Matrix w = random_matrix(3, 4, rng);
  auto loss = [&] { return weighted(lin.forward(x), w); };
  Matrix dx;
  auto r = testing::check_params(ps, loss, [&] { dx = lin.backward(x, w); });
  CHECK_MESSAGE(r.worst < 1e-4, r.where);
  CHECK(testing::check_input(x, loss, dx).worst < 1e-4);
  Matrix bad = random_matrix(4, 1, rng);
  CHECK_THROWS_AS(lin.forward(bad), Error);
}

TEST_CASE("gradient check: lstm cell through time") {
  Rng rng(2);
  ParameterSet ps;
  LstmCell cell(ps, "cell", 3, 4);
  randomize(ps, rng);
  Matrix x = random_matrix(3, 5, rng);
  Matrix w = random_matrix(4, 5, rng);
  auto loss = [&] { return weighted(cell.forward(x).h, w); };
  Matrix dx;
  auto r = testing::check_params(ps, loss, [&] { dx = cell.backward(cell.forward(x), w); });
  CHECK_MESSAGE(r.worst < 1e-4, r.where);
  CHECK(testing::check_input(x, loss, dx).worst < 1e-4);
}

TEST_CASE("gradient check: bidirectional and stacked encoders") {
  Rng rng(3);
  ParameterSet ps;
  BiLstm bi(ps, "bi", 3, 2);
  randomize(ps, rng);
  Matrix x = random_matrix(3, 4, rng);
  Matrix w = random_matrix(4, 4, rng);
  auto loss = [&] { return weighted(bi.forward(x, nullptr), w); };
  Matrix dx;
  auto r = testing::check_params(ps, loss, [&] {
    BiLstmTrace t;
    bi.forward(x, &t);
    dx = bi.backward(t, w);
  });
  CHECK_MESSAGE(r.worst < 1e-4, r.where);
  CHECK(testing::check_input(x, loss, dx).worst < 1e-4);

  ParameterSet ps2;
  StackedBiLstm st(ps2, "st", 3, 3, 2);
  randomize(ps2, rng);
  Matrix w2 = random_matrix(6, 4, rng);
  auto loss2 = [&] { return weighted(st.forward(x, nullptr), w2); };
  auto r2 = testing::check_params(ps2, loss2, [&] {
    std::vector<BiLstmTrace> t;
    st.forward(x, &t);
    dx = st.backward(t, w2);
  });
  CHECK_MESSAGE(r2.worst < 1e-4, r2.where);
  CHECK(testing::check_input(x, loss2, dx).worst < 1e-4);
}

TEST_CASE("gradient check: mlp with dropout and softmax cross-entropy") {
  Rng rng(4);
  ParameterSet ps;
  Mlp mlp(ps, "mlp", 6, 8, 4);
  randomize(ps, rng);
  Matrix x = random_matrix(6, 5, rng);
  std::vector<int> gold{0, 3, 1, 2, 3};
  auto loss = [&] {
    Rng mask_rng(99);
    return softmax_cross_entropy(mlp.forward(x, nullptr, 0.3, &mask_rng), gold, nullptr);
  };
  Matrix dx;
  auto r = testing::check_params(ps, loss, [&] {
    Rng mask_rng(99);
    MlpTrace t;
    Matrix logits = mlp.forward(x, &t, 0.3, &mask_rng);
    Matrix dl;
    softmax_cross_entropy(logits, gold, &dl);
    dx = mlp.backward(t, dl);
  });
  CHECK_MESSAGE(r.worst < 1e-4, r.where);
  CHECK(testing::check_input(x, loss, dx).worst < 1e-4);
}

TEST_CASE("ten-parameter toy network") {
  // 1 -> 3 tanh -> 1: 3 + 3 + 3 + 1 parameters.
  Rng rng(5);
  ParameterSet tiny;
  Linear a(tiny, "a", 1, 3);
  Linear b(tiny, "b", 3, 1);
  CHECK(tiny.scalar_count() == 10);
  randomize(tiny, rng);
  Matrix x = random_matrix(1, 3, rng);
  Matrix w = random_matrix(1, 3, rng);
  auto loss = [&] { return weighted(b.forward(a.forward(x).array().tanh().matrix()), w); };
  auto r = testing::check_params(tiny, loss, [&] {
    Matrix h = a.forward(x).array().tanh().matrix();
    Matrix dh = b.backward(h, w);
    Matrix dpre = dh.array() * (1.0 - h.array().square());
    a.backward(x, dpre);
  });
  CHECK(r.checked == 10);
  CHECK_MESSAGE(r.worst < 1e-4, r.where);
}

TEST_CASE("forward_bilstm shapes and symmetry") {
  Rng rng(6);
  ParameterSet ps;
  StackedBiLstm enc(ps, "enc", 3, 5, 1);
  randomize(ps, rng);
  Matrix one = random_matrix(3, 1, rng);
  Matrix out = forward_bilstm(enc, one);
  CHECK(out.rows() == 10);
  CHECK(out.cols() == 1);
  Matrix wrong = random_matrix(4, 2, rng);
  CHECK_THROWS_AS(forward_bilstm(enc, wrong), Error);

  // Mirror: backward cell gets the forward cell's parameters.
  for (const char* part : {".wx", ".wh", ".b"}) {
    ps.get(std::string("enc.l0.bwd") + part).value = ps.get(std::string("enc.l0.fwd") + part).value;
  }
  Matrix x = random_matrix(3, 6, rng);
  Matrix rev = x.rowwise().reverse();
  Matrix a = forward_bilstm(enc, x);
  Matrix b = forward_bilstm(enc, rev);
  for (int t = 0; t < 6; ++t) {
    CHECK((b.block(0, t, 5, 1) - a.block(5, 5 - t, 5, 1)).norm() < 1e-12);
    CHECK((b.block(5, t, 5, 1) - a.block(0, 5 - t, 5, 1)).norm() < 1e-12);
  }

  ParameterSet zero;
  StackedBiLstm z(zero, "z", 3, 4, 2);
  CHECK(forward_bilstm(z, x).norm() == 0.0);
}

TEST_CASE("mlp_classify") {
  ParameterSet ps;
  Mlp mlp(ps, "m", 4, 6, 5);
  Vector f = Vector::Random(4);
  Vector p = mlp_classify(mlp, f);
  for (int i = 0; i < 5; ++i) CHECK(p(i) == doctest::Approx(0.2));
  Rng rng(7);
  randomize(ps, rng, 2.0);
  for (int t = 0; t < 50; ++t) {
    Vector q = mlp_classify(mlp, random_matrix(4, 1, rng, 3.0).col(0));
    CHECK(std::abs(q.sum() - 1.0) < 1e-9);
    CHECK((q.array() > 0).all());
  }
  CHECK_THROWS_AS(mlp_classify(mlp, Vector::Ones(3)), Error);
  Vector logits = random_matrix(5, 1, rng).col(0);
  Eigen::Index a, b;
  softmax(logits).maxCoeff(&a);
  Vector shifted = (logits.array() + 17.0).matrix();
  softmax(shifted).maxCoeff(&b);
  CHECK(a == b);
  CHECK((softmax(logits) - softmax(shifted)).norm() < 1e-12);
}

TEST_CASE("softmax cross-entropy gradient closed form") {
  Matrix logits(3, 1);
  logits << 0.5, -1.0, 2.0;
  Matrix d;
  double loss = softmax_cross_entropy(logits, {1}, &d);
  Vector p = softmax(Vector(logits.col(0)));
  CHECK(loss == doctest::Approx(-std::log(p(1))));
  CHECK(d(0, 0) == doctest::Approx(p(0)));
  CHECK(d(1, 0) == doctest::Approx(p(1) - 1.0));
  CHECK(d(2, 0) == doctest::Approx(p(2)));
}

TEST_CASE("dropout masks") {
  Rng rng(8);
  CHECK(dropout_mask(100, 0.0, true, rng).isOnes());
  CHECK(dropout_mask(100, 0.7, false, rng).isOnes());
  CHECK_THROWS_AS(dropout_mask(3, 1.0, true, rng), Error);
  CHECK_THROWS_AS(dropout_mask(3, -0.1, true, rng), Error);
  Vector m = dropout_mask(100000, 0.3, true, rng);
  double dropped = (m.array() == 0.0).cast<double>().mean();
  CHECK(std::abs(dropped - 0.3) < 0.01);
  CHECK(m.maxCoeff() == doctest::Approx(1.0 / 0.7));
}

TEST_CASE("momentum SGD") {
  ParameterSet ps;
  Param& p = ps.add("p", 2, 1);
  p.value << 1.0, -2.0;
  // Vanilla SGD when momentum and l2 are zero.
  MomentumSgd sgd({0.1, 0.0, 0.0, 0.0});
  p.grad << 0.5, 1.0;
  sgd.step(ps);
  CHECK(p.value(0) == doctest::Approx(0.95));
  CHECK(p.value(1) == doctest::Approx(-2.1));
  CHECK(p.grad.isZero());

  // Two momentum steps by hand: v1 = -lr (g + l2 x0); x1 = x0 + v1;
  // v2 = mu v1 - lr (g + l2 x1); x2 = x1 + v2.
  ParameterSet qs;
  Param& q = qs.add("q", 1, 1);
  q.value(0) = 1.0;
  MomentumSgd mom({0.1, 0.9, 0.01, 0.0});
  q.grad(0) = 2.0;
  mom.step(qs);
  double v1 = -0.1 * (2.0 + 0.01 * 1.0);
  double x1 = 1.0 + v1;
  CHECK(q.value(0) == doctest::Approx(x1).epsilon(1e-14));
  q.grad(0) = 2.0;
  mom.step(qs);
  double v2 = 0.9 * v1 - 0.1 * (2.0 + 0.01 * x1);
  CHECK(q.value(0) == doctest::Approx(x1 + v2).epsilon(1e-14));

  // Global norm clipping.
  ParameterSet cs;
  Param& c = cs.add("c", 2, 1);
  MomentumSgd clip({1.0, 0.0, 0.0, 1.0});
  c.grad << 3.0, 4.0;
  clip.step(cs);
  CHECK(c.value(0) == doctest::Approx(-0.6));
  CHECK(c.value(1) == doctest::Approx(-0.8));

  // Sparse parameters only move touched columns.
  ParameterSet ss;
  Param& e = ss.add("emb", 2, 3, true);
  e.value.setOnes();
  e.grad.col(1).setConstant(1.0);
  e.touch(1);
  MomentumSgd plain({0.5, 0.0, 0.1, 0.0});
  plain.step(ss);
  CHECK(e.value(0, 0) == 1.0);
  CHECK(e.value(0, 2) == 1.0);
  CHECK(e.value(0, 1) == doctest::Approx(1.0 - 0.5 * (1.0 + 0.1)));

  ParameterSet bad;
  Param& nan = bad.add("broken.w", 1, 1);
  nan.grad(0) = std::nan("");
  try {
    MomentumSgd({0.1, 0.9, 0.0, 5.0}).step(bad);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("broken.w") != std::string::npos);
  }
  CHECK_THROWS_AS(MomentumSgd({0.0, 0.9, 0.0, 5.0}), Error);
  CHECK_THROWS_AS(MomentumSgd({0.1, 1.0, 0.0, 5.0}), Error);
}

TEST_CASE("checkpoints are bit exact") {
  Rng rng(10);
  ParameterSet ps;
  Mlp mlp(ps, "m", 3, 4, 2);
  randomize(ps, rng);
  Checkpoint ck;
  ck.meta["kind"] = "test";
  ck.vocabularies["words"] = {"a", "b"};
  ck.capture(ps);
  std::string bytes = ck.serialize();
  CHECK(bytes.substr(0, 5) == "SPNN1");
  Checkpoint back = Checkpoint::deserialize(bytes);
  CHECK(back.meta == ck.meta);
  CHECK(back.vocabularies == ck.vocabularies);
  ParameterSet other;
  Mlp mlp2(other, "m", 3, 4, 2);
  back.restore(other);
  for (auto* p : ps.all()) CHECK(other.get(p->name).value == p->value);
  CHECK(back.serialize() == bytes);
  ParameterSet wrong;
  Mlp mlp3(wrong, "m", 3, 5, 2);
  CHECK_THROWS_AS(back.restore(wrong), Error);
  CHECK_THROWS_AS(Checkpoint::deserialize("SPNN0xxxx"), Error);
  CHECK_THROWS_AS(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 3)), Error);
}
