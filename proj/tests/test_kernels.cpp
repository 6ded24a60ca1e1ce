#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mvgp/kernels.hpp"
#include "mvgp/rng.hpp"

#include <cmath>

using namespace mvgp;

namespace {

Vector pt(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

InputList grid(std::initializer_list<double> ts) {
  InputList g;
  for (double t : ts) g.push_back(pt(t));
  return g;
}

}  // namespace

TEST_CASE("eval: frozen values per family") {
  KernelSpec se = KernelSpec::squared_exponential(2.0, Vector::Ones(1));
  CHECK(se.eval(pt(0.3), pt(0.3)) == doctest::Approx(2.0).epsilon(1e-15));

  KernelSpec mn = KernelSpec::min_kernel();
  CHECK(mn.eval(pt(1.0), pt(2.0)) == 1.0);
  CHECK(mn.eval(pt(2.0), pt(1.0)) == 1.0);

  // invert exp(-x^2/2) = 1/2 by hand: x = sqrt(2 ln 2)
  KernelSpec unit = KernelSpec::squared_exponential(1.0, Vector::Ones(1));
  CHECK(unit.eval(pt(0.0), pt(std::sqrt(2.0 * std::log(2.0)))) ==
        doctest::Approx(0.5).epsilon(1e-12));

  KernelSpec lin = KernelSpec::linear(0.5, 2.0);
  CHECK(lin.eval(pt(3.0), pt(4.0)) == doctest::Approx(0.5 + 2.0 * 12.0));
}

TEST_CASE("eval: input validation") {
  KernelSpec mn = KernelSpec::min_kernel();
  CHECK_THROWS_AS(mn.eval(pt(-1.0), pt(2.0)), ValidationError);
  Vector two(2);
  two << 1.0, 2.0;
  CHECK_THROWS_AS(mn.eval(two, two), ValidationError);

  KernelSpec se = KernelSpec::squared_exponential(1.0, Vector::Ones(2));
  CHECK_THROWS_AS(se.eval(pt(0.0), pt(1.0)), ValidationError);
  CHECK_THROWS_AS(KernelSpec::squared_exponential(-1.0, Vector::Ones(1)),
                  ValidationError);
  CHECK_THROWS_AS(KernelSpec::linear(-0.1, 1.0), ValidationError);
}

TEST_CASE("gram: Min kernel reproduces the C-matrix structure") {
  GramMatrix g = gram(KernelSpec::min_kernel(), grid({1.0, 2.0, 3.0}));
  Matrix expected(3, 3);
  expected << 1, 1, 1, 1, 2, 2, 1, 2, 3;
  CHECK((g.entries - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.square);
}

TEST_CASE("gram: single point and brute-force recomputation") {
  KernelSpec se = KernelSpec::squared_exponential(1.3, Vector::Constant(1, 0.7));
  GramMatrix one = gram(se, grid({0.4}));
  CHECK(one.entries.rows() == 1);
  CHECK(one.entries(0, 0) == se.eval(pt(0.4), pt(0.4)));

  rng::NormalStream stream(77);
  InputList pts;
  for (int i = 0; i < 5; ++i) pts.push_back(pt(stream.next()));
  GramMatrix g = gram(se, pts);
  // exact symmetry and exact match with a double loop
  CHECK((g.entries - g.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (Index i = 0; i < 5; ++i) {
    for (Index j = 0; j < 5; ++j) {
      Index a = std::min(i, j), b = std::max(i, j);
      CHECK(g.entries(i, j) == se.eval(pts[static_cast<std::size_t>(a)],
                                       pts[static_cast<std::size_t>(b)]));
    }
  }
  CHECK_NOTHROW(SpdMatrix{g.entries});
}

TEST_CASE("noisy_gram: index-based delta") {
  KernelSpec se = KernelSpec::squared_exponential(1.0, Vector::Ones(1), 0.0);
  InputList pts = grid({0.0, 1.0, 2.5});
  CHECK((noisy_gram(se, pts).entries - gram(se, pts).entries)
            .cwiseAbs().maxCoeff() == 0.0);

  KernelSpec noisy = se.with_noise_variance(0.3);
  Matrix plain = gram(noisy, pts).entries;
  Matrix with_noise = noisy_gram(noisy, pts).entries;
  // diagonal exceeds the gram diagonal by exactly the added noise
  CHECK((with_noise.diagonal().array() == (plain.diagonal().array() + 0.3)).all());
  Matrix diff = with_noise - plain;
  diff.diagonal().setZero();
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);

  // duplicated location: noise only on the diagonal
  KernelSpec unit = KernelSpec::squared_exponential(1.0, Vector::Ones(1), 1.0);
  Matrix dup = noisy_gram(unit, grid({0.7, 0.7})).entries;
  Matrix expected(2, 2);
  expected << 2, 1, 1, 2;
  CHECK((dup - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noisy gram is PSD for random input sets") {
  for (int trial = 0; trial < 50; ++trial) {
    rng::NormalStream stream(rng::substream(5, 13, static_cast<std::uint64_t>(trial)));
    std::mt19937_64 gen(rng::substream(5, 14, static_cast<std::uint64_t>(trial)));
    auto n = 1 + static_cast<int>(gen() % 8);
    InputList pts;
    for (int i = 0; i < n; ++i) pts.push_back(pt(stream.next()));
    KernelSpec se = KernelSpec::squared_exponential(1.0, Vector::Ones(1), 1e-8);
    CHECK_NOTHROW(factorize(noisy_gram(se, pts).entries,
                            FactorizePolicy::AllowJitter));
  }
}

TEST_CASE("analytic gram gradients match central finite differences") {
  auto check_kernel = [](const KernelSpec& kernel, const InputList& pts) {
    std::vector<Matrix> analytic = gram_log_param_grads(kernel, pts);
    Vector params = kernel.log_params();
    const double h = 1e-6;
    for (Index p = 0; p < params.size(); ++p) {
      Vector up = params, dn = params;
      up(p) += h;
      dn(p) -= h;
      Matrix gu = gram(kernel.with_log_params(up), pts).entries;
      Matrix gd = gram(kernel.with_log_params(dn), pts).entries;
      Matrix fd = (gu - gd) / (2.0 * h);
      double rel = (analytic[static_cast<std::size_t>(p)] - fd).cwiseAbs().maxCoeff() /
                   std::max(1.0, fd.cwiseAbs().maxCoeff());
      CHECK(rel <= 1e-6);
    }
  };

  rng::NormalStream stream(31);
  InputList pts1;
  for (int i = 0; i < 6; ++i) pts1.push_back(pt(stream.next()));
  check_kernel(KernelSpec::squared_exponential(1.7, Vector::Constant(1, 0.6)),
               pts1);

  InputList pts2;
  for (int i = 0; i < 5; ++i) {
    Vector v(2);
    v << stream.next(), stream.next();
    pts2.push_back(std::move(v));
  }
  check_kernel(KernelSpec::squared_exponential(0.9, Vector::Constant(2, 1.2)),
               pts2);
  check_kernel(KernelSpec::linear(0.8, 1.5), pts2);
}

TEST_CASE("log-space round trip") {
  KernelSpec se = KernelSpec::squared_exponential(2.5, Vector::Constant(2, 0.4),
                                                  0.1);
  KernelSpec back = se.with_log_params(se.log_params());
  CHECK(back.signal_variance() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(back.length_scales()(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(back.noise_variance() == 0.1);
  CHECK(KernelSpec::min_kernel().param_count() == 0);
}
