#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "wavemask/error.hpp"
#include "wavemask/resample.hpp"

using namespace wavemask;
using wavemask::testing::random_tensor;

TEST_CASE("bilinear upsample examples") {
  const Tensor one = bilinear_upsample2x(Tensor::from_rows({{2.5}}));
  CHECK(one.shape() == Shape{2, 2});
  for (double v : one.data()) CHECK(v == 2.5);

  const Tensor up = bilinear_upsample2x(Tensor::from_rows({{0, 1}, {2, 3}}));
  REQUIRE(up.shape() == Shape{4, 4});
  CHECK(up.at(0, 0) == 0.0);
  CHECK(up.at(3, 3) == 3.0);
  CHECK(up.at(1, 1) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("bilinear upsample keeps rank and stays within input range") {
  std::mt19937_64 gen(5);
  const Tensor src = random_tensor(gen, {3, 5, 7});
  const Tensor up = bilinear_upsample2x(src);
  CHECK(up.shape() == Shape{3, 10, 14});
  CHECK(up.min() >= src.min());
  CHECK(up.max() <= src.max());
}

TEST_CASE("avgpool examples") {
  CHECK(avgpool2x(Tensor::from_rows({{1, 1}, {1, 1}})) == Tensor::from_rows({{1}}));
  CHECK(avgpool2x(Tensor::from_rows({{0, 2}, {4, 6}})) == Tensor::from_rows({{3}}));
  Tensor ramp({4, 4});
  for (std::size_t k = 0; k < 16; ++k) ramp[k] = static_cast<double>(k);
  CHECK(avgpool2x(ramp) == Tensor::from_rows({{2.5, 4.5}, {10.5, 12.5}}));
  CHECK_THROWS_AS(avgpool2x(Tensor({3, 4})), InvalidArgument);
}

TEST_CASE("adjoints satisfy <A x, y> = <x, A^T y>") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = random_tensor(gen, {2, 3, 5});
    const Tensor y = random_tensor(gen, {2, 6, 10});
    const Tensor ax = bilinear_upsample2x(x);
    const Tensor aty = bilinear_upsample2x_adjoint(y);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < ax.size(); ++k) lhs += ax[k] * y[k];
    for (std::size_t k = 0; k < x.size(); ++k) rhs += x[k] * aty[k];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

    const Tensor p = random_tensor(gen, {2, 6, 10});
    const Tensor q = random_tensor(gen, {2, 3, 5});
    const Tensor pp = avgpool2x(p);
    const Tensor qt = avgpool2x_adjoint(q);
    lhs = rhs = 0.0;
    for (std::size_t k = 0; k < pp.size(); ++k) lhs += pp[k] * q[k];
    for (std::size_t k = 0; k < p.size(); ++k) rhs += p[k] * qt[k];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}
