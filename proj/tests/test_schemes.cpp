#include "chpar/schemes.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace chpar;

namespace {

using Dense = Eigen::MatrixXd;

Field random_field(const SpatialGrid &g, unsigned seed, double amp = 0.1) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  Field f(g);
  for (auto &x : f.values())
    x = d(gen);
  return f;
}

// Entries in {-1, 0, 1}, so u^2 and u^3 are known exactly.
Field sign_field(const SpatialGrid &g, unsigned seed, bool allow_zero) {
  std::mt19937 gen(seed);
  Field f(g);
  for (auto &x : f.values()) {
    const unsigned r = gen() % (allow_zero ? 3u : 2u);
    x = r == 0 ? -1.0 : (r == 1 ? 1.0 : 0.0);
  }
  return f;
}

Dense dense_lap(const SpatialGrid &g) { return Dense(DiscreteOperator(g).laplacian()); }

// (I - i dt D + eps^2 dt D^2)^{-1} (I - i dt D)
Dense p_matrix(const SpatialGrid &g, int i, double dt, double eps) {
  const Dense d = dense_lap(g);
  const Dense id = Dense::Identity(d.rows(), d.cols());
  const Dense lhs = id - i * dt * d + eps * eps * dt * d * d;
  return lhs.fullPivLu().solve(id - i * dt * d);
}

Vector dense_linear_a(const Vector &u, const Dense &d, double dt, double eps) {
  const Dense id = Dense::Identity(d.rows(), d.cols());
  const Dense a = id - dt * d * Dense(u.cwiseProduct(u).asDiagonal()) + eps * eps * dt * d * d;
  return a.fullPivLu().solve(u - dt * d * u);
}

PropagatorSpec spec_of(Scheme s, double dt, double eps) {
  PropagatorSpec p;
  p.scheme = s;
  p.dt = dt;
  p.eps = eps;
  return p;
}

} // namespace

TEST_CASE("zero is a fixed point of every scheme") {
  for (int dim : {1, 2}) {
    SpatialGrid g(dim, 8);
    DiscreteOperator op(g);
    Field z(g);
    CHECK(step_linear_a(z, op, spec_of(Scheme::LinearA, 0.1, 0.1)).values().isZero(0.0));
    CHECK(step_linear_b(z, op, spec_of(Scheme::LinearB, 0.1, 0.1)).values().isZero(0.0));
    auto [y, rep] = step_nonlinear(z, op, spec_of(Scheme::NonlinearEyre, 0.1, 0.1));
    CHECK(y.values().isZero(0.0));
    CHECK(rep.newton_iterations <= 1);
    Propagator p(make_operator(g), spec_of(Scheme::LinearA, 0.01, 0.1));
    CHECK(p.propagate(z, 10).values().isZero(0.0));
  }
}

TEST_CASE("linear-a reduces to P_1 when u^2 = 1") {
  SpatialGrid g(1, 4);
  DiscreteOperator op(g);
  for (unsigned s = 0; s < 4; ++s) {
    const Field u = sign_field(g, s, false);
    const double dt = 0.37, eps = 0.2;
    const Vector expect = p_matrix(g, 1, dt, eps) * u.values();
    const Field got = step_linear_a(u, op, spec_of(Scheme::LinearA, dt, eps));
    CHECK((got.values() - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
  }
}

TEST_CASE("linear-b reduces to P_2 when u^3 = u") {
  SpatialGrid g(1, 6);
  auto op = make_operator(g);
  for (unsigned s = 0; s < 6; ++s) {
    const Field u = sign_field(g, s, true);
    const double dt = 0.05, eps = 0.0725;
    const Vector expect = p_matrix(g, 2, dt, eps) * u.values();
    const Field fresh = step_linear_b(u, *op, spec_of(Scheme::LinearB, dt, eps));
    const Field cached = Propagator(op, spec_of(Scheme::LinearB, dt, eps)).step(u);
    CHECK((fresh.values() - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    CHECK((cached.values() - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
  }
}

TEST_CASE("linear-a propagation matches a dense step-by-step oracle") {
  for (int dim : {1, 2}) {
    SpatialGrid g(dim, 6);
    const Dense d = dense_lap(g);
    const Field u0 = random_field(g, 11, 0.8);
    const double dt = 0.01, eps = 0.1;
    Propagator p(make_operator(g), spec_of(Scheme::LinearA, dt, eps));
    Vector ref = u0.values();
    for (int j = 0; j < 12; ++j)
      ref = dense_linear_a(ref, d, dt, eps);
    const Field got = p.propagate(u0, 12);
    CHECK((got.values() - ref).norm() <= 1e-11 * (1.0 + ref.norm()));
    CHECK(identical(p.propagate(u0, 1), p.step(u0)));
  }
}

TEST_CASE("nonlinear step solves the implicit equation") {
  SpatialGrid g(1, 33);
  auto op = make_operator(g);
  const Field u = random_field(g, 5, 0.9);
  const auto spec = spec_of(Scheme::NonlinearEyre, 0.01, 0.0725);
  auto [y, rep] = step_nonlinear(u, *op, spec);
  CHECK(rep.residual_norm <= 1e-10);
  CHECK(rep.newton_iterations >= 1);
  CHECK(rep.newton_iterations <= 20);

  // Independent dense evaluation of H(Y).
  const Dense d = dense_lap(g);
  const Vector y3 = y.values().array().cube().matrix();
  const Vector h = y.values() + spec.eps * spec.eps * spec.dt * d * d * y.values() -
                   spec.dt * d * y3 - (u.values() - spec.dt * d * u.values());
  CHECK(std::sqrt(g.cell_weight()) * h.norm() <= 1e-9);
  CHECK((nonlinear_residual(y.values(), u.values(), *op, spec.dt, spec.eps) - h).norm() <=
        1e-8);
}

TEST_CASE("newton iteration cap raises a solver error with the last residual") {
  SpatialGrid g(1, 33);
  auto op = make_operator(g);
  auto spec = spec_of(Scheme::NonlinearEyre, 1.0, 0.0725);
  spec.newton_max_iter = 1;
  const Field u = random_field(g, 9, 0.9);
  try {
    (void)step_nonlinear(u, *op, spec);
    FAIL("expected SolverError");
  } catch (const SolverError &e) {
    CHECK(e.last_residual() > 1e-10);
  }
}

TEST_CASE("spec validation") {
  auto op = make_operator(SpatialGrid(1, 8));
  CHECK_THROWS_AS(Propagator(op, spec_of(Scheme::LinearA, 0.0, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(Propagator(op, spec_of(Scheme::LinearA, 0.1, -1.0)), std::invalid_argument);
  CHECK_THROWS_AS(Propagator(op, spec_of(Scheme::NeumannNeumannLinearA, 0.1, 0.1)),
                  std::invalid_argument);
}

TEST_CASE("energy is non-increasing for every scheme") {
  for (int dim : {1, 2}) {
    SpatialGrid g(dim, dim == 1 ? 33 : 17);
    auto op = make_operator(g);
    const Field u0 = random_field(g, 21, 0.1);
    for (Scheme s : {Scheme::LinearA, Scheme::LinearB, Scheme::NonlinearEyre}) {
      for (double dt : {1e-3, 1e-1, 1.0}) {
        Propagator p(op, spec_of(s, dt, 0.0725));
        Field u = u0;
        double e = energy(u, 0.0725);
        for (int n = 0; n < 20; ++n) {
          u = p.step(u);
          const double e1 = energy(u, 0.0725);
          CHECK(e1 <= e * (1.0 + 1e-12));
          e = e1;
        }
      }
    }
  }
}

TEST_CASE("propagation stats aggregate newton data") {
  SpatialGrid g(1, 17);
  Propagator p(make_operator(g), spec_of(Scheme::NonlinearEyre, 0.05, 0.1));
  PropagationStats st;
  (void)p.propagate(random_field(g, 2, 0.5), 7, &st);
  CHECK(st.steps == 7);
  CHECK(st.max_newton_iterations >= 1);
  CHECK(st.max_residual <= 1e-10);
}
