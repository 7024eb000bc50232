#include "chpar/parareal.hpp"

#include <doctest.h>

#include <random>

using namespace chpar;

namespace {

constexpr Variant all_variants[] = {Variant::PA1, Variant::PA2, Variant::PA3, Variant::NPA1,
                                    Variant::NPA2};

Field random_field(const SpatialGrid &g, unsigned seed, double amp = 0.1) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  Field f(g);
  for (auto &x : f.values())
    x = d(gen);
  return f;
}

PararealEngine small_engine(Variant v, int N = 4, int J = 4, int workers = 1) {
  const SpatialGrid g(1, 10);
  const TimePartition part{0.5, N, J};
  return PararealEngine(make_propagators(v, part, 0.1, make_operator(g)), part, workers);
}

} // namespace

TEST_CASE("variant names and schemes") {
  CHECK(parse_variant("pa1") == Variant::PA1);
  CHECK(parse_variant("PA-III") == Variant::PA3);
  CHECK(parse_variant("npa2") == Variant::NPA2);
  CHECK_FALSE(parse_variant("pa4"));
  CHECK(schemes_of(Variant::PA3).fine == Scheme::LinearB);
  CHECK(schemes_of(Variant::PA3).coarse == Scheme::LinearA);
  CHECK(schemes_of(Variant::NPA1).fine == Scheme::NonlinearEyre);
  CHECK(schemes_of(Variant::NPA1).coarse == Scheme::LinearA);
  for (Variant v : all_variants)
    CHECK(parse_variant(to_string(v)) == v);
}

TEST_CASE("propagator pairing") {
  auto op = make_operator(SpatialGrid(1, 10));
  const TimePartition part{1.0, 5, 10};
  auto pp = make_propagators(Variant::PA2, part, 0.1, op);
  CHECK(pp.fine.spec().dt == doctest::Approx(0.02));
  CHECK(pp.coarse.spec().dt == doctest::Approx(0.2));
  CHECK_THROWS(make_propagators(Variant::PA2, part, 0.1, op, NNParams{}));
  CHECK(make_propagators(Variant::PA1, part, 0.1, op, NNParams{2}).fine.spec().scheme ==
        Scheme::NeumannNeumannLinearA);
  CHECK_THROWS(TimePartition({1.0, 0, 10}).validate());
}

TEST_CASE("serial reference and coarse initialization") {
  for (Variant v : all_variants) {
    auto e = small_engine(v);
    const Field u0 = random_field(SpatialGrid(1, 10), 4);
    const auto ref = e.serial_fine_reference(u0);
    REQUIRE(ref.size() == 5);
    CHECK(identical(ref[0], u0));
    CHECK(identical(ref[4], e.fine().propagate(u0, 16)));
    const auto init = e.coarse_init(u0);
    CHECK(identical(init[2], e.coarse().step(e.coarse().step(u0))));
    const auto zero = e.coarse_init(Field(u0.grid()));
    for (const auto &f : zero)
      CHECK(f.values().isZero(0.0));
  }
  const Field u0 = random_field(SpatialGrid(1, 10), 4);
  const auto r1 = small_engine(Variant::NPA1).serial_fine_reference(u0);
  const auto r2 = small_engine(Variant::NPA2).serial_fine_reference(u0);
  for (std::size_t n = 0; n < r1.size(); ++n)
    CHECK(identical(r1[n], r2[n]));
  auto one = small_engine(Variant::PA1, 1, 4);
  const auto r = one.serial_fine_reference(u0);
  REQUIRE(r.size() == 2);
  CHECK(identical(r[1], one.fine().propagate(u0, 4)));
}

TEST_CASE("one iteration with two slices matches the update formula") {
  for (Variant v : all_variants) {
    auto e = small_engine(v, 2, 3);
    const Field u0 = random_field(SpatialGrid(1, 10), 8, 0.5);
    const auto s0 = e.initial_state(u0);
    const auto s1 = e.iterate(s0);
    const Field U1 = e.fine().propagate(u0, 3); // U_0 never moves
    const Field G0_new = e.coarse().step(U1);
    const Field U2 = G0_new + e.fine().propagate(s0.U[1], 3) - e.coarse().step(s0.U[1]);
    CHECK(l2_distance(s1.U[1], U1) <= 1e-15);
    CHECK(l2_distance(s1.U[2], U2) <= 1e-13);
  }
}

TEST_CASE("finite-step convergence for every variant") {
  for (Variant v : all_variants) {
    auto e = small_engine(v);
    const Field u0 = random_field(SpatialGrid(1, 10), 12, 0.5);
    auto trace = e.run(u0, 1e-300, 4);
    REQUIRE(trace.records.size() == 5);
    CHECK(trace.records.back().error <= 1e-12 * (1.0 + trace.reference_norm));
  }
}

TEST_CASE("fixed point and loose tolerance") {
  auto e = small_engine(Variant::PA1);
  const Field u0 = random_field(SpatialGrid(1, 10), 2, 0.5);
  auto loose = e.run(u0, 1e6, 10);
  CHECK(loose.converged_at == 0);
  CHECK(loose.records.size() == 1);

  ParerealState s = e.initial_state(u0);
  s.U = e.serial_fine_reference(u0);
  for (int n = 0; n < 4; ++n)
    s.G_cur[static_cast<std::size_t>(n)] = e.coarse().step(s.U[static_cast<std::size_t>(n)]);
  const auto next = e.iterate(s);
  for (std::size_t n = 0; n < s.U.size(); ++n)
    CHECK(l2_distance(next.U[n], s.U[n]) <= 1e-14);
}

TEST_CASE("iteration cap yields the sentinel") {
  const SpatialGrid g(1, 33);
  const TimePartition part{1.0, 10, 20};
  PararealEngine e(make_propagators(Variant::PA1, part, 0.0725, make_operator(g)), part);
  auto t = e.run(random_field(g, 3), 1e-14, 2);
  CHECK(t.converged_at == IterationTrace::not_converged);
  CHECK(t.records.size() == 3);
  CHECK_FALSE(t.failure);
}

TEST_CASE("parallel and serial sweeps agree bit for bit") {
  const SpatialGrid g(1, 33);
  const TimePartition part{1.0, 8, 10};
  for (Variant v : all_variants) {
    PararealEngine e1(make_propagators(v, part, 0.0725, make_operator(g)), part, 1);
    PararealEngine e4(make_propagators(v, part, 0.0725, make_operator(g)), part, 4);
    const Field u0 = random_field(g, 6);
    const auto U = e1.coarse_init(u0);
    const auto a = e1.fine_sweep_serial(U);
    const auto b = e4.fine_sweep(U);
    for (std::size_t n = 0; n < a.size(); ++n)
      CHECK(identical(a[n], b[n]));
    const auto t1 = e1.run(u0, 1e-8, 8);
    const auto t4 = e4.run(u0, 1e-8, 8);
    REQUIRE(t1.records.size() == t4.records.size());
    for (std::size_t k = 0; k < t1.records.size(); ++k)
      CHECK(t1.records[k].error == t4.records[k].error);
  }
}

TEST_CASE("sweep failures carry the slice index and end the run") {
  const SpatialGrid g(1, 33);
  const TimePartition part{4.0, 4, 1};
  auto pp = make_propagators(Variant::NPA2, part, 0.0725, make_operator(g));
  PropagatorSpec s = pp.fine.spec();
  s.newton_max_iter = 1;
  PararealEngine e({Propagator(make_operator(g), s), pp.coarse}, part);
  const Field u0 = random_field(g, 5, 0.9);
  try {
    (void)e.fine_sweep(e.coarse_init(u0));
    FAIL("expected a failure");
  } catch (const std::exception &ex) {
    CHECK(std::string(ex.what()).find("slice") != std::string::npos);
  }
}
