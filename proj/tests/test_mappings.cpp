#include "doctest.h"
#include "lietoda/mappings.hpp"

using namespace lietoda;

namespace {
struct Chain {
  FlowSetup s;
  TauField T;
  PFields P;
};

// corner-anchored standard flows on A_n
Chain chain(int n, int m1, Grid2D g) {
  Chain c;
  c.s.n = n;
  c.s.grid = g;
  c.s.minus = GradedLagrangian::standard(Side::minus, n, m1);
  c.s.plus = GradedLagrangian::standard(Side::plus, n, 1);
  c.s.origin_x = g.x(0);
  c.s.origin_y = g.y(0);
  KernelField K = build_kernel(c.s);
  c.T = compute_tau(K, m1, DerivativeMode::finite_difference);
  c.P = compute_p(c.T, c.s.minus, c.s.plus);
  return c;
}

const Chain& a4() {
  static const Chain c = chain(4, 1, Grid2D::centered());
  return c;
}

MappingState constant_state(MapKind k, std::vector<double> values) {
  Grid2D g = Grid2D::centered(15, 0.1);
  std::vector<Field2D> f;
  for (double v : values) f.emplace_back(g, v);
  return make_state(k, g, f);
}

double valid_max(const MappingState& s, int comp) {
  double m = 0;
  for (double v : s.fields[comp].v)
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  return m;
}
}  // namespace

TEST_CASE("map kinds and arity") {
  CHECK(map_arity(MapKind::utoda11) == 2);
  CHECK(map_arity(MapKind::darboux_toda) == 2);
  CHECK(map_arity(MapKind::utoda12) == 4);
  CHECK(parse_map_kind("dt") == MapKind::darboux_toda);
  CHECK(map_kind_name(parse_map_kind("utoda12")) == "utoda12");
  CHECK_THROWS_AS(parse_map_kind("x"), ConfigError);
  Grid2D g = Grid2D::centered(9, 0.1);
  CHECK_THROWS_AS(make_state(MapKind::utoda12, g, {Field2D(g), Field2D(g)}), std::invalid_argument);
}

TEST_CASE("UToda(1,1) map shifts the Toda chain") {
  const Chain& c = a4();
  for (int i = 2; i <= 3; ++i) {
    auto r = compare_states("shift", utoda11_map(utoda11_chain(c.T, i)), utoda11_chain(c.T, i + 1), 1e-5);
    CHECK(r.max_abs < 1e-5);
  }
  auto two = apply_map(utoda11_chain(c.T, 2), 2);
  CHECK(two.ring == 2 * kStencilRing);
  CHECK(two.applications == 2);
  CHECK(compare_states("twofold", two, utoda11_chain(c.T, 4), 1e-4).max_abs < 1e-4);
}

TEST_CASE("Darboux-Toda map shifts the chain") {
  const Chain& c = a4();
  for (int i = 1; i <= 3; ++i)
    CHECK(compare_states("shift", darboux_toda_map(darboux_toda_chain(c.T, i)), darboux_toda_chain(c.T, i + 1), 1e-5)
              .max_abs < 1e-5);
  CHECK(compare_states("twofold", apply_map(darboux_toda_chain(c.T, 1), 2), darboux_toda_chain(c.T, 3), 1e-4).max_abs <
        1e-4);

  // at the fixed end the image of v vanishes
  auto end = darboux_toda_map(darboux_toda_chain(c.T, 4));
  CHECK(valid_max(end, 1) < 1e-5);

  // the sign printed with the substitution fails the oracle (site 1: the
  // symmetric standard flows give v_2 = 1)
  auto s = darboux_toda_chain(c.T, 1);
  const Field2D &u = s.fields[0], &v = s.fields[1];
  Field2D lnv_xy = mixed_second_derivative(log(v), s.grid);
  Field2D printed = v * (u * v - lnv_xy);
  auto target = darboux_toda_chain(c.T, 2);
  auto wrong = make_state(MapKind::darboux_toda, s.grid, {target.fields[0], printed});
  CHECK(compare_states("printed", wrong, target, 1e-5).max_abs > 1e-2);
}

TEST_CASE("UToda(1,2) map shifts the (2,1) chain") {
  Chain c = chain(4, 2, Grid2D::centered(201, 0.005));
  for (int i = 2; i <= 3; ++i)
    CHECK(compare_states("shift", utoda12_map(utoda12_chain(c.T, c.P, i)), utoda12_chain(c.T, c.P, i + 1), 1e-5)
              .max_abs < 1e-5);
  CHECK(compare_states("twofold", apply_map(utoda12_chain(c.T, c.P, 2), 2), utoda12_chain(c.T, c.P, 4), 1e-4)
            .max_abs < 1e-4);
  CHECK_THROWS_AS(utoda12_chain(a4().T, a4().P, 2), ContractError);
}

TEST_CASE("constant fixed points") {
  auto s = utoda11_map(constant_state(MapKind::utoda11, {0.7, 0.7}));
  CHECK(s.fields[0](7, 7) == doctest::Approx(0.7));
  CHECK(s.fields[1](7, 7) == doctest::Approx(0.7));
  CHECK(std::isnan(s.fields[0](0, 7)));

  // phi1 = phi2, phi3 = phi4
  auto q = utoda12_map(constant_state(MapKind::utoda12, {1.3, 1.3, 0.4, 0.4}));
  for (int k = 0; k < 4; ++k) CHECK(q.fields[k](7, 7) == doctest::Approx(k < 2 ? 1.3 : 0.4));

  // phi3 = 0 passes zero into phi4 and reduces phi1 to phi2
  auto z = utoda12_map(constant_state(MapKind::utoda12, {1.3, 0.9, 0.0, 0.5}));
  CHECK(valid_max(z, 3) == 0.0);
  CHECK(z.fields[0](7, 7) == doctest::Approx(0.9));
}

TEST_CASE("non-positive inputs are singular") {
  auto s = constant_state(MapKind::darboux_toda, {1.0, 1.0});
  s.fields[1](6, 8) = -0.1;
  try {
    darboux_toda_map(s);
    FAIL("no exception");
  } catch (const SingularMapping& e) {
    REQUIRE(e.nodes.size() == 1);
    CHECK(e.nodes[0] == std::array<int, 2>{6, 8});
  }
  auto t = constant_state(MapKind::utoda11, {1.0, 1.0});
  t.fields[0](3, 3) = 0.0;
  CHECK_THROWS_AS(utoda11_map(t), SingularMapping);
  // updated phi1 = phi2 + (phi3)_y crossing zero
  auto q = constant_state(MapKind::utoda12, {1.0, 0.0, 0.0, 0.0});
  for (int ix = 0; ix < 15; ++ix)
    for (int iy = 0; iy < 15; ++iy) q.fields[2](ix, iy) = q.grid.y(iy) * q.grid.y(iy);
  CHECK_THROWS_AS(utoda12_map(q), SingularMapping);
}

TEST_CASE("Davey-Stewartson residual of the zero pair") {
  SpaceTimeField u;
  u.grid = Grid2D::centered(11, 0.1);
  u.slices.assign(9, Field2D(u.grid, 0.0));
  SpaceTimeField v = u;
  CHECK(ds_residual(u, v, 1e-4, false).max_abs == 0.0);
  CHECK(ds_residual(u, v, 1e-4, true).max_abs == 0.0);
  u.slices.resize(3);
  CHECK_THROWS_AS(ds_residual(u, v, 1e-4, false), std::invalid_argument);
}
