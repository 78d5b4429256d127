#include <doctest.h>

#include <random>

#include "netctrl/linalg.hpp"
#include "netctrl/model.hpp"
#include "support/random_nds.hpp"
#include "support/worked_example.hpp"

using namespace netctrl;
using netctrl::testing::random_matrix;

namespace {

// Closes v[loop_v] = P z[loop_z] on the stacked system [[A_xx A_xv B_xu], [A_zx A_zv B_zu]]
// and returns the stacked system over the remaining signals.
RatMatrix close_loop(const RatMatrix& M, std::size_t n_x, std::size_t n_v, std::size_t n_u,
                     const std::vector<std::size_t>& loop_v, const std::vector<std::size_t>& loop_z,
                     const RatMatrix& P) {
  std::vector<std::size_t> keep_rows, keep_cols, zp_rows, vp_cols;
  const std::size_t n_z = M.rows() - n_x;
  for (std::size_t r = 0; r < n_x; ++r) keep_rows.push_back(r);
  for (std::size_t z = 0; z < n_z; ++z) {
    if (std::find(loop_z.begin(), loop_z.end(), z) == loop_z.end()) keep_rows.push_back(n_x + z);
  }
  for (std::size_t z : loop_z) zp_rows.push_back(n_x + z);
  for (std::size_t c = 0; c < n_x; ++c) keep_cols.push_back(c);
  for (std::size_t v = 0; v < n_v; ++v) {
    if (std::find(loop_v.begin(), loop_v.end(), v) == loop_v.end()) keep_cols.push_back(n_x + v);
  }
  for (std::size_t u = 0; u < n_u; ++u) keep_cols.push_back(n_x + n_v + u);
  for (std::size_t v : loop_v) vp_cols.push_back(n_x + v);

  const RatMatrix H = M.select_rows(zp_rows).select_cols(vp_cols);
  const auto S = inverse(RatMatrix::identity(loop_z.size()) - H * P);
  REQUIRE(S.has_value());
  const RatMatrix left = M.select_rows(keep_rows).select_cols(vp_cols);
  const RatMatrix right = M.select_rows(zp_rows).select_cols(keep_cols);
  return M.select_rows(keep_rows).select_cols(keep_cols) + left * P * *S * right;
}

RatMatrix stacked(const AugmentedSubsystem& a) {
  return vstack(hstack(hstack(a.A_xx, a.A_xv), a.B_xu), hstack(hstack(a.A_zx, a.A_zv), a.B_zu));
}

SubsystemModel random_lft_subsystem(std::mt19937_64& rng) {
  const std::size_t nx = 1 + rng() % 3, nu = rng() % 2, nv = 1 + rng() % 2, nz = 1 + rng() % 2;
  const std::size_t kv = 1 + rng() % 2, kz = 1 + rng() % 2;
  SubsystemModel s = SubsystemModel::zeros(nx, nu, nv, nz);
  s.A_xx0 = random_matrix(rng, nx, nx, 0.5);
  s.A_xv0 = random_matrix(rng, nx, nv, 0.5);
  s.B_xu0 = random_matrix(rng, nx, nu, 0.5);
  s.A_zx0 = random_matrix(rng, nz, nx, 0.5);
  s.A_zv0 = random_matrix(rng, nz, nv, 0.5);
  s.B_zu0 = random_matrix(rng, nz, nu, 0.5);
  s.E1 = random_matrix(rng, nx, kv, 0.5);
  s.E2 = random_matrix(rng, nz, kv, 0.5);
  s.E3 = RatMatrix(0, kv);
  s.F1 = random_matrix(rng, kz, nx, 0.5);
  s.F2 = random_matrix(rng, kz, nv, 0.5);
  s.F3 = random_matrix(rng, kz, nu, 0.5);
  s.H = random_matrix(rng, kz, kv, 0.4);
  s.param_block = StructuredPattern::full(kv, kz);
  return s;
}

}  // namespace

TEST_CASE("structured pattern construction and substitution") {
  const auto full = StructuredPattern::full(2, 3, 10);
  CHECK(full.free_count() == 6);
  CHECK(full.param(1, 2) == 15);
  const auto p = StructuredPattern::from_positions(3, 2, {{2, 0}, {0, 1}}, 4);
  CHECK(p.positions() == std::vector<Position>{{0, 1}, {2, 0}});
  CHECK(p.param(0, 1) == 4);
  CHECK(p.param(2, 0) == 5);
  CHECK_FALSE(p.param(1, 1).has_value());
  const RatMatrix m = p.substitute({{4, 7}, {5, Rational(1) / 2}});
  CHECK(m == RatMatrix{{0, 7}, {0, 0}, {Rational(1) / 2, 0}});
  CHECK_THROWS(StructuredPattern(2, 2).set_free(2, 0, 1));
}

TEST_CASE("diagonalization reconstructs the pattern and factors every substitution") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
    std::vector<Position> pos;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (rng() % 3 == 0) pos.emplace_back(i, j);
    const auto p = StructuredPattern::from_positions(r, c, pos);
    const auto d = diagonalize_parameters(p);
    CHECK(d.k == pos.size());
    CHECK(d.reconstruct(r, c) == p);
    std::map<int, Rational> values;
    RatMatrix D(d.k, d.k);
    for (std::size_t l = 0; l < d.k; ++l) {
      values[d.ids[l]] = Rational(static_cast<int>(rng() % 9) - 4);
      D(l, l) = values[d.ids[l]];
    }
    CHECK(d.U * D * d.V == p.substitute(values));
  }
}

TEST_CASE("repeated parameter ids are rejected") {
  StructuredPattern p(2, 2);
  p.set_free(0, 0, 1);
  p.set_free(1, 1, 1);
  CHECK_THROWS_AS(diagonalize_parameters(p), ModelError);
}

TEST_CASE("the worked example's link pattern diagonalizes to five unit factors") {
  const auto d = diagonalize_parameters(netctrl::testing::star_topology().scm);
  CHECK(d.k == 5);
  CHECK(d.U.rows() == 6);
  CHECK(d.U.cols() == 5);
  CHECK(d.V.rows() == 5);
  CHECK(d.V.cols() == 5);
}

TEST_CASE("augmentation without a parameter block is the identity") {
  const auto subs = netctrl::testing::three_subsystems();
  for (const auto& s : subs) {
    const auto a = augment_subsystem(s);
    CHECK(a.A_xx == s.A_xx0);
    CHECK(a.A_xv == s.A_xv0);
    CHECK(a.B_xu == s.B_xu0);
    CHECK(a.A_zx == s.A_zx0);
    CHECK(a.A_zv == s.A_zv0);
    CHECK(a.B_zu == s.B_zu0);
  }
}

TEST_CASE("closing a fixed block equals closing the augmented loop") {
  std::mt19937_64 rng(22);
  int checked = 0;
  while (checked < 100) {
    SubsystemModel s = random_lft_subsystem(rng);
    const auto aug = augment_subsystem(s);
    CHECK(aug.m_v() == s.m_v0() + s.m_vp());
    CHECK(aug.m_z() == s.m_z0() + s.m_zp());
    const RatMatrix P = random_matrix(rng, s.m_vp(), s.m_zp(), 0.6);
    if (determinant(RatMatrix::identity(s.m_zp()) - s.H * P) == 0) {
      s.param_block = P;
      CHECK_THROWS_AS(close_subsystem(s), ModelError);
      continue;
    }
    std::vector<std::size_t> loop_v, loop_z;
    for (std::size_t i = 0; i < s.m_vp(); ++i) loop_v.push_back(s.m_v0() + i);
    for (std::size_t i = 0; i < s.m_zp(); ++i) loop_z.push_back(s.m_z0() + i);
    const RatMatrix expected = close_loop(stacked(aug), aug.m_x(), aug.m_v(), aug.m_u(), loop_v, loop_z, P);
    s.param_block = P;
    CHECK(stacked(close_subsystem(s)) == expected);
    ++checked;
  }
}

TEST_CASE("lumped realization equals closing every parameter loop") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const NdsModel nds = netctrl::testing::random_nds(rng);
    const LumpedPlant plant = assemble_lumped(nds);
    const auto& L = plant.layout;
    CHECK(plant.P_pattern.rows() == L.n_v);
    CHECK(plant.P_pattern.cols() == L.n_z);
    REQUIRE(plant.diag.has_value());
    CHECK(plant.diag->reconstruct(L.n_v, L.n_z) == plant.P_pattern);

    std::map<int, Rational> values;
    for (int id : parameter_ids(nds)) values[id] = Rational(static_cast<int>(rng() % 5) - 2);
    const auto realized = realize(plant, values);
    REQUIRE(realized.has_value() == is_well_posed_at(nds, values));
    if (!realized) continue;

    std::vector<std::size_t> all_v, all_z;
    for (std::size_t i = 0; i < L.n_v; ++i) all_v.push_back(i);
    for (std::size_t i = 0; i < L.n_z; ++i) all_z.push_back(i);
    AugmentedSubsystem lumped;
    lumped.A_xx = plant.A_xx;
    lumped.A_xv = plant.A_xv;
    lumped.B_xu = plant.B_xu;
    lumped.A_zx = plant.A_zx;
    lumped.A_zv = plant.A_zv;
    lumped.B_zu = plant.B_zu;
    const RatMatrix closed = close_loop(stacked(lumped), L.n_x, L.n_v, L.n_u, all_v, all_z,
                                        plant.P_pattern.substitute(values));
    CHECK(closed.block(0, 0, L.n_x, L.n_x) == realized->first);
    CHECK(closed.block(0, L.n_x, L.n_x, L.n_u) == realized->second);
  }
}

TEST_CASE("well-posedness") {
  SUBCASE("zero parameters are always well-posed") {
    std::mt19937_64 rng(24);
    for (int t = 0; t < 50; ++t) {
      const NdsModel nds = netctrl::testing::random_nds(rng);
      std::map<int, Rational> zeros;
      for (int id : parameter_ids(nds)) zeros[id] = 0;
      CHECK(is_well_posed_at(nds, zeros));
      CHECK(check_well_posedness(nds, 3, 7).well_posed);
    }
  }
  SUBCASE("the worked example with random link weights") {
    const NdsModel nds = netctrl::testing::star_topology();
    const auto w = check_well_posedness(nds, 3, 1);
    CHECK(w.well_posed);
    CHECK(is_well_posed_at(nds, w.witness));
  }
  SUBCASE("a fixed unit loop is ill-posed") {
    SubsystemModel s = SubsystemModel::zeros(1, 0, 1, 1);
    s.E1 = RatMatrix(1, 1);
    s.E2 = RatMatrix(1, 1);
    s.E3 = RatMatrix(0, 1);
    s.F1 = RatMatrix(1, 1);
    s.F2 = RatMatrix(1, 1);
    s.F3 = RatMatrix(1, 0);
    s.H = RatMatrix{{1}};
    s.param_block = RatMatrix{{1}};
    NdsModel nds;
    nds.subsystems = {s};
    nds.scm = StructuredPattern(1, 1);
    CHECK_FALSE(check_well_posedness(nds, 3, 1).well_posed);
    CHECK_THROWS_AS(close_subsystem(s), ModelError);
  }
}

TEST_CASE("validation names inconsistent blocks") {
  SubsystemModel s = SubsystemModel::zeros(2, 1, 1, 1);
  s.A_xv0 = RatMatrix(3, 1);
  CHECK_THROWS_AS(s.validate(), ModelError);

  NdsModel nds;
  nds.subsystems = netctrl::testing::three_subsystems();
  nds.scm = StructuredPattern(5, 6);
  CHECK_THROWS_AS(nds.validate(), ModelError);
}

TEST_CASE("signal layout maps SCM rows and columns to global signals") {
  SubsystemModel a = SubsystemModel::zeros(1, 1, 2, 1);
  a.E1 = RatMatrix(1, 1);
  a.E2 = RatMatrix(1, 1);
  a.E3 = RatMatrix(0, 1);
  a.F1 = RatMatrix(1, 1);
  a.F2 = RatMatrix(1, 2);
  a.F3 = RatMatrix(1, 1);
  a.H = RatMatrix(1, 1);
  a.param_block = StructuredPattern::full(1, 1, 100);
  const SubsystemModel b = SubsystemModel::zeros(2, 0, 1, 2);
  const auto L = signal_layout({analysis_form(a), analysis_form(b)});
  CHECK(L.n_v == 4);
  CHECK(L.n_v0 == 3);
  CHECK(L.v_of_scm_row(2) == 3);
  CHECK(L.z_of_scm_col(1) == 2);
  CHECK(L.scm_row_of_v(2) == std::nullopt);
  CHECK(L.scm_row_of_v(3) == 2);
  CHECK(L.locate_v(3) == std::pair<std::size_t, std::size_t>{1, 0});
  CHECK(L.locate_z(1) == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(L.locate_u(0) == std::pair<std::size_t, std::size_t>{0, 0});
}
