#include "netctrl/model.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "netctrl/linalg.hpp"

namespace netctrl {
namespace {

std::string dims(const RatMatrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void expect_dims(const RatMatrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ModelError(std::string("block ") + name + " has shape " + dims(m) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

std::size_t locate(const std::vector<std::size_t>& offsets, std::size_t total, std::size_t index) {
  if (index >= total) throw std::out_of_range("signal index out of range");
  auto it = std::upper_bound(offsets.begin(), offsets.end(), index);
  return static_cast<std::size_t>(it - offsets.begin()) - 1;
}

}  // namespace

// StructuredPattern

StructuredPattern StructuredPattern::full(std::size_t rows, std::size_t cols, int first_id) {
  StructuredPattern p(rows, cols);
  int id = first_id;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) p.set_free(r, c, id++);
  return p;
}

StructuredPattern StructuredPattern::from_positions(std::size_t rows, std::size_t cols,
                                                    const std::vector<Position>& free, int first_id) {
  StructuredPattern p(rows, cols);
  std::vector<Position> sorted = free;
  std::sort(sorted.begin(), sorted.end());
  int id = first_id;
  for (const auto& [r, c] : sorted) {
    if (p.is_free(r, c)) throw ModelError("duplicate free position in pattern");
    p.set_free(r, c, id++);
  }
  return p;
}

void StructuredPattern::set_free(std::size_t r, std::size_t c, int id) {
  if (r >= rows_ || c >= cols_) {
    throw ModelError("pattern position (" + std::to_string(r + 1) + "," + std::to_string(c + 1) +
                     ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  entries_[{r, c}] = id;
}

void StructuredPattern::clear(std::size_t r, std::size_t c) { entries_.erase({r, c}); }

std::optional<int> StructuredPattern::param(std::size_t r, std::size_t c) const {
  auto it = entries_.find({r, c});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<Position> StructuredPattern::positions() const {
  std::vector<Position> out;
  out.reserve(entries_.size());
  for (const auto& [pos, id] : entries_) out.push_back(pos);
  return out;
}

RatMatrix StructuredPattern::substitute(const std::map<int, Rational>& values) const {
  RatMatrix out(rows_, cols_);
  for (const auto& [pos, id] : entries_) {
    auto it = values.find(id);
    if (it == values.end()) throw ModelError("no value for parameter " + std::to_string(id));
    out(pos.first, pos.second) = it->second;
  }
  return out;
}

// SubsystemModel

bool SubsystemModel::has_free_block() const {
  const auto* p = std::get_if<StructuredPattern>(&param_block);
  return p != nullptr && (p->rows() > 0 || p->cols() > 0);
}

bool SubsystemModel::has_fixed_block() const { return std::holds_alternative<RatMatrix>(param_block); }

SubsystemModel SubsystemModel::zeros(std::size_t m_x, std::size_t m_u, std::size_t m_v0,
                                     std::size_t m_z0, std::size_t m_y) {
  SubsystemModel s;
  s.A_xx0 = RatMatrix(m_x, m_x);
  s.A_xv0 = RatMatrix(m_x, m_v0);
  s.B_xu0 = RatMatrix(m_x, m_u);
  s.A_zx0 = RatMatrix(m_z0, m_x);
  s.A_zv0 = RatMatrix(m_z0, m_v0);
  s.B_zu0 = RatMatrix(m_z0, m_u);
  s.C_yx0 = RatMatrix(m_y, m_x);
  s.C_yv0 = RatMatrix(m_y, m_v0);
  s.D_yu0 = RatMatrix(m_y, m_u);
  s.E1 = RatMatrix(m_x, 0);
  s.E2 = RatMatrix(m_z0, 0);
  s.E3 = RatMatrix(m_y, 0);
  s.F1 = RatMatrix(0, m_x);
  s.F2 = RatMatrix(0, m_v0);
  s.F3 = RatMatrix(0, m_u);
  s.H = RatMatrix(0, 0);
  return s;
}

void SubsystemModel::validate() const {
  const std::size_t nx = m_x(), nu = m_u(), nv = m_v0(), nz = m_z0(), ny = m_y();
  const std::size_t vp = m_vp(), zp = m_zp();
  expect_dims(A_xx0, nx, nx, "A_xx");
  expect_dims(A_xv0, nx, nv, "A_xv");
  expect_dims(B_xu0, nx, nu, "B_xu");
  expect_dims(A_zx0, nz, nx, "A_zx");
  expect_dims(A_zv0, nz, nv, "A_zv");
  expect_dims(B_zu0, nz, nu, "B_zu");
  expect_dims(C_yx0, ny, nx, "C_yx");
  expect_dims(C_yv0, ny, nv, "C_yv");
  expect_dims(D_yu0, ny, nu, "D_yu");
  expect_dims(E1, nx, vp, "E1");
  expect_dims(E2, nz, vp, "E2");
  expect_dims(E3, ny, vp, "E3");
  expect_dims(F1, zp, nx, "F1");
  expect_dims(F2, zp, nv, "F2");
  expect_dims(F3, zp, nu, "F3");
  if (const auto* p = std::get_if<StructuredPattern>(&param_block)) {
    if (p->rows() != vp || p->cols() != zp) {
      throw ModelError("parameter pattern is " + std::to_string(p->rows()) + "x" +
                       std::to_string(p->cols()) + ", expected " + std::to_string(vp) + "x" +
                       std::to_string(zp) + " (H transposed)");
    }
  } else {
    const auto& P = std::get<RatMatrix>(param_block);
    expect_dims(P, vp, zp, "P");
    if (determinant(RatMatrix::identity(zp) - H * P) == 0) {
      throw ModelError("fixed parameter block is ill-posed: det(I - H P) = 0");
    }
  }
}

// Augmentation

AugmentedSubsystem augment_subsystem(const SubsystemModel& sub) {
  sub.validate();
  if (sub.has_fixed_block()) throw ModelError("augment_subsystem requires a free parameter block");
  AugmentedSubsystem out;
  out.A_xx = sub.A_xx0;
  out.A_xv = hstack(sub.A_xv0, sub.E1);
  out.B_xu = sub.B_xu0;
  out.A_zx = vstack(sub.A_zx0, sub.F1);
  out.A_zv = vstack(hstack(sub.A_zv0, sub.E2), hstack(sub.F2, sub.H));
  out.B_zu = vstack(sub.B_zu0, sub.F3);
  out.m_v0 = sub.m_v0();
  out.m_z0 = sub.m_z0();
  return out;
}

AugmentedSubsystem close_subsystem(const SubsystemModel& sub) {
  sub.validate();
  if (!sub.has_fixed_block()) throw ModelError("close_subsystem requires a fixed parameter block");
  const auto& P = std::get<RatMatrix>(sub.param_block);
  auto inv = inverse(RatMatrix::identity(sub.m_zp()) - sub.H * P);
  if (!inv) throw ModelError("fixed parameter block is ill-posed: det(I - H P) = 0");
  RatMatrix K = P * *inv;
  RatMatrix E1K = sub.E1 * K;
  RatMatrix E2K = sub.E2 * K;
  AugmentedSubsystem out;
  out.A_xx = sub.A_xx0 + E1K * sub.F1;
  out.A_xv = sub.A_xv0 + E1K * sub.F2;
  out.B_xu = sub.B_xu0 + E1K * sub.F3;
  out.A_zx = sub.A_zx0 + E2K * sub.F1;
  out.A_zv = sub.A_zv0 + E2K * sub.F2;
  out.B_zu = sub.B_zu0 + E2K * sub.F3;
  out.m_v0 = sub.m_v0();
  out.m_z0 = sub.m_z0();
  return out;
}

AugmentedSubsystem analysis_form(const SubsystemModel& sub) {
  return sub.has_fixed_block() ? close_subsystem(sub) : augment_subsystem(sub);
}

// NdsModel

std::size_t NdsModel::total_v0() const {
  std::size_t n = 0;
  for (const auto& s : subsystems) n += s.m_v0();
  return n;
}

std::size_t NdsModel::total_z0() const {
  std::size_t n = 0;
  for (const auto& s : subsystems) n += s.m_z0();
  return n;
}

void NdsModel::validate() const {
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    try {
      subsystems[i].validate();
    } catch (const ModelError& e) {
      throw ModelError("subsystem " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (scm.rows() != total_v0() || scm.cols() != total_z0()) {
    throw ModelError("SCM is " + std::to_string(scm.rows()) + "x" + std::to_string(scm.cols()) +
                     ", subsystem partition needs " + std::to_string(total_v0()) + "x" +
                     std::to_string(total_z0()));
  }
  std::set<int> seen;
  auto claim = [&](int id) {
    if (!seen.insert(id).second) {
      throw ModelError("parameter id " + std::to_string(id) +
                       " appears more than once; only rank-one (independent) parameters are supported");
    }
  };
  for (const auto& [pos, id] : scm.entries()) claim(id);
  for (const auto& s : subsystems) {
    if (const auto* p = std::get_if<StructuredPattern>(&s.param_block)) {
      for (const auto& [pos, id] : p->entries()) claim(id);
    }
  }
}

std::vector<int> parameter_ids(const NdsModel& nds) {
  std::vector<int> ids;
  for (const auto& [pos, id] : nds.scm.entries()) ids.push_back(id);
  for (const auto& s : nds.subsystems) {
    if (const auto* p = std::get_if<StructuredPattern>(&s.param_block)) {
      for (const auto& [pos, id] : p->entries()) ids.push_back(id);
    }
  }
  return ids;
}

// Diagonalization

Diagonalization diagonalize_parameters(const StructuredPattern& p) {
  Diagonalization d;
  std::set<int> seen;
  for (const auto& [pos, id] : p.entries()) {
    if (!seen.insert(id).second) {
      throw ModelError("parameter id " + std::to_string(id) + " repeated; rank-one factorization unsupported");
    }
    d.rows.push_back(pos.first);
    d.cols.push_back(pos.second);
    d.ids.push_back(id);
  }
  d.k = d.rows.size();
  d.U = RatMatrix(p.rows(), d.k);
  d.V = RatMatrix(d.k, p.cols());
  for (std::size_t l = 0; l < d.k; ++l) {
    d.U(d.rows[l], l) = 1;
    d.V(l, d.cols[l]) = 1;
  }
  return d;
}

StructuredPattern Diagonalization::reconstruct(std::size_t m_v, std::size_t m_z) const {
  // Pattern of U diag(s) V: entry (r, c) collects s_l for U(r,l) V(l,c) != 0.
  StructuredPattern out(m_v, m_z);
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t r = 0; r < U.rows(); ++r) {
      if (U(r, l) == 0) continue;
      for (std::size_t c = 0; c < V.cols(); ++c) {
        if (V(l, c) != 0) out.set_free(r, c, ids[l]);
      }
    }
  }
  return out;
}

// Layout

SignalLayout signal_layout(const std::vector<AugmentedSubsystem>& parts) {
  SignalLayout L;
  for (const auto& p : parts) {
    L.x_offset.push_back(L.n_x);
    L.u_offset.push_back(L.n_u);
    L.v_offset.push_back(L.n_v);
    L.z_offset.push_back(L.n_z);
    L.v0_offset.push_back(L.n_v0);
    L.z0_offset.push_back(L.n_z0);
    L.n_x += p.m_x();
    L.n_u += p.m_u();
    L.n_v += p.m_v();
    L.n_z += p.m_z();
    L.n_v0 += p.m_v0;
    L.n_z0 += p.m_z0;
  }
  return L;
}

std::size_t SignalLayout::v_of_scm_row(std::size_t row) const {
  std::size_t i = locate(v0_offset, n_v0, row);
  return v_offset[i] + (row - v0_offset[i]);
}

std::size_t SignalLayout::z_of_scm_col(std::size_t col) const {
  std::size_t i = locate(z0_offset, n_z0, col);
  return z_offset[i] + (col - z0_offset[i]);
}

std::optional<std::size_t> SignalLayout::scm_row_of_v(std::size_t v) const {
  std::size_t i = locate(v_offset, n_v, v);
  std::size_t local = v - v_offset[i];
  std::size_t width = (i + 1 < v0_offset.size() ? v0_offset[i + 1] : n_v0) - v0_offset[i];
  if (local >= width) return std::nullopt;
  return v0_offset[i] + local;
}

std::optional<std::size_t> SignalLayout::scm_col_of_z(std::size_t z) const {
  std::size_t i = locate(z_offset, n_z, z);
  std::size_t local = z - z_offset[i];
  std::size_t width = (i + 1 < z0_offset.size() ? z0_offset[i + 1] : n_z0) - z0_offset[i];
  if (local >= width) return std::nullopt;
  return z0_offset[i] + local;
}

std::pair<std::size_t, std::size_t> SignalLayout::locate_v(std::size_t v) const {
  std::size_t i = locate(v_offset, n_v, v);
  return {i, v - v_offset[i]};
}

std::pair<std::size_t, std::size_t> SignalLayout::locate_z(std::size_t z) const {
  std::size_t i = locate(z_offset, n_z, z);
  return {i, z - z_offset[i]};
}

std::pair<std::size_t, std::size_t> SignalLayout::locate_u(std::size_t u) const {
  std::size_t i = locate(u_offset, n_u, u);
  return {i, u - u_offset[i]};
}

// Lumped plant

LumpedPlant assemble_lumped(const NdsModel& nds, bool diagonalize) {
  nds.validate();
  LumpedPlant plant;
  for (const auto& s : nds.subsystems) plant.parts.push_back(analysis_form(s));
  plant.layout = signal_layout(plant.parts);
  std::vector<RatMatrix> axx, axv, bxu, azx, azv, bzu;
  for (const auto& p : plant.parts) {
    axx.push_back(p.A_xx);
    axv.push_back(p.A_xv);
    bxu.push_back(p.B_xu);
    azx.push_back(p.A_zx);
    azv.push_back(p.A_zv);
    bzu.push_back(p.B_zu);
  }
  plant.A_xx = block_diag(axx);
  plant.A_xv = block_diag(axv);
  plant.B_xu = block_diag(bxu);
  plant.A_zx = block_diag(azx);
  plant.A_zv = block_diag(azv);
  plant.B_zu = block_diag(bzu);

  const auto& L = plant.layout;
  plant.P_pattern = StructuredPattern(L.n_v, L.n_z);
  for (const auto& [pos, id] : nds.scm.entries()) {
    plant.P_pattern.set_free(L.v_of_scm_row(pos.first), L.z_of_scm_col(pos.second), id);
  }
  for (std::size_t i = 0; i < nds.subsystems.size(); ++i) {
    const auto* p = std::get_if<StructuredPattern>(&nds.subsystems[i].param_block);
    if (p == nullptr) continue;
    const std::size_t v_base = L.v_offset[i] + plant.parts[i].m_v0;
    const std::size_t z_base = L.z_offset[i] + plant.parts[i].m_z0;
    for (const auto& [pos, id] : p->entries()) {
      plant.P_pattern.set_free(v_base + pos.first, z_base + pos.second, id);
    }
  }
  if (diagonalize) plant.diag = diagonalize_parameters(plant.P_pattern);
  return plant;
}

std::optional<std::pair<RatMatrix, RatMatrix>> realize(const LumpedPlant& plant,
                                                       const std::map<int, Rational>& values) {
  RatMatrix P = plant.P_pattern.substitute(values);
  auto inv = inverse(RatMatrix::identity(plant.layout.n_z) - plant.A_zv * P);
  if (!inv) return std::nullopt;
  RatMatrix K = plant.A_xv * P * *inv;
  return std::make_pair(plant.A_xx + K * plant.A_zx, plant.B_xu + K * plant.B_zu);
}

// Well-posedness

bool is_well_posed_at(const NdsModel& nds, const std::map<int, Rational>& values) {
  for (const auto& s : nds.subsystems) {
    if (const auto* p = std::get_if<StructuredPattern>(&s.param_block)) {
      if (p->free_count() == 0 && s.m_zp() == 0) continue;
      RatMatrix P = p->substitute(values);
      if (determinant(RatMatrix::identity(s.m_zp()) - s.H * P) == 0) return false;
    } else {
      const auto& P = std::get<RatMatrix>(s.param_block);
      if (determinant(RatMatrix::identity(s.m_zp()) - s.H * P) == 0) return false;
    }
  }
  LumpedPlant plant = assemble_lumped(nds, false);
  RatMatrix P = plant.P_pattern.substitute(values);
  return determinant(RatMatrix::identity(plant.layout.n_z) - plant.A_zv * P) != 0;
}

WellPosedness check_well_posedness(const NdsModel& nds, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  WellPosedness out;
  out.seed = seed;
  for (const auto& s : nds.subsystems) {
    if (!s.has_fixed_block()) continue;
    const auto& P = std::get<RatMatrix>(s.param_block);
    if (determinant(RatMatrix::identity(s.m_zp()) - s.H * P) == 0) {
      out.detail = "a fixed parameter block has det(I - H P) = 0";
      return out;
    }
  }
  // det(I - A_zv P) has degree at most n_z in the parameters.
  const std::size_t n_z = assemble_lumped(nds, false).layout.n_z;
  const long range = static_cast<long>(2 * std::max<std::size_t>(1, n_z));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> dist(1, range);
  const auto ids = parameter_ids(nds);
  for (std::size_t t = 0; t < trials; ++t) {
    std::map<int, Rational> values;
    for (int id : ids) values[id] = Rational(dist(rng));
    ++out.trials_run;
    if (is_well_posed_at(nds, values)) {
      out.well_posed = true;
      out.witness = std::move(values);
      return out;
    }
  }
  // P = 0 gives det(I) = 1, so the determinant is not identically zero.
  std::map<int, Rational> zeros;
  for (int id : ids) zeros[id] = 0;
  if (is_well_posed_at(nds, zeros)) {
    out.well_posed = true;
    out.witness = std::move(zeros);
    out.detail = "random trials vanished; zero parameters are a witness";
    return out;
  }
  out.detail = "det(I - A_zv P) vanished at every trial";
  return out;
}

}  // namespace netctrl
