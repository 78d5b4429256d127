#include "netctrl/ratfun.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace netctrl {
namespace {

PolyMatrix mul(const RatMatrix& a, const PolyMatrix& b) {
  PolyMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(r, k) == 0) continue;
      Poly s(a(r, k));
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += s * b(k, c);
    }
  return out;
}

PolyMatrix mul(const PolyMatrix& a, const RatMatrix& b) {
  PolyMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(r, k).is_zero()) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) {
        if (b(k, c) != 0) out(r, c) += a(r, k) * Poly(b(k, c));
      }
    }
  return out;
}

Rational trace(const RatMatrix& m) {
  Rational t = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

Tfm make_tfm(const AugmentedSubsystem& aug, const Resolvent& res, const RatMatrix& right,
             const RatMatrix& affine) {
  Tfm t;
  t.G.numerators = mul(aug.A_zx, mul(res.N, right));
  t.G.denominator = res.d;
  t.G.affine_part = affine;
  t.classes = ClassMatrix(affine.rows(), affine.cols());
  for (std::size_t r = 0; r < affine.rows(); ++r)
    for (std::size_t c = 0; c < affine.cols(); ++c) {
      t.classes(r, c) = classify(t.G.numerators(r, c), affine(r, c));
    }
  return t;
}

Poly characteristic_polynomial(const RatMatrix& A) {
  const std::size_t n = A.rows();
  std::vector<Rational> c(n + 1);
  c[n] = 1;
  RatMatrix M(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    M = A * M;
    for (std::size_t i = 0; i < n; ++i) M(i, i) += c[n - k + 1];
    c[n - k] = -trace(A * M) / static_cast<long>(k);
  }
  return Poly(std::move(c));
}

Complex newton_polish(const Poly& p, const Poly& dp, Complex x) {
  for (int it = 0; it < 8; ++it) {
    Complex fx = p.eval(x);
    Complex dfx = dp.eval(x);
    if (std::abs(dfx) == 0.0) break;
    Complex nx = x - fx / dfx;
    if (std::abs(p.eval(nx)) >= std::abs(fx)) break;
    x = nx;
  }
  return x;
}

RatMatrix block_diag_rows(const std::vector<RatMatrix>& blocks, const std::vector<std::size_t>& col_widths) {
  std::size_t rows = 0, cols = 0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    rows += blocks[j].rows();
    cols += col_widths[j];
  }
  RatMatrix out(rows, cols);
  std::size_t r = 0, c = 0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    out.set_block(r, c, blocks[j]);
    r += blocks[j].rows();
    c += col_widths[j];
  }
  return out;
}

CMatrix block_diag_rows(const std::vector<CMatrix>& blocks, const std::vector<std::size_t>& col_widths) {
  Eigen::Index rows = 0, cols = 0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    rows += blocks[j].rows();
    cols += static_cast<Eigen::Index>(col_widths[j]);
  }
  CMatrix out = CMatrix::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (blocks[j].size() > 0) out.block(r, c, blocks[j].rows(), blocks[j].cols()) = blocks[j];
    r += blocks[j].rows();
    c += static_cast<Eigen::Index>(col_widths[j]);
  }
  return out;
}

}  // namespace

Resolvent resolvent(const RatMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("resolvent of non-square matrix");
  const std::size_t n = A.rows();
  Resolvent res;
  res.N = PolyMatrix(n, n);
  std::vector<Rational> c(n + 1);
  c[n] = 1;
  RatMatrix M(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    M = A * M;
    for (std::size_t i = 0; i < n; ++i) M(i, i) += c[n - k + 1];
    RatMatrix AM = A * M;
    c[n - k] = -trace(AM) / static_cast<long>(k);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t col = 0; col < n; ++col) {
        if (M(r, col) != 0) res.N(r, col) += Poly::monomial(M(r, col), n - k);
      }
  }
  res.d = Poly(std::move(c));
  return res;
}

Rational RatFunMatrix::eval(std::size_t r, std::size_t c, const Rational& lambda) const {
  return numerators(r, c).eval(lambda) / denominator.eval(lambda) + affine_part(r, c);
}

Complex RatFunMatrix::eval(std::size_t r, std::size_t c, Complex lambda) const {
  return numerators(r, c).eval(lambda) / denominator.eval(lambda) + to_double(affine_part(r, c));
}

EntryClass classify(const Poly& strictly_proper_numerator, const Rational& affine) {
  if (!strictly_proper_numerator.is_zero()) return {EntryKind::LambdaDependent, Rational(0)};
  if (affine != 0) return {EntryKind::Constant, affine};
  return {EntryKind::Zero, Rational(0)};
}

SubsystemTfms subsystem_tfms(const AugmentedSubsystem& aug) {
  Resolvent res = resolvent(aug.A_xx);
  return {make_tfm(aug, res, aug.A_xv, aug.A_zv), make_tfm(aug, res, aug.B_xu, aug.B_zu)};
}

std::vector<Eigenvalue> eigenvalues(const RatMatrix& A) {
  Poly q = squarefree_part(characteristic_polynomial(A));
  std::vector<Eigenvalue> out;
  const int m = q.degree();
  if (m <= 0) return out;
  if (m == 1) {
    Rational root = -q.coeff(0);
    out.push_back({Complex(to_double(root), 0.0), root});
    return out;
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
  for (int i = 1; i < m; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < m; ++i) C(i, m - 1) = -to_double(q.coeff(static_cast<std::size_t>(i)));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(C, false);
  Poly dq = q.derivative();

  // Denominators of rational roots divide the leading coefficient of the integer form.
  Integer lcm_den = 1;
  for (const auto& c : q.coeffs()) lcm_den = boost::multiprecision::lcm(lcm_den, denominator(c));
  Integer lead = abs(numerator(q.leading() * Rational(lcm_den)));

  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    Complex x = newton_polish(q, dq, solver.eigenvalues()(i));
    double scale = std::max(1.0, std::abs(x));
    Eigenvalue ev{x, std::nullopt};
    if (std::abs(x.imag()) <= 1e-9 * scale) {
      Rational cand = best_rational(x.real(), lead);
      if (q.eval(cand) == 0) {
        ev.exact = cand;
        ev.value = Complex(to_double(cand), 0.0);
      } else if (std::abs(x.imag()) <= 1e-12 * scale) {
        ev.value = Complex(x.real(), 0.0);
      }
    }
    out.push_back(ev);
  }
  return out;
}

bool same_eigenvalue(Complex a, Complex b, double tol) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

std::vector<Eigenvalue> cluster_eigenvalues(std::vector<Eigenvalue> values, double tol) {
  std::vector<std::vector<Eigenvalue>> clusters;
  for (auto& v : values) {
    bool placed = false;
    for (auto& cl : clusters) {
      for (const auto& member : cl) {
        if (same_eigenvalue(member.value, v.value, tol)) {
          cl.push_back(v);
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (!placed) clusters.push_back({v});
  }
  std::vector<Eigenvalue> out;
  for (const auto& cl : clusters) {
    Eigenvalue rep = cl.front();
    for (const auto& member : cl) {
      if (member.exact) {
        rep = member;
        break;
      }
    }
    out.push_back(rep);
  }
  std::sort(out.begin(), out.end(), [](const Eigenvalue& a, const Eigenvalue& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return out;
}

Spectrum spectrum(const std::vector<AugmentedSubsystem>& parts, double tol) {
  Spectrum s;
  s.tol = tol;
  std::vector<std::vector<Eigenvalue>> per_part;
  std::vector<Eigenvalue> all;
  for (const auto& p : parts) {
    per_part.push_back(eigenvalues(p.A_xx));
    all.insert(all.end(), per_part.back().begin(), per_part.back().end());
  }
  s.values = cluster_eigenvalues(all, tol);
  for (const auto& evs : per_part) {
    std::vector<std::size_t> idx;
    for (const auto& ev : evs) {
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (same_eigenvalue(s.values[i].value, ev.value, tol)) {
          idx.push_back(i);
          break;
        }
      }
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    s.members.push_back(std::move(idx));
  }
  return s;
}

std::vector<Eigenvalue> unstable_modes(const std::vector<Eigenvalue>& values) {
  std::vector<Eigenvalue> out;
  for (const auto& v : values) {
    if (v.value.real() >= -1e-9) out.push_back(v);
  }
  return out;
}

RatMatrix mode_matrix(const AugmentedSubsystem& part, const Rational& lambda) {
  const std::size_t n = part.m_x();
  RatMatrix top = hstack(lambda * RatMatrix::identity(n) - part.A_xx, part.B_xu);
  RatMatrix bottom = hstack(-part.A_zx, part.B_zu);
  return vstack(top, bottom);
}

CMatrix mode_matrix(const AugmentedSubsystem& part, Complex lambda) {
  const auto n = static_cast<Eigen::Index>(part.m_x());
  const auto nz = static_cast<Eigen::Index>(part.m_z());
  const auto nu = static_cast<Eigen::Index>(part.m_u());
  CMatrix out(n + nz, n + nu);
  out.block(0, 0, n, n) = lambda * CMatrix::Identity(n, n) - to_complex(part.A_xx);
  out.block(0, n, n, nu) = to_complex(part.B_xu);
  out.block(n, 0, nz, n) = -to_complex(part.A_zx);
  out.block(n, n, nz, nu) = to_complex(part.B_zu);
  return out;
}

ModeData mode_data(const std::vector<AugmentedSubsystem>& parts, const Eigenvalue& lambda, double rank_tol) {
  ModeData md;
  md.lambda = lambda;
  md.exact = lambda.exact.has_value();
  md.rank_tol = rank_tol;
  std::vector<std::size_t> wx, wz, wv;
  for (const auto& p : parts) {
    wx.push_back(p.m_x());
    wz.push_back(p.m_z());
    wv.push_back(p.m_v());
  }
  if (md.exact) {
    std::vector<RatMatrix> Ts, Zs, Ys;
    for (const auto& p : parts) {
      RatMatrix N = left_nullspace(mode_matrix(p, *lambda.exact));
      RatMatrix T = N.block(0, 0, N.rows(), p.m_x());
      RatMatrix Z = N.block(0, p.m_x(), N.rows(), p.m_z());
      Ys.push_back(T * p.A_xv + Z * p.A_zv);
      Ts.push_back(std::move(T));
      Zs.push_back(std::move(Z));
      md.m_r.push_back(N.rows());
    }
    md.T_exact = block_diag_rows(Ts, wx);
    md.Z_exact = block_diag_rows(Zs, wz);
    md.Y_exact = block_diag_rows(Ys, wv);
    md.T = to_complex(*md.T_exact);
    md.Z = to_complex(*md.Z_exact);
    md.Y = to_complex(*md.Y_exact);
  } else {
    std::vector<CMatrix> Ts, Zs, Ys;
    for (const auto& p : parts) {
      CMatrix N = left_nullspace(mode_matrix(p, lambda.value), rank_tol);
      const auto r = N.rows();
      const auto nx = static_cast<Eigen::Index>(p.m_x());
      const auto nz = static_cast<Eigen::Index>(p.m_z());
      CMatrix T = N.block(0, 0, r, nx);
      CMatrix Z = N.block(0, nx, r, nz);
      Ys.push_back(T * to_complex(p.A_xv) + Z * to_complex(p.A_zv));
      Ts.push_back(std::move(T));
      Zs.push_back(std::move(Z));
      md.m_r.push_back(static_cast<std::size_t>(r));
    }
    md.T = block_diag_rows(Ts, wx);
    md.Z = block_diag_rows(Zs, wz);
    md.Y = block_diag_rows(Ys, wv);
  }
  for (auto r : md.m_r) md.M_r += r;
  return md;
}

std::size_t pbh_deficiency(const RatMatrix& A, const RatMatrix& B, const Eigenvalue& lambda, double rank_tol) {
  const std::size_t n = A.rows();
  if (lambda.exact) {
    return n - rank(hstack(*lambda.exact * RatMatrix::identity(n) - A, B));
  }
  const auto ni = static_cast<Eigen::Index>(n);
  CMatrix M(ni, ni + static_cast<Eigen::Index>(B.cols()));
  M.block(0, 0, ni, ni) = lambda.value * CMatrix::Identity(ni, ni) - to_complex(A);
  M.block(0, ni, ni, static_cast<Eigen::Index>(B.cols())) = to_complex(B);
  return n - numeric_rank(M, rank_tol * std::max(1.0, max_singular_value(M)));
}

}  // namespace netctrl
