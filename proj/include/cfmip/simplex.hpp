// Copyright 2026 The cfmip Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file simplex.hpp
 * @brief Dense-tableau, bounded-variable primal simplex.
 *
 * Rows are turned into equalities with a slack per inequality. Phase 1
 * minimises the sum of artificial variables started as the basis wherever a
 * slack cannot absorb the initial residual; phase 2 minimises the real
 * objective. Nonbasic columns sit at one of their (finite) bounds, so bound
 * constraints never become rows.
 *
 * Pricing is Dantzig's rule; after a run of degenerate pivots the engine
 * switches to Bland's rule (smallest eligible index, smallest leaving index)
 * until the objective moves again, which rules out cycling.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cfmip/common.hpp"
#include "cfmip/milp.hpp"

namespace cfmip {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
  long iterations = 0;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One simplex run over a fixed constraint matrix.
class SimplexEngine {
public:
  struct Options {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    double phase1_tol = 1e-7;
    long max_iterations = 0;  // 0: automatic
    bool bland_only = false;
  };

  SimplexEngine(const std::vector<std::vector<double>>& A, const std::vector<Sense>& senses,
                const std::vector<double>& b, const std::vector<double>& c, const std::vector<double>& lower,
                const std::vector<double>& upper, Options opt)
      : A_(A), senses_(senses), b_(b), opt_(opt) {
    m_ = b.size();
    n_ = c.size();
    // Column layout: structurals, one slack per inequality row, one artificial per row.
    slack_of_row_.assign(m_, -1);
    art_of_row_.assign(m_, -1);
    ncol_ = n_;
    for (std::size_t i = 0; i < m_; ++i)
      if (senses_[i] != Sense::EQ) slack_of_row_[i] = static_cast<int>(ncol_++);
    for (std::size_t i = 0; i < m_; ++i) art_of_row_[i] = static_cast<int>(ncol_++);

    lo_.assign(ncol_, 0.0);
    up_.assign(ncol_, kInf);
    cost_.assign(ncol_, 0.0);
    is_art_.assign(ncol_, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      up_[j] = upper[j];
      cost_[j] = c[j];
    }
    for (std::size_t i = 0; i < m_; ++i) is_art_[static_cast<std::size_t>(art_of_row_[i])] = 1;
    if (opt_.max_iterations <= 0) opt_.max_iterations = 50 * static_cast<long>(m_ + ncol_) + 10000;
  }

  LpResult run() {
    LpResult res;
    for (std::size_t j = 0; j < n_; ++j)
      if (lo_[j] > up_[j] + opt_.primal_tol) {
        res.status = LpStatus::Infeasible;
        return res;
      }
    init_basis();
    // Phase 1. An infeasible verdict is confirmed on a freshly factorised tableau.
    LpStatus st = iterate(1);
    if (st == LpStatus::IterationLimit) return finish(st);
    if (phase1_infeasibility() > opt_.phase1_tol * (1.0 + bnorm_)) {
      if (!refresh()) throw NumericalError("singular basis after phase 1");
      st = iterate(1);
      if (st == LpStatus::IterationLimit) return finish(st);
      if (phase1_infeasibility() > opt_.phase1_tol * (1.0 + bnorm_)) return finish(LpStatus::Infeasible);
    }
    drive_out_artificials();
    for (std::size_t j = 0; j < ncol_; ++j)
      if (is_art_[j]) {
        up_[j] = 0.0;
        at_upper_[j] = 0;
      }
    // Phase 2. The incrementally updated tableau is trusted only if the point it
    // yields satisfies the original rows; otherwise refactorise and continue.
    st = iterate(2);
    if (st != LpStatus::Optimal) return finish(st);
    if (pivots_since_refresh_ > static_cast<long>(m_) || row_residual() > opt_.primal_tol * (1.0 + bnorm_)) {
      if (!refresh()) throw NumericalError("singular basis after phase 2");
      st = iterate(2);
    }
    return finish(st);
  }

private:
  double value_of_nonbasic(std::size_t j) const { return at_upper_[j] ? up_[j] : lo_[j]; }

  double column_value(std::size_t j) const {
    return pos_[j] >= 0 ? xb_[static_cast<std::size_t>(pos_[j])] : value_of_nonbasic(j);
  }

  double phase1_infeasibility() const {
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (is_art_[static_cast<std::size_t>(basis_[i])]) infeas += std::max(0.0, xb_[i]);
    return infeas;
  }

  /// Largest violation of [A | slacks | artificials] v = b, plus bound violations of basic columns.
  double row_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      double r = -b_[i];
      for (std::size_t j = 0; j < n_; ++j)
        if (A_[i][j] != 0.0) r += A_[i][j] * column_value(j);
      if (slack_of_row_[i] >= 0) r += raw(i, static_cast<std::size_t>(slack_of_row_[i])) * column_value(static_cast<std::size_t>(slack_of_row_[i]));
      r += art_sign_[i] * column_value(static_cast<std::size_t>(art_of_row_[i]));
      worst = std::max(worst, std::abs(r));
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const auto c = static_cast<std::size_t>(basis_[i]);
      worst = std::max({worst, lo_[c] - xb_[i], xb_[i] - up_[c]});
    }
    return worst;
  }
  double& T(std::size_t i, std::size_t j) { return tab_[i * ncol_ + j]; }

  /// Column j of the unreduced system [A | slacks | artificials] in row i.
  double raw(std::size_t i, std::size_t j) const {
    if (j < n_) return A_[i][j];
    if (static_cast<int>(j) == slack_of_row_[i]) return senses_[i] == Sense::LE ? 1.0 : -1.0;
    if (static_cast<int>(j) == art_of_row_[i]) return art_sign_[i];
    return 0.0;
  }

  void init_basis() {
    tab_.assign(m_ * ncol_, 0.0);
    basis_.assign(m_, -1);
    pos_.assign(ncol_, -1);
    at_upper_.assign(ncol_, 0);
    xb_.assign(m_, 0.0);
    art_sign_.assign(m_, 1.0);
    bnorm_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) bnorm_ = std::max(bnorm_, std::abs(b_[i]));

    for (std::size_t i = 0; i < m_; ++i) {
      double r = b_[i];
      for (std::size_t j = 0; j < n_; ++j) r -= A_[i][j] * lo_[j];
      int basic = -1;
      double diag = 1.0;
      if (senses_[i] == Sense::LE && r >= 0) {
        basic = slack_of_row_[i];
        diag = 1.0;
      } else if (senses_[i] == Sense::GE && r <= 0) {
        basic = slack_of_row_[i];
        diag = -1.0;
      } else {
        basic = art_of_row_[i];
        art_sign_[i] = r >= 0 ? 1.0 : -1.0;
        diag = art_sign_[i];
      }
      for (std::size_t j = 0; j < ncol_; ++j) T(i, j) = raw(i, j) / diag;
      basis_[i] = basic;
      pos_[static_cast<std::size_t>(basic)] = static_cast<int>(i);
      xb_[i] = r / diag;
    }
    compute_reduced_costs();
  }

  void compute_reduced_costs() {
    d1_.assign(ncol_, 0.0);
    d2_.assign(ncol_, 0.0);
    for (std::size_t j = 0; j < ncol_; ++j) {
      d1_[j] = is_art_[j] ? 1.0 : 0.0;
      d2_[j] = cost_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const auto bcol = static_cast<std::size_t>(basis_[i]);
      const double c1 = is_art_[bcol] ? 1.0 : 0.0;
      const double c2 = cost_[bcol];
      if (c1 == 0.0 && c2 == 0.0) continue;
      const double* row = &tab_[i * ncol_];
      for (std::size_t j = 0; j < ncol_; ++j) {
        d1_[j] -= c1 * row[j];
        d2_[j] -= c2 * row[j];
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      d1_[static_cast<std::size_t>(basis_[i])] = 0.0;
      d2_[static_cast<std::size_t>(basis_[i])] = 0.0;
    }
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &tab_[r * ncol_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < ncol_; ++j) {
      if (prow[j] == 0.0) continue;
      prow[j] *= inv;
      nz_.push_back(j);
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * ncol_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (auto j : nz_) row[j] -= f * prow[j];
      row[q] = 0.0;
    }
    for (auto* d : {&d1_, &d2_}) {
      const double f = (*d)[q];
      if (f == 0.0) continue;
      for (auto j : nz_) (*d)[j] -= f * prow[j];
      (*d)[q] = 0.0;
    }
    const auto leaving = static_cast<std::size_t>(basis_[r]);
    pos_[leaving] = -1;
    pos_[q] = static_cast<int>(r);
    basis_[r] = static_cast<int>(q);
    ++pivots_since_refresh_;
  }

  bool eligible(std::size_t j, int phase) const {
    if (pos_[j] >= 0) return false;
    if (up_[j] - lo_[j] <= 0.0) return false;
    if (phase == 2 && is_art_[j]) return false;
    return true;
  }

  LpStatus iterate(int phase) {
    const auto& d = phase == 1 ? d1_ : d2_;
    int degenerate_run = 0;
    bool bland = opt_.bland_only;
    for (;;) {
      if (++iterations_ > opt_.max_iterations) return LpStatus::IterationLimit;
      if (pivots_since_refresh_ > static_cast<long>(2 * m_ + 50)) {
        if (!refresh()) throw NumericalError("singular basis during refactorisation");
      }
      // Pricing
      long q = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < ncol_; ++j) {
        if (!eligible(j, phase)) continue;
        const double dj = d[j];
        const bool improving = at_upper_[j] ? dj > opt_.dual_tol : dj < -opt_.dual_tol;
        if (!improving) continue;
        if (bland) {
          q = static_cast<long>(j);
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = static_cast<long>(j);
        }
      }
      if (q < 0) return LpStatus::Optimal;
      const auto qc = static_cast<std::size_t>(q);
      const double dir = at_upper_[qc] ? -1.0 : 1.0;

      // Ratio test
      const double tflip = up_[qc] - lo_[qc];
      long r = -1;
      double tmin = kInf;
      double rpiv = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = T(i, qc) * dir;
        if (std::abs(a) <= opt_.pivot_tol) continue;
        const auto bcol = static_cast<std::size_t>(basis_[i]);
        double t;
        if (a > 0) {
          if (!std::isfinite(lo_[bcol])) continue;
          t = (xb_[i] - lo_[bcol]) / a;
        } else {
          if (!std::isfinite(up_[bcol])) continue;
          t = (up_[bcol] - xb_[i]) / (-a);
        }
        if (t < 0) t = 0;
        bool take = false;
        if (r < 0 || t < tmin - 1e-12) {
          take = true;
        } else if (t <= tmin + 1e-12) {
          take = bland ? basis_[i] < basis_[static_cast<std::size_t>(r)] : std::abs(a) > std::abs(rpiv);
        }
        if (take) {
          r = static_cast<long>(i);
          tmin = t;
          rpiv = a;
        }
      }
      if (r < 0 && !std::isfinite(tflip)) return LpStatus::Unbounded;

      const bool flip = r < 0 || tflip < tmin;
      const double t = flip ? tflip : tmin;
      if (t != 0.0)
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = T(i, qc);
          if (a != 0.0) xb_[i] -= a * dir * t;
        }
      if (flip) {
        at_upper_[qc] = !at_upper_[qc];
      } else {
        const auto rr = static_cast<std::size_t>(r);
        const auto leaving = static_cast<std::size_t>(basis_[rr]);
        const double entering_value = value_of_nonbasic(qc) + dir * t;
        at_upper_[leaving] = rpiv > 0 ? 0 : 1;
        pivot(rr, qc);
        xb_[rr] = entering_value;
        at_upper_[qc] = 0;
      }
      if (t <= 1e-12) {
        if (++degenerate_run > 30) bland = true;
      } else {
        degenerate_run = 0;
        bland = opt_.bland_only;
      }
    }
  }

  /// Rebuilds the tableau from the original columns for the current basis and
  /// recomputes basic values and reduced costs. Returns false if the basis is singular.
  bool refresh() {
    pivots_since_refresh_ = 0;
    std::vector<double> tab(m_ * ncol_);
    std::vector<double> rhs(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < ncol_; ++j) tab[i * ncol_ + j] = raw(i, j);
      rhs[i] = b_[i];
    }
    std::vector<int> cols(basis_.begin(), basis_.end());
    std::vector<char> row_used(m_, 0);
    std::vector<int> new_basis(m_, -1);
    for (int col : cols) {
      const auto c = static_cast<std::size_t>(col);
      std::size_t best = m_;
      double bv = 1e-11;
      for (std::size_t i = 0; i < m_; ++i) {
        if (row_used[i]) continue;
        if (std::abs(tab[i * ncol_ + c]) > bv) {
          bv = std::abs(tab[i * ncol_ + c]);
          best = i;
        }
      }
      if (best == m_) return false;
      row_used[best] = 1;
      new_basis[best] = col;
      double* prow = &tab[best * ncol_];
      const double inv = 1.0 / prow[c];
      nz_.clear();
      for (std::size_t j = 0; j < ncol_; ++j) {
        if (prow[j] == 0.0) continue;
        prow[j] *= inv;
        nz_.push_back(j);
      }
      prow[c] = 1.0;
      rhs[best] *= inv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == best) continue;
        double* row = &tab[i * ncol_];
        const double f = row[c];
        if (f == 0.0) continue;
        for (auto j : nz_) row[j] -= f * prow[j];
        row[c] = 0.0;
        rhs[i] -= f * rhs[best];
      }
    }
    tab_ = std::move(tab);
    basis_ = std::move(new_basis);
    std::fill(pos_.begin(), pos_.end(), -1);
    for (std::size_t i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(basis_[i])] = static_cast<int>(i);
    for (std::size_t i = 0; i < m_; ++i) {
      double v = rhs[i];
      const double* row = &tab_[i * ncol_];
      for (std::size_t j = 0; j < ncol_; ++j) {
        if (pos_[j] >= 0 || row[j] == 0.0) continue;
        v -= row[j] * value_of_nonbasic(j);
      }
      xb_[i] = v;
    }
    compute_reduced_costs();
    return true;
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_art_[static_cast<std::size_t>(basis_[r])]) continue;
      long best = -1;
      double bv = 1e-7;
      for (std::size_t j = 0; j < ncol_; ++j) {
        if (is_art_[j] || pos_[j] >= 0) continue;
        if (std::abs(T(r, j)) > bv) {
          bv = std::abs(T(r, j));
          best = static_cast<long>(j);
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      const auto q = static_cast<std::size_t>(best);
      const double val = value_of_nonbasic(q);
      const auto leaving = static_cast<std::size_t>(basis_[r]);
      // The artificial is at (numerically) zero; the entering column keeps its value.
      const double shift = xb_[r];
      if (shift != 0.0) {
        const double a = T(r, q);
        const double t = shift / a;
        for (std::size_t i = 0; i < m_; ++i)
          if (i != r) xb_[i] -= T(i, q) * t;
        pivot(r, q);
        xb_[r] = val + t;
      } else {
        pivot(r, q);
        xb_[r] = val;
      }
      at_upper_[leaving] = 0;
    }
  }

  LpResult finish(LpStatus st) {
    LpResult res;
    res.status = st;
    res.iterations = iterations_;
    if (st != LpStatus::Optimal) return res;
    res.x.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      double v = pos_[j] >= 0 ? xb_[static_cast<std::size_t>(pos_[j])] : value_of_nonbasic(j);
      v = std::clamp(v, lo_[j], up_[j]);
      res.x[j] = v;
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * res.x[j];
    res.objective = obj;
    return res;
  }

  const std::vector<std::vector<double>>& A_;
  const std::vector<Sense>& senses_;
  const std::vector<double>& b_;
  Options opt_;
  std::size_t m_ = 0, n_ = 0, ncol_ = 0;
  std::vector<int> slack_of_row_, art_of_row_;
  std::vector<double> lo_, up_, cost_;
  std::vector<char> is_art_;
  std::vector<double> art_sign_;
  std::vector<double> tab_;
  std::vector<int> basis_, pos_;
  std::vector<char> at_upper_;
  std::vector<double> xb_, d1_, d2_;
  std::vector<std::size_t> nz_;
  double bnorm_ = 0.0;
  long iterations_ = 0;
  long pivots_since_refresh_ = 0;
};

}  // namespace detail

/// Dense copy of a model's rows, reusable across bound changes (branch-and-bound nodes).
class LpRelaxation {
public:
  explicit LpRelaxation(const MilpModel& model) {
    const std::size_t n = model.num_variables();
    for (const auto& c : model.constraints()) {
      std::vector<double> row(n, 0.0);
      for (const auto& t : c.terms) row[static_cast<std::size_t>(t.var)] += t.coef;
      A_.push_back(std::move(row));
      senses_.push_back(c.sense);
      b_.push_back(c.rhs);
    }
    c_.assign(n, 0.0);
    for (const auto& t : model.objective().terms) c_[static_cast<std::size_t>(t.var)] += t.coef;
    constant_ = model.objective().constant;
    for (const auto& v : model.variables()) {
      lower_.push_back(v.lower);
      upper_.push_back(v.upper);
    }
  }

  std::size_t num_variables() const { return c_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  LpResult solve() const { return solve(lower_, upper_); }

  /// Solves with the given variable bounds. On a numerical failure the solve is
  /// retried once with Bland's rule throughout before the error propagates.
  LpResult solve(const std::vector<double>& lower, const std::vector<double>& upper) const {
    detail::SimplexEngine::Options opt;
    LpResult res;
    try {
      detail::SimplexEngine eng(A_, senses_, b_, c_, lower, upper, opt);
      res = eng.run();
    } catch (const NumericalError&) {
      opt.bland_only = true;
      detail::SimplexEngine eng(A_, senses_, b_, c_, lower, upper, opt);
      res = eng.run();
    }
    if (res.status == LpStatus::Optimal) res.objective += constant_;
    return res;
  }

private:
  std::vector<std::vector<double>> A_;
  std::vector<Sense> senses_;
  std::vector<double> b_;
  std::vector<double> c_;
  double constant_ = 0.0;
  std::vector<double> lower_, upper_;
};

/// LP relaxation of `model` (integrality dropped).
inline LpResult solve_lp(const MilpModel& model) { return LpRelaxation(model).solve(); }

}  // namespace cfmip
