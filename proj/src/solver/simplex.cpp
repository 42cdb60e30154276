// Copyright 2026 The optsynth Authors
//
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

#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optsynth::detail {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kOptimalityTol = 1e-9;
constexpr double kStepTol = 1e-12;
constexpr int kDegenerateStreak = 50;
constexpr int kRefreshEvery = 100;

// x_original = offset + sign * x[plus] - x[minus]
struct ColumnMap {
  int plus = -1;
  int minus = -1;
  double offset = 0.0;
  double sign = 1.0;
};

class Tableau {
 public:
  Tableau(const LpProblem& lp, const LpOptions& options) : lp_(lp), options_(options) {}

  LpResult run() {
    LpResult result;
    if (!build()) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    if (n_art_ > 0) {
      std::vector<double> phase1(ncols_, 0.0);
      for (int k = first_art_; k < ncols_; ++k) phase1[k] = 1.0;
      const auto status = iterate(phase1);
      result.iterations = iterations_;
      if (status == LpStatus::kLimit) {
        result.status = status;
        return result;
      }
      refresh_values();
      double infeasibility = 0.0;
      for (int k = first_art_; k < ncols_; ++k) infeasibility += std::max(0.0, x_[k]);
      if (infeasibility > options_.feasibility_tol) {
        result.status = LpStatus::kInfeasible;
        return result;
      }
      drive_out_artificials();
    }
    std::vector<double> phase2(ncols_, 0.0);
    std::copy(cost_.begin(), cost_.end(), phase2.begin());
    const auto status = iterate(phase2);
    result.iterations = iterations_;
    if (status != LpStatus::kOptimal) {
      result.status = status;
      return result;
    }
    refresh_values();
    result.status = LpStatus::kOptimal;
    result.x.resize(map_.size());
    result.objective = 0.0;
    for (std::size_t j = 0; j < map_.size(); ++j) {
      const auto& m = map_[j];
      double v = m.offset + m.sign * x_[m.plus];
      if (m.minus >= 0) v -= x_[m.minus];
      result.x[j] = v;
      result.objective += lp_.cost[j] * v;
    }
    return result;
  }

 private:
  double& at(int r, int k) { return a_[static_cast<std::size_t>(r) * ncols_ + k]; }
  double at(int r, int k) const { return a_[static_cast<std::size_t>(r) * ncols_ + k]; }
  double& orig(int r, int k) { return a0_[static_cast<std::size_t>(r) * ncols_ + k]; }

  bool build() {
    const int n = static_cast<int>(lp_.cost.size());
    map_.resize(n);
    int k = 0;
    std::vector<double> col_upper;
    for (int j = 0; j < n; ++j) {
      const double lo = lp_.lower[j];
      const double hi = lp_.upper[j];
      if (lo > hi + options_.feasibility_tol) return false;
      auto& m = map_[j];
      if (std::isfinite(lo)) {
        m = {k++, -1, lo, 1.0};
        col_upper.push_back(std::isfinite(hi) ? std::max(0.0, hi - lo) : kInfinity);
      } else if (std::isfinite(hi)) {
        m = {k++, -1, hi, -1.0};
        col_upper.push_back(kInfinity);
      } else {
        m = {k, k + 1, 0.0, 1.0};
        k += 2;
        col_upper.push_back(kInfinity);
        col_upper.push_back(kInfinity);
      }
    }
    const int n_struct = k;
    m_ = static_cast<int>(lp_.rows.size());

    std::vector<double> slack_sign(m_, 0.0);
    int n_slack = 0;
    for (int r = 0; r < m_; ++r) {
      const auto rel = lp_.rows[r]->relation;
      if (rel != Relation::kEqual) {
        slack_sign[r] = rel == Relation::kLessEqual ? 1.0 : -1.0;
        ++n_slack;
      }
    }
    // Rows whose slack enters with +1 after sign normalization start with
    // the slack basic; the rest need an artificial.
    std::vector<double> rhs(m_);
    std::vector<std::vector<double>> dense(m_, std::vector<double>(n_struct, 0.0));
    std::vector<bool> needs_art(m_, false);
    for (int r = 0; r < m_; ++r) {
      double b = lp_.rows[r]->rhs;
      for (const auto& [j, coef] : lp_.rows[r]->coefs) {
        const auto& m = map_[j];
        b -= coef * m.offset;
        dense[r][m.plus] += coef * m.sign;
        if (m.minus >= 0) dense[r][m.minus] -= coef;
      }
      if (b < 0) {
        b = -b;
        for (auto& v : dense[r]) v = -v;
        slack_sign[r] = -slack_sign[r];
      }
      rhs[r] = b;
      needs_art[r] = slack_sign[r] != 1.0;
      if (needs_art[r]) ++n_art_;
    }

    first_slack_ = n_struct;
    first_art_ = n_struct + n_slack;
    ncols_ = first_art_ + n_art_;
    a_.assign(static_cast<std::size_t>(m_) * ncols_, 0.0);
    b_ = rhs;
    upper_.assign(ncols_, kInfinity);
    std::copy(col_upper.begin(), col_upper.end(), upper_.begin());
    cost_.assign(n_struct, 0.0);
    for (int j = 0; j < n; ++j) {
      cost_[map_[j].plus] += lp_.cost[j] * map_[j].sign;
      if (map_[j].minus >= 0) cost_[map_[j].minus] -= lp_.cost[j];
    }
    x_.assign(ncols_, 0.0);
    at_upper_.assign(ncols_, false);
    row_of_.assign(ncols_, -1);
    basis_.assign(m_, -1);
    init_col_.assign(m_, -1);

    int s = first_slack_;
    int art = first_art_;
    for (int r = 0; r < m_; ++r) {
      for (int c = 0; c < n_struct; ++c) at(r, c) = dense[r][c];
      int slack_col = -1;
      if (slack_sign[r] != 0.0) {
        slack_col = s++;
        at(r, slack_col) = slack_sign[r];
      }
      int basic = slack_col;
      if (needs_art[r]) {
        basic = art++;
        at(r, basic) = 1.0;
      }
      basis_[r] = basic;
      init_col_[r] = basic;
      row_of_[basic] = r;
      x_[basic] = rhs[r];
    }
    a0_ = a_;
    return true;
  }

  void refresh_values() {
    std::vector<double> residual(b_);
    for (int k = 0; k < ncols_; ++k) {
      if (row_of_[k] >= 0 || x_[k] == 0.0) continue;
      for (int r = 0; r < m_; ++r) residual[r] -= orig(r, k) * x_[k];
    }
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      for (int r = 0; r < m_; ++r) v += at(i, init_col_[r]) * residual[r];
      x_[basis_[i]] = v;
    }
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    d_ = cost;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int k = 0; k < ncols_; ++k) d_[k] -= cb * at(i, k);
    }
  }

  void pivot(int r, int j) {
    const double inv = 1.0 / at(r, j);
    double* row_r = &a_[static_cast<std::size_t>(r) * ncols_];
    for (int k = 0; k < ncols_; ++k) row_r[k] *= inv;
    row_r[j] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row_i = &a_[static_cast<std::size_t>(i) * ncols_];
      const double f = row_i[j];
      if (f == 0.0) continue;
      for (int k = 0; k < ncols_; ++k) row_i[k] -= f * row_r[k];
      row_i[j] = 0.0;
    }
    const double f = d_[j];
    if (f != 0.0) {
      for (int k = 0; k < ncols_; ++k) d_[k] -= f * row_r[k];
      d_[j] = 0.0;
    }
    row_of_[basis_[r]] = -1;
    basis_[r] = j;
    row_of_[j] = r;
  }

  LpStatus iterate(const std::vector<double>& cost) {
    compute_reduced_costs(cost);
    const std::size_t cap = 50'000 + 50 * static_cast<std::size_t>(m_ + ncols_);
    int degenerate = 0;
    bool bland = false;
    for (std::size_t it = 0;; ++it) {
      if (it >= cap) return LpStatus::kLimit;
      if (it > 0 && it % kRefreshEvery == 0) {
        refresh_values();
        compute_reduced_costs(cost);
      }
      if (options_.deadline && it % 64 == 0 &&
          std::chrono::steady_clock::now() > *options_.deadline) {
        return LpStatus::kLimit;
      }

      int enter = -1;
      double direction = 0.0;
      double best = 0.0;
      for (int k = 0; k < ncols_; ++k) {
        if (row_of_[k] >= 0 || upper_[k] <= 0.0) continue;
        double score = 0.0;
        double dir = 0.0;
        if (!at_upper_[k] && d_[k] < -kOptimalityTol) {
          score = -d_[k];
          dir = 1.0;
        } else if (at_upper_[k] && d_[k] > kOptimalityTol) {
          score = d_[k];
          dir = -1.0;
        } else {
          continue;
        }
        if (bland) {
          enter = k;
          direction = dir;
          break;
        }
        if (score > best) {
          best = score;
          enter = k;
          direction = dir;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      double theta = upper_[enter];
      int leave_row = -1;
      double leave_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double alpha = at(i, enter) * direction;
        const int b = basis_[i];
        double limit;
        if (alpha > kPivotTol) {
          limit = std::max(0.0, x_[b]) / alpha;
        } else if (alpha < -kPivotTol && std::isfinite(upper_[b])) {
          limit = std::max(0.0, upper_[b] - x_[b]) / -alpha;
        } else {
          continue;
        }
        bool take = limit < theta - kStepTol;
        if (!take && limit <= theta + kStepTol && leave_row >= 0) {
          take = bland ? b < basis_[leave_row] : std::abs(alpha) > std::abs(leave_alpha);
        } else if (!take && limit <= theta + kStepTol && leave_row < 0 && !std::isfinite(theta)) {
          take = true;
        }
        if (take) {
          theta = limit;
          leave_row = i;
          leave_alpha = alpha;
        }
      }
      if (!std::isfinite(theta)) return LpStatus::kUnbounded;
      ++iterations_;

      for (int i = 0; i < m_; ++i) {
        const double alpha = at(i, enter) * direction;
        if (alpha != 0.0) x_[basis_[i]] -= theta * alpha;
      }
      x_[enter] += direction * theta;
      if (leave_row < 0) {
        at_upper_[enter] = !at_upper_[enter];
        x_[enter] = at_upper_[enter] ? upper_[enter] : 0.0;
      } else {
        const int leaving = basis_[leave_row];
        const bool to_upper = leave_alpha < 0.0;
        at_upper_[leaving] = to_upper;
        x_[leaving] = to_upper ? upper_[leaving] : 0.0;
        at_upper_[enter] = false;
        pivot(leave_row, enter);
      }

      if (theta > kStepTol) {
        degenerate = 0;
        bland = false;
      } else if (++degenerate > kDegenerateStreak) {
        bland = true;
      }
    }
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < first_art_) continue;
      int best = -1;
      double best_abs = 1e-7;
      for (int k = 0; k < first_art_; ++k) {
        if (row_of_[k] >= 0) continue;
        if (std::abs(at(r, k)) > best_abs) {
          best_abs = std::abs(at(r, k));
          best = k;
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      const int art = basis_[r];
      pivot(r, best);
      x_[art] = 0.0;
      at_upper_[art] = false;
    }
    for (int k = first_art_; k < ncols_; ++k) {
      upper_[k] = 0.0;
      if (row_of_[k] < 0) x_[k] = 0.0;
    }
    refresh_values();
  }

  const LpProblem& lp_;
  const LpOptions& options_;
  std::vector<ColumnMap> map_;
  int m_ = 0;
  int ncols_ = 0;
  int n_art_ = 0;
  int first_slack_ = 0;
  int first_art_ = 0;
  std::vector<double> a_;
  std::vector<double> a0_;
  std::vector<double> b_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<double> d_;
  std::vector<bool> at_upper_;
  std::vector<int> row_of_;
  std::vector<int> basis_;
  std::vector<int> init_col_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp, const LpOptions& options) {
  return Tableau(lp, options).run();
}

}  // namespace optsynth::detail
