#pragma once

// Embedded Runge-Kutta 5(4) (Dormand-Prince) for complex systems with
// continuous (dense) output.
//
// An arc is the canonical solution from a fixed initial point: its step
// sequence depends only on the initial data, the right-hand side and the
// settings, never on the time at which it is queried. Values between step
// ends come from the dense interpolant, so a cached arc and a freshly
// integrated one return identical bits.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "loewner/errors.hpp"

namespace loewner::ode {

using cplx = std::complex<double>;

struct Settings {
  double rtol = 1e-10;
  // Pure relative control by default: chain limits divide by quantities that
  // decay like e^{-t}, so an absolute floor would swamp late-time values.
  double atol = 0.0;
  double initial_step = 1e-3;
  double max_step = 0.5;
  /// Hard floor on the step size; reaching it is an integration failure.
  double min_step = 1e-14;
  std::size_t max_steps = 20'000'000;
};

template <std::size_t N>
using State = std::array<cplx, N>;

/// Right-hand side dy/dt = f(t, y) in physical time.
template <std::size_t N>
using Rhs = std::function<State<N>(double, const State<N>&)>;

/// Integration policy attached to an arc.
template <std::size_t N>
struct Policy {
  Settings settings;
  /// Smallest mandatory step boundary strictly greater than t, if any.
  std::function<std::optional<double>(double)> next_breakpoint;
  /// States rejected here force a step halving (barrier handling).
  std::function<bool(const State<N>&)> admissible;
  /// Integrate in u = sqrt(t) on [start, sqrt_switch] when set. The first
  /// sample is taken at t = sqrt_floor (in t units) to avoid t = 0.
  std::optional<double> sqrt_switch;
  double sqrt_floor = 1e-24;
};

namespace detail {

// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett, Wanner).
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (std::size_t i = 0; i < N; ++i) {
    cplx acc{};
    for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

template <std::size_t N>
bool finite(const State<N>& y) {
  return std::all_of(y.begin(), y.end(), [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

}  // namespace detail

/// One accepted step with its interpolation coefficients.
template <std::size_t N>
struct Step {
  double t0 = 0.0, t1 = 0.0;  // physical time span
  double v0 = 0.0, h = 0.0;   // integration variable start and step
  bool sqrt_time = false;
  std::array<State<N>, 5> coef{};
  State<N> y1{};

  State<N> eval(double t) const {
    if (t >= t1) return y1;
    const double v = sqrt_time ? std::sqrt(t) : t;
    const double th = std::clamp((v - v0) / h, 0.0, 1.0);
    const double th1 = 1.0 - th;
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = coef[0][i] + th * (coef[1][i] + th1 * (coef[2][i] + th * (coef[3][i] + th1 * coef[4][i])));
    }
    return out;
  }
};

struct ArcStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

template <std::size_t N>
class DenseArc {
 public:
  DenseArc(double t_start, State<N> y_start, Policy<N> policy)
      : policy_(std::move(policy)), t_start_(t_start), y_start_(y_start), t_end_(t_start), y_end_(y_start) {
    h_next_ = policy_.settings.initial_step;
    if (policy_.sqrt_switch && t_start < *policy_.sqrt_switch) {
      sqrt_mode_ = true;
      t_end_ = std::max(t_start, policy_.sqrt_floor);
      h_next_ = std::sqrt(policy_.settings.initial_step);
    }
  }

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  const ArcStats& stats() const { return stats_; }
  std::size_t step_count() const { return steps_.size(); }

  /// Value at t in [t_start, t_end].
  State<N> at(double t) const {
    if (t <= t_start_ || steps_.empty() || t <= steps_.front().t0) return y_start_;
    if (t >= t_end_) return y_end_;
    auto it = std::lower_bound(steps_.begin(), steps_.end(), t,
                               [](const Step<N>& s, double value) { return s.t1 < value; });
    return it->eval(t);
  }

  /// Advance the canonical step sequence until t_end >= t.
  void extend_to(double t, const Rhs<N>& f) {
    while (t_end_ < t) advance(f);
  }

 private:
  void advance(const Rhs<N>& f) {
    using namespace detail;
    const Settings& cfg = policy_.settings;
    if (stats_.accepted + stats_.rejected >= cfg.max_steps) {
      fail(ErrorKind::integration, "step budget exhausted", {{"last_good_time", t_end_}});
    }

    // Segment end in physical time: the next breakpoint or the sqrt switch.
    double seg_end = std::numeric_limits<double>::infinity();
    if (policy_.next_breakpoint) {
      if (auto bp = policy_.next_breakpoint(t_end_)) seg_end = *bp;
    }
    if (sqrt_mode_) seg_end = std::min(seg_end, *policy_.sqrt_switch);

    const bool sq = sqrt_mode_;
    const double v0 = sq ? std::sqrt(t_end_) : t_end_;
    const double v_seg_end = sq ? std::sqrt(seg_end) : seg_end;
    const double hmax = sq ? std::sqrt(cfg.max_step) : cfg.max_step;

    auto rhs_v = [&](double v, const State<N>& y, bool at_segment_end) {
      ++stats_.rhs_evaluations;
      double t = sq ? v * v : v;
      // Stages that sit exactly on a mandatory boundary see the left piece.
      if (at_segment_end) t = std::nextafter(seg_end, -std::numeric_limits<double>::infinity());
      State<N> d = f(t, y);
      if (sq) {
        for (auto& x : d) x *= 2.0 * v;
      }
      return d;
    };

    double h = std::min(h_next_, hmax);
    bool last_reject_barrier = false;
    for (;;) {
      bool hits_end = false;
      if (v0 + h >= v_seg_end) {
        h = v_seg_end - v0;
        hits_end = true;
      }
      const double floor = cfg.min_step * std::max(1.0, std::abs(v0));
      if (!(h > floor)) {
        if (last_reject_barrier) {
          fail(ErrorKind::barrier, "solution left the unit disk", {{"last_good_time", t_end_}});
        }
        fail(ErrorKind::integration, "step size underflow", {{"last_good_time", t_end_}, {"step", h}});
      }

      const State<N>& y0 = y_end_;
      State<N> k1 = fsal_ ? *fsal_ : rhs_v(v0, y0, false);
      if (!fsal_) fsal_ = k1;
      const State<N> k2 = rhs_v(v0 + c2 * h, axpy<N>(y0, h, {{a21, &k1}}), false);
      const State<N> k3 = rhs_v(v0 + c3 * h, axpy<N>(y0, h, {{a31, &k1}, {a32, &k2}}), false);
      const State<N> k4 = rhs_v(v0 + c4 * h, axpy<N>(y0, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), false);
      const State<N> k5 =
          rhs_v(v0 + c5 * h, axpy<N>(y0, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), false);
      const State<N> k6 = rhs_v(v0 + h, axpy<N>(y0, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}),
                                hits_end && std::isfinite(seg_end));
      const State<N> y1 = axpy<N>(y0, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
      const State<N> k7 = rhs_v(v0 + h, y1, hits_end && std::isfinite(seg_end));

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const cplx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double ae = std::abs(e);
        double ratio = 0.0;
        if (ae > 0.0) ratio = sc > 0.0 ? ae / sc : std::numeric_limits<double>::infinity();
        err = std::max(err, ratio);
      }
      if (!std::isfinite(err) || !finite<N>(y1)) err = std::numeric_limits<double>::infinity();

      const bool barrier_ok = !policy_.admissible || !finite<N>(y1) || policy_.admissible(y1);
      if (err <= 1.0 && barrier_ok) {
        Step<N> st;
        st.t0 = t_end_;
        st.v0 = v0;
        st.h = h;
        st.sqrt_time = sq;
        const double v1 = v0 + h;
        st.t1 = hits_end ? seg_end : (sq ? v1 * v1 : v1);
        // Guard against rounding pushing t1 below t0 in the sqrt variable.
        st.t1 = std::max(st.t1, st.t0);
        for (std::size_t i = 0; i < N; ++i) {
          const cplx ydiff = y1[i] - y0[i];
          const cplx bspl = h * k1[i] - ydiff;
          st.coef[0][i] = y0[i];
          st.coef[1][i] = ydiff;
          st.coef[2][i] = bspl;
          st.coef[3][i] = ydiff - h * k7[i] - bspl;
          st.coef[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        st.y1 = y1;
        steps_.push_back(st);
        ++stats_.accepted;
        t_end_ = st.t1;
        y_end_ = y1;

        const double fac = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        h_next_ = std::min(h * fac, hmax);
        fsal_ = k7;
        if (hits_end) {
          fsal_.reset();  // the right-hand side may jump here
          if (sqrt_mode_ && t_end_ >= *policy_.sqrt_switch) {
            sqrt_mode_ = false;
            // Convert the proposal from u-steps to t-steps: dt = 2 u du.
            h_next_ = std::min(2.0 * std::sqrt(t_end_) * h_next_, cfg.max_step);
          }
        }
        return;
      }

      ++stats_.rejected;
      last_reject_barrier = !barrier_ok;
      const double shrink = std::isfinite(err) && barrier_ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.5;
      h *= shrink;
    }
  }

  Policy<N> policy_;
  double t_start_;
  State<N> y_start_;
  double t_end_;
  State<N> y_end_;
  double h_next_;
  bool sqrt_mode_ = false;
  std::optional<State<N>> fsal_;
  std::vector<Step<N>> steps_;
  ArcStats stats_;
};

}  // namespace loewner::ode
