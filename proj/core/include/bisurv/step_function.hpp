#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace bisurv {

/// Right-continuous piecewise-constant function of time.
///
/// `values()[k]` holds on `[breakpoints()[k], breakpoints()[k+1])`; before the
/// first breakpoint the function equals `initial_value()`, after the last one
/// it stays at the last value. Breakpoints are strictly increasing.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(double constant) : initial_(constant) {}
  StepFunction(std::vector<double> breakpoints, std::vector<double> values,
               double initial_value);

  double operator()(double t) const;
  /// Value strictly before `t`.
  double left_limit(double t) const;
  double jump(double t) const { return (*this)(t) - left_limit(t); }

  std::span<const double> breakpoints() const { return breaks_; }
  std::span<const double> values() const { return values_; }
  double initial_value() const { return initial_; }
  double final_value() const { return values_.empty() ? initial_ : values_.back(); }
  std::size_t size() const { return breaks_.size(); }

  /// Pointwise map; breakpoints where the mapped value does not change are dropped.
  template <class F>
  StepFunction transform(F f) const {
    std::vector<double> v(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) v[k] = f(values_[k]);
    return StepFunction(breaks_, std::move(v), f(initial_)).compressed();
  }

  StepFunction compressed() const;

 private:
  // index of the largest breakpoint <= t, or -1
  std::ptrdiff_t index_at(double t) const;
  std::ptrdiff_t index_before(double t) const;

  std::vector<double> breaks_;
  std::vector<double> values_;
  double initial_ = 0.0;
};

/// Pointwise `op(a(t), b(t))` on the union of both breakpoint sets.
template <class Op>
StepFunction combine(const StepFunction& a, const StepFunction& b, Op op) {
  const auto ba = a.breakpoints();
  const auto bb = b.breakpoints();
  const auto va = a.values();
  const auto vb = b.values();
  std::vector<double> br;
  std::vector<double> v;
  br.reserve(ba.size() + bb.size());
  v.reserve(ba.size() + bb.size());
  double cur_a = a.initial_value();
  double cur_b = b.initial_value();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ba.size() || j < bb.size()) {
    double t;
    if (j == bb.size() || (i < ba.size() && ba[i] < bb[j])) {
      t = ba[i];
      cur_a = va[i++];
    } else if (i == ba.size() || bb[j] < ba[i]) {
      t = bb[j];
      cur_b = vb[j++];
    } else {
      t = ba[i];
      cur_a = va[i++];
      cur_b = vb[j++];
    }
    br.push_back(t);
    v.push_back(op(cur_a, cur_b));
  }
  return StepFunction(std::move(br), std::move(v), op(a.initial_value(), b.initial_value()));
}

StepFunction operator*(const StepFunction& a, const StepFunction& b);
StepFunction operator-(const StepFunction& a, const StepFunction& b);

/// Exact integral of `f` over `[lo, hi]` (zero when hi <= lo).
double integrate(const StepFunction& f, double lo, double hi);

/// Antiderivative `A(t) = integral of f over [origin, t]`, exact and
/// piecewise linear; evaluation is a binary search.
class StepAntiderivative {
 public:
  StepAntiderivative(const StepFunction& f, double origin);
  double operator()(double t) const;
  double between(double lo, double hi) const { return (*this)(hi) - (*this)(lo); }

 private:
  std::vector<double> cumulative_;  // A at each breakpoint >= origin
  std::vector<double> knots_;
  std::vector<double> slopes_;
  double initial_slope_;
};

/// Two-column TSV (`t`, `value`): one row at t = 0 and one per breakpoint.
void write_tsv(std::ostream& out, const StepFunction& f);

}  // namespace bisurv
