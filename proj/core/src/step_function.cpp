#include "bisurv/step_function.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>

namespace bisurv {

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values,
                           double initial_value)
    : breaks_(std::move(breakpoints)), values_(std::move(values)), initial_(initial_value) {
  if (breaks_.size() != values_.size())
    throw std::invalid_argument("StepFunction: breakpoints and values differ in length");
  for (std::size_t k = 1; k < breaks_.size(); ++k)
    if (!(breaks_[k - 1] < breaks_[k]))
      throw std::invalid_argument("StepFunction: breakpoints must be strictly increasing");
}

std::ptrdiff_t StepFunction::index_at(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return static_cast<std::ptrdiff_t>(it - breaks_.begin()) - 1;
}

std::ptrdiff_t StepFunction::index_before(double t) const {
  auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
  return static_cast<std::ptrdiff_t>(it - breaks_.begin()) - 1;
}

double StepFunction::operator()(double t) const {
  const auto k = index_at(t);
  return k < 0 ? initial_ : values_[static_cast<std::size_t>(k)];
}

double StepFunction::left_limit(double t) const {
  const auto k = index_before(t);
  return k < 0 ? initial_ : values_[static_cast<std::size_t>(k)];
}

StepFunction StepFunction::compressed() const {
  std::vector<double> b;
  std::vector<double> v;
  double prev = initial_;
  for (std::size_t k = 0; k < breaks_.size(); ++k) {
    if (values_[k] == prev) continue;
    b.push_back(breaks_[k]);
    v.push_back(values_[k]);
    prev = values_[k];
  }
  return StepFunction(std::move(b), std::move(v), initial_);
}

StepFunction operator*(const StepFunction& a, const StepFunction& b) {
  return combine(a, b, [](double x, double y) { return x * y; });
}

StepFunction operator-(const StepFunction& a, const StepFunction& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}

double integrate(const StepFunction& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const auto br = f.breakpoints();
  const auto v = f.values();
  auto it = std::upper_bound(br.begin(), br.end(), lo);
  std::size_t k = static_cast<std::size_t>(it - br.begin());
  double left = lo;
  double value = f(lo);
  double sum = 0.0;
  while (k < br.size() && br[k] < hi) {
    sum += value * (br[k] - left);
    left = br[k];
    value = v[k];
    ++k;
  }
  sum += value * (hi - left);
  return sum;
}

StepAntiderivative::StepAntiderivative(const StepFunction& f, double origin)
    : initial_slope_(f.initial_value()) {
  const auto br = f.breakpoints();
  const auto v = f.values();
  const double x0 = br.empty() ? origin : std::min(origin, br.front());
  knots_.push_back(x0);
  slopes_.push_back(f(x0));
  cumulative_.push_back(0.0);
  for (std::size_t k = 0; k < br.size(); ++k) {
    if (br[k] <= x0) continue;
    cumulative_.push_back(cumulative_.back() + slopes_.back() * (br[k] - knots_.back()));
    knots_.push_back(br[k]);
    slopes_.push_back(v[k]);
  }
  // shift so that A(origin) = 0
  const double at_origin = (*this)(origin);
  for (double& c : cumulative_) c -= at_origin;
}

double StepAntiderivative::operator()(double t) const {
  if (t < knots_.front()) return cumulative_.front() - initial_slope_ * (knots_.front() - t);
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return cumulative_[k] + slopes_[k] * (t - knots_[k]);
}

namespace {
void put_double(std::ostream& out, double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, res.ptr - buf);
}
}  // namespace

void write_tsv(std::ostream& out, const StepFunction& f) {
  out << "t\tvalue\n";
  out << "0\t";
  put_double(out, f.initial_value());
  out << '\n';
  const auto br = f.breakpoints();
  const auto v = f.values();
  for (std::size_t k = 0; k < br.size(); ++k) {
    put_double(out, br[k]);
    out << '\t';
    put_double(out, v[k]);
    out << '\n';
  }
}

}  // namespace bisurv
