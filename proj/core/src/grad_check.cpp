#include "atagan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "atagan/rng.hpp"

namespace atagan {

namespace {

double evaluate(const std::function<Tensor()>& f) {
  Tensor y = f();
  if (y.numel() != 1) {
    throw ShapeError("grad_check: function must return a single element, got " +
                     shape_str(y.shape()));
  }
  return y.item();
}

std::vector<std::size_t> pick_elements(std::size_t numel, std::size_t max_elements,
                                       Rng& rng) {
  std::vector<std::size_t> idx(numel);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (max_elements == 0 || max_elements >= numel) return idx;
  // Partial Fisher-Yates, then sorted for a stable report order.
  for (std::size_t i = 0; i < max_elements; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(numel - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_elements);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& f, std::span<const Tensor> wrt,
                           const GradCheckOptions& options) {
  struct Saved {
    bool requires_grad;
    std::vector<double> grad;
  };
  std::vector<Saved> saved;
  for (const Tensor& t : wrt) {
    if (!t.is_leaf()) throw std::logic_error("grad_check: tensors must be graph leaves");
    saved.push_back({t.requires_grad(), {t.grad().begin(), t.grad().end()}});
    Tensor(t).set_requires_grad(true).clear_grad();
  }

  {
    Tensor y = f();
    if (y.numel() != 1) {
      throw ShapeError("grad_check: function must return a single element, got " +
                       shape_str(y.shape()));
    }
    y.backward();
  }
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : wrt) {
    const auto g = t.grad_tensor();
    analytic.emplace_back(g.data().begin(), g.data().end());
  }

  GradCheckReport report;
  Rng rng(options.seed);
  for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
    Tensor t = wrt[ti];
    auto values = t.data();
    for (std::size_t j : pick_elements(values.size(), options.max_elements, rng)) {
      const double orig = values[j];
      values[j] = orig + options.eps;
      const double up = evaluate(f);
      values[j] = orig - options.eps;
      const double down = evaluate(f);
      values[j] = orig;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic[ti][j];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
      report.errors.push_back(err);
      ++report.checked;
      const bool worse = report.checked == 1 || std::isnan(err) || err > report.max_error;
      if (worse && !std::isnan(report.max_error)) {
        report.max_error = err;
        std::ostringstream os;
        os << "tensor#" << ti << '[' << j << "]: analytic " << a << " numeric " << numeric;
        report.worst = os.str();
      }
    }
  }
  report.passed = !std::isnan(report.max_error) && report.max_error <= options.tol;

  for (std::size_t ti = 0; ti < wrt.size(); ++ti) {
    Tensor t = wrt[ti];
    t.set_requires_grad(saved[ti].requires_grad);
    t.impl().grad = std::move(saved[ti].grad);
  }
  return report;
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                           double eps, double tol) {
  Tensor leaf = x.detach();
  leaf.set_requires_grad(true);
  const Tensor wrt[] = {leaf};
  return grad_check([&] { return f(leaf); }, wrt, GradCheckOptions{eps, tol, 0, 0});
}

}  // namespace atagan
